import json

import numpy as np
import pytest

from tomocheck.errors import MeasurementError, WavePlateOffset
from tomocheck.states import QDotParams, bell_state, pure_state, qdot_kappa_for_purity, qdot_state
from tomocheck.stats import (DETECTED, INCONCLUSIVE, DataSizeError, HistogramSummary, bernstein_delta,
                             detect, infer_num_qubits, read_events_csv, sample_events,
                             split_subexperiments, subexperiment_counts, summarize_histogram,
                             tau_for_confidence, write_events_csv)
from tomocheck.sweeps import offset_error, simulate_subexperiments
from tomocheck.tomography import all_probabilities, record_from_probabilities, sample_record


def qwp(deg):
    return MeasurementError.on_qubit(WavePlateOffset(np.radians(deg)), 0, 2)


def test_bernstein_examples():
    d = bernstein_delta(0.25, 2, 9 * 400)
    assert 0.09 <= d <= 0.11
    assert bernstein_delta(1e-6, 2, 3600) == 1.0
    ds = [bernstein_delta(0.25, 2, n) for n in (3600, 10 ** 4, 10 ** 5, 10 ** 6)]
    assert all(b < a for a, b in zip(ds, ds[1:])) and ds[-1] < 1e-100
    with pytest.raises(ValueError):
        bernstein_delta(0.0, 2, 3600)
    with pytest.raises(ValueError):
        bernstein_delta(0.1, 2, 0)


def test_bernstein_monotone_in_tau():
    taus = np.linspace(0.2, 1.0, 50)
    ds = [bernstein_delta(t, 2, 3600) for t in taus]
    assert all(b < a for a, b in zip(ds, ds[1:]))


def test_tau_for_confidence():
    t = tau_for_confidence(0.9, 2, 3600)
    assert abs(bernstein_delta(t, 2, 3600) - 0.1) < 1e-9
    assert 0.24 < t < 0.26
    with pytest.raises(ValueError):
        tau_for_confidence(1.5, 2, 3600)


def test_detect_noiseless_is_inconclusive():
    rec = record_from_probabilities(all_probabilities(bell_state()), 400)
    rep = detect(rec, 0.25)
    assert rep.distance < 1e-12 and rep.verdict == INCONCLUSIVE
    assert rep.shots_total == 3600 and rep.confidence == pytest.approx(1 - rep.delta_sta)
    obj = json.loads(json.dumps(rep.to_json()))
    assert obj["verdict"] == INCONCLUSIVE and obj["n_qubits"] == 2


def test_detect_high_purity_large_offset():
    rho = qdot_state()
    rec = sample_record(rho, 400, qwp(100), seed=11)
    rep = detect(rec, 0.25, 0.9)
    assert rep.verdict == DETECTED and rep.confidence >= 0.9 and rep.distance >= 0.25
    assert detect(rec, 0.25, 0.9) == rep


def test_detect_low_purity_small_offset():
    k = qdot_kappa_for_purity(0.56, fss=13.9, tau1=93.0)
    rho = qdot_state(QDotParams(fss=13.9, tau1=93.0, kappa=k))
    rec = sample_record(rho, 400, qwp(50), seed=5)
    assert detect(rec, 0.25, 0.9).verdict == INCONCLUSIVE


def test_split_full_size():
    rho = bell_state()
    events = sample_events(rho, 1000 * 400, seed=1)
    recs = split_subexperiments(events, 2, 1000, 400)
    assert len(recs) == 1000
    assert all(r.shots_per_setting == 400 for r in recs[:5])


def test_split_is_block_interleaved_partition():
    rng = np.random.default_rng(0)
    n_sub, per = 7, 5
    events = np.column_stack([np.repeat(np.arange(3), n_sub * per), rng.integers(0, 2, 3 * n_sub * per)])
    counts = subexperiment_counts(events, 1, n_sub, per)
    assert counts.sum() == len(events)
    for s in range(3):
        outs = events[events[:, 0] == s, 1]
        for j in range(n_sub):
            assert counts[j, s, 1] == outs[j::n_sub].sum()


def test_split_degenerate_and_deterministic():
    events = sample_events(pure_state([1, 0]), 30, seed=2)
    one = split_subexperiments(events, 1, 1, 30)
    assert len(one) == 1 and one[0].counts[2].tolist() == [30, 0]
    z = np.column_stack([np.repeat(np.arange(3), 12), np.zeros(36, dtype=int)])
    recs = split_subexperiments(z, 1, 4, 3)
    assert all(np.array_equal(r.counts, recs[0].counts) for r in recs)


def test_split_errors():
    events = sample_events(pure_state([1, 0]), 10, seed=2)
    with pytest.raises(DataSizeError):
        split_subexperiments(events, 1, 4, 3)
    with pytest.raises(ValueError):
        subexperiment_counts(np.array([[5, 0]]), 1, 1, 1)


def test_histogram_gaussian():
    vals = np.random.default_rng(3).normal(0.3, 0.05, 1000)
    h = summarize_histogram(vals)
    assert h.mode == "gaussian-fit"
    assert abs(h.mean - 0.3) < 0.03 and abs(h.std - 0.05) < 0.005
    assert h.counts.sum() == 1000 and len(h.bin_edges) == 51


def test_histogram_cumulative():
    rng = np.random.default_rng(4)
    vals = np.concatenate([np.zeros(600), rng.uniform(0, 0.1, 400)])
    h = summarize_histogram(vals)
    assert h.mode == "cumulative-682"
    frac = np.cumsum(h.counts) / 1000
    k = int(np.argmax(frac >= 0.682))
    assert h.mean == h.std == pytest.approx(0.5 * h.bin_edges[k + 1])
    assert summarize_histogram(vals, mode="gaussian-fit").mode == "gaussian-fit"


def test_histogram_errors_and_json():
    with pytest.raises(ValueError):
        summarize_histogram([])
    with pytest.raises(ValueError):
        summarize_histogram([0.1])
    with pytest.raises(ValueError):
        summarize_histogram([0.1, 0.2], mode="median")
    h = summarize_histogram([0.0, 0.0, 0.0])
    assert h.mean == 0 and h.std == 0
    h = summarize_histogram(np.linspace(0, 1, 20), bins=10)
    back = HistogramSummary.from_json(json.loads(json.dumps(h.to_json())))
    assert back.mode == h.mode and np.allclose(back.bin_edges, h.bin_edges) and back.mean == h.mean


@pytest.mark.xfail(reason="the qdot model leaves D near 0.1 at this point, far above the reported 5e-3",
                   strict=True)
def test_histogram_low_purity_sixty_degrees():
    k = qdot_kappa_for_purity(0.56, fss=13.9, tau1=93.0)
    rho = qdot_state(QDotParams(fss=13.9, tau1=93.0, kappa=k))
    h, _ = simulate_subexperiments(rho, offset_error("delta", np.radians(60), 2), 1000, 400, seed=0)
    assert h.mean == pytest.approx(5e-3, abs=5e-3) and h.std == pytest.approx(5e-3, abs=5e-3)


def test_events_csv_round_trip(tmp_path):
    events = sample_events(bell_state(), 20, seed=9)
    path = tmp_path / "events.csv"
    write_events_csv(path, events)
    assert path.read_text().splitlines()[0] == "setting_index,outcome_index"
    back = read_events_csv(path)
    assert np.array_equal(back, events) and infer_num_qubits(back) == 2
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_events_csv(tmp_path / "bad.csv")


def test_sample_events_deterministic():
    a = sample_events(bell_state(), 50, qwp(30), seed=[1, 2])
    b = sample_events(bell_state(), 50, qwp(30), seed=[1, 2])
    assert np.array_equal(a, b) and a.shape == (9 * 50, 2)
