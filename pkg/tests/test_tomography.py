import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density_batch, random_unit_trace_hermitian
from tomocheck.errors import ErrorModelError, MeasurementError, Misalignment, MisalignmentMatrix, y_for_z
from tomocheck.states import I2, Z, bell_state, pure_state, random_density_matrix, state_from_bloch
from tomocheck.tomography import (IncompleteRecordError, RecordFormatError, TomographyRecord,
                                  all_probabilities, all_settings, born_probabilities, distance,
                                  distances_from_frequencies, erroneous_estimate, estimate,
                                  least_squares, least_squares_from_frequencies, project_physical,
                                  record_from_probabilities, sample_record)

ZERO = pure_state([1, 0])


def test_settings_order():
    assert all_settings(2)[:4] == (("X", "X"), ("X", "Y"), ("X", "Z"), ("Y", "X"))
    assert len(all_settings(3)) == 27


def test_born_examples():
    assert np.allclose(born_probabilities(ZERO, ("Z",)), [1, 0])
    assert np.allclose(born_probabilities(ZERO, ("X",)), [0.5, 0.5])
    assert np.allclose(born_probabilities(bell_state(), ("Z", "Z")), [0.5, 0, 0, 0.5])
    with pytest.raises(ValueError):
        born_probabilities(ZERO, ("Z", "Z"))


def test_born_rejects_unphysical_model():
    # rows of norm above one, forced past the constructor, yield negative probabilities
    m = MisalignmentMatrix(np.eye(3))
    object.__setattr__(m, "m", np.diag([1, 1, 3.0]))
    with pytest.raises(ErrorModelError):
        all_probabilities(pure_state([0, 1]), MeasurementError((Misalignment(m),)))


def test_probabilities_normalized(rng):
    for n in (1, 2, 3):
        p = all_probabilities(random_density_matrix(n, rng))
        assert np.all(p >= 0) and np.allclose(p.sum(axis=1), 1, atol=1e-10)


def test_sample_record_examples():
    r = sample_record(ZERO, 1000, seed=3)
    assert list(r.counts[2]) == [1000, 0]
    a = sample_record(bell_state(), 500, seed=7)
    b = sample_record(bell_state(), 500, seed=7)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, sample_record(bell_state(), 500, seed=8).counts)
    with pytest.raises(ValueError):
        sample_record(ZERO, 0)


def test_sample_record_law_of_large_numbers(rng):
    rho = random_density_matrix(2, rng)
    r = sample_record(rho, 10 ** 6, seed=1)
    assert np.max(np.abs(r.frequencies() - all_probabilities(rho))) < 5e-3


def test_least_squares_examples():
    rec = record_from_probabilities(all_probabilities(ZERO), 1000)
    assert np.allclose(least_squares(rec), ZERO)
    rec = TomographyRecord(1, 400, [[200, 200], [200, 200], [400, 0]])
    assert np.allclose(least_squares(rec), 0.5 * (I2 + Z))
    freqs = np.array([[0.5, 0.5], [0.5, 0.5], [1.1, -0.1]])
    rho = least_squares_from_frequencies(freqs)
    assert np.allclose(np.linalg.eigvalsh(rho), [-0.1, 1.1])


def test_least_squares_round_trip(rng):
    for _ in range(200):
        n = int(rng.integers(1, 3))
        rho = random_density_matrix(n, rng)
        assert np.max(np.abs(least_squares_from_frequencies(all_probabilities(rho)) - rho)) < 1e-10


def test_least_squares_hermitian_unit_trace(rng):
    rec = sample_record(random_density_matrix(2, rng), 37, seed=2)
    rho = least_squares(rec)
    assert np.allclose(rho, rho.conj().T) and np.isclose(np.trace(rho), 1)
    with pytest.raises(TypeError):
        least_squares(np.eye(2))


def test_project_examples(rng):
    rho = random_density_matrix(2, rng)
    assert np.allclose(project_physical(rho), rho)
    over = state_from_bloch(np.array([0, 0, 1.2]))
    assert np.allclose(project_physical(over), ZERO)
    assert np.isclose(distance(over, ZERO), np.sqrt(0.02))
    w, v = np.linalg.eigh(over)
    out = project_physical(over)
    assert np.allclose(v.conj().T @ out @ v, np.diag([0, 1]), atol=1e-12)
    with pytest.raises(ValueError):
        project_physical(np.eye(2))


def test_distance_examples():
    assert distance(ZERO, ZERO) == 0
    with pytest.raises(ValueError):
        distance(ZERO, bell_state())
    assert estimate(record_from_probabilities(all_probabilities(bell_state()), 400)).distance < 1e-12


def test_projection_optimality_oracle(rng):
    """The projection beats 10**5 random density matrices for 100 random inputs."""
    for d in (2, 4):
        pool = random_density_batch(rng, d, 10 ** 5)
        for _ in range(50):
            h = random_unit_trace_hermitian(rng, d)
            if np.linalg.eigvalsh(h)[0] >= 0:
                h = random_unit_trace_hermitian(rng, d, spread=1.5)
            best = distance(h, project_physical(h))
            others = np.sqrt(np.sum(np.abs(pool - h) ** 2, axis=(1, 2)))
            assert best <= others.min() + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([2, 4]), st.floats(0.1, 2.0))
def test_projection_properties(seed, d, spread):
    rng = np.random.default_rng(seed)
    h = random_unit_trace_hermitian(rng, d, spread)
    p = project_physical(h)
    assert np.linalg.eigvalsh(p)[0] >= -1e-10
    assert abs(np.trace(p).real - 1) < 1e-10
    assert np.allclose(project_physical(p), p, atol=1e-10)
    any_rho = random_density_batch(rng, d, 1)[0]
    assert distance(h, p) <= distance(h, any_rho) + 1e-12


def test_batched_distances_match(rng):
    freqs = np.stack([sample_record(random_density_matrix(2, rng), 30, seed=s).frequencies() for s in range(20)])
    expect = [distance(r, project_physical(r)) for r in least_squares_from_frequencies(freqs)]
    assert np.allclose(distances_from_frequencies(freqs), expect, atol=1e-9)


def test_erroneous_estimate_y_for_z():
    err = MeasurementError((Misalignment(y_for_z()),))
    rho = erroneous_estimate(pure_state([1, 1j]), err)
    # |+i> has u = (0,1,0); Y is also read out on the Z setting
    assert np.allclose(rho, state_from_bloch(np.array([0, 1, 1.0])))


def test_record_json_round_trip():
    rec = sample_record(bell_state(), 50, seed=4)
    obj = json.loads(json.dumps(rec.to_json()))
    assert obj["settings"][0] == {"axes": ["X", "X"], "counts": rec.counts[0].tolist()}
    back = TomographyRecord.from_json(obj)
    assert np.array_equal(back.counts, rec.counts) and back.metadata == {"seed": 4}


def _record_obj():
    return sample_record(ZERO, 10, seed=0).to_json()


def test_record_json_errors():
    obj = _record_obj()
    obj["settings"].pop()
    with pytest.raises(IncompleteRecordError):
        TomographyRecord.from_json(obj)
    obj = _record_obj()
    obj["settings"][1]["axes"] = ["X"]
    with pytest.raises(RecordFormatError):
        TomographyRecord.from_json(obj)
    obj = _record_obj()
    obj["settings"][0]["counts"] = [5, 4]
    with pytest.raises(RecordFormatError):
        TomographyRecord.from_json(obj)
    obj = _record_obj()
    obj["settings"][0]["counts"] = [11, -1]
    with pytest.raises(RecordFormatError):
        TomographyRecord.from_json(obj)
    with pytest.raises(RecordFormatError):
        TomographyRecord.from_json({"num_qubits": 1})
    with pytest.raises(IncompleteRecordError):
        TomographyRecord(2, 10, np.zeros((3, 4)))
