"""Command line front end: ``tomocheck <command> ...``.

Angles on the command line are degrees. Every command that draws random
numbers takes ``--seed``; without it the ``TOMOCHECK_SEED`` environment
variable is used, then 0. An optional ``--manifest`` JSON file supplies
defaults for any option (keys are option names with dashes or
underscores); explicit flags win.
"""
import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import ErrorModelError, MeasurementError, WavePlateOffset, error_from_json, error_to_json
from .purity_search import SearchConfig, find_p_min, p_min_single_closed_form, probe_state_search
from .states import (QDotParams, apply_white_noise, bell_state, noise_for_purity, pure_state, purity,
                     qdot_fss_for_purity, qdot_kappa_for_purity, qdot_state, state_from_json,
                     state_to_json)
from .stats import (DETECTED, DataSizeError, detect, infer_num_qubits, read_events_csv, sample_events,
                    subexperiment_counts, subexperiment_distances, summarize_histogram,
                    write_events_csv)
from .sweeps import fidelity_compare, sweep_analytic, sweep_experimental
from .tomography import RecordFormatError, TomographyRecord, sample_record

SEED_ENV = "TOMOCHECK_SEED"
FMT = "%.9g"

EXIT_OK, EXIT_ERROR, EXIT_DETECTED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for "systematic error detected"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return FMT % x
    return "" if x is None else str(x)


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from exc


def _seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from exc


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _angles(start, stop, step):
    if step <= 0 or stop < start:
        raise UsageError("need start <= stop and a positive step")
    return np.arange(start, stop + step * 1e-9, step)


# -- state and error options ---------------------------------------------------------

def _add_state_opts(p, purity_list=False):
    p.add_argument("--state", default="bell", choices=["bell", "qdot", "iy", "file"],
                   help="bell: |phi+>, qdot: quantum-dot model, iy: one-qubit Y eigenstate")
    p.add_argument("--state-file", help="density matrix JSON for --state file")
    p.add_argument("--fss", type=float, help="fine structure splitting in micro-eV")
    p.add_argument("--tau1", type=float, default=150.0, help="exciton lifetime in ps")
    p.add_argument("--tau-ss", type=float, default=1.0, help="spin scattering time in micro-s")
    p.add_argument("--tau-hv", type=float, default=1.0, help="cross dephasing time in micro-s")
    p.add_argument("--kappa", type=float)
    if purity_list:
        p.add_argument("--purities", help="comma-separated target purities")
    else:
        p.add_argument("--purity", type=float, help="target purity")
    p.add_argument("--tune", choices=["fss", "kappa"], default="fss",
                   help="qdot parameter adjusted to hit a target purity")


def _qdot_params(args, target=None):
    base = {"tau1": args.tau1, "tau_ss": args.tau_ss, "tau_hv": args.tau_hv}
    fss = args.fss
    kappa = args.kappa
    if target is not None:
        if args.tune == "fss":
            extra = {} if kappa is None else {"kappa": kappa}
            fss = qdot_fss_for_purity(target, **base, **extra)
        else:
            kappa = qdot_kappa_for_purity(target, fss=fss or 0.0, **base)
    p = dict(base, fss=fss or 0.0)
    if kappa is not None:
        p["kappa"] = kappa
    return QDotParams(**p)


def _make_state(args, target=None):
    """(rho, description) for the state options, optionally at a target purity."""
    if args.state == "qdot":
        params = _qdot_params(args, target)
        return qdot_state(params), {"source": "qdot", **params.__dict__}
    if args.state == "file":
        if not args.state_file:
            raise UsageError("--state file needs --state-file")
        rho = state_from_json(_load_json(args.state_file, "state file"))
        desc = {"source": "file", "path": args.state_file}
    elif args.state == "iy":
        rho, desc = pure_state([1, 1j]), {"source": "iy"}
    else:
        rho, desc = bell_state(), {"source": "bell"}
    if target is not None:
        eps = noise_for_purity(rho, target)
        rho = apply_white_noise(rho, eps)
        desc["white_noise"] = eps
    return rho, desc


def _add_error_opts(p):
    p.add_argument("--error", help="error scenario JSON file")
    p.add_argument("--error-json", help="error scenario as an inline JSON string")
    p.add_argument("--delta-deg", type=float, help="QWP offset on every setting of --error-qubit")
    p.add_argument("--error-qubit", type=int, default=0)


def _make_error(args, n):
    sources = [x for x in (args.error, args.error_json, args.delta_deg) if x is not None]
    if len(sources) > 1:
        raise UsageError("give at most one of --error, --error-json, --delta-deg")
    if args.error is not None:
        return error_from_json(_load_json(args.error, "error scenario"), n)
    if args.error_json is not None:
        try:
            obj = json.loads(args.error_json)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--error-json is not valid JSON: {exc}") from exc
        return error_from_json(obj, n)
    if args.delta_deg is not None:
        if not 0 <= args.error_qubit < n:
            raise UsageError(f"--error-qubit {args.error_qubit} out of range for {n} qubits")
        return MeasurementError.on_qubit(WavePlateOffset(np.radians(args.delta_deg)), args.error_qubit, n)
    return None


def _n_of(rho):
    return int(round(np.log2(rho.shape[0])))


# -- commands --------------------------------------------------------------------

def cmd_simulate(args):
    seed = _seed(args)
    rho, desc = _make_state(args, args.purity)
    n = _n_of(rho)
    error = _make_error(args, n)
    scenario = [] if error is None else error_to_json(error)
    if args.events_out:
        events = sample_events(rho, args.shots, error, seed)
        write_events_csv(args.events_out, events)
    if args.events_out and not args.out:
        return EXIT_OK
    rec = sample_record(rho, args.shots, error, seed)
    rec.metadata.update({"seed": seed, "error": scenario, "state": desc, "tomocheck": __version__})
    _write_json(args.out, rec.to_json())
    return EXIT_OK


def _load_record(path):
    obj = _load_json(path, "counts file")
    return TomographyRecord.from_json(obj)


def cmd_detect(args):
    rec = _load_record(args.counts)
    rep = detect(rec, args.tau, args.threshold)
    out = rep.to_json()
    out["counts_file"] = args.counts
    _write_json(args.out, out)
    return EXIT_DETECTED if rep.verdict == DETECTED else EXIT_OK


def cmd_sweep(args):
    seed = _seed(args)
    angles = _angles(args.start, args.stop, args.step)
    targets = _floats(args.purities) if args.purities else [None]
    rows = []
    for target in targets:
        rho, _ = _make_state(args, target)
        if args.mode == "analytic":
            pts = sweep_analytic(rho, args.variable, np.radians(angles), args.error_qubit)
        else:
            pts = sweep_experimental(rho, args.variable, np.radians(angles), args.n_sub,
                                     args.events_per_sub, seed, args.error_qubit, args.bins)
        p = purity(rho)
        for pt in pts:
            rows.append([p, float(np.degrees(pt.value)), pt.d_mean, pt.d_std, pt.mode, args.mode,
                         "" if args.mode == "analytic" else seed])
    _write_csv(args.out, ["purity", f"{args.variable}_deg", "d_mean", "d_std", "summary", "mode", "seed"],
               rows)
    return EXIT_OK


def _search_config(args):
    kw = {"seed": _seed(args)}
    for name in ("restarts", "max_iters"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    if args.grid:
        lo, hi, step = _floats(args.grid)
        kw["purity_grid"] = np.round(np.arange(lo, hi + step * 1e-9, step), 10)
    return SearchConfig(**kw)


def cmd_purity_min(args):
    n = args.qubits
    error = _make_error(args, n)
    if error is None:
        raise UsageError("purity-min needs an error scenario (--error, --error-json or --delta-deg)")
    cfg = _search_config(args)
    out = {"mode": args.mode, "num_qubits": n, "error": error_to_json(error), "seed": cfg.seed}
    if args.mode == "closed-form":
        if n != 1:
            raise UsageError("closed-form mode is for one qubit (--qubits 1)")
        out["p_min"] = p_min_single_closed_form(error.matrices()[0])
    elif args.mode == "xl-search":
        if n != 2:
            raise UsageError("xl-search mode is for two qubits (--qubits 2)")
        res = find_p_min(error, args.separable, cfg)
        out.update(p_min=res.p_min, binding=None if res.binding is None else f"x{res.binding}",
                   separable_only=bool(args.separable))
        if res.witness is not None:
            out["witness"] = state_to_json(res.witness)
        if args.curve_csv:
            _write_csv(args.curve_csv, ["purity", "x1", "x2", "x3", "separable", "seed"],
                       [[p, *xs, int(args.separable), cfg.seed] for p, *xs in res.curve()])
    else:
        res = probe_state_search(error, n, cfg, restarts=args.restarts)
        out.update(p_min=res.p_min_appr, lambda_min=res.lambda_min, probe=state_to_json(res.probe))
        if args.curve_csv:
            _write_csv(args.curve_csv, ["purity", "min_eigenvalue", "seed"],
                       [[p, v, cfg.seed] for p, v in sorted(res.min_eig_curve.items())])
    _write_json(args.out, out)
    return EXIT_OK


def cmd_analyze(args):
    events = read_events_csv(args.events)
    if len(events) == 0:
        raise DataSizeError("event file is empty")
    n = args.qubits or infer_num_qubits(events)
    counts = subexperiment_counts(events, n, args.n_sub, args.events_per_sub)
    d = subexperiment_distances(counts, args.events_per_sub)
    summary = summarize_histogram(d, args.bins, args.histogram_mode)
    out = summary.to_json()
    out.update(num_qubits=n, n_sub=args.n_sub, events_per_sub=args.events_per_sub, events_file=args.events)
    _write_json(args.out, out)
    if args.per_sub_csv:
        _write_csv(args.per_sub_csv, ["sub_experiment", "distance"], [[i, float(x)] for i, x in enumerate(d)])
    return EXIT_OK


def cmd_fidelity(args):
    if args.reference == "bell":
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    else:
        obj = _load_json(args.reference, "reference")
        psi = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", np.zeros(len(obj["re"]))))
    rows = []
    for path in args.counts:
        rec = _load_record(path)
        if len(psi) != 2 ** rec.num_qubits:
            raise UsageError(f"reference has dimension {len(psi)}, {path} has {rec.num_qubits} qubits")
        f_ls, f_phys = fidelity_compare(rec, psi)
        rows.append([path, f_ls, f_phys, f_ls - f_phys])
    _write_csv(args.out, ["counts_file", "fidelity_ls", "fidelity_phys", "difference"], rows)
    return EXIT_OK


def cmd_qdot_state(args):
    args.state = "qdot"
    rho, desc = _make_state(args, args.purity)
    out = state_to_json(rho)
    out["params"] = {k: v for k, v in desc.items() if k != "source"}
    out["purity"] = purity(rho)
    _write_json(args.out, out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser():
    ap = _Parser(prog="tomocheck", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--manifest", help="JSON file with default option values")
        p.add_argument("--out", "-o", help="output path (default: stdout)")
        return p

    p = add("simulate", cmd_simulate, "simulate a tomography record")
    _add_state_opts(p)
    _add_error_opts(p)
    p.add_argument("--shots", type=int, default=1000, help="events per setting")
    p.add_argument("--events-out", help="also write the raw event list as CSV")
    p.add_argument("--seed", type=int)

    p = add("detect", cmd_detect, "run the distance test on a counts file")
    p.add_argument("counts")
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--threshold", type=float, default=0.9)

    p = add("sweep", cmd_sweep, "distance as a function of a wave-plate offset")
    _add_state_opts(p, purity_list=True)
    p.add_argument("--variable", choices=["delta", "psi_z"], default="delta")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=180.0)
    p.add_argument("--step", type=float, default=10.0)
    p.add_argument("--mode", choices=["analytic", "experimental"], default="analytic")
    p.add_argument("--n-sub", type=int, default=1000)
    p.add_argument("--events-per-sub", type=int, default=400)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--error-qubit", type=int, default=0)
    p.add_argument("--seed", type=int)

    p = add("purity-min", cmd_purity_min, "minimal purity needed to detect an error")
    _add_error_opts(p)
    p.add_argument("--mode", choices=["closed-form", "xl-search", "probe"], default="xl-search")
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--separable", action="store_true")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--grid", help="purity grid as start,stop,step")
    p.add_argument("--curve-csv", help="write the per-purity curve here")
    p.add_argument("--seed", type=int)

    p = add("analyze", cmd_analyze, "sub-experiment histogram from an event CSV")
    p.add_argument("events")
    p.add_argument("--qubits", type=int)
    p.add_argument("--n-sub", type=int, default=1000)
    p.add_argument("--events-per-sub", type=int, default=400)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--histogram-mode", choices=["gaussian-fit", "cumulative-682"])
    p.add_argument("--per-sub-csv")

    p = add("fidelity", cmd_fidelity, "fidelity of both estimators to a reference pure state")
    p.add_argument("counts", nargs="+")
    p.add_argument("--reference", default="bell", help="'bell' or a JSON file with 're'/'im' amplitudes")

    p = add("qdot-state", cmd_qdot_state, "quantum-dot two-photon state as JSON")
    _add_state_opts(p)
    return ap, sub


def _apply_manifest(ap, sub, argv):
    """Re-parse with manifest values as defaults so explicit flags still win."""
    args = ap.parse_args(argv)
    if not getattr(args, "manifest", None):
        return args
    data = _load_json(args.manifest, "manifest")
    if not isinstance(data, dict):
        raise UsageError("manifest must be a JSON object")
    sp = sub.choices[args.command]
    known = {a.dest for a in sp._actions}
    defaults = {}
    for k, v in data.items():
        key = k.replace("-", "_")
        if key in ("command", "manifest"):
            continue
        if key not in known:
            raise UsageError(f"manifest key {k!r} is not an option of '{args.command}'")
        defaults[key] = v
    sp.set_defaults(**defaults)
    return ap.parse_args(argv)


def main(argv=None):
    ap, sub = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        try:
            args = _apply_manifest(ap, sub, argv)
        except SystemExit as exc:      # argparse usage errors, --help, --version
            return exc.code if isinstance(exc.code, int) else EXIT_ERROR
        return args.func(args)
    except (UsageError, RecordFormatError, ErrorModelError, DataSizeError, ValueError, KeyError) as exc:
        print(f"tomocheck {argv[0] if argv else ''}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
