"""Command-line front end: ``macroreal <experiment> --config run.toml``.

Each experiment expands its configuration into an ordered list of grid
points, evaluates them (optionally across worker processes) and writes one
CSV row per point in grid order.  Exit status: 0 ok, 1 invalid config,
2 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from macroreal.config import EXPERIMENTS, ConfigError, RunConfig
from macroreal.errors import InvalidArgumentError, NonConvergenceError

COLUMNS = {
    "typeone": ["N", "phase", "cutoff", "lhs", "rhs", "lhs_weighted", "violated"],
    "noon": ["N", "moment_re", "moment_im"],
    "svetlichny": ["N", "k", "quantum_value", "hybrid_bound", "violated"],
    "mlr-chsh": [
        "r0", "alpha", "theta", "theta_p", "phi", "phi_p",
        "K_tp", "K_tpp", "K_tpt", "K_tptp", "E", "cutoff_signal", "cutoff_ancilla", "converged",
    ],
    "mlr-sweep": ["r0", "alpha", "delta", "E", "E_delta", "P0_max", "violated_delta"],
}
# columns that are resolution parameters themselves, or gauge-dependent angle
# choices, are reported by verify but do not count towards its verdict
CUTOFF_COLUMNS = {"cutoff", "cutoff_signal", "cutoff_ancilla"}
ANGLE_COLUMNS = {"theta", "theta_p", "phi", "phi_p"}
SUMMARY = {
    "typeone": ("rhs", "violated"),
    "noon": ("moment_re", None),
    "svetlichny": ("quantum_value", "violated"),
    "mlr-chsh": ("E", None),
    "mlr-sweep": ("E", "violated_delta"),
}
CONVERGED_DEFICIT = 1e-6


# --------------------------------------------------------------------------
# Grid-point evaluators (module level so worker processes can import them)
# --------------------------------------------------------------------------


def _typeone_point(N, phase, cutoff, headroom):
    from macroreal.fock import make_number_superposition
    from macroreal.signatures import optimal_phase, type_one_statistic

    phi = optimal_phase(N) if phase == "optimal" else phase
    r = type_one_statistic(make_number_superposition(N, phi, cutoff), N, headroom=headroom)
    return [[N, phi, cutoff, r.lhs, r.rhs, r.lhs_weighted, r.violated]]


def _noon_point(N, cutoff):
    from macroreal.fock import make_noon
    from macroreal.signatures import noon_moment

    m = noon_moment(make_noon(N, cutoff), N)
    return [[N, m.real, m.imag]]


def _svetlichny_point(N, k):
    from macroreal.qubits import svetlichny_report

    r = svetlichny_report(N, k)
    return [[N, k, r.quantum_value, r.hybrid_bound, r.violated]]


def _ancilla(p, alpha):
    from macroreal.mlr.amplified import default_ancilla_cutoff

    if alpha == 0:
        return 0
    if p["ancilla_cutoff"] is not None:
        return p["ancilla_cutoff"]
    return p.get("ancilla_factor", 1) * default_ancilla_cutoff(alpha)


def _mlr_chsh_point(r0, alpha, angles, p):
    from macroreal.mlr.amplified import completeness_deficit, number_difference_povm
    from macroreal.mlr.chsh import chsh_E
    from macroreal.mlr.states import pair_coherent

    state = pair_coherent(r0, p["cutoff"])
    Na = _ancilla(p, alpha)
    r = chsh_E(state, *angles, alpha=alpha, ancilla_cutoff=Na or None)
    deficit = 0.0
    if alpha > 0:
        deficit = max(completeness_deficit(number_difference_povm(alpha, a, state.cutoff, Na)[1]) for a in angles)
    converged = state.tail_mass < 1e-10 and deficit < CONVERGED_DEFICIT
    K = r.K
    return [[r0, alpha, *angles, K["tp"], K["tpp"], K["tpt"], K["tptp"], r.E, state.cutoff, Na, converged]]


def _mlr_sweep_point(r0, alpha, deltas, angles, p):
    from macroreal.mlr.chsh import chsh_E
    from macroreal.mlr.states import pair_coherent

    state = pair_coherent(r0, p["cutoff"])
    Na = _ancilla(p, alpha)
    rows = []
    for delta in deltas:
        r = chsh_E(state, *angles, alpha=alpha, ancilla_cutoff=Na or None, delta=delta)
        rows.append([r0, alpha, delta, r.E, r.E_delta, r.P0_max, r.violated_delta])
    return rows


def _chsh_angles(r0, p):
    from macroreal.mlr.chsh import optimize_chsh
    from macroreal.mlr.states import pair_coherent

    if p["angles"] != "optimize":
        return tuple(p["angles"])
    return optimize_chsh(pair_coherent(r0, p["cutoff"]), p["resolution"]).angles


def build_tasks(cfg: RunConfig):
    """Ordered ``(function, args)`` list; each call returns a list of rows."""
    p = cfg.parameters
    exp = cfg.experiment
    if exp == "typeone":
        tasks = []
        for N, phase in product(p["N"], p["phase"]):
            cutoff = N if p["cutoff"] is None else p["cutoff"]
            headroom = p["headroom"] if p["headroom"] is not None else 2 * N * p.get("headroom_factor", 1)
            tasks.append((_typeone_point, (N, phase, cutoff, headroom)))
        return tasks
    if exp == "noon":
        return [(_noon_point, (N, N if p["cutoff"] is None else p["cutoff"])) for N in p["N"]]
    if exp == "svetlichny":
        ks = p["k"]
        return [(_svetlichny_point, (N, k)) for N in p["N"] for k in (ks if ks else [N // 2])]
    if exp == "mlr-chsh":
        angles = {r0: _chsh_angles(r0, p) for r0 in p["r0"]}
        return [(_mlr_chsh_point, (r0, a, angles[r0], p)) for r0, a in product(p["r0"], p["alpha"])]
    if exp == "mlr-sweep":
        angles = {r0: _chsh_angles(r0, p) for r0 in p["r0"]}
        return [(_mlr_sweep_point, (r0, a, p["delta"], angles[r0], p)) for r0, a in product(p["r0"], p["alpha"])]
    raise ConfigError("experiment", f"unknown experiment {exp!r}")


def _call(task):
    fn, args = task
    return fn(*args)


def execute(cfg: RunConfig, workers: int = 1) -> list[list]:
    tasks = build_tasks(cfg)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_call, tasks))
    else:
        chunks = [_call(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def format_value(column: str, v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        raise NonConvergenceError(f"non-finite value in column {column}", value=v)
    return f"{v:.12g}"


def to_csv(experiment: str, rows: list[list]) -> str:
    cols = COLUMNS[experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([format_value(c, v) for c, v in zip(cols, row)])
    return buf.getvalue()


def summary_line(experiment: str, rows: list[list], path) -> str:
    cols = COLUMNS[experiment]
    metric, flag = SUMMARY[experiment]
    values = [float(r[cols.index(metric)]) for r in rows]
    if flag is None and experiment == "mlr-chsh":
        violated = any(v > 2 for v in values)
    elif flag is None:
        violated = None
    else:
        violated = any(bool(r[cols.index(flag)]) for r in rows)
    text = f"{experiment}: {len(rows)} rows -> {path}; max {metric} = {max(values):.12g}"
    if violated is not None:
        text += f"; violation: {'yes' if violated else 'no'}"
    return text


def verify(cfg: RunConfig, workers: int = 1) -> tuple[dict, bool]:
    """Per-column max absolute drift between the run and its doubled-resolution rerun."""
    base = execute(cfg, workers)
    fine = execute(cfg.doubled(), workers)
    cols = COLUMNS[cfg.experiment]
    if len(base) != len(fine):
        raise NonConvergenceError("doubled run produced a different number of rows")
    drift = {}
    for i, c in enumerate(cols):
        if c in CUTOFF_COLUMNS:
            continue
        a = np.array([float(r[i]) for r in base])
        b = np.array([float(r[i]) for r in fine])
        drift[c] = float(np.max(np.abs(a - b))) if a.size else 0.0
    ok = all(v <= cfg.tolerance for c, v in drift.items() if c not in ANGLE_COLUMNS)
    return drift, ok


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macroreal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*EXPERIMENTS, "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        if name != "verify":
            sp.add_argument("--output", help="CSV path (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
        experiment = None if args.command == "verify" else args.command
        cfg = RunConfig.load(args.config, experiment)
        if args.command == "verify":
            drift, ok = verify(cfg, args.workers)
            for c, v in drift.items():
                print(f"{c:>16s}  {v:.3e}")
            print(f"verify {cfg.experiment}: max drift {max(drift.values(), default=0.0):.3e} "
                  f"(tolerance {cfg.tolerance:g}) -> {'ok' if ok else 'FAILED'}")
            return 0 if ok else 2
        rows = execute(cfg, args.workers)
        text = to_csv(cfg.experiment, rows)
        path = Path(args.output or cfg.output or f"{cfg.experiment}.csv")
        path.write_text(text)
        print(summary_line(cfg.experiment, rows, path))
        return 0
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        diag = ", ".join(f"{k}={v}" for k, v in exc.diagnostics.items())
        print(f"non-convergence: {exc}" + (f" [{diag}]" if diag else ""), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
