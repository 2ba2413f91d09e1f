"""Experiment presets and the ``dgsc`` command-line runner."""

from __future__ import annotations

import argparse
import csv
import enum
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dgsc.dg_core import Mesh, RunConfig, run
from dgsc.diagnostics import (
    analyse_decay,
    convergence_rates,
    downwind_error,
    moment_error,
    period_difference,
    radau_point_error,
)
from dgsc.errors import DgscError, SolverAbort
from dgsc.fourier import operator_residual, spectrum
from dgsc.pade import build_fg, mu_min, nonphysical_roots, pade_defect
from dgsc.projections import parse_initial, project

log = logging.getLogger("dgsc")

SWEEP_N = (16, 32, 64, 128, 256)


class ExperimentKind(enum.Enum):
    SINGLE_RUN = "single_run"
    CONVERGENCE_SWEEP = "convergence_sweep"
    DECAY_CURVE = "decay_curve"
    SPECTRUM = "spectrum"
    PADE_REPORT = "pade_report"


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    kind: ExperimentKind
    base: RunConfig
    n_list: tuple[int, ...] = ()
    projections: tuple[str, ...] = ("l2",)
    measured: tuple[str, ...] = ("downwind", "cell_avg")

    def __post_init__(self):
        if self.kind is ExperimentKind.CONVERGENCE_SWEEP:
            ns = self.n_list
            if not ns or any(b != 2 * a for a, b in zip(ns, ns[1:])):
                raise ValueError(f"sweep N-list must double at every step, got {ns}")
        for q in self.measured:
            _check_quantity(q)


def _check_quantity(name: str):
    if name in ("downwind", "cell_avg", "period1", "period2"):
        return
    for prefix in ("moment", "radau"):
        if name.startswith(prefix) and name[len(prefix) :].isdigit():
            return
    raise ValueError(f"unknown measured quantity {name!r}")


def _table(name, p, t_final, measured=("downwind", "cell_avg")):
    return ExperimentSpec(
        name=name,
        kind=ExperimentKind.CONVERGENCE_SWEEP,
        base=RunConfig(p=p, n_cells=SWEEP_N[0], t_final=t_final, initial="sine:4"),
        n_list=SWEEP_N,
        projections=("l2", "left_radau"),
        measured=measured,
    )


def _period_table(name, p):
    # sin(pi x): one wavelength on [-1, 1)
    return ExperimentSpec(
        name=name,
        kind=ExperimentKind.CONVERGENCE_SWEEP,
        base=RunConfig(p=p, n_cells=SWEEP_N[0], t_final=4.0, initial="sine:1"),
        n_list=SWEEP_N[:-1],
        projections=("l2",),
        measured=("period1", "period2"),
    )


def _figure(name, p, t_final):
    return ExperimentSpec(
        name=name,
        kind=ExperimentKind.DECAY_CURVE,
        base=RunConfig(p=p, n_cells=64, cfl_numerator=0.05, t_final=t_final, initial="sine:4"),
        measured=("downwind",),
    )


PRESETS = {
    "table1": lambda: _table("table1", 1, "1h"),
    "table2": lambda: _table("table2", 2, "4h"),
    "table3": lambda: _table("table3", 3, "35h"),
    "table4": lambda: _period_table("table4", 1),
    "table5": lambda: _period_table("table5", 2),
    "table6": lambda: _table("table6", 2, "4h", ("moment1", "moment2")),
    "figure1_p1": lambda: _figure("figure1_p1", 1, "2h"),
    "figure1_p2": lambda: _figure("figure1_p2", 2, "16h"),
    "figure1_p3": lambda: _figure("figure1_p3", 3, "150h"),
    "equidistant_p2": lambda: replace(_table("equidistant_p2", 2, "4h"), projections=("equidistant",)),
}


def preset(name: str) -> ExperimentSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


_RUN_KEYS = {"p", "n_cells", "domain", "a", "cfl_numerator", "t_final", "projection", "initial"}
_EXPERIMENT_KEYS = {"name", "kind", "n_list", "projections", "measured"}


def load_config(path: str | Path) -> ExperimentSpec:
    """Read a TOML experiment file.

    A top-level ``preset`` key selects a base spec; ``[experiment]`` and
    ``[run]`` tables override its fields.
    """
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    unknown = set(data) - {"preset", "experiment", "run"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    run_over = dict(data.get("run", {}))
    exp_over = dict(data.get("experiment", {}))
    for table, allowed in ((run_over, _RUN_KEYS), (exp_over, _EXPERIMENT_KEYS)):
        bad = set(table) - allowed
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
    if "domain" in run_over:
        run_over["domain"] = tuple(float(v) for v in run_over["domain"])

    if "preset" in data:
        spec = preset(data["preset"])
    else:
        if "p" not in run_over:
            raise ValueError("config without a preset must set run.p")
        spec = ExperimentSpec(
            name=Path(path).stem,
            kind=ExperimentKind.SINGLE_RUN,
            base=RunConfig(p=run_over["p"], n_cells=run_over.get("n_cells", 16)),
        )
    base = replace(spec.base, **run_over)
    fields = {"base": base}
    if "name" in exp_over:
        fields["name"] = exp_over["name"]
    if "kind" in exp_over:
        fields["kind"] = ExperimentKind(exp_over["kind"])
    for key in ("n_list", "projections", "measured"):
        if key in exp_over:
            fields[key] = tuple(exp_over[key])
    if "projection" in run_over and "projections" not in exp_over:
        fields["projections"] = (run_over["projection"],)
    return replace(spec, **fields)


# -- measurement ------------------------------------------------------------


def measure_point(base: RunConfig, n: int, projection: str, measured: Sequence[str]) -> dict:
    """Run one sweep point and evaluate the requested quantities."""
    cfg = replace(base, n_cells=n, projection=projection)
    mesh = cfg.mesh()
    ic = parse_initial(cfg.initial, cfg.domain)
    state0 = project(projection, ic, mesh, cfg.p)
    values: dict[str, float] = {}
    t = 0.0
    if any(q.startswith("period") for q in measured):
        period = replace(cfg, t_final=mesh.length / cfg.a)
        s1 = run(period, state0, mesh)
        s2 = run(period, s1, mesh)
        values["period1"] = period_difference(state0, s1, mesh)
        values["period2"] = period_difference(s1, s2, mesh)
        t = s2.time
    rest = [q for q in measured if not q.startswith("period")]
    if rest:
        state = run(cfg, state0, mesh)
        t = state.time
        radau = None
        for q in rest:
            if q == "downwind":
                values[q] = downwind_error(state, ic, mesh, cfg.a)
            elif q == "cell_avg":
                values[q] = moment_error(state, ic, mesh, 0, cfg.a)
            elif q.startswith("moment"):
                values[q] = moment_error(state, ic, mesh, int(q[6:]), cfg.a)
            elif q.startswith("radau"):
                radau = radau_point_error(state, ic, mesh, cfg.a) if radau is None else radau
                values[q] = float(radau[int(q[5:])])
    return {"projection": projection, "p": cfg.p, "N": n, "t": t, **values}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(v)
    if isinstance(v, float):
        return f"{v:.5e}"
    return str(v)


def sweep_rows(spec: ExperimentSpec, jobs: int = 1) -> list[dict]:
    """Evaluate every (projection, N) point and append per-projection rates."""
    ns = spec.n_list if spec.kind is ExperimentKind.CONVERGENCE_SWEEP else (spec.base.n_cells,)
    tasks = [(spec.base, n, proj, spec.measured) for proj in spec.projections for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(measure_point, *zip(*tasks)))
    else:
        rows = [measure_point(*task) for task in tasks]
    for proj in spec.projections:
        group = [r for r in rows if r["projection"] == proj]
        for q in spec.measured:
            rates = convergence_rates([(r["N"], r[q]) for r in group]) if len(group) > 1 else []
            for r, rate in zip(group, [None, *rates]):
                r[f"rate_{q}"] = rate
    return rows


def write_csv(path: Path, header: Sequence[str], rows: Sequence[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(r.get(h)) for h in header])


def decay_rows(spec: ExperimentSpec) -> list[dict]:
    cfg = spec.base
    mesh = cfg.mesh()
    ic = parse_initial(cfg.initial, cfg.domain)
    h = float(mesh.h[0])
    rows = []

    def record(step, state):
        rows.append({"step": step, "t": state.time, "t_over_h": state.time / h,
                     "downwind": downwind_error(state, ic, mesh, cfg.a)})

    run(cfg, project(cfg.projection, ic, mesh, cfg.p), mesh, callback=record)
    return rows


GNUPLOT_TEMPLATE = """\
# semi-log decay of the downwind-point L1 error
set datafile separator ","
set logscale y
set format y "%.0e"
set xlabel "t / h"
set ylabel "downwind L1 error"
set key top right
set terminal pngcairo size 800,600
set output "{name}.png"
plot "{name}.csv" using 3:4 with lines lw 2 title "p={p}, N={n}, CFL={cfl}/(2p+1)"
"""


def spectrum_rows(p: int, n_cells: int, a: float = 1.0, domain=(-1.0, 1.0)) -> list[dict]:
    mesh = Mesh.uniform(n_cells, *domain)
    rows = []
    for fs in spectrum(p, mesh):
        res = operator_residual(p, mesh, a, fs)
        for i, omega in enumerate(fs.roots):
            rows.append({"n": fs.n, "root": i, "re": float(omega.real), "im": float(omega.imag),
                         "physical": int(i == fs.physical_index), "residual": float(res[i])})
    return rows


def pade_rows(p: int) -> list[dict]:
    fg = build_fg(p)
    rows = [{"quantity": "g", "index": k, "re": float(c), "im": 0.0} for k, c in enumerate(fg.g.coeffs)]
    rows += [{"quantity": "f1", "index": k, "re": float(c), "im": 0.0} for k, c in enumerate(fg.f_downwind)]
    rows += [{"quantity": "mu", "index": k, "re": float(r.real), "im": float(r.imag)}
             for k, r in enumerate(nonphysical_roots(p))]
    rows += [{"quantity": "defect", "index": k, "re": float(c), "im": 0.0}
             for k, c in enumerate(pade_defect(p, 2 * p + 4))]
    return rows


def execute(spec: ExperimentSpec, out_dir: str | Path = ".", jobs: int = 1) -> int:
    """Run an experiment and write ``<name>.csv`` (plus ``<name>.gp`` for decay curves)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if spec.kind in (ExperimentKind.CONVERGENCE_SWEEP, ExperimentKind.SINGLE_RUN):
            rows = sweep_rows(spec, jobs)
            header = ["projection", "p", "N", "t", *spec.measured, *(f"rate_{q}" for q in spec.measured)]
            write_csv(out / f"{spec.name}.csv", header, rows)
        elif spec.kind is ExperimentKind.DECAY_CURVE:
            rows = decay_rows(spec)
            write_csv(out / f"{spec.name}.csv", ["step", "t", "t_over_h", "downwind"], rows)
            (out / f"{spec.name}.gp").write_text(GNUPLOT_TEMPLATE.format(
                name=spec.name, p=spec.base.p, n=spec.base.n_cells, cfl=spec.base.cfl_numerator))
        elif spec.kind is ExperimentKind.SPECTRUM:
            rows = spectrum_rows(spec.base.p, spec.base.n_cells, spec.base.a, spec.base.domain)
            write_csv(out / f"{spec.name}.csv", ["n", "root", "re", "im", "physical", "residual"], rows)
        else:
            write_csv(out / f"{spec.name}.csv", ["quantity", "index", "re", "im"], pade_rows(spec.base.p))
    except SolverAbort as exc:
        log.error("solver aborted: %s", exc)
        return 2
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return 3
    return 0


# -- command line -----------------------------------------------------------


def _jobs(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("DGSC_JOBS")
    return max(1, int(env)) if env else 1


def _spec_from_args(args, default_kind: ExperimentKind) -> ExperimentSpec:
    if args.preset and args.config:
        raise ValueError("give either --preset or --config, not both")
    if args.preset:
        spec = preset(args.preset)
    elif args.config:
        spec = load_config(args.config)
    else:
        if args.p is None:
            raise ValueError("need --preset, --config or --p")
        spec = ExperimentSpec(name=default_kind.value, kind=default_kind,
                              base=RunConfig(p=args.p, n_cells=args.n or 16))
    if args.p is not None:
        spec = replace(spec, base=replace(spec.base, p=args.p))
    if args.n is not None:
        spec = replace(spec, base=replace(spec.base, n_cells=args.n))
    return spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgsc", description="DG superconvergence experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run a preset or configured experiment"),
        ("decay", "record a downwind-error decay curve"),
        ("spectrum", "numerical frequencies for every Fourier index"),
        ("pade", "print g, f(., 1), non-physical roots and Pade defect"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
        sp.add_argument("--config", help="TOML experiment file")
        sp.add_argument("--out", default=None, help="output directory (default: current directory)")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes (default $DGSC_JOBS or 1)")
        sp.add_argument("--p", type=int, default=None, help="polynomial degree")
        sp.add_argument("--n", type=int, default=None, help="number of cells")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    default_kind = {
        "run": ExperimentKind.SINGLE_RUN,
        "decay": ExperimentKind.DECAY_CURVE,
        "spectrum": ExperimentKind.SPECTRUM,
        "pade": ExperimentKind.PADE_REPORT,
    }[args.command]
    try:
        spec = _spec_from_args(args, default_kind)
        if args.command in ("spectrum", "pade", "decay") and spec.kind is not default_kind:
            spec = replace(spec, kind=default_kind)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"dgsc: {exc}", file=sys.stderr)
        return 1

    if args.command == "pade":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["quantity", "index", "re", "im"])
        for r in pade_rows(spec.base.p):
            writer.writerow([r["quantity"], r["index"], _fmt(r["re"]), _fmt(r["im"])])
        sys.stdout.write(buf.getvalue())
        if args.out is None:
            return 0

    out_dir = Path(args.out or ".")
    try:
        status = execute(spec, out_dir, _jobs(args.jobs))
    except DgscError as exc:
        print(f"dgsc: {exc}", file=sys.stderr)
        return 1
    if status == 0 and spec.kind is ExperimentKind.DECAY_CURVE:
        _report_decay(spec, out_dir)
    elif status == 0:
        log.info("wrote %s", out_dir / f"{spec.name}.csv")
    return status


def _report_decay(spec: ExperimentSpec, out: Path):
    with open(out / f"{spec.name}.csv") as fh:
        data = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in data])
    e = np.array([float(r["downwind"]) for r in data])
    res = analyse_decay(t, e)
    h = spec.base.mesh().length / spec.base.n_cells
    predicted = -spec.base.a * mu_min(spec.base.p) / h
    log.info("wrote %s and %s.gp", out / f"{spec.name}.csv", spec.name)
    log.info("decay slope %.4g (predicted %.4g), plateau %.3e", res.slope, predicted, res.plateau)


if __name__ == "__main__":
    sys.exit(main())
