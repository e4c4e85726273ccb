"""Command-line experiment runner.

    cauchylab run <experiment> [--domain disk|square|annulus] [--r R_IN]
        [--R R_OUT] [--side S] [--levels 0,1,2] [--out PATH]
        [--format json|csv|text]

Each experiment computes a handful of named quantities, compares some of
them with reference values, and exits with 0 when every comparison passes,
2 when any fails and 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import __version__
from .cauchy import cauchy_general, cauchy_radial, eigentest, exterior_cauchy, multipole_moments
from .domains import DomainSpec, build_mesh, inner_product, l2_norm
from .eigen import ground_state, v0_field
from .fourier import counterexample, j1_squared_integral
from .potential import schur_bound, sharp_constant
from .specfun import bessel_j0_first_zero

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentReport",
    "Reference",
    "emit",
    "main",
    "run",
]

SCHEMA = 1
FORMATS = ("json", "csv", "text")
EXPERIMENTS = ("counterexample", "sharp-constant", "eigentest", "annulus-identity", "multipole", "schur")
COMPARISONS = ("abs", "rel", "gt", "lt", "ge", "le")

J01_QUOTED = 2.4048255577
SHARP_QUOTED = 0.852

DEFAULT_TOLERANCES = {
    "lhs": 1e-5,
    "rhs": 1e-9,
    "bessel_integral": 1e-6,
    "sharp_value": 5e-3,
    "radial_agreement": 5e-3,
    "lower_bound": 1e-4,
    "schur_disk": 1e-6,
    "sandwich": 1e-9,
    "disk_ratio": 1e-4,
    "h_over_w": 1e-8,
    "residual": 1e-6,
    "corner_oracle": 1e-6,
    "pointwise": 1e-8,
    "orthogonality": 1e-10,
    "norm_inverse_z": 1e-10,
    "energy": 1e-5,
    "laurent": 1e-10,
    "slope": 0.1,
}

DEFAULT_LEVELS = {
    "counterexample": (),
    "sharp-constant": (0, 1, 2),
    "eigentest": (3,),
    "annulus-identity": (3,),
    "multipole": (2,),
    "schur": (),
}


class ExperimentError(RuntimeError):
    """A numerical stage failed; the message names the stage."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    domain: DomainSpec = field(default_factory=DomainSpec.disk)
    levels: Tuple[int, ...] = ()
    tolerances: Dict[str, float] = field(default_factory=dict)
    output_path: Optional[str] = None
    format: str = "text"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.experiment == "counterexample" and self.domain != DomainSpec.disk(1.0):
            raise ValueError("counterexample runs on the unit disk only")
        if self.experiment == "annulus-identity" and self.domain.kind != "annulus":
            raise ValueError("annulus-identity needs an annulus domain")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        if any(lv < 0 for lv in self.levels):
            raise ValueError("levels must be non-negative")

    def tol(self, name):
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    @property
    def effective_levels(self):
        return tuple(self.levels) or DEFAULT_LEVELS[self.experiment]

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "domain": self.domain.to_dict(),
            "levels": list(self.effective_levels),
            "tolerances": {k: self.tol(k) for k in sorted(DEFAULT_TOLERANCES)},
            "output_path": self.output_path,
            "format": self.format,
        }


@dataclass(frozen=True)
class Reference:
    """Target for a computed quantity.

    ``comparison`` is ``abs`` or ``rel`` (agreement within ``tolerance``),
    or ``gt``/``lt``/``ge``/``le`` (``ge``/``le`` allow ``tolerance`` slack).
    """

    anchor: str
    target: float
    tolerance: float
    comparison: str = "abs"

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.comparison!r}")
        object.__setattr__(self, "target", float(self.target))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    def check(self, value):
        t, tol = self.target, self.tolerance
        if self.comparison == "abs":
            return abs(value - t) <= tol
        if self.comparison == "rel":
            return abs(value - t) <= tol * abs(t)
        if self.comparison == "gt":
            return value > t
        if self.comparison == "lt":
            return value < t
        if self.comparison == "ge":
            return value >= t - tol
        return value <= t + tol

    def to_dict(self):
        return {"anchor": self.anchor, "target": self.target, "tolerance": self.tolerance, "comparison": self.comparison}


@dataclass
class ExperimentReport:
    config: dict
    computed: Dict[str, float] = field(default_factory=dict)
    references: Dict[str, Reference] = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self):
        return all(v == "pass" for v in self.verdicts.values())

    def to_dict(self, include_timing=False):
        out = {
            "schema": SCHEMA,
            "version": __version__,
            "config": self.config,
            "computed": dict(self.computed),
            "references": {k: r.to_dict() for k, r in self.references.items()},
            "verdicts": dict(self.verdicts),
        }
        if include_timing:
            out["timing"] = dict(self.timing)
        return out

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        refs = {k: Reference(**r) for k, r in data.get("references", {}).items()}
        return cls(
            config=data["config"],
            computed=dict(data.get("computed", {})),
            references=refs,
            verdicts=dict(data.get("verdicts", {})),
            timing=dict(data.get("timing", {})),
        )


class _Recorder:
    def __init__(self, cfg):
        self.cfg = cfg
        self.computed = {}
        self.references = {}
        self.timing = {}

    def put(self, name, value, ref=None):
        self.computed[name] = float(value)
        if ref is not None:
            self.references[name] = ref

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        except (ArithmeticError, ValueError, RuntimeError, MemoryError) as exc:
            raise ExperimentError(f"stage {name!r} failed: {exc}") from exc
        finally:
            self.timing[name] = time.perf_counter() - t0


def _is_unit_disk(spec):
    return spec == DomainSpec.disk(1.0)


def _exp_counterexample(rec):
    tol = rec.cfg.tol
    with rec.stage("weighted form"):
        rep = counterexample()
    with rec.stage("bessel integral"):
        bint = j1_squared_integral()
    rec.put("lhs", rep.lhs, Reference("weighted form of the unit-disk indicator", 8.0 / 3.0, tol("lhs")))
    rec.put("rhs", rep.rhs, Reference("pi / j01 with the quoted j01", math.pi / J01_QUOTED, tol("rhs")))
    rec.put("j01", rep.j01)
    rec.put("lhs_error_estimate", rep.lhs_error)
    rec.put("counterexample", rep.lhs, Reference("lhs exceeds rhs", rep.rhs, 0.0, "gt"))
    rec.put(
        "bessel_integral",
        bint,
        Reference("int_0^inf J1(r)^2 / r^2 dr", 4.0 / (3.0 * math.pi), tol("bessel_integral")),
    )


def _exp_sharp_constant(rec):
    cfg, tol = rec.cfg, rec.cfg.tol
    levels = sorted(cfg.effective_levels)
    if len(levels) < 3 or levels != list(range(levels[0], levels[-1] + 1)):
        raise ValueError("sharp-constant needs at least three consecutive levels")
    with rec.stage("nystrom"):
        rep = sharp_constant(cfg.domain, max_level=levels[-1], min_level=levels[0])
    for level, n, lam, c in rep.per_level:
        rec.put(f"c_level{level}", c)
        rec.put(f"nodes_level{level}", n)
    if rep.fitted_order is not None:
        rec.put("fitted_order", rep.fitted_order)
    rec.put("order_used", rep.order_used)
    rec.put("lower_bound", rep.lower_bound)
    rec.put("schur_upper", rep.schur_upper)
    rec.put("extrapolated", rep.extrapolated)
    rec.put("sandwich_lower", rep.lower_bound, Reference("lower bound <= extrapolated", rep.extrapolated, tol("sandwich"), "le"))
    rec.put("sandwich_upper", rep.extrapolated, Reference("extrapolated <= Schur bound", rep.schur_upper, tol("sandwich"), "le"))
    if rep.radial_value is not None:
        rec.put("radial_value", rep.radial_value)
        rec.put(
            "radial_agreement",
            abs(rep.extrapolated - rep.radial_value),
            Reference("|extrapolated - radial|", 0.0, tol("radial_agreement")),
        )
    if _is_unit_disk(cfg.domain):
        rec.put("sharp_value", rep.radial_value, Reference("quoted sharp constant", SHARP_QUOTED, tol("sharp_value")))
        rec.put(
            "lower_bound_disk",
            rep.lower_bound,
            Reference("Rayleigh quotient of 1 is 8/(3 pi)", 8.0 / (3.0 * math.pi), tol("lower_bound")),
        )
        rec.put("schur_disk", rep.schur_upper, Reference("Schur bound of the unit disk", 1.0, tol("schur_disk")))


def _corner_oracle_reference(spec):
    # independent adaptive quadrature of the real part at the corner, frozen
    if spec == DomainSpec.square(1.0):
        return -0.1312654526731885
    return None


def _exp_eigentest(rec):
    cfg, tol = rec.cfg, rec.cfg.tol
    spec = cfg.domain
    level = max(cfg.effective_levels)
    with rec.stage("eigentest"):
        rep = eigentest(spec, level)
    rec.put("level", level)
    rec.put("nodes", rep.node_count)
    rec.put("lambda1", rep.lambda1)
    rec.put("threshold", rep.threshold)
    rec.put("margin", rep.margin)
    for name in ("u_norm_sq", "v0_norm_sq", "h_norm_sq", "w_norm_sq"):
        rec.put(name, getattr(rep, name))
    rec.put("ratio", rep.ratio, Reference("ratio >= 2 / sqrt(lambda1)", rep.threshold, tol("residual"), "ge"))
    rec.put(
        "pythagoras_residual",
        rep.pythagoras_residual,
        Reference("|w|^2 = |v0|^2 + |h|^2", 0.0, tol("residual"), "le"),
    )
    if spec.kind == "disk":
        j01 = bessel_j0_first_zero()
        rec.put("disk_ratio", rep.ratio, Reference("2 / j01 scaled by the radius", 2.0 * spec.radius / j01, tol("disk_ratio")))
        rec.put("h_over_w", rep.h_norm_sq / rep.w_norm_sq, Reference("h vanishes on disks", 0.0, tol("h_over_w"), "le"))
    else:
        rec.put(
            "orthogonality_residual",
            rep.orthogonality_residual,
            Reference("<v0, h> = 0", 0.0, tol("residual"), "le"),
        )
        rec.put("margin_positive", rep.margin, Reference("strict inequality", 0.0, 0.0, "gt"))
    if spec.kind == "rectangle":
        pair = ground_state(spec)
        with rec.stage("corner"):
            corner = complex(cauchy_general(spec, pair.u, 0j, tol=1e-12))
        rec.put("v0_corner", abs(v0_field(pair, 0j)), Reference("v0 vanishes at the corner", 0.0, 0.0))
        rec.put("cauchy_corner_imag", corner.imag)
        rec.put("cauchy_corner_real", corner.real, Reference("Re (C u)(0) < 0", 0.0, 0.0, "lt"))
        oracle = _corner_oracle_reference(spec)
        if oracle is not None:
            rec.put("cauchy_corner_oracle", corner.real, Reference("adaptive quadrature oracle", oracle, tol("corner_oracle")))
    if spec.kind == "annulus":
        _annulus_energy(rec, rep)


def _annulus_constant(pair, r):
    return 2.0 * r * float(pair.radial_profile[1](r)) / pair.lambda1


def _annulus_energy(rec, rep):
    spec = rec.cfg.domain
    pair = ground_state(spec)
    c = _annulus_constant(pair, spec.r_inner)
    predicted = c * c * 2.0 * math.pi * math.log(spec.r_outer / spec.r_inner) / rep.u_norm_sq
    rec.put("c", c)
    rec.put(
        "energy_gap",
        rep.ratio**2 - rep.threshold**2,
        Reference("ratio^2 - 4/lambda1 = |c|^2 2 pi log(R/r) / |u|^2", predicted, rec.cfg.tol("energy"), "rel"),
    )


def _exp_annulus_identity(rec):
    cfg, tol = rec.cfg, rec.cfg.tol
    spec = cfg.domain
    r, big_r = spec.r_inner, spec.r_outer
    level = max(cfg.effective_levels)
    with rec.stage("eigenpair"):
        pair = ground_state(spec)
    f, df = pair.radial_profile
    c = _annulus_constant(pair, r)
    rng = np.random.default_rng(20240611)
    rho = rng.uniform(r, big_r, 20)
    theta = rng.uniform(0.0, 2.0 * math.pi, 20)
    z = rho * np.exp(1j * theta)
    with rec.stage("pointwise"):
        lhs = cauchy_radial(f, r, z, big_r)
        rhs = v0_field(pair, z) + c / z
    rec.put("pointwise_max_error", np.max(np.abs(lhs - rhs)), Reference("C f = v0 + c / z", 0.0, tol("pointwise"), "le"))
    with rec.stage("mesh"):
        mesh = build_mesh(spec, level)
        v0 = v0_field(pair, mesh.nodes)
        inv = 1.0 / mesh.nodes
    rec.put(
        "v0_inverse_z_inner",
        abs(inner_product(mesh, v0, inv)),
        Reference("<v0, 1/z> = 0", 0.0, tol("orthogonality"), "le"),
    )
    rec.put(
        "norm_inverse_z_sq",
        l2_norm(mesh, inv) ** 2,
        Reference("|1/z|^2 = 2 pi log(R/r)", 2.0 * math.pi * math.log(big_r / r), tol("norm_inverse_z")),
    )
    with rec.stage("eigentest"):
        rep = eigentest(spec, level)
    rec.put("ratio", rep.ratio)
    rec.put("threshold", rep.threshold)
    _annulus_energy(rec, rep)


def _decay_slope(spec, f, direction, level):
    c = spec.center()
    vals = [abs(exterior_cauchy(spec, f, c + rad * direction, level)) for rad in (10.0, 100.0)]
    return math.log10(vals[1] / vals[0])


def _exp_multipole(rec):
    cfg, tol = rec.cfg, rec.cfg.tol
    spec = cfg.domain
    level = max(cfg.effective_levels)
    pair = ground_state(spec)
    zs = 10.0 * np.exp(2j * math.pi * (np.arange(16) + 0.5) / 16)
    with rec.stage("moments"):
        mp = multipole_moments(spec, pair.u, 8, level)
    with rec.stage("exterior"):
        direct = exterior_cauchy(spec, pair.u, zs, level)
    diff = float(np.max(np.abs(direct - mp.evaluate(zs))))
    rec.put("laurent_max_diff", diff, Reference("|exterior - K=8 multipole| at |z| = 10", 0.0, tol("laurent"), "le"))
    rec.put("tail_bound", float(np.max(mp.tail_bound(zs))))
    rec.put("moment0_real", mp.moments[0].real)
    with rec.stage("decay"):
        slope = _decay_slope(spec, pair.u, np.exp(0.3j), level)
    rec.put("decay_slope", slope, Reference("F(z) = O(1/z)", -1.0, tol("slope")))


def _exp_schur(rec):
    spec = rec.cfg.domain
    with rec.stage("schur"):
        bound, x = schur_bound(spec, full_output=True)
    rec.put("argmax_x", x.real)
    rec.put("argmax_y", x.imag)
    if spec.kind == "disk":
        rec.put("bound", bound, Reference("(1/2pi) int_D dy/|y| = R", spec.radius, rec.cfg.tol("schur_disk")))
    elif spec.kind == "annulus":
        rec.put("bound", bound, Reference("below the bound of the outer disk", spec.r_outer, 0.0, "lt"))
    else:
        rec.put("bound", bound)


_RUNNERS = {
    "counterexample": _exp_counterexample,
    "sharp-constant": _exp_sharp_constant,
    "eigentest": _exp_eigentest,
    "annulus-identity": _exp_annulus_identity,
    "multipole": _exp_multipole,
    "schur": _exp_schur,
}


def run(config: ExperimentConfig) -> ExperimentReport:
    """Run one experiment and compare against its references.

    Raises
    ------
    ExperimentError
        If a numerical stage fails; the message names the stage.
    """
    rec = _Recorder(config)
    _RUNNERS[config.experiment](rec)
    verdicts = {name: ("pass" if ref.check(rec.computed[name]) else "fail") for name, ref in rec.references.items()}
    return ExperimentReport(config.to_dict(), rec.computed, rec.references, verdicts, rec.timing)


def _rows(report):
    for name in sorted(report.computed):
        ref = report.references.get(name)
        yield (
            name,
            repr(report.computed[name]),
            "" if ref is None else repr(ref.target),
            "" if ref is None else repr(ref.tolerance),
            report.verdicts.get(name, ""),
        )


def render(report: ExperimentReport, fmt: str, include_timing=False) -> str:
    """Serialize ``report`` as ``json``, ``csv`` or ``text``."""
    if fmt == "json":
        return json.dumps(report.to_dict(include_timing), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    header = ("name", "value", "reference", "tolerance", "verdict")
    rows = list(_rows(report))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    table = [header] + rows
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if include_timing and report.timing:
        lines.append("")
        lines.extend(f"{stage}: {sec:.2f} s" for stage, sec in report.timing.items())
    return "\n".join(lines) + "\n"


def emit(report: ExperimentReport, fmt="text", path=None, include_timing=False):
    """Write the rendered report to ``path`` (UTF-8, LF) or to standard output."""
    text = render(report, fmt, include_timing)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _domain_from_args(args):
    if args.domain == "disk":
        return DomainSpec.disk(args.R if args.R is not None else 1.0)
    if args.domain == "annulus":
        return DomainSpec.annulus(args.r if args.r is not None else 0.5, args.R if args.R is not None else 1.0)
    return DomainSpec.square(args.side)


def _parse_levels(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="cauchylab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--domain", choices=("disk", "square", "annulus"), default="disk")
    p.add_argument("--r", type=float, default=None, help="annulus inner radius (default 0.5)")
    p.add_argument("--R", type=float, default=None, help="disk radius or annulus outer radius (default 1)")
    p.add_argument("--side", type=float, default=1.0, help="square side length")
    p.add_argument("--levels", type=_parse_levels, default=(), help="mesh levels, e.g. 0,1,2")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--out", default=None, help="output file (default: standard output)")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--timing", action="store_true", help="include per-stage timing")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tolerances = {}
        for item in args.tol:
            name, _, value = item.partition("=")
            tolerances[name.strip()] = float(value)
        config = ExperimentConfig(
            experiment=args.experiment,
            domain=_domain_from_args(args),
            levels=args.levels,
            tolerances=tolerances,
            output_path=args.out,
            format=args.format,
        )
        report = run(config)
        emit(report, args.format, args.out, args.timing)
    except (ValueError, ExperimentError, OSError) as exc:
        print(f"cauchylab: error: {exc}", file=sys.stderr)
        return 1
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
