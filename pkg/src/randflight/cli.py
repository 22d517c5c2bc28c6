"""Command line front end: ``randflight {simulate,density,rates,verify}``.

Every command reads an optional JSON config (``--config``); ``--seed``,
``--samples``, ``--out`` and ``--set KEY=VALUE`` override its fields.
Exit status is 0 on success or PASS, 1 on FAIL and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path as FsPath

import numpy as np

from . import densities as dens
from .errors import InfeasibleExperimentError, RandFlightError
from .flights import FlightSpec, simulate, write_paths_jsonl
from .rates import RateFunction, crossing_radius_4d
from .sampling import RngStream
from .verify import estimate_exit_probability, fit_decay_rate

DIGITS = 12


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{DIGITS}g}"


def write_csv(path, header, rows, units: str):
    with open(path, "w", newline="") as fh:
        fh.write(f"# units: {units}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------- configs


def _require(cond, name, message):
    if not cond:
        raise ConfigError(name, message)


def _is_pos(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def _is_int(x, lo):
    return isinstance(x, int) and not isinstance(x, bool) and x >= lo


@dataclass
class _Config:
    @classmethod
    def from_dict(cls, data: dict):
        known = {f.name for f in fields(cls)}
        data = {("lam" if k == "lambda" else k): v for k, v in data.items()}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        cfg = cls(**data)
        cfg.validate()
        return cfg


def _check_model(cfg, allow_standard=True):
    _require(cfg.model in (("X", "Y", "Z") if allow_standard else ("X", "Y")), "model", f"invalid model {cfg.model!r}")
    _require(_is_int(cfg.d, 2), "d", "must be an integer >= 2")
    if cfg.model == "Y":
        _require(cfg.d >= 3, "d", "model Y needs d >= 3")
    if cfg.model == "Z":
        _require(cfg.d in (2, 4), "d", "model Z supports d in {2, 4} only")
        _require(_is_pos(cfg.lam), "lambda", "model Z needs a positive lambda")
    _require(_is_pos(cfg.c), "c", "must be positive")


@dataclass
class SimulateConfig(_Config):
    model: str = "Z"
    d: int = 2
    c: float = 1.0
    t: float = 1.0
    n: int | None = None
    lam: float | None = None
    samples: int = 1000
    seed: int = 0
    out: str = "paths.jsonl"

    def validate(self):
        _check_model(self)
        _require(_is_pos(self.t), "t", "must be positive")
        if self.model != "Z":
            _require(_is_int(self.n, 1), "n", "conditional models need an integer n >= 1")
        _require(_is_int(self.samples, 1), "samples", "must be a positive integer")
        _require(_is_int(self.seed, 0), "seed", "must be a nonnegative integer")

    def spec(self) -> FlightSpec:
        if self.model == "Z":
            return FlightSpec("Z", self.d, self.c, self.t, lam=self.lam)
        return FlightSpec(self.model, self.d, self.c, self.t, n=self.n)


@dataclass
class DensityConfig(_Config):
    model: str = "Z"
    d: int = 2
    c: float = 1.0
    t: float = 1.0
    n: int | None = None
    lam: float | None = None
    points: int = 101
    n_max: int = 80
    out: str = "density.csv"

    def validate(self):
        _check_model(self)
        _require(_is_pos(self.t), "t", "must be positive")
        if self.model != "Z":
            _require(_is_int(self.n, 1), "n", "conditional models need an integer n >= 1")
        _require(_is_int(self.points, 2), "points", "must be an integer >= 2")
        _require(_is_int(self.n_max, 1), "n_max", "must be an integer >= 1")


@dataclass
class RatesConfig(_Config):
    lam: float = 1.0
    c: float = 1.0
    step: float = 0.01
    w: list = field(default_factory=lambda: [0.6, 1.5])
    out: str = "rates.csv"

    def validate(self):
        _require(_is_pos(self.lam), "lambda", "must be positive")
        _require(_is_pos(self.c), "c", "must be positive")
        _require(_is_pos(self.step) and self.step <= self.c, "step", "must be in (0, c]")
        _require(isinstance(self.w, list) and all(_is_pos(v) for v in self.w), "w", "must be a list of positive numbers")


@dataclass
class VerifyConfig(_Config):
    model: str = "Z"
    d: int = 2
    c: float = 1.0
    lam: float | None = None
    w: float | None = None
    r: float = 0.5
    t_grid: list = field(default_factory=lambda: [10, 20, 30, 40])
    samples_per_t: int = 1_000_000
    seed: int = 0
    tolerance: list | None = None
    rel_tol: float = 0.3
    exit: bool = False
    exit_samples: int | None = None
    gate: bool = True
    out: str = "verify.csv"

    def validate(self):
        _check_model(self)
        if self.model != "Z":
            _require(_is_pos(self.w), "w", "conditional models need a positive change rate w")
        _require(_is_pos(self.r), "r", "must be positive")
        _require(self.r < self.c, "r", f"must be below the speed c={self.c}")
        _require(
            isinstance(self.t_grid, list) and len(self.t_grid) >= 3 and all(_is_pos(t) for t in self.t_grid)
            and all(a < b for a, b in zip(self.t_grid, self.t_grid[1:])),
            "t_grid", "needs at least 3 increasing positive horizons",
        )
        _require(_is_int(self.samples_per_t, 1000), "samples_per_t", "must be an integer >= 1000")
        _require(_is_int(self.seed, 0), "seed", "must be a nonnegative integer")
        if self.tolerance is not None:
            _require(
                isinstance(self.tolerance, list) and len(self.tolerance) == 2
                and all(isinstance(v, (int, float)) for v in self.tolerance) and self.tolerance[0] < self.tolerance[1],
                "tolerance", "must be [low, high]",
            )
        _require(_is_pos(self.rel_tol), "rel_tol", "must be positive")
        if self.exit:
            _require(self.model == "Z", "exit", "exit probabilities need model Z")
        if self.exit_samples is not None:
            _require(_is_int(self.exit_samples, 1000), "exit_samples", "must be an integer >= 1000")

    def template(self) -> FlightSpec:
        t0 = float(self.t_grid[0])
        if self.model == "Z":
            return FlightSpec("Z", self.d, self.c, t0, lam=self.lam)
        return FlightSpec(self.model, self.d, self.c, t0, w=self.w)


# --------------------------------------------------------------- commands


def cmd_simulate(cfg: SimulateConfig, threads: int = 1) -> int:
    spec = cfg.spec()
    root = RngStream(cfg.seed)
    paths = [simulate(spec, root.substream(i)) for i in range(cfg.samples)]
    with open(cfg.out, "w") as fh:
        write_paths_jsonl(spec, paths, fh)
    norms = [float(np.linalg.norm(p.endpoint)) for p in paths]
    print(f"wrote {len(paths)} paths to {cfg.out}")
    print(f"mean endpoint norm: {fmt(np.mean(norms))}")
    print(f"mean changes: {fmt(np.mean([p.n_changes for p in paths]))}")
    return 0


def density_rows(cfg: DensityConfig):
    R = cfg.c * cfg.t
    radii = np.linspace(0.0, R, cfg.points)
    standard = cfg.model == "Z"
    if not standard:
        params = dens.IsotropicDensity(cfg.model, cfg.d, cfg.n, cfg.c, cfg.t)
    rows = []
    for r in radii:
        z = np.zeros(cfg.d)
        z[0] = r
        inside = r < R
        if standard:
            density = dens.standard_ac_density(cfg.d, cfg.lam, cfg.c, cfg.t, z)
            radial = dens.standard_radial_density(cfg.d, cfg.lam, cfg.c, cfg.t, r) if inside else 0.0
            cum = dens.standard_ac_mass(cfg.d, cfg.lam, cfg.c, cfg.t, 0.0, r)
            mixture = dens.poisson_mixture_density(cfg.d, cfg.lam, cfg.c, cfg.t, z, cfg.n_max)
            rows.append(["Z", cfg.d, cfg.lam, cfg.c, cfg.t, r, density, radial, cum, mixture])
        else:
            density = dens.conditional_density(params, z)
            radial = dens.radial_marginal(params, r) if inside else 0.0
            cum = dens.conditional_mass(params, 0.0, r)
            rows.append([cfg.model, cfg.d, cfg.n, cfg.c, cfg.t, r, density, radial, cum])
    header = ["model", "d", "n_or_lambda", "c", "t", "r", "density", "radial_density", "cumulative_mass"]
    if standard:
        header.append("mixture")
    return header, rows


def cmd_density(cfg: DensityConfig, threads: int = 1) -> int:
    header, rows = density_rows(cfg)
    write_csv(cfg.out, header, rows,
              "c=length/time, t=time, r=length, density=1/length^d, radial_density=1/length, "
              "cumulative_mass=probability")
    if cfg.model == "Z":
        print(f"absolutely continuous mass: {fmt(rows[-1][8])}; atom weight exp(-lambda t) = "
              f"{fmt(dens.singular_weight(cfg.lam, cfg.t))}")
    print(f"wrote {len(rows)} rows to {cfg.out}")
    return 0


def rate_rows(cfg: RatesConfig):
    radii = np.round(np.arange(0.0, cfg.c + cfg.step / 2, cfg.step), 12)
    radii = radii[radii <= cfg.c]
    rates = [RateFunction.standard(2, cfg.lam, cfg.c), RateFunction.standard(4, cfg.lam, cfg.c)]
    for w in cfg.w:
        rates.append(RateFunction.conditional("X", 2, cfg.c, w))
        rates.append(RateFunction.conditional("Y", 4, cfg.c, w))
    rows = []
    for rate in rates:
        for r, v in zip(radii, rate(radii)):
            rows.append([rate.kind, rate.d, cfg.c, rate.param, r, v])
    return ["kind", "d", "c", "lambda_or_w", "r", "value"], rows


def cmd_rates(cfg: RatesConfig, threads: int = 1) -> int:
    header, rows = rate_rows(cfg)
    write_csv(cfg.out, header, rows, "c=length/time, lambda_or_w=1/time, r=length/time, value=1/time")
    for w in cfg.w:
        if w < cfg.lam:
            gamma, xi = crossing_radius_4d(cfg.lam, cfg.c, w)
            print(f"w={fmt(w)}: d=4 rates cross at r={fmt(gamma * cfg.c)} (xi={fmt(xi)})")
        else:
            print(f"w={fmt(w)}: conditional d=4 rate dominates on (0, c]")
    print(f"wrote {len(rows)} rows to {cfg.out}")
    return 0


def run_verification(cfg: VerifyConfig, threads: int = 1):
    """Run the configured checks; returns ``(csv_rows, summary)``."""
    root = RngStream(cfg.seed)
    fit = fit_decay_rate(cfg.template(), cfg.r, cfg.t_grid, cfg.samples_per_t, root.substream(0),
                         threads=threads, gate=cfg.gate)
    rows = [[e.t, e.count, e.n_samples, e.p_hat, e.ci_low, e.ci_high, e.empirical_rate] for e in fit.estimates]
    if cfg.tolerance is not None:
        lo, hi = cfg.tolerance
    else:
        lo, hi = fit.analytic * (1 - cfg.rel_tol), fit.analytic * (1 + cfg.rel_tol)
    slope_ok = lo <= fit.decay_rate <= hi
    summary = {
        "slope": fit.slope,
        "decay_rate": fit.decay_rate,
        "slope_ci": list(fit.slope_ci),
        "analytic_rate": fit.analytic,
        "tolerance": [lo, hi],
    }
    ok = slope_ok
    if cfg.exit:
        spec = cfg.template().at(float(cfg.t_grid[-1]))
        n = cfg.exit_samples or cfg.samples_per_t
        ex = estimate_exit_probability(spec, cfg.r, n, root.substream(1), threads=threads, gate=cfg.gate)
        exit_ok = ex.within_bound and ex.exit.count >= ex.endpoint.count
        summary["exit"] = {
            "t": spec.t,
            "psi_hat": ex.exit.p_hat,
            "endpoint_p_hat": ex.endpoint.p_hat,
            "empirical_rate": ex.exit.empirical_rate,
            "ell": ex.ell,
            "slack": ex.bound_slack,
            "verdict": "PASS" if exit_ok else "FAIL",
        }
        ok = ok and exit_ok
    summary["verdict"] = "PASS" if ok else "FAIL"
    return rows, summary


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return fmt(obj) if math.isinf(obj) else float(fmt(obj))
    return obj


def cmd_verify(cfg: VerifyConfig, threads: int = 1) -> int:
    rows, summary = run_verification(cfg, threads)
    write_csv(cfg.out, ["t", "count", "n_samples", "p_hat", "ci_low", "ci_high", "empirical_rate"], rows,
              "t=time, p_hat=probability, empirical_rate=1/time")
    summary_path = FsPath(cfg.out).with_suffix(".json")
    summary = _clean(summary)
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return 0 if summary["verdict"] == "PASS" else 1


COMMANDS = {
    "simulate": (SimulateConfig, cmd_simulate, "samples"),
    "density": (DensityConfig, cmd_density, None),
    "rates": (RatesConfig, cmd_rates, None),
    "verify": (VerifyConfig, cmd_verify, "samples_per_t"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randflight", description="Random flight simulation and LDP checks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--samples", type=int)
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field; VALUE is parsed as JSON when possible")
    return parser


def load_config(command: str, args) -> _Config:
    cls, _, samples_field = COMMANDS[command]
    data = {}
    if args.config:
        try:
            data = json.loads(FsPath(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected KEY=VALUE")
        try:
            data[key] = json.loads(raw)
        except json.JSONDecodeError:
            data[key] = raw
    if args.seed is not None:
        if command in ("density", "rates"):
            raise ConfigError("seed", f"{command} is deterministic and takes no seed")
        data["seed"] = args.seed
    if args.out is not None:
        data["out"] = args.out
    if args.samples is not None:
        if samples_field is None:
            raise ConfigError("samples", f"{command} takes no sample count")
        data[samples_field] = args.samples
    try:
        return cls.from_dict(data)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("threads", "must be >= 1")
        cfg = load_config(args.command, args)
        return COMMANDS[args.command][1](cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleExperimentError as exc:
        print(f"error: infeasible experiment: {exc}", file=sys.stderr)
        return 2
    except RandFlightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
