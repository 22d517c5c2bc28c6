"""Piecewise-linear random flight trajectories.

Conditional flights (models ``X`` and ``Y``) have a fixed number of
direction changes and Dirichlet displacement durations.  Standard flights
(model ``Z``) change direction at the epochs of a Poisson process; only
``d = 2`` and ``d = 4`` are supported because those are the cases with
known non-conditional laws.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import InvalidParameterError, UnsupportedModelError
from .sampling import (
    RngStream,
    dirichlet_shape,
    sample_dirichlet_partitions,
    sample_time_partition,
    sample_unit_direction,
)

MODELS = ("X", "Y", "Z")


@dataclass(frozen=True)
class FlightSpec:
    """Parameters of one flight law at horizon ``t``.

    Conditional models take either a change count ``n`` or a change rate
    ``w``; with ``w`` the count used at horizon ``t`` is ``round(t * w)``.
    Model ``Z`` takes the Poisson intensity ``lam``.
    """

    model: str
    d: int
    c: float = 1.0
    t: float = 1.0
    n: int | None = None
    lam: float | None = None
    w: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParameterError(f"model must be one of {MODELS}, got {self.model!r}")
        if int(self.d) != self.d:
            raise InvalidParameterError(f"d must be an integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidParameterError(f"speed c must be positive, got {self.c}")
        if not (np.isfinite(self.t) and self.t > 0):
            raise InvalidParameterError(f"horizon t must be positive, got {self.t}")
        if self.model == "Z":
            if self.d not in (2, 4):
                raise UnsupportedModelError(f"standard flights are supported for d in {{2, 4}} only, got d={self.d}")
            if self.n is not None or self.w is not None:
                raise InvalidParameterError("model Z takes lam, not n or w")
            if self.lam is None or not (np.isfinite(self.lam) and self.lam > 0):
                raise InvalidParameterError(f"model Z needs a positive intensity lam, got {self.lam}")
            return
        dirichlet_shape(self.model, self.d)
        if self.lam is not None:
            raise InvalidParameterError(f"model {self.model} takes n or w, not lam")
        if (self.n is None) == (self.w is None):
            raise InvalidParameterError(f"model {self.model} needs exactly one of n, w")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise InvalidParameterError(f"change count n must be an integer >= 1, got {self.n}")
        if self.w is not None and not (np.isfinite(self.w) and self.w > 0):
            raise InvalidParameterError(f"change rate w must be positive, got {self.w}")
        if self.w is not None and self.change_count < 1:
            raise InvalidParameterError(f"round(t*w) = {self.change_count} < 1 at t={self.t}, w={self.w}")

    @property
    def conditional(self) -> bool:
        return self.model != "Z"

    @property
    def change_count(self) -> int | None:
        if self.n is not None:
            return int(self.n)
        if self.w is not None:
            return int(round(self.t * self.w))
        return None

    def at(self, t: float) -> "FlightSpec":
        """Same law at another horizon."""
        return FlightSpec(self.model, self.d, self.c, t, self.n, self.lam, self.w)


@dataclass(frozen=True)
class Path:
    """Vertices of a flight from the origin to its endpoint, with the change epochs."""

    vertices: np.ndarray
    change_times: np.ndarray
    t: float
    c: float
    n_changes: int = field(init=False)

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.change_times.setflags(write=False)
        object.__setattr__(self, "n_changes", len(self.change_times))

    @property
    def endpoint(self) -> np.ndarray:
        return self.vertices[-1]

    @property
    def durations(self) -> np.ndarray:
        return np.diff(np.concatenate(([0.0], self.change_times, [self.t])))


def _path_from(tau: np.ndarray, directions: np.ndarray, c: float, t: float) -> Path:
    steps = c * tau[:, None] * directions
    vertices = np.vstack([np.zeros(directions.shape[1]), np.cumsum(steps, axis=0)])
    return Path(vertices=vertices, change_times=np.cumsum(tau)[:-1], t=float(t), c=float(c))


def simulate_conditional(spec: FlightSpec, rng: RngStream) -> Path:
    """One flight with exactly ``spec.change_count`` direction changes."""
    if not spec.conditional:
        raise InvalidParameterError("simulate_conditional needs model X or Y")
    n = spec.change_count
    part = sample_time_partition(spec.model, spec.d, n, spec.t, rng)
    directions = sample_unit_direction(spec.d, rng, size=n + 1)
    return _path_from(part.tau, directions, spec.c, spec.t)


def simulate_standard(spec: FlightSpec, rng: RngStream) -> Path:
    """One standard flight; change epochs are generated from exponential gaps."""
    if spec.model != "Z":
        raise UnsupportedModelError("simulate_standard needs model Z")
    gen = rng.generator
    epochs = []
    s = gen.exponential(1.0 / spec.lam)
    while s < spec.t:
        epochs.append(s)
        s += gen.exponential(1.0 / spec.lam)
    tau = np.diff(np.concatenate(([0.0], epochs, [spec.t])))
    directions = sample_unit_direction(spec.d, rng, size=len(tau))
    return _path_from(tau, directions, spec.c, spec.t)


def simulate(spec: FlightSpec, rng: RngStream) -> Path:
    return simulate_conditional(spec, rng) if spec.conditional else simulate_standard(spec, rng)


def running_max_norm(path: Path) -> float:
    """Largest distance from the origin along the path.

    The squared norm is convex on each segment, so the maximum is at a vertex.
    """
    # same norm routine as for a single point, so the endpoint never exceeds the maximum
    return float(max(np.linalg.norm(v) for v in path.vertices))


@dataclass
class EndpointBatch:
    """Vectorised sample of flight outcomes."""

    endpoints: np.ndarray
    n_changes: np.ndarray
    max_norms: np.ndarray | None = None
    norms: np.ndarray = None

    def __post_init__(self):
        if self.norms is None:
            self.norms = np.sqrt(np.einsum("ij,ij->i", self.endpoints, self.endpoints))


def _fixed_count_batch(shape, n, d, c, t, rng, size, track_max):
    if n == 0:
        ends = c * t * sample_unit_direction(d, rng, size=size)
        norms = np.sqrt(np.einsum("ij,ij->i", ends, ends))
        return ends, norms, (norms if track_max else None)
    tau = sample_dirichlet_partitions(shape, n, t, rng, size)
    g = rng.generator.standard_normal((size, n + 1, d))
    # step j is c * tau_j * g_j / |g_j|; fold the normalisation into the weights
    weights = c * tau / np.sqrt(np.einsum("ijk,ijk->ij", g, g))
    if not track_max:
        ends = np.matmul(weights[:, None, :], g)[:, 0, :]
        return ends, np.sqrt(np.einsum("ij,ij->i", ends, ends)), None
    pos = np.cumsum(weights[:, :, None] * g, axis=1)
    sq = np.einsum("ijk,ijk->ij", pos, pos)
    # endpoint norm and running maximum share sq, so max_norms >= norms exactly
    return pos[:, -1, :], np.sqrt(sq[:, -1]), np.sqrt(sq.max(axis=1))


def sample_batch(spec: FlightSpec, rng: RngStream, size: int, track_max: bool = False) -> EndpointBatch:
    """Draw ``size`` independent flights of ``spec`` from a single stream.

    Only endpoints (and optionally running maxima) are kept.  For model Z the
    change counts are Poisson and flights are generated grouped by count, in
    increasing order, so the result depends only on the stream.
    """
    size = int(size)
    if spec.conditional:
        n = spec.change_count
        ends, norms, mx = _fixed_count_batch(dirichlet_shape(spec.model, spec.d), n, spec.d, spec.c,
                                             spec.t, rng, size, track_max)
        return EndpointBatch(ends, np.full(size, n), mx, norms)
    counts = rng.generator.poisson(spec.lam * spec.t, size)
    ends = np.empty((size, spec.d))
    norms = np.empty(size)
    mx = np.empty(size) if track_max else None
    for n in np.unique(counts):
        idx = np.flatnonzero(counts == n)
        e, nr, m = _fixed_count_batch(1.0, int(n), spec.d, spec.c, spec.t, rng, idx.size, track_max)
        ends[idx] = e
        norms[idx] = nr
        if track_max:
            mx[idx] = m
    return EndpointBatch(ends, counts, mx, norms)


def path_record(spec: FlightSpec, path: Path, digits: int = 12) -> dict:
    fmt = lambda x: float(f"{x:.{digits}g}")
    return {
        "model": spec.model,
        "d": spec.d,
        "c": fmt(spec.c),
        "t": fmt(spec.t),
        "n": path.n_changes,
        "vertices": [[fmt(x) for x in row] for row in path.vertices],
        "change_times": [fmt(x) for x in path.change_times],
    }


def write_paths_jsonl(spec: FlightSpec, paths: Iterable[Path], fh: IO[str]) -> int:
    count = 0
    for p in paths:
        fh.write(json.dumps(path_record(spec, p), separators=(",", ":")) + "\n")
        count += 1
    return count


def read_paths_jsonl(fh: IO[str]) -> list[dict]:
    return [json.loads(line) for line in fh if line.strip()]
