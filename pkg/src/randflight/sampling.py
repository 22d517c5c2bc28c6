"""Random primitives: keyed substreams, Gamma variates, sphere directions and
rescaled Dirichlet time partitions.

All samplers take an :class:`RngStream` and draw from its generator, so a
stream rebuilt from the same ``(seed, stream_id)`` replays the same variates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError

_U64 = 2**64


class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    The key is hashed through :class:`numpy.random.SeedSequence` into a
    Philox counter-based generator, so substreams are independent of the
    order in which they are consumed.  ``substream(i)`` derives child keys
    deterministically, which is how batches are assigned fixed streams.
    """

    def __init__(self, seed: int, stream_id: int = 0, path: tuple[int, ...] = ()):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if int(value) != value or not 0 <= int(value) < _U64:
                raise InvalidParameterError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        self._generator: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
            self._generator = np.random.Generator(np.random.Philox(ss))
        return self._generator

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))

    def fresh(self) -> "RngStream":
        """Same key, state rewound to the start."""
        return RngStream(self.seed, self.stream_id, self.path)

    def __repr__(self):
        tail = f", path={self.path}" if self.path else ""
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}{tail})"


@dataclass(frozen=True)
class TimePartition:
    """Durations ``tau`` of the ``n + 1`` displacements over the horizon ``t``."""

    tau: np.ndarray
    t: float

    @property
    def n_changes(self) -> int:
        return len(self.tau) - 1

    @property
    def change_times(self) -> np.ndarray:
        return np.cumsum(self.tau)[:-1]


def _gamma_marsaglia_tsang(shape: float, size: int, gen: np.random.Generator) -> np.ndarray:
    # valid for shape >= 1
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(size)
    pending = np.arange(size)
    while pending.size:
        m = pending.size
        x = gen.standard_normal(m)
        u = gen.random(m)
        v = (1.0 + c * x) ** 3
        positive = v > 0
        logv = np.log(np.where(positive, v, 1.0))
        x2 = x * x
        accept = positive & (
            (u < 1.0 - 0.0331 * x2 * x2) | (np.log(u) < 0.5 * x2 + d * (1.0 - v + logv))
        )
        out[pending[accept]] = d * v[accept]
        pending = pending[~accept]
    return out


def _gamma_array(shape: float, size: int, gen: np.random.Generator) -> np.ndarray:
    if shape == 1.0:
        return gen.standard_exponential(size)
    if shape > 1.0:
        return _gamma_marsaglia_tsang(shape, size, gen)
    boosted = _gamma_marsaglia_tsang(shape + 1.0, size, gen)
    return boosted * gen.random(size) ** (1.0 / shape)


def sample_gamma(shape: float, rng: RngStream, size: int | None = None):
    """Gamma(shape, scale=1) variates.

    Marsaglia-Tsang squeeze for ``shape >= 1``; for ``shape < 1`` a
    Gamma(shape + 1) draw is scaled by ``U**(1/shape)``.  ``shape == 1``
    is drawn directly as a standard exponential.
    """
    if not np.isfinite(shape) or shape <= 0:
        raise InvalidParameterError(f"gamma shape must be positive, got {shape}")
    n = 1 if size is None else int(size)
    out = _gamma_array(float(shape), n, rng.generator)
    return float(out[0]) if size is None else out


def sample_unit_direction(d: int, rng: RngStream, size: int | tuple | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere of R^d, by normalising Gaussian vectors.

    Returns shape ``(d,)`` or ``(*size, d)``.
    """
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d}")
    d = int(d)
    lead = () if size is None else (size if isinstance(size, tuple) else (int(size),))
    g = rng.generator.standard_normal(lead + (d,))
    norm = np.sqrt(np.einsum("...i,...i->...", g, g))
    return g / norm[..., None]


def dirichlet_shape(model: str, d: int) -> float:
    """Common Dirichlet parameter of the displacement durations: ``d-1`` (X) or ``d/2-1`` (Y)."""
    if model == "X":
        if d < 2:
            raise InvalidDimensionError(f"model X requires d >= 2, got {d}")
        return float(d - 1)
    if model == "Y":
        if d < 3:
            raise InvalidDimensionError(f"model Y requires d >= 3, got {d}")
        return d / 2.0 - 1.0
    raise InvalidParameterError(f"unknown conditional model {model!r}")


def _check_partition_args(model, d, n, t):
    shape = dirichlet_shape(model, d)
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"change count n must be an integer >= 1, got {n}")
    if not t > 0:
        raise InvalidParameterError(f"horizon t must be positive, got {t}")
    return shape


def sample_dirichlet_partitions(shape: float, n: int, t: float, rng: RngStream, size: int) -> np.ndarray:
    """``t`` times symmetric Dirichlet(shape, ..., shape) vectors of length ``n + 1``.

    Built from normalised Gamma draws; returns shape ``(size, n + 1)``.
    """
    m, k = int(size), int(n) + 1
    g = _gamma_array(float(shape), m * k, rng.generator).reshape(m, k)
    return t * g / g.sum(axis=1, keepdims=True)


def sample_time_partitions(model: str, d: int, n: int, t: float, rng: RngStream, size: int) -> np.ndarray:
    """Batch of rescaled Dirichlet partitions, array of shape ``(size, n + 1)``."""
    shape = _check_partition_args(model, d, n, t)
    return sample_dirichlet_partitions(shape, n, t, rng, size)


def sample_time_partition(model: str, d: int, n: int, t: float, rng: RngStream) -> TimePartition:
    """Durations of the ``n + 1`` displacements of a flight conditioned on ``n`` changes."""
    tau = sample_time_partitions(model, d, n, t, rng, 1)[0]
    tau.setflags(write=False)
    return TimePartition(tau=tau, t=float(t))
