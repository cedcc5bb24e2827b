"""Deterministic random streams, GOE sampling, dense eigendecomposition, statistics.

Every stochastic operation in the package consumes an :class:`RngStream`;
one stream per disorder realization keeps ensembles reproducible bit-for-bit
regardless of execution order or worker count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import EigendecompositionError

__all__ = [
    "RngStream",
    "Spectrum",
    "SummaryStats",
    "Histogram",
    "sample_goe",
    "goe_from_generator",
    "eigh",
    "summarize",
    "histogram",
]


@dataclass(frozen=True)
class RngStream:
    """Label of an independent random substream.

    The pair ``(master_seed, stream_index)`` fully determines the sample
    sequence; distinct stream indices give statistically independent
    generators (derived through ``np.random.SeedSequence`` hashing).
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    variance: float  # unbiased; 0 for a single sample
    stderr: float
    min: float
    max: float


@dataclass(frozen=True)
class Histogram:
    """Probability-density histogram over fixed bin edges."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray


def goe_from_generator(gen: np.random.Generator, dim: int) -> np.ndarray:
    """GOE draw from an already-open generator; used when a stream is shared."""
    b = gen.standard_normal((dim, dim))
    # (b + b.T) is exactly symmetric: IEEE addition is commutative.
    return (b + b.T) / np.sqrt(2.0)


def sample_goe(dim: int, rng: RngStream) -> np.ndarray:
    """Sample a GOE matrix: off-diagonal variance 1, diagonal variance 2.

    Built as ``(B + B^T)/sqrt(2)`` with ``B`` filled by standard normals,
    so the returned matrix is symmetric exactly, not merely to rounding.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return goe_from_generator(rng.generator(), dim)


def _fingerprint(m: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(m).tobytes()).hexdigest()[:12]


def eigh(m: np.ndarray) -> Spectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Raises :class:`EigendecompositionError` (with a matrix fingerprint) if
    the LAPACK driver fails to converge.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not symmetric")
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(
            f"eigh failed for dim={m.shape[0]} matrix, fingerprint={_fingerprint(m)}"
        ) from exc
    return Spectrum(eigenvalues=evals, eigenvectors=evecs)


def summarize(values) -> SummaryStats:
    """Unbiased summary statistics of a non-empty sample."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("summarize requires a non-empty sample")
    var = float(np.var(v, ddof=1)) if v.size > 1 else 0.0
    return SummaryStats(
        count=int(v.size),
        mean=float(v.mean()),
        variance=var,
        stderr=float(np.sqrt(var / v.size)),
        min=float(v.min()),
        max=float(v.max()),
    )


def histogram(values, edges=None, bins: int = 64, log: bool = False) -> Histogram:
    """Probability-density histogram.

    Default binning is ``bins`` uniform bins over [min, max]; pass
    ``log=True`` for log-spaced bins (requires strictly positive data,
    useful for heavy-tailed centrality distributions).
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("histogram requires a non-empty sample")
    if edges is None:
        lo, hi = float(v.min()), float(v.max())
        if hi <= lo:
            hi = lo + max(abs(lo), 1.0) * 1e-9
        if log:
            if lo <= 0:
                raise ValueError("log-spaced bins require positive values")
            edges = np.geomspace(lo, hi, bins + 1)
        else:
            edges = np.linspace(lo, hi, bins + 1)
    edges = np.asarray(edges, dtype=float)
    counts, _ = np.histogram(v, bins=edges)
    density, _ = np.histogram(v, bins=edges, density=True)
    return Histogram(edges=edges, counts=counts, density=density)
