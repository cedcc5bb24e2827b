"""Computational bases, Hamiltonians as weighted Fock-space graphs, and the
graph-energy centrality (GEC).

A Hamiltonian is stored as a weighted graph over basis states: diagonal
entries are self-loops, symmetric off-diagonal entries are stored once as
edges ``(i, j, w)`` with ``i < j``.  The GEC of a basis state is the drop in
``Tr(Hc^2)`` when the state's node is projected out, normalized by
``Tr(Hc^2)/D``, where ``Hc`` is the Hamiltonian with its trace removed.
The per-state value reduces to ``(2 (Hc^2)_ii - Hc_ii^2) / (Tr(Hc^2)/D)``
and never requires a diagonalization.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DegenerateWidthError
from .numerics import Spectrum, eigh

__all__ = [
    "BASIS_CAPACITY",
    "FullSpinBasis",
    "ParticleSectorBasis",
    "FockBasis",
    "SparseHamiltonian",
    "GecVector",
    "enumerate_basis",
    "gec_exact",
    "gec_offdiag_form",
    "export_graph",
]

BASIS_CAPACITY = 2**26


@dataclass(frozen=True)
class FullSpinBasis:
    """All 2^sites spin/occupation configurations."""

    sites: int


@dataclass(frozen=True)
class ParticleSectorBasis:
    """Fixed particle-number sector: binomial(sites, particles) states."""

    sites: int
    particles: int


class FockBasis:
    """Ordered computational basis with a configuration <-> index bijection.

    Configurations are integers with site ``s`` at bit position ``s``
    (occupied / spin-up = set bit), listed in ascending numeric order.
    """

    def __init__(self, spec, states: np.ndarray):
        self.spec = spec
        self.sites = spec.sites
        self.states = states
        self.dim = int(states.size)

    def index_of(self, config):
        """Index of one configuration (or an array of them)."""
        idx = np.searchsorted(self.states, config)
        if not np.all(self.states[idx] == config):
            raise KeyError("configuration not in basis")
        return idx

    def bitstring(self, config: int) -> str:
        """Site-0-first occupancy string for labels and exports."""
        return "".join("1" if (int(config) >> s) & 1 else "0" for s in range(self.sites))


def enumerate_basis(spec) -> FockBasis:
    """Enumerate a full-spin or fixed-particle-number basis.

    Raises :class:`CapacityError` beyond the desk-scale cap of 2^26 states.
    """
    if isinstance(spec, FullSpinBasis):
        if spec.sites < 1:
            raise ValueError("need at least one site")
        if 2**spec.sites > BASIS_CAPACITY:
            raise CapacityError(f"full basis over {spec.sites} sites exceeds 2^26 states")
        states = np.arange(2**spec.sites, dtype=np.int64)
        return FockBasis(spec, states)
    if isinstance(spec, ParticleSectorBasis):
        L, N = spec.sites, spec.particles
        if not (0 <= N <= L):
            raise ValueError("particle number outside [0, sites]")
        dim = math.comb(L, N)
        if dim > BASIS_CAPACITY:
            raise CapacityError(f"sector ({L},{N}) has {dim} > 2^26 states")
        states = _sector_states(L, N)
        return FockBasis(spec, states)
    raise TypeError(f"unknown basis spec {spec!r}")


def _sector_states(L: int, N: int) -> np.ndarray:
    if N == 0:
        return np.zeros(1, dtype=np.int64)
    # Gosper's hack walks the N-particle masks in ascending order.
    out = np.empty(math.comb(L, N), dtype=np.int64)
    v = (1 << N) - 1
    limit = 1 << L
    k = 0
    while v < limit:
        out[k] = v
        k += 1
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r
    return out


class SparseHamiltonian:
    """Symmetric Hamiltonian stored as diagonal + unique off-diagonal edges.

    Dense ensembles (e.g. full random matrices) may carry a dense backing
    array; the interface is the same either way.
    """

    __slots__ = ("dim", "diagonal", "rows", "cols", "weights", "dense")

    def __init__(self, dim, diagonal, rows, cols, weights, dense=None, validate=True):
        self.dim = int(dim)
        self.diagonal = np.asarray(diagonal, dtype=float)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=float)
        self.dense = dense
        if validate:
            self._validate()

    @classmethod
    def from_parts(cls, dim, diagonal, rows, cols, weights) -> "SparseHamiltonian":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        if np.any(rows == cols):
            raise ValueError("diagonal entries belong in `diagonal`, not the edge list")
        lo = np.minimum(rows, cols)
        hi = np.maximum(rows, cols)
        keep = weights != 0.0
        lo, hi, weights = lo[keep], hi[keep], weights[keep]
        key = lo * dim + hi
        order = np.argsort(key, kind="stable")
        if key.size and np.any(np.diff(key[order]) == 0):
            raise ValueError("duplicate edge (i, j)")
        h = cls(dim, diagonal, lo[order], hi[order], weights[order], validate=False)
        if h.diagonal.shape != (h.dim,):
            raise ValueError("diagonal length must equal dim")
        return h

    @classmethod
    def from_dense(cls, m: np.ndarray) -> "SparseHamiltonian":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("expected a square matrix")
        if not np.array_equal(m, m.T):
            raise ValueError("matrix is not symmetric")
        # Edges stay implicit in the dense backing; edge_list() materializes.
        empty = np.empty(0)
        return cls(
            m.shape[0],
            np.diag(m).copy(),
            empty,
            empty,
            empty,
            dense=m,
            validate=False,
        )

    def _validate(self):
        if self.diagonal.shape != (self.dim,):
            raise ValueError("diagonal length must equal dim")
        if not (self.rows.shape == self.cols.shape == self.weights.shape):
            raise ValueError("edge arrays must have matching shapes")
        if self.rows.size:
            if np.any(self.rows >= self.cols):
                raise ValueError("edges must satisfy i < j")
            if np.any(self.weights == 0.0):
                raise ValueError("zero-weight edges are not stored")
            key = self.rows * self.dim + self.cols
            if np.any(np.diff(np.sort(key)) == 0):
                raise ValueError("duplicate edge (i, j)")

    @property
    def n_edges(self) -> int:
        return int(self.rows.size)

    def trace(self) -> float:
        return float(self.diagonal.sum())

    def offdiag_sumsq(self) -> np.ndarray:
        """Per-row sum of squared off-diagonal elements, i.e. ``(A^2)_ii``."""
        if self.dense is not None:
            sq = np.einsum("ij,ij->i", self.dense, self.dense)
            return sq - self.diagonal**2
        w2 = self.weights**2
        return np.bincount(self.rows, weights=w2, minlength=self.dim) + np.bincount(
            self.cols, weights=w2, minlength=self.dim
        )

    def mean_square_width(self) -> float:
        """``Tr(Hc^2)/D`` of the trace-centered Hamiltonian."""
        centered = self.diagonal - self.trace() / self.dim
        return float((centered**2 + self.offdiag_sumsq()).mean())

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        m = np.zeros((self.dim, self.dim))
        m[np.arange(self.dim), np.arange(self.dim)] = self.diagonal
        m[self.rows, self.cols] = self.weights
        m[self.cols, self.rows] = self.weights
        return m

    def spectrum(self) -> Spectrum:
        return eigh(self.to_dense())

    def edge_list(self):
        """(rows, cols, weights) with i < j; materialized for dense backings."""
        if self.dense is not None:
            iu, ju = np.triu_indices(self.dim, k=1)
            w = self.dense[iu, ju]
            keep = w != 0.0
            return iu[keep], ju[keep], w[keep]
        return self.rows, self.cols, self.weights


@dataclass(frozen=True)
class GecVector:
    """Per-basis-state GEC values together with the normalization used.

    ``values = numerators / width`` with ``numerators[i] = 2 (Hc^2)_ii -
    Hc_ii^2 >= 0``, ``shift`` the removed trace per dimension, and ``width``
    the mean square spectral weight ``Tr(Hc^2)/D``.
    """

    values: np.ndarray
    numerators: np.ndarray
    shift: float
    width: float


def _finish_gec(numerators, shift, width) -> GecVector:
    if width <= 0.0:
        raise DegenerateWidthError("centered Hamiltonian has zero spectral width")
    return GecVector(
        values=numerators / width, numerators=numerators, shift=shift, width=width
    )


def gec_exact(h: SparseHamiltonian) -> GecVector:
    """GEC of every basis state from ``(Hc^2)_ii``; no diagonalization."""
    if h.dim < 2:
        raise ValueError("need at least two basis states")
    shift = h.trace() / h.dim
    centered = h.diagonal - shift
    if h.dense is not None:
        hc = h.dense.copy()
        idx = np.arange(h.dim)
        hc[idx, idx] = centered
        hsq_ii = np.einsum("ij,ij->i", hc, hc)
    else:
        hsq_ii = centered**2 + h.offdiag_sumsq()
    width = float(hsq_ii.mean())
    numerators = 2.0 * hsq_ii - centered**2
    return _finish_gec(numerators, shift, width)


def gec_offdiag_form(h: SparseHamiltonian) -> GecVector:
    """GEC via the off-diagonal reduction ``2 (A^2)_ii + Hc_ii^2``.

    Algebraically identical to :func:`gec_exact`; kept as an independent
    arithmetic route for cross-checks.
    """
    if h.dim < 2:
        raise ValueError("need at least two basis states")
    shift = h.trace() / h.dim
    centered = h.diagonal - shift
    asq_ii = h.offdiag_sumsq()
    numerators = 2.0 * asq_ii + centered**2
    width = (float((centered**2).sum()) + float((asq_ii).sum())) / h.dim
    return _finish_gec(numerators, shift, width)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_graph(h: SparseHamiltonian, basis: FockBasis, gec: GecVector, fmt: str) -> bytes:
    """Serialize the Fock-space graph with per-node GEC attributes.

    Formats: ``edge-csv`` (``src,dst,weight``; self-loops carry the centered
    diagonal), ``node-csv`` (``index,bitstring,gec``), and ``dot`` (both in
    one dot-like text).  GEC values are normalized by the mean square
    spectral width, node-count times the projected trace deficit.
    """
    if basis.dim != h.dim or gec.values.shape != (h.dim,):
        raise ValueError("basis, Hamiltonian, and GEC dimensions disagree")
    centered = h.diagonal - gec.shift
    rows, cols, weights = h.edge_list()
    buf = io.StringIO()
    if fmt == "edge-csv":
        buf.write("src,dst,weight\n")
        for i, j, w in zip(rows, cols, weights):
            buf.write(f"{i},{j},{_fmt(w)}\n")
        for i in range(h.dim):
            if centered[i] != 0.0:
                buf.write(f"{i},{i},{_fmt(centered[i])}\n")
    elif fmt == "node-csv":
        buf.write("index,bitstring,gec\n")
        for i in range(h.dim):
            buf.write(f"{i},{basis.bitstring(int(basis.states[i]))},{_fmt(gec.values[i])}\n")
    elif fmt == "dot":
        buf.write("graph fock {\n")
        for i in range(h.dim):
            label = basis.bitstring(int(basis.states[i]))
            buf.write(f'  {i} [label="{label}", gec={_fmt(gec.values[i])}];\n')
        for i, j, w in zip(rows, cols, weights):
            buf.write(f"  {i} -- {j} [weight={_fmt(w)}];\n")
        for i in range(h.dim):
            if centered[i] != 0.0:
                buf.write(f"  {i} -- {i} [weight={_fmt(centered[i])}];\n")
        buf.write("}\n")
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    return buf.getvalue().encode()
