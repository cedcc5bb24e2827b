"""Model builders: Rosenzweig-Porter, quantum-sun, and triangular-lattice-gas
Hamiltonians as weighted Fock-space graphs.

Conventions fixed here and relied on by the analytic module:

* spin-1/2 operators with ``S^z`` eigenvalues +-1/2 and ``S^x`` matrix
  element 1/2,
* GOE normalization with off-diagonal variance 1 and diagonal variance 2,
* triangular two-leg ladder mapped to a chain by the zig-zag pattern, so
  site ``i`` is adjacent to ``i +- 1`` and ``i +- 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError
from .fock import (
    FockBasis,
    FullSpinBasis,
    ParticleSectorBasis,
    SparseHamiltonian,
    enumerate_basis,
)
from .numerics import RngStream, goe_from_generator, sample_goe

__all__ = [
    "GoeParams",
    "RpmParams",
    "EpsMoments",
    "QsmParams",
    "QsmRealization",
    "TlgParams",
    "Bond",
    "rpm_sample",
    "qsm_sample",
    "qsm_basis",
    "tlg_bonds",
    "tlg_build",
    "tlg_basis",
    "tlg_site_occupation",
    "tlg_parity_blocks",
    "build_hamiltonian",
    "ensemble_trace_center",
]

RPM_DENSE_CAPACITY = 2**13
QSM_CAPACITY = 2**20


@dataclass(frozen=True)
class GoeParams:
    """Pure GOE matrix of the given dimension (the gamma=0, no-diagonal limit)."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


@dataclass(frozen=True)
class RpmParams:
    """Diagonal standard normals plus a GOE suppressed by dim^(-gamma/2)."""

    dim: int
    gamma: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class EpsMoments:
    """Second and fourth moment of the diagonal-entry distribution."""

    m2: float = 1.0
    m4: float = 3.0

    def __post_init__(self):
        if self.m2 <= 0:
            raise ValueError("m2 must be positive")
        if self.m4 < self.m2**2:
            raise ValueError("m4 must be >= m2^2")


@dataclass(frozen=True)
class QsmParams:
    """GOE grain of ``grain_spins`` spins coupled to ``outer_spins`` field spins.

    Outer spin ``l`` couples to a random grain spin with strength
    ``g0 * alpha**u_l``; ``u_1 = 0`` and ``u_l`` is uniform in
    ``[l-1-zeta, l-1+zeta]`` otherwise.  Outer fields are uniform in
    ``[h - w, h + w]``.
    """

    grain_spins: int
    outer_spins: int
    alpha: float
    g0: float = 1.0
    h: float = 1.0
    w: float = 0.5
    zeta: float = 0.2

    def __post_init__(self):
        if self.grain_spins < 1:
            raise ValueError("need at least one grain spin")
        if self.outer_spins < 0:
            raise ValueError("outer_spins must be >= 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.zeta < 0:
            raise ValueError("zeta must be >= 0")


@dataclass(frozen=True)
class QsmRealization:
    """Sampled disorder of one quantum-sun instance."""

    u: np.ndarray  # exponents, u[0] == 0
    fields: np.ndarray  # z-fields per outer spin
    attach: np.ndarray  # grain-site index (0-based) per outer spin
    grain: np.ndarray  # normalized GOE block R = M / sqrt(2^N + 1)


@dataclass(frozen=True)
class TlgParams:
    """Hard-core bosons with constrained hops on the triangular ladder.

    Physics sweeps use even ``sites`` at half filling; odd sizes are allowed
    for graph exports.  ``interaction`` is in units of the hopping.
    """

    sites: int
    particles: int
    interaction: float
    hopping: float = 1.0
    bc: str = "periodic"

    def __post_init__(self):
        if not (0 <= self.particles <= self.sites):
            raise ValueError("particles outside [0, sites]")
        if self.bc not in ("periodic", "open"):
            raise ValueError("bc must be 'periodic' or 'open'")
        if self.bc == "periodic" and self.sites < 6:
            raise CapacityError("periodic ladder needs at least 6 sites")
        if self.bc == "open" and self.sites < 3:
            raise ValueError("open ladder needs at least 3 sites")


@dataclass(frozen=True)
class Bond:
    """Nearest-neighbor pair with its common neighborhood on the ladder."""

    a: int
    b: int
    common: tuple

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("bond endpoints must differ")
        if self.a in self.common or self.b in self.common:
            raise ValueError("bond endpoints cannot be their own neighbors")
        if not 1 <= len(self.common) <= 2:
            raise ValueError("common neighborhood has one or two sites")


def rpm_sample(p: RpmParams, rng: RngStream) -> SparseHamiltonian:
    """One Rosenzweig-Porter realization, dense-backed.

    Draw order per stream: diagonal entries first, then the GOE block.
    """
    if p.dim > RPM_DENSE_CAPACITY:
        raise CapacityError(f"dense storage capped at dim {RPM_DENSE_CAPACITY}")
    gen = rng.generator()
    eps = gen.standard_normal(p.dim)
    m = goe_from_generator(gen, p.dim)
    h = p.dim ** (-p.gamma / 2.0) * m
    idx = np.arange(p.dim)
    h[idx, idx] += eps
    return SparseHamiltonian.from_dense(h)


def qsm_basis(p: QsmParams) -> FockBasis:
    """Full spin basis over grain + outer sites; grain sites occupy the low bits."""
    return enumerate_basis(FullSpinBasis(p.grain_spins + p.outer_spins))


def qsm_sample(p: QsmParams, rng: RngStream) -> tuple[SparseHamiltonian, QsmRealization]:
    """One quantum-sun realization plus its disorder record.

    Draw order per stream: positions ``u_l`` (l >= 2), fields, grain
    attachments, grain GOE block.
    """
    n, L = p.grain_spins, p.outer_spins
    dim = 2 ** (n + L)
    if dim > QSM_CAPACITY:
        raise CapacityError(f"quantum-sun build capped at 2^{int(math.log2(QSM_CAPACITY))} states")
    gen = rng.generator()
    u = np.zeros(L)
    if L > 1:
        u[1:] = np.arange(1, L) + gen.uniform(-p.zeta, p.zeta, L - 1)
    fields = gen.uniform(p.h - p.w, p.h + p.w, L)
    attach = gen.integers(0, n, L)
    grain = goe_from_generator(gen, 2**n) / np.sqrt(2**n + 1)

    states = np.arange(dim, dtype=np.int64)
    grain_idx = states & (2**n - 1)
    diag = np.diag(grain)[grain_idx].copy()
    for ell in range(L):
        diag += fields[ell] * (((states >> (n + ell)) & 1) - 0.5)

    rows, cols, weights = [], [], []
    # Grain block acts identically within every fixed outer configuration.
    outer = np.arange(2**L, dtype=np.int64) << n
    for a in range(2**n):
        for b in range(a + 1, 2**n):
            rows.append(outer + a)
            cols.append(outer + b)
            weights.append(np.full(outer.size, grain[a, b]))
    # Coupling flips one grain spin and one outer spin; element (1/2)(1/2).
    for ell in range(L):
        mask = (1 << int(attach[ell])) | (1 << (n + ell))
        partner = states ^ mask
        sel = states < partner
        rows.append(states[sel])
        cols.append(partner[sel])
        weights.append(np.full(int(sel.sum()), p.g0 * p.alpha ** u[ell] / 4.0))

    ham = SparseHamiltonian.from_parts(
        dim,
        diag,
        np.concatenate(rows) if rows else np.empty(0, dtype=np.int64),
        np.concatenate(cols) if cols else np.empty(0, dtype=np.int64),
        np.concatenate(weights) if weights else np.empty(0),
    )
    return ham, QsmRealization(u=u, fields=fields, attach=attach, grain=grain)


def _wrap(i: int, L: int, periodic: bool):
    if periodic:
        return i % L
    return i if 0 <= i < L else None


def tlg_bonds(L: int, bc: str = "periodic") -> list[Bond]:
    """Ladder bonds in zig-zag indexing.

    Cross-leg bonds ``(i, i+1)`` have common neighborhood ``{i-1, i+2}``;
    same-leg bonds ``(i, i+2)`` have ``{i+1}``.  Periodic ladders carry 2L
    bonds; open ones truncate ranges and common sets at the edges.
    """
    periodic = bc == "periodic"
    if periodic and L < 6:
        raise CapacityError("periodic ladder needs at least 6 sites")
    if not periodic and L < 3:
        raise ValueError("open ladder needs at least 3 sites")
    bonds = []
    top = L if periodic else L - 1
    for i in range(top):
        common = tuple(
            s for s in (_wrap(i - 1, L, periodic), _wrap(i + 2, L, periodic)) if s is not None
        )
        bonds.append(Bond(i, (i + 1) % L, common))
    top = L if periodic else L - 2
    for i in range(top):
        bonds.append(Bond(i, (i + 2) % L, ((i + 1) % L,)))
    return bonds


def tlg_basis(p: TlgParams) -> FockBasis:
    return enumerate_basis(ParticleSectorBasis(p.sites, p.particles))


def tlg_build(p: TlgParams) -> SparseHamiltonian:
    """Constrained lattice-gas Hamiltonian in the fixed-particle-number sector.

    Per bond, a hop (weight ``-hopping``) and an interaction unit (weight
    ``+interaction`` when exactly one endpoint is occupied) both act only if
    the bond's common neighborhood is not fully occupied.
    """
    basis = tlg_basis(p)
    states = basis.states
    dim = basis.dim
    diag_units = np.zeros(dim, dtype=np.int64)
    rows, cols = [], []
    for bond in tlg_bonds(p.sites, p.bc):
        occ_a = ((states >> bond.a) & 1).astype(bool)
        occ_b = ((states >> bond.b) & 1).astype(bool)
        cmask = 0
        for s in bond.common:
            cmask |= 1 << s
        unconstrained = (states & cmask) != cmask
        diag_units += (occ_a ^ occ_b) & unconstrained
        # Each unordered state pair arises once, from the side where
        # bond.a holds the particle; from_parts orients the edge.
        movers = occ_a & ~occ_b & unconstrained
        if movers.any():
            src = states[movers]
            dst = src ^ ((1 << bond.a) | (1 << bond.b))
            rows.append(np.nonzero(movers)[0])
            cols.append(basis.index_of(dst))
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)
    weights = np.full(rows.size, -p.hopping)
    return SparseHamiltonian.from_parts(dim, p.interaction * diag_units, rows, cols, weights)


def tlg_site_occupation(p: TlgParams, site: int) -> np.ndarray:
    """Diagonal of the occupation operator of one site, in basis order."""
    basis = tlg_basis(p)
    return ((basis.states >> site) & 1).astype(float)


def tlg_parity_blocks(p: TlgParams) -> tuple[np.ndarray, np.ndarray]:
    """Reflection-symmetric blocks (even, odd) of an open-boundary ladder.

    Site reflection ``i -> L-1-i`` commutes with the open-boundary
    Hamiltonian; resolving it yields symmetry-free spectra for level
    statistics.  Periodic ladders additionally conserve momentum and are not
    supported here.
    """
    if p.bc != "open":
        raise ValueError("parity blocks require open boundaries")
    basis = tlg_basis(p)
    h = tlg_build(p).to_dense()
    L = p.sites
    mirrored = np.zeros(basis.dim, dtype=np.int64)
    for s in range(L):
        mirrored |= ((basis.states >> s) & 1) << (L - 1 - s)
    perm = basis.index_of(mirrored)
    even_cols, odd_cols = [], []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(basis.dim):
        j = int(perm[i])
        if i == j:
            col = np.zeros(basis.dim)
            col[i] = 1.0
            even_cols.append(col)
        elif i < j:
            col = np.zeros(basis.dim)
            col[i] = inv_sqrt2
            col[j] = inv_sqrt2
            even_cols.append(col)
            col = np.zeros(basis.dim)
            col[i] = inv_sqrt2
            col[j] = -inv_sqrt2
            odd_cols.append(col)
    u_even = np.column_stack(even_cols)
    u_odd = np.column_stack(odd_cols)
    return u_even.T @ h @ u_even, u_odd.T @ h @ u_odd


def build_hamiltonian(model, rng: RngStream) -> SparseHamiltonian:
    """Uniform entry point used by ensemble runners and the CLI."""
    if isinstance(model, GoeParams):
        return SparseHamiltonian.from_dense(sample_goe(model.dim, rng))
    if isinstance(model, RpmParams):
        return rpm_sample(model, rng)
    if isinstance(model, QsmParams):
        return qsm_sample(model, rng)[0]
    if isinstance(model, TlgParams):
        return tlg_build(model)
    raise TypeError(f"unknown model {model!r}")


def ensemble_trace_center(model) -> float | None:
    """Ensemble-exact mean of ``Tr(H)/D``; ``None`` means use the instance value."""
    if isinstance(model, (GoeParams, RpmParams, QsmParams)):
        return 0.0
    if isinstance(model, TlgParams):
        return None
    raise TypeError(f"unknown model {model!r}")
