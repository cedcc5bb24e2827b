"""Spectral and eigenstate thermalization diagnostics.

Gap ratios of consecutive level spacings, bipartite eigenstate entanglement
entropy against the random-state reference value, and diagonal matrix
elements of observables with their eigenstate-to-eigenstate fluctuations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockBasis, SparseHamiltonian

__all__ = [
    "GapRatioResult",
    "EthFluctuations",
    "gap_ratios",
    "entanglement_entropy",
    "page_value",
    "eth_diagonals",
    "eth_fluctuations",
]


@dataclass(frozen=True)
class GapRatioResult:
    ratios: np.ndarray
    spacings: np.ndarray
    mean: float
    window_fraction: float
    degenerate_pairs: int  # spacing pairs that were both zero (r set to 1)


@dataclass(frozen=True)
class EthFluctuations:
    diagonals: np.ndarray
    z: np.ndarray  # |O_{n+1,n+1} - O_{n,n}| inside the window
    z_av: float
    z_max: float
    window_fraction: float


def _central_slice(n: int, fraction: float) -> slice:
    if not 0 < fraction <= 1:
        raise ValueError("window fraction must be in (0, 1]")
    keep = max(1, int(round(n * fraction)))
    start = (n - keep) // 2
    return slice(start, start + keep)


def gap_ratios(eigenvalues, window_fraction: float = 1.0) -> GapRatioResult:
    """Ratios min(s_n, s_{n+1}) / max(s_n, s_{n+1}) of consecutive spacings.

    Input must be sorted ascending.  Exactly degenerate spacing pairs give
    r = 1 by convention and are counted in ``degenerate_pairs``.  The mean
    is taken over the central ``window_fraction`` of the ratio list.
    """
    e = np.asarray(eigenvalues, dtype=float).ravel()
    if e.size < 3:
        raise ValueError("need at least three eigenvalues")
    if np.any(np.diff(e) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    s = np.diff(e)
    lo = np.minimum(s[:-1], s[1:])
    hi = np.maximum(s[:-1], s[1:])
    degenerate = hi == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(degenerate, 1.0, lo / np.where(hi == 0.0, 1.0, hi))
    window = _central_slice(r.size, window_fraction)
    return GapRatioResult(
        ratios=r,
        spacings=s,
        mean=float(r[window].mean()),
        window_fraction=window_fraction,
        degenerate_pairs=int(degenerate.sum()),
    )


def page_value(L: int) -> float:
    """Random-state entanglement reference for the half cut: (L/2) ln 2 - 1/2."""
    if L % 2:
        raise ValueError("half cut needs an even number of sites")
    return (L / 2) * math.log(2.0) - 0.5


def entanglement_entropy(state, basis: FockBasis, cut_sites) -> float:
    """Von Neumann entropy of the reduced state over ``cut_sites``.

    The coefficient vector is regrouped into a (cut configuration) x (rest
    configuration) matrix over the configurations realized in the basis;
    the entropy comes from its singular values.
    """
    psi = np.asarray(state, dtype=float).ravel()
    if psi.size != basis.dim:
        raise ValueError("state length must match the basis dimension")
    norm = float(np.sqrt((psi**2).sum()))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (|psi| = {norm})")
    cut = sorted(set(int(s) for s in cut_sites))
    if not cut or any(s < 0 or s >= basis.sites for s in cut):
        raise ValueError("cut sites outside the lattice")
    rest = [s for s in range(basis.sites) if s not in cut]

    def pack(states, sites):
        packed = np.zeros(states.size, dtype=np.int64)
        for pos, s in enumerate(sites):
            packed |= ((states >> s) & 1) << pos
        return packed

    a_cfg = pack(basis.states, cut)
    b_cfg = pack(basis.states, rest)
    a_vals, a_idx = np.unique(a_cfg, return_inverse=True)
    b_vals, b_idx = np.unique(b_cfg, return_inverse=True)
    matrix = np.zeros((a_vals.size, b_vals.size))
    matrix[a_idx, b_idx] = psi
    sigma = np.linalg.svd(matrix, compute_uv=False)
    p = sigma**2
    p = p[p > 1e-15]
    return float(-(p * np.log(p)).sum())


def eth_diagonals(spectrum, observable) -> np.ndarray:
    """Diagonal matrix elements <E_n|O|E_n> in eigenvalue order.

    ``observable`` may be a SparseHamiltonian, a dense matrix, or the
    diagonal of an operator that is diagonal in the computational basis.
    """
    v = spectrum.eigenvectors
    if isinstance(observable, SparseHamiltonian):
        observable = observable.to_dense()
    obs = np.asarray(observable, dtype=float)
    if obs.ndim == 1:
        if obs.size != v.shape[0]:
            raise ValueError("observable diagonal length mismatch")
        return (v**2 * obs[:, None]).sum(axis=0)
    if obs.shape != (v.shape[0], v.shape[0]):
        raise ValueError("observable dimension mismatch")
    return np.einsum("in,in->n", v, obs @ v)


def eth_fluctuations(diagonals, window_fraction: float = 0.5) -> EthFluctuations:
    """Eigenstate-to-eigenstate fluctuations over the central window.

    ``z_n = |O_{n+1,n+1} - O_{n,n}|`` with both states inside the central
    ``window_fraction`` of the spectrum (default: central half).
    """
    o = np.asarray(diagonals, dtype=float).ravel()
    if o.size < 4:
        raise ValueError("need at least four diagonal elements")
    window = _central_slice(o.size, window_fraction)
    inside = o[window]
    if inside.size < 2:
        raise ValueError("window too small for fluctuations")
    z = np.abs(np.diff(inside))
    return EthFluctuations(
        diagonals=o,
        z=z,
        z_av=float(z.mean()),
        z_max=float(z.max()),
        window_fraction=window_fraction,
    )
