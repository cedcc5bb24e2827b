"""Closed-form GEC moments for GOE, Rosenzweig-Porter, and quantum-sun
ensembles, at finite size and in the thermodynamic limit, plus crossing-point
and scaling-exponent analysis.

Size arguments accept ``math.inf`` (also exported as ``THERMODYNAMIC``) to
select the thermodynamic-limit branch.  Ratios of size powers are assembled
in log space so that Hilbert-space dimensions far beyond float range (say
2**1000) evaluate without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CrossingError
from .models import EpsMoments, QsmParams

__all__ = [
    "THERMODYNAMIC",
    "AnalyticMoments",
    "QsmAnalyticTerms",
    "CrossingPoint",
    "ScalingFit",
    "goe_gec_moments",
    "rpm_gec_mean",
    "rpm_gec_var",
    "sinhc_factor",
    "qsm_terms",
    "qsm_gec_mean",
    "qsm_gec_var",
    "qsm_var_numerator",
    "crossing_point",
    "extrapolate_crossing",
    "fit_scaling_exponent",
]

THERMODYNAMIC = math.inf


@dataclass(frozen=True)
class AnalyticMoments:
    """Closed-form (mean, variance) of the GEC at a given size.

    ``size`` is the Hilbert-space dimension or system length the values were
    evaluated at, with ``math.inf`` marking the thermodynamic limit.  Exact
    surfaces (GOE) carry :class:`fractions.Fraction` entries.
    """

    mean: object
    variance: object
    size: object


@dataclass(frozen=True)
class QsmAnalyticTerms:
    """Displacement factors and the coupling geometric sum for one (alpha, L)."""

    f2: float  # sinhc factor at 2*zeta
    f4: float  # sinhc factor at 4*zeta
    geometric_sum: float  # (1 - alpha^(2L)) / (1 - alpha^2), = L at alpha = 1


@dataclass(frozen=True)
class CrossingPoint:
    param_star: float
    pair: tuple
    method: str = "linear-interpolation-of-difference"


@dataclass(frozen=True)
class ScalingFit:
    nu: float
    prefactor: float
    residual: float


def goe_gec_moments(dim) -> AnalyticMoments:
    """Exact GEC mean and variance of a pure GOE matrix."""
    if dim == THERMODYNAMIC:
        return AnalyticMoments(mean=Fraction(2), variance=Fraction(0), size=THERMODYNAMIC)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    d = int(dim)
    return AnalyticMoments(
        mean=2 - Fraction(2, d + 1),
        variance=Fraction(8 * d, (d + 1) ** 2),
        size=d,
    )


def _log_dim_power(dim, exponent: float) -> float:
    """log(dim**exponent) for int or float dim of any magnitude."""
    if exponent == 0.0:
        return 0.0
    return exponent * math.log(dim)


def _logsumexp(logs) -> float:
    finite = [x for x in logs if x != -math.inf]
    if not finite:
        return -math.inf
    top = max(finite)
    return top + math.log(sum(math.exp(x - top) for x in finite))


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def rpm_gec_mean(dim, gamma: float, eps: EpsMoments = EpsMoments()) -> float:
    """(m2 + 2 dim^(1-gamma)) / (m2 + dim^(1-gamma) + dim^(-gamma))."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if dim == THERMODYNAMIC:
        if gamma < 1:
            return 2.0
        if gamma > 1:
            return 1.0
        return (eps.m2 + 2.0) / (eps.m2 + 1.0)
    t = _log_dim_power(dim, 1.0 - gamma)
    num = _logsumexp([_log(eps.m2), math.log(2.0) + t])
    den = _logsumexp([_log(eps.m2), t, _log_dim_power(dim, -gamma)])
    return math.exp(num - den)


def rpm_gec_var(dim, gamma: float, eps: EpsMoments = EpsMoments()) -> float:
    """(m4 - m2^2 + 8 dim^(-gamma) m2 + 8 dim^(1-2 gamma)) over the squared width."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    excess = eps.m4 - eps.m2**2
    if dim == THERMODYNAMIC:
        if gamma < 1:
            return 0.0
        if gamma > 1:
            return excess / eps.m2**2
        return excess / (eps.m2 + 1.0) ** 2
    num = _logsumexp(
        [
            _log(excess),
            math.log(8.0 * eps.m2) + _log_dim_power(dim, -gamma),
            math.log(8.0) + _log_dim_power(dim, 1.0 - 2.0 * gamma),
        ]
    )
    den = _logsumexp(
        [_log(eps.m2), _log_dim_power(dim, 1.0 - gamma), _log_dim_power(dim, -gamma)]
    )
    return math.exp(num - 2.0 * den)


def sinhc_factor(k_zeta: float, alpha: float) -> float:
    """sinh(k_zeta * ln(alpha)) / (k_zeta * ln(alpha)); 1 at the removable point.

    This is the mean of ``alpha**x`` over a displacement interval of
    half-width ``k_zeta``, relative to the interval-center value.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = k_zeta * math.log(alpha)
    if x == 0.0:
        return 1.0
    return math.sinh(x) / x


def _log_geometric(alpha: float, L) -> float:
    """log of (1 - alpha^(2L)) / (1 - alpha^2); the alpha = 1 limit is L."""
    if alpha == 1.0:
        return math.log(L)
    if alpha < 1.0:
        return math.log1p(-alpha ** (2 * L)) - math.log1p(-(alpha**2))
    # alpha > 1: (alpha^(2L) - 1) / (alpha^2 - 1), assembled in log space
    return 2 * L * math.log(alpha) + math.log1p(-math.exp(-2 * L * math.log(alpha))) - math.log(
        alpha**2 - 1.0
    )


def qsm_terms(p: QsmParams, L=None) -> QsmAnalyticTerms:
    length = p.outer_spins if L is None else L
    return QsmAnalyticTerms(
        f2=sinhc_factor(2 * p.zeta, p.alpha),
        f4=sinhc_factor(4 * p.zeta, p.alpha),
        geometric_sum=math.exp(_log_geometric(p.alpha, length)),
    )


def _grain_mean(n: int) -> float:
    return 2.0 ** (n + 1) / (2.0**n + 1.0)


def _field_q(p: QsmParams) -> float:
    return p.h**2 + p.w**2 / 3.0


def _scaled_ratio(a_num, b_num, a_den, b_den, log_g):
    """(a_num + b_num*G)/(a_den + b_den*G) robust against huge G."""
    if log_g < 700.0:
        g = math.exp(log_g)
        return (a_num + b_num * g) / (a_den + b_den * g)
    inv = math.exp(-log_g)
    return (a_num * inv + b_num) / (a_den * inv + b_den)


def qsm_gec_mean(p: QsmParams, L=None, mode: str = "exact-F") -> float:
    """Ensemble GEC mean of the quantum-sun model at length ``L``.

    ``mode='exact-F'`` keeps the displacement factors; ``mode='small-zeta'``
    sets them to one.  ``L=math.inf`` selects the limit branch: 2 in the
    ergodic phase (alpha > 1), 1 for alpha < 1, and the finite crossing value
    at alpha = 1.
    """
    if mode not in ("exact-F", "small-zeta"):
        raise ValueError("mode must be 'exact-F' or 'small-zeta'")
    length = p.outer_spins if L is None else L
    q = _field_q(p)
    if length == THERMODYNAMIC:
        if p.alpha > 1:
            return 2.0
        if p.alpha < 1:
            return 1.0
        return 1.0 + p.g0**2 / (p.g0**2 + 4.0 * q)
    f2 = sinhc_factor(2 * p.zeta, p.alpha) if mode == "exact-F" else 1.0
    # coupling term g0^2/8 * [1 + F2 (G - 1)] split into constant + G parts
    a_num = _grain_mean(p.grain_spins) + length / 4.0 * q + p.g0**2 / 8.0 * (1.0 - f2)
    b_num = p.g0**2 / 8.0 * f2
    a_den = 1.0 + length / 4.0 * q + p.g0**2 / 16.0 * (1.0 - f2)
    b_den = p.g0**2 / 16.0 * f2
    return _scaled_ratio(a_num, b_num, a_den, b_den, _log_geometric(p.alpha, length))


def qsm_var_numerator(p: QsmParams, L) -> float:
    """Variance of the GEC numerator; independent of alpha by construction."""
    n = p.grain_spins
    q = _field_q(p)
    grain = 2.0 ** (n + 3) / (2.0**n + 1.0) ** 2
    quartic = L / 16.0 * (p.h**4 + 2.0 * p.h**2 * p.w**2 + p.w**4 / 5.0)
    pairs = (2.0 * L**2 - 3.0 * L) / 16.0 * q**2
    cross = 2.0 * L * q / (2.0**n + 1.0)
    return grain + quartic + pairs + cross


def qsm_gec_var(p: QsmParams, L=None) -> float:
    """Ensemble GEC variance of the quantum-sun model (small-displacement form).

    The alpha dependence enters only through the squared spectral width in
    the denominator.  ``L=math.inf``: 0 for alpha > 1, 2 for alpha < 1, and
    ``32 q^2 / (g0^2 + 4q)^2`` at alpha = 1.
    """
    length = p.outer_spins if L is None else L
    q = _field_q(p)
    if length == THERMODYNAMIC:
        if p.alpha > 1:
            return 0.0
        if p.alpha < 1:
            return 2.0
        return 32.0 * q**2 / (p.g0**2 + 4.0 * q) ** 2
    num = qsm_var_numerator(p, length)
    a_den = 1.0 + length / 4.0 * q
    b_den = p.g0**2 / 16.0
    log_g = _log_geometric(p.alpha, length)
    if log_g < 350.0:
        g = math.exp(log_g)
        return num / (a_den + b_den * g) ** 2
    inv = math.exp(-log_g)
    scaled = a_den * inv + b_den
    return num * inv**2 / scaled**2


def crossing_point(curve_a, curve_b) -> CrossingPoint:
    """Parameter where two curves sampled on a common grid intersect.

    Expects exactly one sign change of ``A - B`` along the grid; the zero is
    located by linear interpolation of the difference.
    """
    pa = np.asarray([p for p, _ in curve_a], dtype=float)
    pb = np.asarray([p for p, _ in curve_b], dtype=float)
    if pa.shape != pb.shape or not np.array_equal(pa, pb):
        raise ValueError("curves must share one ascending parameter grid")
    if np.any(np.diff(pa) <= 0):
        raise ValueError("parameter grid must be strictly ascending")
    diff = np.asarray([v for _, v in curve_a], dtype=float) - np.asarray(
        [v for _, v in curve_b], dtype=float
    )
    signs = np.sign(diff)
    changes = [
        k for k in range(diff.size - 1) if signs[k] != signs[k + 1] and signs[k + 1] != 0
    ]
    changes += [k for k in range(diff.size - 1) if signs[k + 1] == 0 and signs[k] != 0]
    changes = sorted(set(changes))
    if len(changes) == 0:
        raise CrossingError("difference of curves never changes sign")
    if len(changes) > 1:
        intervals = [(float(pa[k]), float(pa[k + 1])) for k in changes]
        raise CrossingError(f"multiple sign changes in intervals {intervals}")
    k = changes[0]
    frac = diff[k] / (diff[k] - diff[k + 1])
    return CrossingPoint(param_star=float(pa[k] + frac * (pa[k + 1] - pa[k])), pair=(k, k + 1))


def extrapolate_crossing(points) -> tuple[float, float]:
    """Least-squares fit ``V*(L) = V_inf + c / L``; returns (V_inf, residual)."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least three (L, V*) points")
    L = np.asarray([p[0] for p in pts], dtype=float)
    v = np.asarray([p[1] for p in pts], dtype=float)
    if np.all(L == L[0]):
        raise ValueError("degenerate fit: all sizes equal")
    design = np.column_stack([np.ones_like(L), 1.0 / L])
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coef - v) ** 2)))
    return float(coef[0]), residual


def fit_scaling_exponent(sizes, deviations) -> ScalingFit:
    """Log-log least squares of ``|var - var_inf| ~ prefactor * size^(-nu)``."""
    s = np.asarray(sizes, dtype=float)
    d = np.asarray(deviations, dtype=float)
    if s.size < 2 or s.size != d.size:
        raise ValueError("need matching size/deviation arrays, length >= 2")
    if np.any(d <= 0):
        raise ValueError("deviations must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(s), np.log(d), 1)
    fitted = slope * np.log(s) + intercept
    residual = float(np.sqrt(np.mean((fitted - np.log(d)) ** 2)))
    return ScalingFit(nu=float(-slope), prefactor=float(np.exp(intercept)), residual=residual)
