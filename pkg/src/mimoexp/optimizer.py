"""Reliability-rate tradeoff: optimal beta, the parametric exponent curve,
and the derived critical rate and zero-rate exponent."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, ValidationError
from .exponent import (
    cutoff_rate,
    d_e0_dbeta,
    d_e0_drho,
    e0_tilde,
    ergodic_capacity,
    integer_order,
)
from .workers import ordered_map

__all__ = [
    "ExponentPoint",
    "TradeoffCurve",
    "beta_star",
    "default_rho_grid",
    "tradeoff_curve",
    "exponent_at_rate",
    "operating_point",
]

DEFAULT_GRID_SIZE = 41
_NUDGE = 1e-4
_MAX_ITER = 200


@dataclass(frozen=True)
class ExponentPoint:
    """One point of the parametric curve; ``exponent == e0 - rho * rate``."""

    rho: float
    beta_star: float
    e0: float
    rate: float
    exponent: float

    @classmethod
    def build(cls, rho, beta, e0, rate):
        return cls(rho, beta, e0, rate, e0 - rho * rate)


@dataclass(frozen=True)
class TradeoffCurve:
    """Exponent curve sampled on a rho grid, plus its summary rates.

    ``points`` run from ``rho = 0`` (rate = capacity, exponent 0) to
    ``rho = 1`` (rate = critical rate).
    """

    points: tuple
    capacity: float
    critical_rate: float
    cutoff_rate: float
    zero_rate_exponent: float

    @property
    def rates(self):
        return np.array([p.rate for p in self.points])

    @property
    def exponents(self):
        return np.array([p.exponent for p in self.points])


def beta_star(spec, rho):
    """Maximiser of ``E0(rho, .)`` over ``(0, n_t]``.

    The stationarity condition can be written as
    ``(1 + rho)(n_t - beta) = rho * t`` with ``0 <= t < m``, so the root lies
    in ``[n_t - m rho / (1 + rho), n_t]``; the derivative is monotone there.
    """
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    n_t = float(spec.n_t)
    if rho == 0.0 or spec.gamma == 0.0:
        return n_t
    hi = n_t
    f_hi = d_e0_dbeta(spec, rho, hi)
    if f_hi >= 0.0:
        return n_t
    lo = n_t - spec.m * rho / (1.0 + rho)
    f_lo = d_e0_dbeta(spec, rho, lo)
    if f_lo <= 0.0:
        return lo
    try:
        root = brentq(lambda b: d_e0_dbeta(spec, rho, b), lo, hi,
                      xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=_MAX_ITER)
    except RuntimeError as exc:
        raise NumericalError(f"optimal beta did not converge: {exc}") from None
    if not (0.0 < root <= n_t):
        raise NumericalError(f"optimal beta {root} left (0, n_t]")
    return root


def default_rho_grid(size=DEFAULT_GRID_SIZE):
    """``1 - cos(theta)`` on a uniform theta grid: dense near rho = 0."""
    theta = np.linspace(0.0, 0.5 * math.pi, size)
    grid = 1.0 - np.cos(theta)
    grid[0], grid[-1] = 0.0, 1.0
    return grid


def _nudge(spec, rho):
    k = integer_order(spec, rho)
    if k is not None and k < spec.m and 0.0 < rho < 1.0:
        return rho - _NUDGE
    return rho


def _point(spec, rho):
    beta = beta_star(spec, rho)
    return ExponentPoint.build(rho, beta, e0_tilde(spec, rho, beta), d_e0_drho(spec, rho, beta))


def tradeoff_curve(spec, rho_grid=None, workers=None):
    """Sample the exponent curve ``(R(rho), E_r(rho))``.

    Parameters
    ----------
    spec : ChannelSpec
    rho_grid : sequence of float, optional
        Ascending, within ``[0, 1]``, containing both endpoints.  Defaults to
        :func:`default_rho_grid`.  Interior points landing on a removable
        singularity ``n_c rho in {1, ..., m - 1}`` are moved down by 1e-4.
    workers : int, optional
        Thread count; defaults to the ``MIMOEXP_THREADS`` policy.
    """
    grid = default_rho_grid() if rho_grid is None else np.asarray(rho_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValidationError("rho grid needs at least two points")
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValidationError("rho grid must start at 0 and end at 1")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("rho grid must be strictly ascending")
    grid = [_nudge(spec, float(r)) for r in grid]
    points = tuple(ordered_map(lambda r: _point(spec, r), grid, workers))
    last = points[-1]
    return TradeoffCurve(
        points=points,
        capacity=points[0].rate,
        critical_rate=last.rate,
        cutoff_rate=cutoff_rate(spec),
        zero_rate_exponent=last.e0,
    )


def exponent_at_rate(curve, rate):
    """Random coding exponent at ``rate`` (nats/symbol).

    Below the critical rate the curve is the straight line
    ``E0 - rate``; above it a monotone cubic through the sampled points.
    """
    if rate < 0:
        raise ValidationError(f"rate must be non-negative, got {rate}")
    if rate >= curve.capacity:
        raise DomainError(
            f"rate {rate:.6g} is at or above capacity {curve.capacity:.6g}: "
            "unachievable with positive exponent"
        )
    if rate <= curve.critical_rate:
        return curve.zero_rate_exponent - rate
    r = curve.rates[::-1]
    e = curve.exponents[::-1]
    if np.any(np.diff(r) <= 0):
        raise NumericalError("sampled rates are not strictly monotone in rho")
    return float(PchipInterpolator(r, e)(rate))


def operating_point(spec, rate, capacity=None):
    """Exact optimising point at ``rate``: solves ``R(rho) = rate``.

    Returns an :class:`ExponentPoint` whose ``rate`` is the requested one.
    Below the critical rate ``rho`` is pinned to 1.
    """
    cap = ergodic_capacity(spec) if capacity is None else capacity
    if rate >= cap:
        raise DomainError(
            f"rate {rate:.6g} is at or above capacity {cap:.6g}: "
            "reliable communication impossible at this rate"
        )
    if rate < 0:
        raise ValidationError(f"rate must be non-negative, got {rate}")
    end = _point(spec, 1.0)
    if rate <= end.rate:
        return ExponentPoint.build(1.0, end.beta_star, end.e0, rate)

    def gap(rho):
        return d_e0_drho(spec, rho, beta_star(spec, rho)) - rate

    try:
        rho = brentq(gap, 0.0, 1.0, xtol=1e-12, maxiter=_MAX_ITER)
    except (RuntimeError, ValueError) as exc:
        raise NumericalError(f"operating point search failed: {exc}") from None
    beta = beta_star(spec, rho)
    return ExponentPoint.build(rho, beta, e0_tilde(spec, rho, beta), rate)
