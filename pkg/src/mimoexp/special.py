"""Scalar special functions: Pochhammer symbols and the semi-infinite
integral that fills every entry of the determinantal formulas.

The integral is

    G(kappa, nu; a, b, mu) = int_0^inf (1 + a x)^(mu - 1) ln^(nu - 1)(1 + a x)
                                        x^(kappa - 1) exp(-x / b) dx

for integer ``kappa >= 1``, ``nu`` in {1, 2}, ``a, b > 0`` and real ``mu``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = [
    "GIntegralParams",
    "pochhammer",
    "log_pochhammer_signed",
    "g_integral",
    "g_integral_array",
    "log_g_integral_array",
]

# Trapezoid step in s = ln(x / b).  The integrand is analytic in the strip
# |Im s| < pi / 2, so the error decays like exp(-pi^2 / h).
_STEP = 0.1
_LOG_TINY = 40.0


@dataclass(frozen=True)
class GIntegralParams:
    """Validated argument bundle for :func:`g_integral`."""

    kappa: int
    nu: int
    a: float
    b: float
    mu: float

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ValidationError(f"kappa must be a positive integer, got {self.kappa}")
        if self.nu not in (1, 2):
            raise ValidationError(f"nu must be 1 or 2, got {self.nu}")
        if not (self.a > 0 and self.b > 0):
            raise ValidationError(f"a and b must be positive, got a={self.a}, b={self.b}")
        if not math.isfinite(self.mu):
            raise ValidationError(f"mu must be finite, got {self.mu}")


def pochhammer(a, n):
    """Rising factorial ``a (a + 1) ... (a + n - 1)`` with ``(a)_0 = 1``."""
    if n < 0:
        raise ValidationError("n must be non-negative")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def log_pochhammer_signed(a, n):
    """Sign and log-magnitude of the rising factorial ``(a)_n``.

    Returns
    -------
    sign : int
        -1, 0 or +1.  Zero exactly when one of the factors vanishes.
    logmag : float
        ``ln |(a)_n|``; ``-inf`` when ``sign == 0``.
    """
    if n < 0:
        raise ValidationError("n must be non-negative")
    sign = 1
    logmag = 0.0
    for k in range(n):
        f = a + k
        if f == 0:
            return 0, -math.inf
        if f < 0:
            sign = -sign
        logmag += math.log(abs(f))
    return sign, logmag


def _grid(kappa, nu, c, mu):
    # Common s-grid covering every element of the batch.
    c_big = np.maximum(c, 1.0)
    lo = -_LOG_TINY - np.log(c_big) - np.log(np.maximum(np.abs(mu), 1.0))
    # the (1 + c t)^(mu-1) factor behaves like t^(mu-1) for large t
    power = kappa + np.maximum(mu - 1.0, 0.0) + (nu - 1)
    t_hi = 60.0 + 3.0 * power
    s_lo = float(np.min(lo))
    s_hi = float(np.log(np.max(t_hi)))
    # the peak narrows like 1 / sqrt(power); keep about three nodes per peak width
    step = _STEP * min(1.0, math.sqrt(10.0 / float(np.max(power))))
    n = int(math.ceil((s_hi - s_lo) / step)) + 1
    return np.linspace(s_lo, s_hi, n)


def log_g_integral_array(kappa, nu, a, b, mu):
    """Natural log of :func:`g_integral` evaluated elementwise.

    All arguments broadcast against each other.  The integral is computed
    with the trapezoid rule in the variable ``s = ln(x / b)``, which turns
    the semi-infinite range into a doubly-infinite one with doubly
    exponential decay at the upper end and exponential decay (rate
    ``kappa``) at the lower end.
    """
    kappa, nu, a, b, mu = np.broadcast_arrays(
        np.asarray(kappa, dtype=float),
        np.asarray(nu, dtype=float),
        np.asarray(a, dtype=float),
        np.asarray(b, dtype=float),
        np.asarray(mu, dtype=float),
    )
    shape = kappa.shape
    kappa, nu, a, b, mu = (x.ravel() for x in (kappa, nu, a, b, mu))
    if kappa.size == 0:
        return np.zeros(shape)
    if np.any(kappa < 1) or np.any((nu != 1) & (nu != 2)):
        raise ValidationError("kappa must be >= 1 and nu in {1, 2}")
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValidationError("a and b must be positive")
    c = a * b
    s = _grid(kappa, nu, c, mu)
    t = np.exp(s)[None, :]
    ct = c[:, None] * t
    lg = np.log1p(ct)
    with np.errstate(divide="ignore"):
        logf = kappa[:, None] * s[None, :] - t + (mu[:, None] - 1.0) * lg
        logf = np.where(nu[:, None] == 2, logf + np.log(lg), logf)
    peak = np.max(logf, axis=1)
    if not np.all(np.isfinite(peak)):
        raise NumericalError("G-integral integrand is not finite on the grid")
    total = np.sum(np.exp(logf - peak[:, None]), axis=1)
    # both ends of the grid must be negligible for the rule to be accurate
    edge = np.maximum(logf[:, 0], logf[:, -1]) - peak
    if np.any(edge > -30.0):
        raise NumericalError(
            "G-integral quadrature range too short", condition=float(np.max(edge))
        )
    out = kappa * np.log(b) + math.log(s[1] - s[0]) + peak + np.log(total)
    return out.reshape(shape)


def g_integral_array(kappa, nu, a, b, mu):
    """Elementwise :func:`g_integral` for broadcastable array arguments."""
    return np.exp(log_g_integral_array(kappa, nu, a, b, mu))


def g_integral(p):
    """Value of the G-integral for a :class:`GIntegralParams` bundle.

    Relative accuracy is better than 1e-9 over the parameter ranges the
    exponent formulas produce.
    """
    if not isinstance(p, GIntegralParams):
        p = GIntegralParams(*p)
    return float(g_integral_array(p.kappa, p.nu, p.a, p.b, p.mu))
