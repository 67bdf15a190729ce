"""Closed-form Gallager function for equal-power Gaussian inputs.

For a :class:`~mimoexp.channel.ChannelSpec` the quantity evaluated here is

    E0(rho, beta) = c(rho, beta) - ln Z(rho, beta) / n_c

with

    c(rho, beta) = (1 + rho)(n_t - beta) + n_t (1 + rho) ln(beta / n_t)
    Z(rho, beta) = E[ det(I_m + eta Theta)^(-n_c rho) ],
    eta = gamma / (beta (1 + rho)).

``Z`` is expressed through determinants of small matrices whose entries
are G-integrals (see :mod:`mimoexp.special`).  Three evaluation routes are
available:

* ``"iid"``: both correlation matrices are identity;
* ``"integer"``: ``n_c * rho`` is one of ``1..m``;
* ``"general"``: any ``n_c * rho`` outside ``{1, ..., m - 1}``.

The general route recovers ``Z`` from a determinant that cancels heavily
when ``eta`` is small and the correlation is strong.  Each evaluation checks
the condition number of the (equilibrated) matrix: above ``1e8`` an
:class:`~mimoexp.errors.IllConditionedWarning` is issued, above ``1e12`` the
result carries no reliable digits and :class:`~mimoexp.errors.NumericalError`
is raised.  Monte Carlo (:mod:`mimoexp.montecarlo`) is the fallback there.

All rates are in nats per symbol.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import IllConditionedWarning, NumericalError, ValidationError
from .linalg import signed_logdet
from .special import g_integral_array
from .spectra import power_block

__all__ = [
    "SNAP_TOL",
    "COND_WARN",
    "COND_FAIL",
    "ClosedFormTerms",
    "base_term",
    "base_term_dbeta",
    "base_term_drho",
    "log_zeta",
    "closed_form_terms",
    "e0_tilde",
    "d_e0_dbeta",
    "d_e0_drho",
    "ergodic_capacity",
    "cutoff_rate",
    "integer_order",
    "singular_distance",
]

# n_c * rho this close to an integer in 1..m is evaluated on the integer route
SNAP_TOL = 1e-6
# the analytic rho-derivative is replaced by finite differences this close
# to a removable singularity
_FD_ZONE = 2e-3
_FD_STEP = 1e-2
# ln Z loses roughly cond * 1e-16 in absolute accuracy
COND_WARN = 1e8
COND_FAIL = 1e12


# ---------------------------------------------------------------------------
# elementary pieces


def base_term(rho, beta, n_t):
    """``(1 + rho)(n_t - beta) + n_t (1 + rho) ln(beta / n_t)``."""
    return (1.0 + rho) * (n_t - beta) + n_t * (1.0 + rho) * math.log(beta / n_t)


def base_term_dbeta(rho, beta, n_t):
    return (1.0 + rho) * (n_t - beta) / beta


def base_term_drho(rho, beta, n_t):
    return (n_t - beta) + n_t * math.log(beta / n_t)


def integer_order(spec, rho, tol=SNAP_TOL):
    """``k`` when ``n_c * rho`` is within ``tol`` of ``k`` in ``1..m``, else None."""
    s = spec.n_c * rho
    k = int(round(s))
    if 1 <= k <= spec.m and abs(s - k) <= tol:
        return k
    return None


def singular_distance(spec, rho):
    """Distance from ``n_c * rho`` to the nearest of ``1..m-1`` (inf if m == 1)."""
    if spec.m == 1:
        return math.inf
    s = spec.n_c * rho
    k = min(max(int(round(s)), 1), spec.m - 1)
    return abs(s - k)


def _eta_power(es1):
    # exponent of eta in front of the general-route determinant
    m = es1.total
    return 0.5 * m * (m + 1) - 0.5 * sum(k * (k + 1) for k in es1.mult)


def _poch_exponents(es1):
    # The ratio prod_i prod_j (x)_{j-1} / prod_k (x)_{k-1} with x = n_c rho - m + 1
    # collapses to prod_l (x + l)^e_l; common factors cancel exactly.
    m = es1.total
    return [sum(max(mi - 1 - l, 0) for mi in es1.mult) - (m - 1 - l) for l in range(m - 1)]


def _blocks(es):
    # per-row (or per-column) eigenvalue and 1-based index within its block
    lam, idx = [], []
    for v, mk in zip(es.distinct, es.mult):
        for j in range(1, mk + 1):
            lam.append(v)
            idx.append(j)
    return np.array(lam), np.array(idx, dtype=float)


def _guard(cond, route):
    if not cond <= COND_FAIL:
        raise NumericalError(
            f"closed form on the {route} route has no reliable digits "
            f"(condition {cond:.3g}); use a Monte Carlo estimate instead",
            condition=cond,
        )
    if cond > COND_WARN:
        warnings.warn(f"closed form on the {route} route is ill-conditioned (cond={cond:.3g})",
                      IllConditionedWarning, stacklevel=3)


def _trace_solve(a, b, route="general"):
    """``tr(a^-1 b)`` with row/column equilibration of ``a``."""
    r = np.max(np.abs(a), axis=1)
    a1 = a / r[:, None]
    c = np.max(np.abs(a1), axis=0)
    a2 = a1 / c[None, :]
    _guard(np.linalg.cond(a2), route)
    x = np.linalg.solve(a2, b / r[:, None])
    return float(np.trace(x / c[:, None]))


# ---------------------------------------------------------------------------
# matrices


def _moment_matrices(spec, rho, beta, derivs=False):
    """Block matrix of G-integrals on the general route, ``m x n``.

    Entry for row ``i`` of eigenvalue block ``p`` (of the ``m x m``
    correlation) and column ``j`` of block ``q`` (of the ``n x n`` one):

        G(i + j - 1, 1; eta l_p, l_q, -n_c rho + m - i + 1)
    """
    m = spec.m
    s = spec.n_c * rho
    eta = spec.gamma / (beta * (1.0 + rho))
    rl, ri = _blocks(spec.es1)
    cl, cj = _blocks(spec.es2)
    a = eta * rl[:, None]
    b = cl[None, :]
    kappa = ri[:, None] + cj[None, :] - 1.0
    mu = -s + m - ri[:, None] + 1.0
    ups = g_integral_array(kappa, 1, a, b, mu)
    if not derivs:
        return ups, None, None
    ups_b = (a / beta) * (s - m + ri[:, None]) * g_integral_array(kappa + 1, 1, a, b, mu - 1)
    ups_r = (beta / (1.0 + rho)) * ups_b - spec.n_c * g_integral_array(kappa, 2, a, b, mu)
    return ups, ups_b, ups_r


def _iid_matrices(spec, rho, beta, derivs=False):
    m, n = spec.m, spec.n
    s = spec.n_c * rho
    eta = spec.gamma / (beta * (1.0 + rho))
    i = np.arange(1, m + 1, dtype=float)
    kappa = (n - m) + i[:, None] + i[None, :] - 1.0
    ups = g_integral_array(kappa, 1, eta, 1.0, 1.0 - s)
    if not derivs:
        return ups, None, None
    ups_b = (s * spec.gamma / (beta ** 2 * (1.0 + rho))) * g_integral_array(kappa + 1, 1, eta, 1.0, -s)
    ups_r = (beta / (1.0 + rho)) * ups_b - spec.n_c * g_integral_array(kappa, 2, eta, 1.0, 1.0 - s)
    return ups, ups_b, ups_r


def _integer_matrices(spec, k, rho, beta, derivs=False):
    """The ``k x m`` partial-fraction moment block of the integer route."""
    eta = spec.gamma / (beta * (1.0 + rho))
    cl, cj = _blocks(spec.es1)
    i = np.arange(1, k + 1, dtype=float)
    kappa = i[:, None] + cj[None, :] - 1.0
    b = cl[None, :]
    xi = np.zeros((k, spec.m))
    xi_b = np.zeros((k, spec.m)) if derivs else None
    for lam2, row in zip(spec.es2.distinct, spec.psi2.table):
        a = eta * lam2
        for q, coeff in enumerate(row, start=1):
            if coeff == 0.0:
                continue
            xi += coeff * g_integral_array(kappa, 1, a, b, 1.0 - q)
            if derivs:
                xi_b += coeff * (q * a / beta) * g_integral_array(kappa + 1, 1, a, b, -q)
    return xi, xi_b


@dataclass(frozen=True)
class ClosedFormTerms:
    """Intermediate quantities of one closed-form evaluation.

    Only the fields relevant to ``route`` are populated.
    """

    route: str
    eta: float
    poly_block: np.ndarray = None          # confluent power rows stacked on top
    moments: np.ndarray = None             # G-integral block (general / iid / integer)
    moments_dbeta: np.ndarray = None
    moments_drho: np.ndarray = None
    eta_power: float = 0.0                 # general route
    log_prefactor: float = 0.0             # general route, ln of the scalar prefactor
    prefactor_sign: float = 1.0
    log_norm: float = 0.0                  # integer / iid routes, ln of the normaliser
    norm_sign: float = 1.0

    @property
    def stacked(self):
        if self.poly_block is None or self.poly_block.shape[0] == 0:
            return self.moments
        return np.vstack([self.poly_block, self.moments])

    def log_zeta(self):
        """``ln Z`` assembled from the stored pieces."""
        sign, logdet, cond = signed_logdet(self.stacked)
        _guard(cond, self.route)
        if self.route == "general":
            sign *= self.prefactor_sign
            val = -self.eta_power * math.log(self.eta) + self.log_prefactor + logdet
        else:
            sign *= self.norm_sign
            val = logdet - self.log_norm
        if sign <= 0 or not math.isfinite(val):
            raise NumericalError(
                f"closed-form expectation is not positive on the {self.route} route",
                condition=cond,
            )
        return val


def _general_prefactor(spec, rho):
    es1, es2 = spec.es1, spec.es2
    m = spec.m
    x = spec.n_c * rho - m + 1
    sign = 1.0
    log_pf = -m * float(np.sum(np.log(es2.full())))
    s_g, l_g, _ = signed_logdet(power_block(es1, m, inverse=False))
    s_c, l_c, _ = signed_logdet(power_block(es2, spec.n, inverse=True))
    sign *= s_g * s_c
    log_pf -= l_g + l_c
    for l, e in enumerate(_poch_exponents(es1)):
        if e == 0:
            continue
        f = x + l
        if f == 0:
            raise NumericalError(f"general route is singular at n_c*rho = {spec.n_c * rho}")
        if f < 0 and e % 2:
            sign = -sign
        log_pf += e * math.log(abs(f))
    return sign, log_pf


def _integer_norm(spec, k):
    es1 = spec.es1
    s_c, l_c, _ = signed_logdet(power_block(es1, spec.m, inverse=True))
    log_norm = k * float(np.sum(np.log(es1.full()))) + l_c
    log_norm += sum(math.lgamma(j) for j in range(1, k + 1))
    return s_c, log_norm


def _iid_norm(spec):
    m, n = spec.m, spec.n
    return sum(math.lgamma(n - k + 1) + math.lgamma(k) for k in range(1, m + 1))


def _route(spec, rho, method):
    if method == "auto":
        if spec.is_iid:
            return "iid"
        return "integer" if integer_order(spec, rho) is not None else "general"
    if method not in ("iid", "integer", "general"):
        raise ValidationError(f"unknown method {method!r}")
    if method == "iid" and not spec.is_iid:
        raise ValidationError("the iid route needs identity correlation matrices")
    if method == "integer" and integer_order(spec, rho) is None:
        raise ValidationError("the integer route needs n_c * rho in {1, ..., m}")
    return method


def closed_form_terms(spec, rho, beta, method="auto", derivs=False):
    """Build the matrices and scalars of one closed-form evaluation."""
    route = _route(spec, rho, method)
    eta = spec.gamma / (beta * (1.0 + rho))
    if route == "iid":
        ups, ups_b, ups_r = _iid_matrices(spec, rho, beta, derivs)
        return ClosedFormTerms(route, eta, None, ups, ups_b, ups_r, log_norm=_iid_norm(spec))
    if route == "integer":
        k = integer_order(spec, rho)
        xi, xi_b = _integer_matrices(spec, k, rho, beta, derivs)
        sign, log_norm = _integer_norm(spec, k)
        poly = power_block(spec.es1, spec.m - k, inverse=True)
        return ClosedFormTerms(route, eta, poly, xi, xi_b, None,
                               log_norm=log_norm, norm_sign=sign)
    ups, ups_b, ups_r = _moment_matrices(spec, rho, beta, derivs)
    sign, log_pf = _general_prefactor(spec, rho)
    poly = power_block(spec.es2, spec.n - spec.m, inverse=True)
    return ClosedFormTerms(route, eta, poly, ups, ups_b, ups_r,
                           eta_power=_eta_power(spec.es1),
                           log_prefactor=log_pf, prefactor_sign=sign)


# ---------------------------------------------------------------------------
# public evaluators


def _check(spec, rho, beta):
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    if not (0.0 < beta <= spec.n_t):
        raise ValidationError(f"beta must lie in (0, n_t], got {beta}")


def log_zeta(spec, rho, beta, method="auto"):
    """``ln E[det(I + eta Theta)^(-n_c rho)]`` in closed form."""
    if rho == 0.0 or spec.gamma == 0.0:
        return 0.0
    return closed_form_terms(spec, rho, beta, method).log_zeta()


def _e0(spec, rho, beta, method="auto"):
    return base_term(rho, beta, spec.n_t) - log_zeta(spec, rho, beta, method) / spec.n_c


def e0_tilde(spec, rho, beta, method="auto"):
    """Gallager function ``E0(rho, beta)`` for the channel, in nats.

    Parameters
    ----------
    spec : ChannelSpec
    rho : float
        In ``[0, 1]``.
    beta : float
        In ``(0, n_t]``; ``n_t - beta`` is the scaled power Lagrange multiplier.
    method : {"auto", "iid", "integer", "general"}
        Evaluation route.  ``"auto"`` uses the i.i.d. formula when both
        correlations are identity, the integer route when ``n_c * rho`` is
        within ``SNAP_TOL`` of ``1..m``, and the general route otherwise.
    """
    _check(spec, rho, beta)
    return _e0(spec, rho, beta, method)


def _richardson(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def d_e0_dbeta(spec, rho, beta, method="auto"):
    """Partial derivative of :func:`e0_tilde` with respect to ``beta``."""
    _check(spec, rho, beta)
    n_t = spec.n_t
    cb = base_term_dbeta(rho, beta, n_t)
    if rho == 0.0 or spec.gamma == 0.0:
        return cb
    t = closed_form_terms(spec, rho, beta, method, derivs=True)
    rhs = t.moments_dbeta
    if t.poly_block is not None and t.poly_block.shape[0]:
        rhs = np.vstack([np.zeros_like(t.poly_block), rhs])
    tr = _trace_solve(t.stacked, rhs, t.route)
    return cb - t.eta_power / (spec.n_c * beta) - tr / spec.n_c


def d_e0_drho(spec, rho, beta, method="auto"):
    """Partial derivative of :func:`e0_tilde` with respect to ``rho``.

    Near the removable singularities ``n_c * rho`` in ``{1, ..., m - 1}`` of
    the general route (and exactly on the integer route) the derivative is
    taken by Richardson-extrapolated central differences of the general
    route with step ``1e-2 / n_c``, so the stencil stays at least
    ``8e-3 / n_c`` away from the singular point.
    """
    _check(spec, rho, beta)
    n_t = spec.n_t
    cr = base_term_drho(rho, beta, n_t)
    if spec.gamma == 0.0:
        return cr
    route = _route(spec, rho, method)
    if route == "integer" or (route == "general" and singular_distance(spec, rho) < _FD_ZONE):
        h = _FD_STEP / spec.n_c
        return _richardson(lambda r: _e0(spec, r, beta, "general"), rho, h)
    t = closed_form_terms(spec, rho, beta, route, derivs=True)
    rhs = t.moments_drho
    if t.poly_block is not None and t.poly_block.shape[0]:
        rhs = np.vstack([np.zeros_like(t.poly_block), rhs])
    tr = _trace_solve(t.stacked, rhs, t.route)
    out = cr - tr / spec.n_c
    if route == "general":
        x = spec.n_c * rho - spec.m + 1
        out -= t.eta_power / (spec.n_c * (1.0 + rho))
        out -= sum(e / (x + l) for l, e in enumerate(_poch_exponents(spec.es1)) if e)
    return out


def ergodic_capacity(spec):
    """Ergodic capacity ``E[ln det(I + gamma/n_t Theta)]`` in nats/symbol.

    Closed form obtained from the rho-derivative at ``rho = 0``,
    ``beta = n_t``; independent of ``n_c``.
    """
    if spec.gamma == 0.0:
        return 0.0
    m, n_t = spec.m, spec.n_t
    if spec.is_iid:
        # exact Gamma-function Hankel matrix: stays well conditioned at high SNR
        i = np.arange(1, m + 1, dtype=float)
        kappa = (spec.n - m) + i[:, None] + i[None, :] - 1.0
        moments = np.exp(np.vectorize(math.lgamma)(kappa))
        lam = g_integral_array(kappa, 2, spec.gamma / n_t, 1.0, 1.0)
        return _trace_solve(moments, lam, "capacity")
    rl, ri = _blocks(spec.es1)
    cl, cj = _blocks(spec.es2)
    a = (spec.gamma / n_t) * rl[:, None]
    b = cl[None, :]
    kappa = ri[:, None] + cj[None, :] - 1.0
    ups = g_integral_array(kappa, 1, a, b, m - ri[:, None] + 1.0)
    lam = g_integral_array(kappa, 2, a, b, m - ri[:, None] + 1.0)
    poly = power_block(spec.es2, spec.n - m, inverse=True)
    stacked = np.vstack([poly, ups])
    rhs = np.vstack([np.zeros_like(poly), lam])
    out = _trace_solve(stacked, rhs, "capacity") - (m - 1)
    for mi in spec.es1.mult:
        out += sum(j / (m - mi + j) for j in range(1, mi))
    return out


def cutoff_rate(spec, method="auto"):
    """Cutoff rate ``E0(1, n_t)`` in nats/symbol."""
    return e0_tilde(spec, 1.0, float(spec.n_t), method)

