"""Codeword-length planning from the random coding exponent.

The block error probability of a code spanning ``N_b`` coherence blocks is
approximated by

    Pe = (8 pi / n_t) (n_t - beta)^2  x  exp(-x E_r + 2),   x = N_b n_c,

where ``beta`` is the optimal beta at the operating point.  The right side
rises until ``x = 1 / E_r`` and falls afterwards; the planner takes the
root on the falling side and reports ``L = n_c * ceil(N_b)`` symbols.
"""

import csv
from dataclasses import dataclass
import io
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, ValidationError
from .exponent import ergodic_capacity
from .optimizer import operating_point

__all__ = [
    "CodewordPlan",
    "PlanRow",
    "CSV_COLUMNS",
    "error_probability",
    "required_length",
    "length_table",
    "exponential_zeta",
    "table_to_csv",
    "table_to_records",
]

CSV_COLUMNS = (
    "spec-id", "nT", "nR", "Nc", "gamma_dB", "zetaT", "zetaR", "rate_bits",
    "target_pe", "rho_opt", "beta_opt", "exponent_nats", "Nb", "L",
)
_NB_MAX = 1e12


def _log_prefactor(n_t, beta):
    return math.log(8.0 * math.pi / n_t) + 2.0 * math.log(n_t - beta) + 2.0


def error_probability(n_t, n_c, beta, exponent, nb):
    """Right side of the length equation at ``nb`` blocks."""
    x = nb * n_c
    return math.exp(_log_prefactor(n_t, beta) + math.log(x) - x * exponent)


@dataclass(frozen=True)
class CodewordPlan:
    """Operating point and length needed to reach ``target_pe`` at ``rate``.

    ``nb`` is the (real) number of coherence blocks, ``length`` the length
    in symbols after rounding up to whole blocks.
    """

    target_pe: float
    rate: float
    rho_opt: float
    beta_opt: float
    exponent: float
    nb: float
    length: int
    n_t: int
    n_c: int

    def error_probability(self, nb=None):
        return error_probability(self.n_t, self.n_c, self.beta_opt, self.exponent,
                                 self.nb if nb is None else nb)


def _solve_blocks(n_t, n_c, beta, exponent, target_pe):
    log_pe = math.log(target_pe)
    log_a = _log_prefactor(n_t, beta)

    def g(nb):
        x = nb * n_c
        return log_a + math.log(x) - x * exponent - log_pe

    lo = 1.0 / (n_c * exponent)
    if g(lo) <= 0.0:
        # the bound is below target even at its peak
        return lo
    if g(_NB_MAX) > 0.0:
        raise NumericalError("required number of blocks exceeds 1e12")
    return brentq(g, lo, _NB_MAX, xtol=1e-300, rtol=1e-14, maxiter=500)


def required_length(spec, rate, target_pe, capacity=None):
    """Codeword length needed for error probability ``target_pe`` at ``rate``.

    Parameters
    ----------
    spec : ChannelSpec
    rate : float
        Nats per symbol, ``0 < rate < capacity``.
    target_pe : float
        In ``(0, 1)``.
    capacity : float, optional
        Precomputed ergodic capacity.

    Raises
    ------
    DomainError
        If ``rate`` is not below the ergodic capacity.
    """
    if not (0.0 < target_pe < 1.0):
        raise ValidationError(f"target error probability must lie in (0, 1), got {target_pe}")
    if not rate > 0.0:
        raise ValidationError(f"rate must be positive, got {rate}")
    cap = ergodic_capacity(spec) if capacity is None else capacity
    if rate >= cap:
        raise DomainError(
            f"reliable communication impossible at this rate "
            f"({rate:.6g} >= capacity {cap:.6g} nats/symbol)"
        )
    op = operating_point(spec, rate, cap)
    if not op.exponent > 0.0:
        raise DomainError("reliable communication impossible at this rate (exponent <= 0)")
    nb = _solve_blocks(spec.n_t, spec.n_c, op.beta_star, op.exponent, target_pe)
    return CodewordPlan(
        target_pe=target_pe,
        rate=rate,
        rho_opt=op.rho,
        beta_opt=op.beta_star,
        exponent=op.exponent,
        nb=nb,
        length=spec.n_c * max(1, math.ceil(nb)),
        n_t=spec.n_t,
        n_c=spec.n_c,
    )


@dataclass(frozen=True)
class PlanRow:
    spec: object
    plan: CodewordPlan = None
    reason: str = ""

    @property
    def possible(self):
        return self.plan is not None


def length_table(specs, rate, target_pe):
    """One :class:`PlanRow` per spec; infeasible rows carry the reason."""
    rows = []
    for spec in specs:
        try:
            rows.append(PlanRow(spec, required_length(spec, rate, target_pe)))
        except DomainError as exc:
            rows.append(PlanRow(spec, None, str(exc)))
    return rows


def exponential_zeta(phi):
    """``zeta`` if ``phi`` is an exponential correlation matrix, else None."""
    a = np.asarray(phi)
    d = a.shape[0]
    if d == 1:
        return 0.0
    z = a[0, 1].real
    idx = np.arange(d)
    if not (0.0 <= z < 1.0):
        return None
    model = z ** np.abs(idx[:, None] - idx[None, :])
    return float(z) if np.allclose(a, model, rtol=0.0, atol=1e-12) else None


def _num(x):
    return repr(float(x))


def table_to_records(rows, rate, target_pe):
    """Rows as dicts keyed by :data:`CSV_COLUMNS`; ``"-"`` marks infeasible rows."""
    out = []
    for i, row in enumerate(rows, start=1):
        spec = row.spec
        zt, zr = exponential_zeta(spec.phi_t.matrix), exponential_zeta(spec.phi_r.matrix)
        rec = {
            "spec-id": spec.label or f"spec{i}",
            "nT": spec.n_t,
            "nR": spec.n_r,
            "Nc": spec.n_c,
            "gamma_dB": _num(spec.snr_db),
            "zetaT": "" if zt is None else _num(zt),
            "zetaR": "" if zr is None else _num(zr),
            "rate_bits": _num(rate / math.log(2.0)),
            "target_pe": _num(target_pe),
        }
        p = row.plan
        if p is None:
            rec.update({k: "-" for k in CSV_COLUMNS[9:]})
        else:
            rec.update({
                "rho_opt": _num(p.rho_opt),
                "beta_opt": _num(p.beta_opt),
                "exponent_nats": _num(p.exponent),
                "Nb": _num(p.nb),
                "L": p.length,
            })
        out.append(rec)
    return out


def table_to_csv(rows, rate, target_pe):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(table_to_records(rows, rate, target_pe))
    return buf.getvalue()
