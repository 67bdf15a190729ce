"""Eigen-structure of correlation matrices.

Covers the exponential correlation model, grouping of eigenvalues into
distinct values with multiplicities, the partial-fraction
("characteristic") coefficients of the reciprocal characteristic
polynomial, and the confluent power blocks built from an eigen-structure.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .linalg import HermitianPD, eigenvalues_hermitian, signed_logdet
from .special import pochhammer

__all__ = [
    "DEFAULT_GROUPING_TOL",
    "EigenStructure",
    "CharCoeffs",
    "exponential_correlation",
    "eigen_structure",
    "characteristic_coefficients",
    "power_block",
    "log_det_power_block",
]

DEFAULT_GROUPING_TOL = 1e-6


@dataclass(frozen=True)
class EigenStructure:
    """Distinct eigenvalues (descending) and their multiplicities."""

    distinct: tuple
    mult: tuple
    total: int
    grouping_tol: float = DEFAULT_GROUPING_TOL

    def __post_init__(self):
        if len(self.distinct) != len(self.mult) or not self.distinct:
            raise ValidationError("distinct and mult must be non-empty and equally long")
        if sum(self.mult) != self.total or min(self.mult) < 1:
            raise ValidationError("multiplicities must be positive and sum to total")
        if any(v <= 0 for v in self.distinct):
            raise ValidationError("eigenvalues must be positive")
        gap = self.grouping_tol * self.distinct[0]
        if any(x - y <= gap for x, y in zip(self.distinct, self.distinct[1:])):
            raise ValidationError("distinct eigenvalues must be strictly descending and separated")

    @property
    def count(self):
        """Number of distinct eigenvalues."""
        return len(self.distinct)

    @property
    def is_scalar(self):
        return len(self.distinct) == 1

    def full(self):
        """All eigenvalues with repetition, descending."""
        return np.repeat(np.asarray(self.distinct, dtype=float), self.mult)


@dataclass(frozen=True)
class CharCoeffs:
    """Partial-fraction coefficients of ``prod_p (1 + l_p u)^(-m_p)``.

    ``table[p][q - 1]`` multiplies ``(1 + l_p u)^(-q)``.
    """

    table: tuple
    structure: EigenStructure

    def __call__(self, p, q):
        return self.table[p][q - 1]

    def evaluate(self, u):
        """Right-hand side of the expansion at ``u``."""
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for lam, row in zip(self.structure.distinct, self.table):
            w = 1.0 + lam * u
            for q, coeff in enumerate(row, start=1):
                out = out + coeff * w ** (-q)
        return out


def exponential_correlation(dim, zeta):
    """Correlation matrix with entries ``zeta ** |i - j|``."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    if not (0.0 <= zeta < 1.0):
        raise ValidationError(f"zeta must lie in [0, 1), got {zeta}")
    idx = np.arange(dim)
    return HermitianPD(float(zeta) ** np.abs(idx[:, None] - idx[None, :]))


def eigen_structure(a, grouping_tol=DEFAULT_GROUPING_TOL):
    """Group the eigenvalues of ``a`` into distinct values.

    Eigenvalues are scanned in descending order; a new group starts when
    the next value falls more than ``grouping_tol * lambda_max`` below the
    first member of the current group.  Each group is represented by its
    arithmetic mean.
    """
    if not grouping_tol > 0:
        raise ValidationError("grouping_tol must be positive")
    if not isinstance(a, HermitianPD):
        a = HermitianPD(a)
    w = eigenvalues_hermitian(a)
    gap = grouping_tol * w[0]
    groups = [[w[0]]]
    for x in w[1:]:
        if groups[-1][0] - x <= gap:
            groups[-1].append(x)
        else:
            groups.append([x])
    return EigenStructure(
        distinct=tuple(float(np.mean(g)) for g in groups),
        mult=tuple(len(g) for g in groups),
        total=len(w),
        grouping_tol=grouping_tol,
    )


def _series_inverse_power(alpha, beta, m, order):
    # Taylor coefficients of (alpha + beta w)^(-m) at w = 0, up to w^order.
    ratio = beta / alpha
    out = []
    coeff = alpha ** (-m)
    for r in range(order + 1):
        out.append(coeff)
        coeff = coeff * (-(m + r)) / (r + 1) * ratio
    return out


def characteristic_coefficients(es):
    """Partial-fraction coefficients for a grouped spectrum.

    For each distinct eigenvalue ``l_p`` put ``w = 1 + l_p u``.  The product
    becomes ``w^(-m_p) g_p(w)`` where ``g_p`` is regular at ``w = 0``; the
    coefficient of ``w^(-q)`` is the ``(m_p - q)``-th Taylor coefficient of
    ``g_p``.  The arithmetic is exact over the binary values of the
    eigenvalues.
    """
    lam = [Fraction(v) for v in es.distinct]
    table = []
    for p, (lp, mp) in enumerate(zip(lam, es.mult)):
        series = [Fraction(1)] + [Fraction(0)] * (mp - 1)
        for k, (lk, mk) in enumerate(zip(lam, es.mult)):
            if k == p:
                continue
            # 1 + lk u = (1 - lk/lp) + (lk/lp) w
            factor = _series_inverse_power(1 - lk / lp, lk / lp, mk, mp - 1)
            series = [sum(series[i] * factor[r - i] for i in range(r + 1)) for r in range(mp)]
        # coefficient of w^(-q) is series[mp - q]
        table.append(tuple(float(series[mp - q]) for q in range(1, mp + 1)))
    return CharCoeffs(table=tuple(table), structure=es)


def power_block(es, rows, inverse):
    """Confluent power matrix of an eigen-structure, ``rows x total``.

    Column block ``k`` has ``mult[k]`` columns with entries

        (-1)^(i - j) (i - j + 1)_(j - 1) * l_k^(s (i - j)),   i = 1..rows

    where ``s = -1`` when ``inverse`` is true and ``s = +1`` otherwise.  With
    distinct eigenvalues this is a Vandermonde matrix in ``-1/l_k`` (or
    ``-l_k``); repeated eigenvalues contribute derivative columns.
    """
    if rows < 0 or rows > es.total:
        raise ValidationError(f"rows must be in [0, {es.total}], got {rows}")
    out = np.zeros((rows, es.total))
    col = 0
    sgn = -1 if inverse else 1
    for lam, mk in zip(es.distinct, es.mult):
        for j in range(1, mk + 1):
            for i in range(1, rows + 1):
                poch = pochhammer(i - j + 1, j - 1)
                if poch != 0.0:
                    out[i - 1, col] = (-1) ** (i - j) * poch * lam ** (sgn * (i - j))
            col += 1
    return out


def log_det_power_block(es, inverse):
    """``ln|det|`` and sign of the square :func:`power_block`."""
    sign, logabs, _ = signed_logdet(power_block(es, es.total, inverse))
    return sign, logabs
