"""Channel description shared by the closed-form and Monte Carlo paths."""

from dataclasses import dataclass, field, replace
from functools import cached_property
import math

import numpy as np

from .errors import ValidationError
from .linalg import HermitianPD
from .spectra import (
    DEFAULT_GROUPING_TOL,
    characteristic_coefficients,
    eigen_structure,
    exponential_correlation,
)

__all__ = ["ChannelSpec", "db_to_linear", "linear_to_db"]

_DIAG_TOL = 1e-12


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def _identity_like(a):
    return bool(np.allclose(a.matrix, np.eye(a.dim), rtol=0.0, atol=1e-12))


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """A spatially correlated block-fading MIMO channel.

    Parameters
    ----------
    n_t, n_r : int
        Transmit and receive antenna counts.
    n_c : int
        Coherence time in symbols.
    gamma : float
        Linear SNR ``P / N0`` with ``N0 = 1``.
    phi_t, phi_r : HermitianPD or array_like
        Transmit (``n_t x n_t``) and receive (``n_r x n_r``) correlation
        matrices with unit diagonal.  Identity when omitted.
    grouping_tol : float
        Relative tolerance used to merge nearly equal eigenvalues.
    """

    n_t: int
    n_r: int
    n_c: int
    gamma: float
    phi_t: HermitianPD = None
    phi_r: HermitianPD = None
    grouping_tol: float = DEFAULT_GROUPING_TOL
    label: str = field(default="", compare=False)

    def __post_init__(self):
        for name in ("n_t", "n_r", "n_c"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValidationError(f"gamma must be finite and non-negative, got {self.gamma}")
        phi_t = np.eye(self.n_t) if self.phi_t is None else self.phi_t
        phi_r = np.eye(self.n_r) if self.phi_r is None else self.phi_r
        if not isinstance(phi_t, HermitianPD):
            phi_t = HermitianPD(phi_t)
        if not isinstance(phi_r, HermitianPD):
            phi_r = HermitianPD(phi_r)
        if phi_t.dim != self.n_t or phi_r.dim != self.n_r:
            raise ValidationError("correlation matrix sizes do not match antenna counts")
        for name, phi in (("phi_t", phi_t), ("phi_r", phi_r)):
            if np.max(np.abs(np.diag(phi.matrix) - 1.0)) > _DIAG_TOL:
                raise ValidationError(f"{name} must have unit diagonal")
        object.__setattr__(self, "phi_t", phi_t)
        object.__setattr__(self, "phi_r", phi_r)

    @classmethod
    def exponential(cls, n_t, n_r, n_c, snr_db, zeta_t=0.0, zeta_r=0.0, **kw):
        """Channel with exponential correlation at both ends, SNR in dB."""
        return cls(
            n_t=n_t,
            n_r=n_r,
            n_c=n_c,
            gamma=db_to_linear(snr_db),
            phi_t=exponential_correlation(n_t, zeta_t),
            phi_r=exponential_correlation(n_r, zeta_r),
            **kw,
        )

    def replace(self, **changes):
        if "snr_db" in changes:
            changes["gamma"] = db_to_linear(changes.pop("snr_db"))
        return replace(self, **changes)

    @property
    def snr_db(self):
        return linear_to_db(self.gamma) if self.gamma > 0 else -math.inf

    @property
    def m(self):
        return min(self.n_t, self.n_r)

    @property
    def n(self):
        return max(self.n_t, self.n_r)

    @property
    def phi1(self):
        """The ``m x m`` correlation matrix (receive side when ``n_r <= n_t``)."""
        return self.phi_r if self.n_r <= self.n_t else self.phi_t

    @property
    def phi2(self):
        """The ``n x n`` correlation matrix."""
        return self.phi_t if self.n_r <= self.n_t else self.phi_r

    @cached_property
    def es1(self):
        return eigen_structure(self.phi1, self.grouping_tol)

    @cached_property
    def es2(self):
        return eigen_structure(self.phi2, self.grouping_tol)

    @cached_property
    def psi2(self):
        return characteristic_coefficients(self.es2)

    @cached_property
    def is_iid(self):
        return _identity_like(self.phi_t) and _identity_like(self.phi_r)

    def key(self):
        """Hashable fingerprint of everything that affects channel draws."""
        return (
            self.n_t,
            self.n_r,
            self.phi_t.matrix.tobytes(),
            self.phi_r.matrix.tobytes(),
        )

    def __repr__(self):
        tag = "iid" if self.is_iid else "correlated"
        return (
            f"ChannelSpec({self.n_t}x{self.n_r}, n_c={self.n_c}, "
            f"snr_db={self.snr_db:.4g}, {tag})"
        )
