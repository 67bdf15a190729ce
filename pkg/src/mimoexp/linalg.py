"""Small dense complex-Hermitian linear algebra.

Matrices are plain :class:`numpy.ndarray` objects.  :class:`HermitianPD`
wraps one that has been checked for Hermitian symmetry and positive
definiteness.
"""

import warnings

import numpy as np

from .errors import IllConditionedWarning, ValidationError

__all__ = [
    "HERMITIAN_RTOL",
    "HermitianPD",
    "is_hermitian",
    "eigenvalues_hermitian",
    "matrix_sqrt",
    "sample_gaussian_matrix",
    "det_complex",
    "signed_logdet",
]

HERMITIAN_RTOL = 1e-12
_COND_WARN = 1e13


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


class HermitianPD:
    """A validated Hermitian positive-definite matrix.

    Parameters
    ----------
    matrix : array_like
        Square complex (or real) matrix.

    Raises
    ------
    ValidationError
        If the matrix is not square, not Hermitian to within
        ``HERMITIAN_RTOL`` relative, or has a non-positive eigenvalue.
    """

    __slots__ = ("matrix", "min_eigenvalue")

    def __init__(self, matrix):
        a = np.array(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        if not is_hermitian(a):
            raise ValidationError("matrix is not Hermitian")
        # symmetrise exactly so downstream eigensolvers see a clean input
        a = 0.5 * (a + a.conj().T)
        w = np.linalg.eigvalsh(a)
        if w[0] <= 0:
            raise ValidationError(
                f"matrix is not positive definite (smallest eigenvalue {w[0]:.3g})"
            )
        a.setflags(write=False)
        self.matrix = a
        self.min_eigenvalue = float(w[0])

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __repr__(self):
        return f"HermitianPD(dim={self.dim}, min_eigenvalue={self.min_eigenvalue:.6g})"


def _as_hermitian_array(a):
    if isinstance(a, HermitianPD):
        return a.matrix
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a):
        raise ValidationError("matrix is not Hermitian")
    return a


def eigenvalues_hermitian(a):
    """Eigenvalues of a Hermitian matrix in descending order."""
    a = _as_hermitian_array(a)
    return np.linalg.eigvalsh(a)[::-1].copy()


def matrix_sqrt(a):
    """Hermitian positive-definite square root ``S`` with ``S @ S == a``."""
    if not isinstance(a, HermitianPD):
        a = HermitianPD(a)
    w, v = np.linalg.eigh(a.matrix)
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def sample_gaussian_matrix(rows, cols, rng, size=None):
    """Draw circularly-symmetric complex Gaussian matrices.

    Each entry has zero mean and unit variance, real and imaginary parts
    each of variance 1/2.

    Parameters
    ----------
    rows, cols : int
        Matrix shape.
    rng : numpy.random.Generator
        Random stream; the draw is a deterministic function of its state.
    size : int, optional
        If given, return a stack of ``size`` matrices.
    """
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be >= 1")
    shape = (rows, cols) if size is None else (size, rows, cols)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def det_complex(a):
    """Determinant of a square matrix by LU with partial pivoting.

    A badly conditioned input still returns its computed determinant but
    emits :class:`IllConditionedWarning`.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    d = np.linalg.det(a.astype(complex))
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > _COND_WARN:
        warnings.warn(f"determinant of ill-conditioned matrix (cond={cond:.3g})",
                      IllConditionedWarning, stacklevel=2)
    return complex(d)


def signed_logdet(a):
    """Sign and log-magnitude of the determinant of a real square matrix.

    Rows and columns are equilibrated (scaled by powers of two so each has
    unit max-norm) before the LU factorisation.  This keeps matrices whose
    entries span many decades from losing accuracy in the pivot choice.

    Returns
    -------
    sign : float
        +1, -1 or 0.
    logabs : float
    cond : float
        2-norm condition number of the equilibrated matrix.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1.0, 0.0, 1.0
    log_scale = 0.0
    rmax = np.max(np.abs(a), axis=1)
    if np.any(rmax == 0):
        return 0.0, -np.inf, np.inf
    re = np.exp2(-np.round(np.log2(rmax)))
    a *= re[:, None]
    cmax = np.max(np.abs(a), axis=0)
    if np.any(cmax == 0):
        return 0.0, -np.inf, np.inf
    ce = np.exp2(-np.round(np.log2(cmax)))
    a *= ce[None, :]
    log_scale = -np.sum(np.log(re)) - np.sum(np.log(ce))
    sign, logabs = np.linalg.slogdet(a)
    cond = np.linalg.cond(a)
    return float(sign), float(logabs + log_scale), float(cond)
