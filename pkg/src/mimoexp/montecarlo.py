"""Brute-force Monte Carlo oracle for the fading expectations.

Every estimator draws its channels from counter-based Philox streams, one
stream per batch, keyed by ``(seed, batch index)``.  Batch statistics are
merged in batch order, so results are bit-identical for any worker count.

Plain sampling struggles when ``n_c * rho`` is large: the expectation is
then carried by channels with all eigenvalues near zero, which 10^6 draws
rarely visit, and the sample standard error is optimistic.  Setting
``McConfig.proposal_scale`` switches to a defensive importance sampler:
half of the draws come from the true law and half from a Gaussian with
entry variance ``proposal_scale``; the likelihood-ratio weights are
bounded by 2.
"""

from collections import OrderedDict
from dataclasses import dataclass
import math
import threading

import numpy as np

from .errors import DomainError, ValidationError
from .exponent import base_term
from .linalg import HermitianPD, matrix_sqrt, sample_gaussian_matrix
from .workers import ordered_map

__all__ = [
    "McConfig",
    "McEstimate",
    "batch_rng",
    "sample_channel",
    "theta_eigenvalues",
    "mc_zeta",
    "mc_e0",
    "mc_capacity",
    "mc_cutoff_rate",
    "mc_e0_general_q",
    "verify_lemma1",
]

MIN_SAMPLES = 1000
_MAX_BATCH = 1 << 16
_CACHE_ENTRIES = 8


def _default_batch(samples):
    for b in range(min(samples, _MAX_BATCH), 31, -1):
        if samples % b == 0:
            return b
    return samples


@dataclass(frozen=True)
class McConfig:
    """Sample budget and seed.

    ``batch`` must divide ``samples``; by default the largest divisor not
    above 65536 is used.  ``proposal_scale`` in ``(0, 1)`` enables the
    defensive importance sampler described in the module docstring.
    """

    samples: int = 10**6
    seed: int = 0
    batch: int = None
    workers: int = None
    proposal_scale: float = None

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < MIN_SAMPLES:
            raise ValidationError(f"samples must be an integer >= {MIN_SAMPLES}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        batch = _default_batch(self.samples) if self.batch is None else int(self.batch)
        if batch < 1 or self.samples % batch:
            raise ValidationError(f"batch {batch} does not divide samples {self.samples}")
        object.__setattr__(self, "batch", batch)
        if self.proposal_scale is not None and not (0.0 < self.proposal_scale < 1.0):
            raise ValidationError("proposal_scale must lie in (0, 1)")

    @property
    def batches(self):
        return self.samples // self.batch


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    samples: int
    seed: int

    def z_score(self, value):
        """``(value - mean) / std_err``; 0 when both agree exactly."""
        diff = value - self.mean
        if self.std_err == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_err


def batch_rng(seed, index):
    """Independent Philox generator for batch ``index`` of stream ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def sample_channel(spec, rng, size=None):
    """Draw ``H = Phi_R^(1/2) H0 Phi_T^(1/2)`` (``n_r x n_t``, stacked if ``size``)."""
    return _correlate(spec, sample_gaussian_matrix(spec.n_r, spec.n_t, rng, size))


def _correlate(spec, h0):
    h = h0
    if not np.allclose(spec.phi_r.matrix, np.eye(spec.n_r), rtol=0.0, atol=0.0):
        h = matrix_sqrt(spec.phi_r) @ h
    if not np.allclose(spec.phi_t.matrix, np.eye(spec.n_t), rtol=0.0, atol=0.0):
        h = h @ matrix_sqrt(spec.phi_t)
    return h


def _gram(h, n_t, n_r):
    # the m x m quadratic form: H H^dagger when n_r <= n_t, else H^dagger H
    hh = np.conj(np.swapaxes(h, -1, -2))
    return h @ hh if n_r <= n_t else hh @ h


_MIX = 0.5


def _draw(spec, cfg, b):
    """Channels of batch ``b`` and their likelihood-ratio weights (or None)."""
    rng = batch_rng(cfg.seed, b)
    if cfg.proposal_scale is None:
        return sample_channel(spec, rng, size=cfg.batch), None
    s2 = cfg.proposal_scale
    h0 = sample_gaussian_matrix(spec.n_r, spec.n_t, rng, size=cfg.batch)
    shrink = rng.random(cfg.batch) >= _MIX
    h0 = np.where(shrink[:, None, None], math.sqrt(s2) * h0, h0)
    energy = np.sum(np.abs(h0) ** 2, axis=(1, 2))
    k = spec.n_t * spec.n_r
    ratio = np.exp(-k * math.log(s2) - energy * (1.0 / s2 - 1.0))
    return _correlate(spec, h0), 1.0 / (_MIX + (1.0 - _MIX) * ratio)


_cache = OrderedDict()
_cache_lock = threading.Lock()


def theta_eigenvalues(spec, cfg):
    """Eigenvalues of the ``m x m`` quadratic form, one row per sample.

    Returns ``(eigenvalues, weights)``; ``weights`` is None under plain
    sampling.  The draws depend only on the antenna counts, the
    correlation matrices and ``cfg``; results are memoised on that key.
    """
    key = (spec.key(), int(cfg.seed), cfg.samples, cfg.batch, cfg.proposal_scale)
    with _cache_lock:
        hit = _cache.get(key)
        if hit is not None:
            _cache.move_to_end(key)
            return hit

    def one(b):
        h, wt = _draw(spec, cfg, b)
        return np.maximum(np.linalg.eigvalsh(_gram(h, spec.n_t, spec.n_r)), 0.0), wt

    parts = ordered_map(one, range(cfg.batches), cfg.workers)
    eig = np.concatenate([p[0] for p in parts])
    eig.setflags(write=False)
    wts = None
    if cfg.proposal_scale is not None:
        wts = np.concatenate([p[1] for p in parts])
        wts.setflags(write=False)
    out = (eig, wts)
    with _cache_lock:
        _cache[key] = out
        while len(_cache) > _CACHE_ENTRIES:
            _cache.popitem(last=False)
    return out


def _merge(values, cfg):
    """Mean and standard error, merging per-batch moments in order."""
    v = np.asarray(values, dtype=float).reshape(cfg.batches, cfg.batch)
    n = 0
    mean = 0.0
    m2 = 0.0
    for row in v:
        nb = row.size
        mb = float(np.mean(row))
        m2b = float(np.sum((row - mb) ** 2))
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    var = m2 / (n - 1) if n > 1 else 0.0
    return mean, math.sqrt(max(var, 0.0) / n)


def _estimate(values, cfg):
    mean, se = _merge(values, cfg)
    return McEstimate(mean, se, cfg.samples, int(cfg.seed))


def _exact(value, cfg):
    return McEstimate(float(value), 0.0, cfg.samples, int(cfg.seed))


def _check_point(spec, rho, beta):
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    if not (0.0 < beta <= spec.n_t):
        raise ValidationError(f"beta must lie in (0, n_t], got {beta}")


def mc_zeta(spec, rho, beta, cfg=None):
    """Sample mean of ``det(I + eta Theta)^(-n_c rho)``, ``eta = gamma / (beta (1 + rho))``."""
    cfg = cfg or McConfig()
    _check_point(spec, rho, beta)
    if rho == 0.0 or spec.gamma == 0.0:
        return _exact(1.0, cfg)
    eta = spec.gamma / (beta * (1.0 + rho))
    w, wt = theta_eigenvalues(spec, cfg)
    vals = np.exp(-spec.n_c * rho * np.sum(np.log1p(eta * w), axis=1))
    return _estimate(vals if wt is None else vals * wt, cfg)


def _log_estimate(z, offset, n_c):
    # E0 = offset - ln(Z) / n_c, first-order error propagation
    mean = offset - math.log(z.mean) / n_c
    return McEstimate(mean, z.std_err / (n_c * z.mean), z.samples, z.seed)


def mc_e0(spec, rho, beta, cfg=None):
    """Monte Carlo ``E0(rho, beta)`` with delta-method standard error."""
    cfg = cfg or McConfig()
    z = mc_zeta(spec, rho, beta, cfg)
    return _log_estimate(z, base_term(rho, beta, spec.n_t), spec.n_c)


def mc_capacity(spec, cfg=None):
    """Sample mean of ``ln det(I + (gamma / n_t) Theta)``."""
    cfg = cfg or McConfig()
    if spec.gamma == 0.0:
        return _exact(0.0, cfg)
    w, wt = theta_eigenvalues(spec, cfg)
    vals = np.sum(np.log1p((spec.gamma / spec.n_t) * w), axis=1)
    return _estimate(vals if wt is None else vals * wt, cfg)


def mc_cutoff_rate(spec, cfg=None):
    """Monte Carlo cutoff rate ``E0(1, n_t)``."""
    return mc_e0(spec, 1.0, float(spec.n_t), cfg)


def mc_e0_general_q(spec, q, rho, r, cfg=None):
    """Gallager function for a Gaussian input with covariance ``q``.

    ``r`` is the power-constraint multiplier; ``I - r q`` must be positive
    definite.  With ``q = (gamma / n_t) I`` and ``beta = n_t - r gamma`` this
    coincides with the equal-power function.
    """
    cfg = cfg or McConfig()
    if not isinstance(q, HermitianPD):
        q = HermitianPD(q)
    if q.dim != spec.n_t:
        raise ValidationError("input covariance must be n_t x n_t")
    power = spec.gamma
    if np.trace(q.matrix).real > power * (1.0 + 1e-12):
        raise DomainError("input covariance exceeds the power budget")
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    eye = np.eye(spec.n_t)
    slack = eye - r * q.matrix
    if np.linalg.eigvalsh(slack)[0] <= 0:
        raise DomainError("I - r Q is not positive definite")
    offset = r * power * (1.0 + rho) + (1.0 + rho) * np.linalg.slogdet(slack)[1]
    if rho == 0.0:
        return _exact(offset, cfg)
    k = q.matrix @ np.linalg.inv(slack)
    k = 0.5 * (k + k.conj().T) / (1.0 + rho)

    def one(b):
        h, wt = _draw(spec, cfg, b)
        g = h @ k @ np.conj(np.swapaxes(h, -1, -2))
        _, ld = np.linalg.slogdet(np.eye(spec.n_r) + g)
        v = np.exp(-spec.n_c * rho * ld)
        return v if wt is None else v * wt

    vals = np.concatenate(ordered_map(one, range(cfg.batches), cfg.workers))
    return _log_estimate(_estimate(vals, cfg), offset, spec.n_c)


def verify_lemma1(m, n, sigma, mean, a, cfg=None):
    """Monte Carlo check of the Gaussian exponential-trace identity.

    For ``S = mean + sigma^(1/2) G`` with ``G`` an ``m x n`` matrix of
    i.i.d. standard complex Gaussians,

        E[etr(-A S S^dagger)]
            = det(I + sigma A)^(-n) etr(-(A^-1 + sigma)^-1 mean mean^dagger).

    Returns
    -------
    lhs : McEstimate
        Sample mean of the left side.
    rhs : float
        Closed form of the right side.
    """
    cfg = cfg or McConfig()
    sigma = sigma if isinstance(sigma, HermitianPD) else HermitianPD(sigma)
    a = a if isinstance(a, HermitianPD) else HermitianPD(a)
    mean = np.asarray(mean, dtype=complex)
    if sigma.dim != m or a.dim != m or mean.shape != (m, n):
        raise ValidationError("dimensions of sigma, a and mean must match (m, n)")
    eye = np.eye(m)
    ia = eye + sigma.matrix @ a.matrix
    # (A^-1 + Sigma)^-1 = A (I + Sigma A)^-1
    inner = a.matrix @ np.linalg.inv(ia)
    _, ld = np.linalg.slogdet(ia)
    rhs = math.exp(-n * ld - np.trace(inner @ mean @ mean.conj().T).real)
    root = matrix_sqrt(sigma)
    am = a.matrix

    def one(b):
        g = sample_gaussian_matrix(m, n, batch_rng(cfg.seed, b), size=cfg.batch)
        s = mean + root @ g
        quad = np.einsum("ij,bjk,bik->b", am, s, s.conj()).real
        return np.exp(-quad)

    vals = np.concatenate(ordered_map(one, range(cfg.batches), cfg.workers))
    return _estimate(vals, cfg), rhs
