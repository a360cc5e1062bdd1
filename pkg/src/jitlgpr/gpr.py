"""Exact Gaussian process regression with an additive year/month kernel.

The kernel is

    k(u, v) = sf2 * (beta2 * y_u * y_v + (m_u * m_v + alpha2) ** 2)

where each input is a (year, month) coordinate pair: a homogeneous linear
kernel on the year axis plus a second-order polynomial kernel on the month
axis. The prior mean is zero, so inputs and targets are expected to be
z-scored by the caller.

Hyperparameters (sf2, beta2, alpha2, noise variance) are fitted by
maximising the log marginal likelihood in log-space with L-BFGS-B and
analytic gradients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, optimize
from scipy.linalg import lapack

from .errors import DataError, NotPositiveDefiniteError

log = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)
MIN_NOISE = 1e-12
JITTER_START = 1e-8
JITTER_MAX = 1e-2
CONVERGED_GRAD = 1e-5
# log-space box for the optimiser
KERNEL_LOG_BOUNDS = (-15.0, 15.0)
NOISE_LOG_BOUNDS = (np.log(MIN_NOISE), 10.0)


@dataclass(frozen=True)
class KernelParams:
    sigma_f2: float = 1.0
    beta2: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        if not (self.sigma_f2 > 0 and self.beta2 > 0 and self.alpha2 > 0):
            raise ValueError(f"kernel parameters must be positive: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma_f2, self.beta2, self.alpha2])


@dataclass(frozen=True)
class NoiseParam:
    sigma_eps2: float = 1.0

    def __post_init__(self):
        if not self.sigma_eps2 >= MIN_NOISE:
            raise ValueError(f"noise variance must be >= {MIN_NOISE}, got {self.sigma_eps2}")


def _as_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DataError(f"features must be (N, 2) (year, month) pairs, got shape {X.shape}")
    return X


def kernel_eval(x_u, x_v, params: KernelParams) -> float:
    """Covariance between two (year, month) feature pairs."""
    yu, mu = x_u
    yv, mv = x_v
    return float(params.sigma_f2 * (params.beta2 * (yu * yv) + (mu * mv + params.alpha2) ** 2))


def _kernel_parts(A: np.ndarray, B: np.ndarray, params: KernelParams):
    year = np.outer(A[:, 0], B[:, 0])
    poly = np.outer(A[:, 1], B[:, 1]) + params.alpha2
    return year, poly


def cross_kernel(A, B, params: KernelParams) -> np.ndarray:
    """Kernel matrix between the rows of ``A`` and ``B``."""
    year, poly = _kernel_parts(_as_features(A), _as_features(B), params)
    return params.sigma_f2 * (params.beta2 * year + poly ** 2)


def _cholesky_with_jitter(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``C``, adding diagonal jitter on failure.

    Jitter starts at 1e-8 times the mean diagonal and grows tenfold per
    retry up to 1e-2 times the mean diagonal.
    """
    try:
        return linalg.cholesky(C, lower=True, check_finite=False), 0.0
    except linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(C)))
    if not np.isfinite(scale) or scale <= 0:
        raise NotPositiveDefiniteError("Gram matrix has a non-positive mean diagonal")
    rel = JITTER_START
    while rel <= JITTER_MAX * (1 + 1e-9):
        jitter = rel * scale
        try:
            L = linalg.cholesky(C + jitter * np.eye(len(C)), lower=True, check_finite=False)
            return L, jitter
        except linalg.LinAlgError:
            rel *= 10.0
    raise NotPositiveDefiniteError(
        f"Cholesky failed even with diagonal jitter {JITTER_MAX:g} x mean diagonal")


def gram(X, params: KernelParams, noise: NoiseParam) -> np.ndarray:
    """Noisy Gram matrix C_N = K(X) + sigma_eps2 * I."""
    X = _as_features(X)
    return cross_kernel(X, X, params) + noise.sigma_eps2 * np.eye(len(X))


def factorize(X, params: KernelParams, noise: NoiseParam) -> tuple[np.ndarray, np.ndarray, float]:
    """Return ``(C_N, L, jitter)`` where ``L L^T = C_N + jitter * I``.

    Raises NotPositiveDefiniteError if the jitter policy is exhausted.
    """
    C = gram(X, params, noise)
    L, jitter = _cholesky_with_jitter(C)
    return C, L, jitter


def _unpack(theta: np.ndarray) -> tuple[KernelParams, NoiseParam]:
    sf2, b2, a2, n2 = np.exp(theta)
    return KernelParams(sf2, b2, a2), NoiseParam(max(n2, MIN_NOISE))


def _pack(params: KernelParams, noise: NoiseParam) -> np.ndarray:
    return np.log([params.sigma_f2, params.beta2, params.alpha2, noise.sigma_eps2])


def _chol(C: np.ndarray) -> tuple[np.ndarray, float]:
    # fast path through LAPACK; falls back to the jitter policy on failure
    L, info = lapack.dpotrf(C, lower=1, clean=1)
    if info == 0:
        return L, 0.0
    return _cholesky_with_jitter(C)


def _lml(year: np.ndarray, mm: np.ndarray, y: np.ndarray, theta: np.ndarray,
         with_grad: bool = True):
    """Log evidence (and gradient over log-parameters) from precomputed
    outer products ``year = y y^T`` and ``mm = m m^T``."""
    sf2, b2, a2, n2 = np.exp(theta)
    n2 = max(n2, MIN_NOISE)
    n = len(y)
    poly = mm + a2
    K = sf2 * (b2 * year + poly * poly)
    C = K.copy()
    C.flat[:: n + 1] += n2
    L, jitter = _chol(C)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    Linv, _ = lapack.dtrtri(L, lower=1)
    Cinv = Linv.T @ Linv
    b = Cinv @ y
    value = -0.5 * logdet - 0.5 * float(y @ b) - 0.5 * n * LOG_2PI
    if not with_grad:
        return value, None
    # d/dtheta_i = 1/2 tr((b b^T - C^-1) dC/dtheta_i)
    W = np.outer(b, b)
    W -= Cinv
    grad = np.array([
        0.5 * np.sum(W * K),
        0.5 * sf2 * b2 * np.sum(W * year),
        sf2 * a2 * np.sum(W * poly),
        0.5 * n2 * np.trace(W),
    ])
    return value, grad


def log_marginal_likelihood(X, y, params: KernelParams, noise: NoiseParam
                            ) -> tuple[float, np.ndarray]:
    """Log evidence and its gradient with respect to the log-parameters.

    The gradient is ordered (log sf2, log beta2, log alpha2, log noise).
    Uses log p(y) = -1/2 log|C| - 1/2 y^T C^-1 y - N/2 log(2 pi).
    """
    X = _as_features(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != len(X):
        raise DataError("X and y lengths differ")
    year, mm = np.outer(X[:, 0], X[:, 0]), np.outer(X[:, 1], X[:, 1])
    return _lml(year, mm, y, _pack(params, noise))


@dataclass(frozen=True)
class GprModel:
    X: np.ndarray
    y: np.ndarray
    params: KernelParams
    noise: NoiseParam
    chol: np.ndarray
    weights: np.ndarray
    log_ml: float
    jitter: float = 0.0
    converged: bool = True
    n_iter: int = 0

    @classmethod
    def build(cls, X, y, params: KernelParams, noise: NoiseParam, **info) -> "GprModel":
        """Condition the GP on ``(X, y)`` with fixed hyperparameters."""
        X = _as_features(X)
        y = np.asarray(y, dtype=float).ravel()
        _, L, jitter = factorize(X, params, noise)
        b = linalg.cho_solve((L, True), y, check_finite=False)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        lml = -0.5 * logdet - 0.5 * float(y @ b) - 0.5 * len(y) * LOG_2PI
        return cls(X, y, params, noise, L, b, float(lml), jitter, **info)


def _projected_gradient(x, g, bounds) -> float:
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    g = np.asarray(g, dtype=float).copy()
    g[(x <= lo + 1e-10) & (g > 0)] = 0.0
    g[(x >= hi - 1e-10) & (g < 0)] = 0.0
    return float(np.max(np.abs(g))) if g.size else 0.0


def fit(X, y, init: Optional[tuple[KernelParams, NoiseParam]] = None,
        fix_noise: Optional[float] = None, maxiter: int = 200,
        gtol: float = 1e-8) -> GprModel:
    """Fit hyperparameters by maximum marginal likelihood.

    Parameters
    ----------
    X : (N, 2) array of (year, month) features, already scaled.
    y : (N,) targets, already scaled.
    init : starting hyperparameters; all ones by default.
    fix_noise : hold the noise variance at this value instead of fitting it.

    Returns the conditioned model at the best iterate found. ``converged``
    is False when the optimiser stopped on the iteration cap.
    """
    X = _as_features(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(X) < 3:
        raise DataError(f"need at least 3 training points, got {len(X)}")
    if init is None:
        init = (KernelParams(), NoiseParam(1.0 if fix_noise is None else fix_noise))
    kp, npar = init
    if fix_noise is not None:
        npar = NoiseParam(fix_noise)
    theta0 = _pack(kp, npar)
    free = slice(0, 3) if fix_noise is not None else slice(0, 4)

    year, mm = np.outer(X[:, 0], X[:, 0]), np.outer(X[:, 1], X[:, 1])

    def objective(t):
        theta = theta0.copy()
        theta[free] = t
        try:
            value, grad = _lml(year, mm, y, theta)
        except NotPositiveDefiniteError:
            return 1e25, np.zeros(len(t))
        return -value, -grad[free]

    bounds = [KERNEL_LOG_BOUNDS] * 3 + [NOISE_LOG_BOUNDS]
    starts = [theta0[free]] + [theta0[free] + np.log(s) for s in (0.2, 5.0)]
    res = None
    for start in starts:
        start = np.clip(start, [b[0] for b in bounds[free]], [b[1] for b in bounds[free]])
        if objective(start)[0] >= 1e25:
            continue
        res = optimize.minimize(objective, start, jac=True, method="L-BFGS-B",
                                bounds=bounds[free],
                                options={"maxiter": maxiter, "gtol": gtol, "ftol": 1e-15})
        if res.fun < 1e25:
            break
    if res is None or res.fun >= 1e25:
        raise NotPositiveDefiniteError("every start point produced a non-PD Gram matrix")
    theta = theta0.copy()
    theta[free] = res.x
    params, noise = _unpack(theta)
    # L-BFGS-B often ends with a failed line search once the gradient sits
    # at the rounding floor (~1e-7); count that as converged
    pg = _projected_gradient(res.x, res.jac, bounds[free])
    converged = bool(res.success) or pg <= CONVERGED_GRAD
    if not converged:
        log.debug("GP fit stopped without converging: %s", res.message)
    return GprModel.build(X, y, params, noise, converged=converged, n_iter=int(res.nit))


def predict(model: GprModel, x_q) -> tuple[np.ndarray, np.ndarray] | tuple[float, float]:
    """Posterior predictive mean and variance (noise included) at ``x_q``.

    Accepts one feature pair or an (M, 2) array; a single pair returns
    scalars.
    """
    single = np.ndim(x_q) == 1
    Xq = _as_features(x_q)
    kq = cross_kernel(model.X, Xq, model.params)
    mean = kq.T @ model.weights
    v = linalg.solve_triangular(model.chol, kq, lower=True, check_finite=False)
    prior = model.params.sigma_f2 * (model.params.beta2 * Xq[:, 0] ** 2
                                     + (Xq[:, 1] ** 2 + model.params.alpha2) ** 2)
    var = model.noise.sigma_eps2 + prior - np.sum(v * v, axis=0)
    if np.any(var < -1e-10 * np.maximum(1.0, prior)):
        log.warning("posterior variance numerically negative (min %g); clamping", var.min())
    var = np.maximum(var, 0.0)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var
