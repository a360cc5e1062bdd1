"""Independent reference computations for GP tests (dense inverses, finite
differences, prior sampling)."""
import numpy as np

from jitlgpr import gpr


def random_instance(seed, n=None, noise_range=(0.1, 1.0)):
    rng = np.random.default_rng(seed)
    n = n if n is not None else int(rng.integers(2, 11))
    X = rng.normal(size=(n, 2))
    y = rng.normal(size=n)
    params = gpr.KernelParams(*np.exp(rng.uniform(-1, 1, 3)))
    noise = gpr.NoiseParam(float(rng.uniform(*noise_range)))
    return X, y, params, noise


def dense_gram(X, params, noise):
    n = len(X)
    C = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            C[i, j] = gpr.kernel_eval(X[i], X[j], params) + (noise.sigma_eps2 if i == j else 0.0)
    return C


def dense_predict(X, y, params, noise, xq):
    C = dense_gram(X, params, noise)
    Cinv = np.linalg.inv(C)
    k = np.array([gpr.kernel_eval(x, xq, params) for x in X])
    mean = k @ Cinv @ y
    var = noise.sigma_eps2 + gpr.kernel_eval(xq, xq, params) - k @ Cinv @ k
    return mean, var


def dense_lml(X, y, params, noise):
    C = dense_gram(X, params, noise)
    sign, logdet = np.linalg.slogdet(C)
    return -0.5 * logdet - 0.5 * y @ np.linalg.solve(C, y) - 0.5 * len(y) * np.log(2 * np.pi)


def fd_gradient(X, y, params, noise, h=1e-5):
    theta = np.log([params.sigma_f2, params.beta2, params.alpha2, noise.sigma_eps2])
    g = np.empty(4)
    for i in range(4):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        fp = dense_lml(X, y, gpr.KernelParams(*np.exp(tp[:3])), gpr.NoiseParam(np.exp(tp[3])))
        fm = dense_lml(X, y, gpr.KernelParams(*np.exp(tm[:3])), gpr.NoiseParam(np.exp(tm[3])))
        g[i] = (fp - fm) / (2 * h)
    return g


def sample_prior(X, params, noise_var, rng):
    """Draw y ~ N(0, K(X) + noise_var I) via an eigendecomposition (no
    Cholesky, so it is independent of the code under test)."""
    K = dense_gram(X, params, gpr.NoiseParam(1e-12)) - 1e-12 * np.eye(len(X))
    w, V = np.linalg.eigh(K)
    f = V @ (np.sqrt(np.clip(w, 0, None)) * rng.normal(size=len(X)))
    return f + np.sqrt(noise_var) * rng.normal(size=len(X))
