"""Gaussian-process regression over the normalized design cube.

Anisotropic (ARD) squared-exponential kernel plus learned white noise, with a
Matern 5/2 alternative behind the ``kernel`` flag. Hyperparameters maximize
the log marginal likelihood by multi-start L-BFGS-B in log space; targets are
standardized internally. Everything exposes analytic gradients, including
posterior mean and standard deviation w.r.t. the input point, so acquisition
search never needs finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky
from scipy.optimize import minimize

NOISE_FLOOR = 1e-10
LENGTHSCALE_BOUNDS = (1e-3, 1e3)
AMPLITUDE_BOUNDS = (1e-6, 1e4)
NOISE_BOUNDS = (NOISE_FLOOR, 1e2)
SQRT5 = np.sqrt(5.0)

KERNELS = ("rbf", "matern52")


class DataError(ValueError):
    """Dataset rejected (empty targets, non-finite values, shape mismatch)."""


class ConditioningError(RuntimeError):
    """Kernel matrix stayed indefinite after the full jitter escalation."""


@dataclass
class Dataset:
    """Observed unit-cube points and their scalar utility targets."""

    points: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float).ravel()
        if self.points.shape[0] != self.targets.shape[0]:
            raise DataError(
                f"{self.points.shape[0]} points vs {self.targets.shape[0]} targets"
            )
        if self.points.size and (self.points.min() < -1e-9 or self.points.max() > 1 + 1e-9):
            raise DataError("points must lie in the unit cube")

    def __len__(self) -> int:
        return len(self.targets)

    def append(self, x: np.ndarray, y: float) -> "Dataset":
        if len(self) == 0:
            return Dataset(np.atleast_2d(x), np.array([y]))
        return Dataset(np.vstack([self.points, x]), np.append(self.targets, y))


@dataclass
class GPModel:
    """A fitted GP: kernel hyperparameters plus the cached factorization."""

    kernel: str
    amplitude: float
    lengthscales: np.ndarray
    noise_variance: float
    target_mean: float
    target_scale: float
    X: np.ndarray
    _L: np.ndarray = field(repr=False)
    _alpha: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.X.shape[1] if self.X.ndim == 2 else len(self.lengthscales)

    @classmethod
    def prior(cls, dim: int, amplitude: float = 1.0, lengthscale: float = 0.5) -> "GPModel":
        """Data-free prior model: mean 0, std = sqrt(amplitude) everywhere."""
        return cls(
            kernel="rbf",
            amplitude=amplitude,
            lengthscales=np.full(dim, lengthscale),
            noise_variance=NOISE_FLOOR,
            target_mean=0.0,
            target_scale=1.0,
            X=np.zeros((0, dim)),
            _L=np.zeros((0, 0)),
            _alpha=np.zeros(0),
        )

    def hyperparameters(self) -> dict:
        return {
            "kernel": self.kernel,
            "amplitude": self.amplitude,
            "lengthscales": self.lengthscales.tolist(),
            "noise_variance": self.noise_variance,
            "target_mean": self.target_mean,
            "target_scale": self.target_scale,
        }


def _cross_kernel(kernel: str, amplitude: float, ls: np.ndarray, X: np.ndarray, x: np.ndarray):
    """k(x, X_i) and its gradient d k / d x, shapes (n,) and (n, d)."""
    diff = (x[None, :] - X) / ls[None, :] ** 2  # pre-divided by ls^2 for the gradient
    scaled2 = ((x[None, :] - X) / ls[None, :]) ** 2
    if kernel == "rbf":
        k = amplitude * np.exp(-0.5 * scaled2.sum(axis=1))
        dk = -k[:, None] * diff
    else:  # matern52
        r = np.sqrt(np.maximum(scaled2.sum(axis=1), 0.0))
        e = np.exp(-SQRT5 * r)
        k = amplitude * (1.0 + SQRT5 * r + 5.0 * r**2 / 3.0) * e
        factor = -(5.0 * amplitude / 3.0) * (1.0 + SQRT5 * r) * e
        dk = factor[:, None] * diff
    return k, dk


def _train_kernel(kernel: str, amplitude: float, ls: np.ndarray, D2: np.ndarray):
    """Noise-free train kernel from per-dimension squared distances D2 (n,n,d)."""
    scaled = (D2 / ls[None, None, :] ** 2).sum(axis=2)
    if kernel == "rbf":
        return amplitude * np.exp(-0.5 * scaled)
    r = np.sqrt(np.maximum(scaled, 0.0))
    return amplitude * (1.0 + SQRT5 * r + 5.0 * r**2 / 3.0) * np.exp(-SQRT5 * r)


def _chol_with_escalation(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky of K, escalating jitter 1e-10 -> 1e-4 on failure."""
    try:
        return cholesky(K, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10
    eye = np.eye(K.shape[0])
    while jitter <= 1e-4:
        try:
            return cholesky(K + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise ConditioningError("kernel matrix not positive definite after jitter escalation")


def _nll_and_grad(theta: np.ndarray, kernel: str, D2: np.ndarray, y: np.ndarray):
    n, d = len(y), D2.shape[2]
    amplitude = np.exp(theta[0])
    ls = np.exp(theta[1 : 1 + d])
    noise = np.exp(theta[-1])
    Ksig = _train_kernel(kernel, amplitude, ls, D2)
    K = Ksig + noise * np.eye(n)
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros_like(theta)
    alpha = cho_solve((L, True), y)
    nll = 0.5 * float(y @ alpha) + float(np.log(np.diag(L)).sum()) + 0.5 * n * np.log(2 * np.pi)

    Kinv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - Kinv  # dLML/dtheta = 0.5 tr(W dK/dtheta)
    grad = np.empty_like(theta)
    grad[0] = -0.5 * float((W * Ksig).sum())
    if kernel == "rbf":
        M = W * Ksig
    else:
        scaled = (D2 / ls[None, None, :] ** 2).sum(axis=2)
        r = np.sqrt(np.maximum(scaled, 0.0))
        M = W * ((5.0 * amplitude / 3.0) * (1.0 + SQRT5 * r) * np.exp(-SQRT5 * r))
    per_dim = np.einsum("nm,nmd->d", M, D2)
    grad[1 : 1 + d] = -0.5 * per_dim / ls**2
    grad[-1] = -0.5 * noise * float(np.trace(W))
    return nll, grad


def fit(data: Dataset, restarts: int = 8, seed: int = 0, kernel: str = "rbf") -> GPModel:
    """Fit hyperparameters by seeded multi-start L-BFGS-B on the marginal likelihood.

    Deterministic: the same (data, restarts, seed) always yields the same model.
    The returned likelihood is never worse than any restart's starting point.
    """
    if kernel not in KERNELS:
        raise DataError(f"kernel must be one of {KERNELS}")
    if len(data) == 0:
        raise DataError("fit requires at least one observation")
    if not np.all(np.isfinite(data.targets)) or not np.all(np.isfinite(data.points)):
        raise DataError("non-finite values in dataset")

    X = data.points
    n, d = X.shape
    mean = float(data.targets.mean())
    scale = float(data.targets.std())
    if not np.isfinite(scale) or scale < 1e-12:
        scale = 1.0
    y = (data.targets - mean) / scale

    D2 = (X[:, None, :] - X[None, :, :]) ** 2
    lb = np.array([np.log(AMPLITUDE_BOUNDS[0])] + [np.log(LENGTHSCALE_BOUNDS[0])] * d
                  + [np.log(NOISE_BOUNDS[0])])
    ub = np.array([np.log(AMPLITUDE_BOUNDS[1])] + [np.log(LENGTHSCALE_BOUNDS[1])] * d
                  + [np.log(NOISE_BOUNDS[1])])
    bounds = list(zip(lb, ub))

    rng = np.random.default_rng(seed)
    starts = [np.concatenate([[0.0], np.full(d, np.log(0.5)), [np.log(1e-6)]])]
    for _ in range(max(restarts - 1, 0)):
        a0 = rng.uniform(np.log(0.3), np.log(3.0))
        l0 = rng.uniform(np.log(5e-2), np.log(2.0), size=d)
        s0 = rng.uniform(np.log(1e-8), np.log(1e-1))
        starts.append(np.concatenate([[a0], l0, [s0]]))

    best_theta, best_nll = None, np.inf
    for theta0 in starts:
        f0, _ = _nll_and_grad(theta0, kernel, D2, y)
        res = minimize(
            _nll_and_grad,
            theta0,
            args=(kernel, D2, y),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 100},
        )
        cand_theta, cand_nll = (res.x, res.fun) if res.fun <= f0 else (theta0, f0)
        if cand_nll < best_nll:
            best_nll, best_theta = cand_nll, cand_theta

    amplitude = float(np.exp(best_theta[0]))
    ls = np.exp(best_theta[1 : 1 + d])
    noise = max(float(np.exp(best_theta[-1])), NOISE_FLOOR)
    K = _train_kernel(kernel, amplitude, ls, D2) + noise * np.eye(n)
    L, _ = _chol_with_escalation(K)
    alpha = cho_solve((L, True), y)
    return GPModel(
        kernel=kernel,
        amplitude=amplitude,
        lengthscales=ls,
        noise_variance=noise,
        target_mean=mean,
        target_scale=scale,
        X=X,
        _L=L,
        _alpha=alpha,
    )


def _check_point(model: GPModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (model.dim,):
        raise DataError(f"expected a point of dimension {model.dim}, got shape {x.shape}")
    if x.min() < -1e-9 or x.max() > 1 + 1e-9:
        raise DataError("prediction point outside the unit cube")
    return x


def predict(model: GPModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and (latent) standard deviation at x, in target units."""
    x = _check_point(model, x)
    if len(model.X) == 0:
        return model.target_mean, model.target_scale * float(np.sqrt(model.amplitude))
    k, _ = _cross_kernel(model.kernel, model.amplitude, model.lengthscales, model.X, x)
    mean_std = float(k @ model._alpha)
    v = np.linalg.solve(model._L, k)
    var = max(model.amplitude - float(v @ v), 0.0)
    return (
        model.target_mean + model.target_scale * mean_std,
        model.target_scale * float(np.sqrt(var)),
    )


def predict_gradient(model: GPModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (d mean / d x, d std / d x) at x, in target units per normalized unit."""
    x = _check_point(model, x)
    if len(model.X) == 0:
        z = np.zeros(model.dim)
        return z, z.copy()
    k, dk = _cross_kernel(model.kernel, model.amplitude, model.lengthscales, model.X, x)
    dmean = model.target_scale * (dk.T @ model._alpha)
    w = cho_solve((model._L, True), k)
    var = max(model.amplitude - float(k @ w), 0.0)
    std = np.sqrt(var)
    if std < 1e-12:
        dstd = np.zeros(model.dim)
    else:
        dvar = -2.0 * (dk.T @ w)
        dstd = model.target_scale * dvar / (2.0 * std)
    return dmean, dstd
