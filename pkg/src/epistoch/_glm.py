"""Poisson log-linear regression by iteratively reweighted least squares."""
import numpy as np

from .errors import ConvergenceError, DomainError


def poisson_irls(X, y, max_iter=100, tol=1e-12):
    """Fit ``log E[y] = X @ beta``.

    Returns ``(beta, cov, mu)`` where ``cov`` is the inverse Fisher
    information evaluated at the fit.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("counts must be nonnegative")
    if y.sum() <= 0:
        raise DomainError("all counts are zero; log-linear fit undefined")
    mu = y + 0.5
    eta = np.log(mu)
    beta = np.linalg.lstsq(X, eta, rcond=None)[0]
    for _ in range(max_iter):
        eta = X @ beta
        mu = np.exp(eta)
        z = eta + (y - mu) / mu
        wx = X * mu[:, None]
        new = np.linalg.solve(X.T @ wx, wx.T @ z)
        if not np.all(np.isfinite(new)):
            raise ConvergenceError("IRLS diverged")
        step = np.max(np.abs(new - beta))
        beta = new
        if step < tol * (1.0 + np.max(np.abs(beta))):
            break
    else:
        raise ConvergenceError("IRLS did not converge")
    mu = np.exp(X @ beta)
    cov = np.linalg.inv(X.T @ (X * mu[:, None]))
    return beta, cov, mu
