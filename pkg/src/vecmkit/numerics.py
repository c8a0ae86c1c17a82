"""Dense linear-algebra and distribution primitives shared by the estimators.

Least squares goes through a QR factorization (conditioning of
near-collinear macro panels); the explicit normal-equations form exists only
as a test oracle. Positive definiteness is decided by Cholesky pivots
exceeding 1e-12, and symmetry is checked at 1e-8 relative tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateInputError,
    DomainError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    SingularDesignError,
)

SYMMETRY_RTOL = 1e-8
PIVOT_TOL = 1e-12

LOG_2PI = math.log(2.0 * math.pi)


def _as_matrix(a, name: str) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.ndim != 2:
        raise DomainError(f"{name} must be 2-dimensional, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise DomainError(f"{name} contains non-finite entries")
    return out


def _require_symmetric(a: np.ndarray, name: str) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_RTOL * scale:
        raise DomainError(f"{name} is not symmetric within tolerance")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class OlsFit:
    """Equation-by-equation least squares fit of Y on X.

    sigma uses the maximum-likelihood divisor T; log_likelihood follows the
    Gaussian profile likelihood -(T/2)(K ln 2pi + K + ln|sigma|) and raises
    on a degenerate (singular) sigma rather than returning -inf.
    """

    coefficients: np.ndarray  # m x K
    residuals: np.ndarray  # T x K
    sigma: np.ndarray  # K x K

    @property
    def nobs(self) -> int:
        return int(self.residuals.shape[0])

    @property
    def n_equations(self) -> int:
        return int(self.residuals.shape[1])

    @cached_property
    def log_likelihood(self) -> float:
        t, k = self.residuals.shape
        try:
            ld = log_det(self.sigma)
        except NotPositiveDefiniteError as exc:
            raise DegenerateInputError(
                "residual covariance is singular; log likelihood undefined "
                "(exact fit or collinear targets)"
            ) from exc
        return -0.5 * t * (k * LOG_2PI + k + ld)


def ols(y, x) -> OlsFit:
    """Multivariate least squares via QR; raises on rank deficiency."""
    y = _as_matrix(y, "Y")
    x = _as_matrix(x, "X")
    t, m = x.shape
    if y.shape[0] != t:
        raise DomainError(f"Y has {y.shape[0]} rows but X has {t}")
    if t <= m:
        raise InsufficientDataError(f"need more observations ({t}) than regressors ({m})")
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(t, m) * np.finfo(float).eps * max(diag.max(), 1.0):
        raise SingularDesignError(
            f"design matrix is rank deficient (column pivot {int(diag.argmin())})"
        )
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - x @ coef
    sigma = resid.T @ resid / t
    return OlsFit(coefficients=coef, residuals=resid, sigma=0.5 * (sigma + sigma.T))


def normal_equations_ols(y, x) -> np.ndarray:
    """(X'X)^-1 X'Y. Test oracle only; not used by the estimators."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.linalg.solve(x.T @ x, x.T @ y)


def cholesky_lower(a) -> np.ndarray:
    """Lower-triangular L with L L' = A; reports the failing pivot otherwise."""
    a = _require_symmetric(_as_matrix(a, "A"), "A")
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - lower[j, :j] @ lower[j, :j]
        if d <= PIVOT_TOL:
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite: pivot {j} = {d:.3e}", pivot=j
            )
        lower[j, j] = math.sqrt(d)
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


@dataclass(frozen=True)
class GeneralizedEigenResult:
    """Solution of A v = lambda B v, eigenvalues descending, columns aligned."""

    eigenvalues: np.ndarray  # (n,)
    eigenvectors: np.ndarray  # n x n


def generalized_symmetric_eigen(a, b) -> GeneralizedEigenResult:
    """Solve A v = lambda B v for symmetric A and SPD B.

    B is reduced through its Cholesky factor to a standard symmetric
    eigenproblem, which guarantees real eigenvalues; they are returned in
    descending order with column-aligned eigenvectors.
    """
    a = _require_symmetric(_as_matrix(a, "A"), "A")
    b = _as_matrix(b, "B")
    if a.shape != b.shape:
        raise DomainError(f"A {a.shape} and B {b.shape} must have equal shape")
    lower = cholesky_lower(b)
    # C = L^-1 A L^-T, via two triangular solves
    tmp = np.linalg.solve(lower, a)
    c = np.linalg.solve(lower, tmp.T).T
    c = 0.5 * (c + c.T)
    vals, vecs = np.linalg.eigh(c)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = np.linalg.solve(lower.T, vecs[:, order])
    return GeneralizedEigenResult(eigenvalues=vals, eigenvectors=vecs)


def log_det(a) -> float:
    """ln|A| for positive-definite A, via 2 * sum(ln diag(chol(A)))."""
    lower = cholesky_lower(a)
    return float(2.0 * np.sum(np.log(np.diag(lower))))


def eigen_moduli(a) -> np.ndarray:
    """Moduli of all (possibly complex) eigenvalues, descending."""
    a = _as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"matrix must be square, got shape {a.shape}")
    return np.sort(np.abs(np.linalg.eigvals(a)))[::-1]


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution.

    Computed as the regularized upper incomplete gamma Q(df/2, x/2) using a
    power series for small arguments and a continued fraction otherwise;
    absolute accuracy is far below the 1e-6 contract.
    """
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"chi-square statistic must be >= 0, got {x}")
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    return _regularized_gamma_q(df / 2.0, x / 2.0)


def _regularized_gamma_q(s: float, z: float) -> float:
    if z == 0.0:
        return 1.0
    if z < s + 1.0:
        return 1.0 - _gamma_p_series(s, z)
    return _gamma_q_contfrac(s, z)


def _gamma_p_series(s: float, z: float, max_iter: int = 500) -> float:
    # P(s, z) = z^s e^-z / Gamma(s) * sum_n z^n / (s(s+1)...(s+n))
    term = 1.0 / s
    total = term
    a = s
    for _ in range(max_iter):
        a += 1.0
        term *= z / a
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-z + s * math.log(z) - math.lgamma(s))


def _gamma_q_contfrac(s: float, z: float, max_iter: int = 500) -> float:
    # Q(s, z) via the Lentz continued fraction 1/(z+1-s- 1(1-s)/(z+3-s- ...))
    tiny = 1e-300
    b = z + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-z + s * math.log(z) - math.lgamma(s))
