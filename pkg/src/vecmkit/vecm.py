"""Johansen trace test for cointegration rank, rank-restricted VECM
estimation, conversion to a levels VAR, and VECM forecasting.

The model is dX_t = sum_i Gamma_i dX_{t-i} + Pi X_{t-1} + mu + e_t with an
unrestricted constant and no trend or seasonal terms. The rank test
concentrates out the lagged differences and the constant, forms the
product-moment matrices S00, S01, S11 of the two residual sets, and solves
S10 S00^-1 S01 v = lambda S11 v, symmetrized through the Cholesky factor of
S11 so the eigenvalues are real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    DomainError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    RankError,
    SingularDesignError,
)
from .numerics import cholesky_lower, generalized_symmetric_eigen, ols
from .quarterly import Frame, QuarterIndex, parse_quarter
from .var import VarFit, forecast_var

# 5% critical values for the trace statistic, unrestricted-constant case,
# indexed by K - r.
TRACE_CRIT_5PCT: dict[int, float] = {
    1: 3.76,
    2: 15.41,
    3: 29.68,
    4: 47.21,
    5: 68.52,
    6: 94.15,
    7: 124.24,
    8: 156.00,
    9: 192.89,
    10: 233.13,
    11: 277.71,
    12: 334.98,
}

# Eigenvalues are squared canonical correlations; keep them inside [0, 1) so
# trace statistics stay finite even on exactly collinear inputs.
_EIGENVALUE_CEIL = 1.0 - 1e-12


@dataclass(frozen=True)
class TraceCriticalValues:
    """5% critical values for the trace test, indexed by K - r."""

    table: Mapping[int, float]

    def value(self, k_minus_r: int) -> float:
        if k_minus_r not in self.table:
            raise DomainError(
                f"no trace critical value for K - r = {k_minus_r}; table covers "
                f"{min(self.table)}..{max(self.table)}"
            )
        return float(self.table[k_minus_r])


DEFAULT_TRACE_CRITICAL_VALUES = TraceCriticalValues(TRACE_CRIT_5PCT)


def trace_statistics(eigenvalues: np.ndarray, t_eff: int) -> np.ndarray:
    """trace_r = -T_eff * sum_{i>r} ln(1 - lambda_i) for r = 0..K-1."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < 0) or np.any(lam >= 1):
        raise DomainError("eigenvalues must lie in [0, 1)")
    tail = -t_eff * np.cumsum(np.log1p(-lam)[::-1])[::-1]
    return tail


@dataclass(frozen=True)
class JohansenResult:
    """Trace-test output: eigenvalues (descending), trace statistics for
    candidate ranks 0..K-1, aligned 5% critical values, and the sample /
    lag bookkeeping the statistics were computed under."""

    names: tuple[str, ...]
    eigenvalues: np.ndarray
    trace_stats: np.ndarray
    critical_values: np.ndarray
    t_eff: int
    k: int
    deterministic: str = "constant"

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "eigenvalues": self.eigenvalues.tolist(),
            "trace_stats": self.trace_stats.tolist(),
            "critical_values_5pct": self.critical_values.tolist(),
            "t_eff": self.t_eff,
            "lags": self.k,
            "deterministic": self.deterministic,
            "selected_rank": select_rank(self),
        }

    def format_table(self) -> str:
        from .formatting import format_table, sig6

        selected = select_rank(self)
        rows = []
        for r in range(self.n_vars + 1):
            rows.append(
                [
                    str(r),
                    sig6(self.eigenvalues[r - 1]) if r >= 1 else "",
                    sig6(self.trace_stats[r]) if r < self.n_vars else "",
                    sig6(self.critical_values[r]) if r < self.n_vars else "",
                    "*" if r == selected else "",
                ]
            )
        return format_table(
            ["rank", "eigenvalue", "trace statistic", "5% critical value", ""],
            rows,
            title=(
                f"Trace test for cointegration rank "
                f"(T_eff={self.t_eff}, lags={self.k}, trend: {self.deterministic})"
            ),
        )


def _concentrate(frame: Frame, k: int):
    """Residuals of dX_t and X_{t-1} after regressing out the constant and
    the k-1 lagged differences, plus the product-moment matrices."""
    n_vars = frame.n_columns
    t = len(frame)
    if k < 1:
        raise DomainError(f"lag order must be >= 1, got {k}")
    if t - k < n_vars * k + 1:
        raise InsufficientDataError(
            f"{t} rows are too few for the rank machinery with {n_vars} variables "
            f"and {k} lags"
        )
    t_eff = t - k
    dx = np.diff(frame.values, axis=0)
    z0 = dx[k - 1 :]
    z1 = frame.values[k - 1 : t - 1]
    parts = [np.ones((t_eff, 1))]
    for j in range(1, k):
        parts.append(dx[k - 1 - j : t - 1 - j])
    z2 = np.hstack(parts)

    r0 = ols(z0, z2).residuals
    r1 = ols(z1, z2).residuals
    s00 = r0.T @ r0 / t_eff
    s01 = r0.T @ r1 / t_eff
    s11 = r1.T @ r1 / t_eff
    s11 = 0.5 * (s11 + s11.T)

    try:
        l00 = cholesky_lower(0.5 * (s00 + s00.T))
    except NotPositiveDefiniteError as exc:
        raise SingularDesignError(f"S00 is singular (pivot {exc.pivot})") from exc
    w = np.linalg.solve(l00, s01)  # so that S10 S00^-1 S01 = W'W
    eig = generalized_symmetric_eigen(w.T @ w, s11)
    lam = np.clip(eig.eigenvalues, 0.0, _EIGENVALUE_CEIL)
    return z0, z1, z2, lam, eig.eigenvectors, t_eff


def johansen_trace(frame: Frame, k: int) -> JohansenResult:
    """Run the trace test on a levels frame with lag order k.

    T_eff is frame length minus k; eigenvalues come back descending and the
    trace statistic for each candidate rank is evaluated from them.
    """
    _, _, _, lam, _, t_eff = _concentrate(frame, k)
    stats = trace_statistics(lam, t_eff)
    n_vars = frame.n_columns
    crit = np.array(
        [DEFAULT_TRACE_CRITICAL_VALUES.value(n_vars - r) for r in range(n_vars)]
    )
    return JohansenResult(
        names=frame.names,
        eigenvalues=lam,
        trace_stats=stats,
        critical_values=crit,
        t_eff=t_eff,
        k=k,
    )


def select_rank(
    result: JohansenResult,
    critvals: TraceCriticalValues | None = None,
) -> int:
    """Smallest r whose trace statistic falls below its 5% critical value;
    K when every candidate rank is rejected."""
    n_vars = result.n_vars
    for r in range(n_vars):
        cv = (
            critvals.value(n_vars - r)
            if critvals is not None
            else float(result.critical_values[r])
        )
        if result.trace_stats[r] < cv:
            return r
    return n_vars


@dataclass(frozen=True)
class VecmFit:
    """Rank-restricted VECM estimate.

    beta is normalized so the block picked out by ``beta_pivot`` (the first
    r rows whenever they are nonsingular) is the identity; alpha, the
    short-run matrices and the constant come from least squares of dX_t on
    [beta' X_{t-1}, dX lags, 1].
    """

    rank: int
    names: tuple[str, ...]
    k: int
    alpha: np.ndarray  # K x r
    beta: np.ndarray  # K x r, normalized
    gammas: tuple[np.ndarray, ...]  # k-1 matrices, K x K
    const: np.ndarray  # (K,)
    residuals: np.ndarray  # T_eff x K
    sigma: np.ndarray  # K x K
    sample_start: QuarterIndex
    n_sample: int
    tail: np.ndarray  # k x K, last levels rows
    beta_pivot: tuple[int, ...] = ()

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def pi(self) -> np.ndarray:
        """Long-run matrix alpha @ beta'."""
        return self.alpha @ self.beta.T

    @property
    def sample_end(self) -> QuarterIndex:
        return self.sample_start.shift(self.n_sample - 1)

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "names": list(self.names),
            "lags": self.k,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gammas": [g.tolist() for g in self.gammas],
            "const": self.const.tolist(),
            "residuals": self.residuals.tolist(),
            "sigma": self.sigma.tolist(),
            "sample_start": str(self.sample_start),
            "n_sample": self.n_sample,
            "tail": self.tail.tolist(),
            "beta_pivot": list(self.beta_pivot),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VecmFit":
        names = tuple(d["names"])
        return cls(
            rank=int(d["rank"]),
            names=names,
            k=int(d["lags"]),
            alpha=np.array(d["alpha"]).reshape(len(names), -1),
            beta=np.array(d["beta"]).reshape(len(names), -1),
            gammas=tuple(np.array(g) for g in d["gammas"]),
            const=np.array(d["const"]),
            residuals=np.array(d["residuals"]),
            sigma=np.array(d["sigma"]),
            sample_start=parse_quarter(d["sample_start"]),
            n_sample=int(d["n_sample"]),
            tail=np.array(d["tail"]),
            beta_pivot=tuple(d.get("beta_pivot", ())),
        )


def _first_independent_rows(beta: np.ndarray, r: int) -> tuple[int, ...]:
    """First (in row order) set of r rows of beta forming a nonsingular block."""
    selected: list[int] = []
    for i in range(beta.shape[0]):
        candidate = beta[selected + [i], :]
        if np.linalg.matrix_rank(candidate) == len(selected) + 1:
            selected.append(i)
            if len(selected) == r:
                return tuple(selected)
    raise SingularDesignError("cointegrating vectors do not have full column rank")


def fit_vecm(frame: Frame, k: int, r: int) -> VecmFit:
    """Estimate a VECM of lag order k (in levels) with cointegration rank r.

    r must satisfy 0 < r < K: at r = 0 fit a VAR on differences instead,
    and at r = K fit a VAR in levels.
    """
    n_vars = frame.n_columns
    if not 0 < r < n_vars:
        raise RankError(
            f"rank must lie strictly between 0 and {n_vars}; got {r}. "
            "Use a VAR in differences for r=0 or a levels VAR for r=K."
        )
    z0, z1, z2, lam, vectors, t_eff = _concentrate(frame, k)
    beta_raw = vectors[:, :r]
    pivot = _first_independent_rows(beta_raw, r)
    beta = beta_raw @ np.linalg.inv(beta_raw[list(pivot), :])

    ect = z1 @ beta
    design = np.hstack([ect, z2[:, 1:], z2[:, :1]])  # [beta'X_{t-1}, dX lags, 1]
    fit = ols(z0, design)
    coef = fit.coefficients
    alpha = coef[:r].T.copy()
    gammas = tuple(
        coef[r + n_vars * (i - 1) : r + n_vars * i].T.copy() for i in range(1, k)
    )
    const = coef[-1].copy()

    return VecmFit(
        rank=r,
        names=frame.names,
        k=k,
        alpha=alpha,
        beta=beta,
        gammas=gammas,
        const=const,
        residuals=fit.residuals,
        sigma=fit.sigma,
        sample_start=frame.start,
        n_sample=len(frame),
        tail=frame.tail_rows(k),
        beta_pivot=pivot,
    )


def vecm_to_levels_var(fit: VecmFit) -> VarFit:
    """Algebraically identical levels VAR(k): A_1 = Pi + I + Gamma_1,
    A_i = Gamma_i - Gamma_{i-1} for 1 < i < k, A_k = -Gamma_{k-1}."""
    n_vars = fit.n_vars
    k = fit.k
    pi = fit.pi
    eye = np.eye(n_vars)
    if k == 1:
        mats = [pi + eye]
    else:
        mats = [pi + eye + fit.gammas[0]]
        for i in range(1, k - 1):
            mats.append(fit.gammas[i] - fit.gammas[i - 1])
        mats.append(-fit.gammas[-1])
    return VarFit(
        p=k,
        names=fit.names,
        coef_matrices=tuple(mats),
        const=fit.const.copy(),
        residuals=fit.residuals,
        sigma=fit.sigma,
        sample_start=fit.sample_start,
        n_sample=fit.n_sample,
        tail=fit.tail,
    )


def forecast_vecm(fit: VecmFit, horizon: int) -> Frame:
    """Dynamic forecasts from the converted levels VAR, starting one quarter
    after the sample end."""
    return forecast_var(vecm_to_levels_var(fit), horizon)
