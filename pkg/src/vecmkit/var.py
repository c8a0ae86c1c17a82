"""VAR(p) estimation with optional exogenous regressors, companion form,
stability moduli, and dynamic (iterated) point forecasting.

The model is X_t = C + A_1 X_{t-1} + ... + A_p X_{t-p} + B Z_t + e_t, where
the exogenous block Z enters contemporaneously by default (lagged entry is
available through ``exog_lags``). Fits are immutable; forecasting never
mutates the fit, so concurrent forecasts from one fit are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CoverageError, DomainError, InsufficientDataError
from .numerics import eigen_moduli, ols
from .quarterly import Frame, QuarterIndex, lag_matrix, parse_quarter


@dataclass(frozen=True)
class ExogenousBlock:
    """Named exogenous series aligned with the estimation sample.

    ``values`` may extend past the sample end; the surplus rows are kept on
    the fit and used as the default future path when forecasting.
    """

    names: tuple[str, ...]
    values: np.ndarray  # rows x n_exog

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.shape[1] != len(self.names):
            raise DomainError(
                f"{len(self.names)} exogenous names for {vals.shape[1]} columns"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("exogenous values must be finite")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class VarFit:
    """Estimated VAR(p): coefficient matrices, constants, exogenous block,
    residuals and their ML covariance, plus the sample tail needed to start
    dynamic forecasts."""

    p: int
    names: tuple[str, ...]
    coef_matrices: tuple[np.ndarray, ...]  # p matrices, K x K
    const: np.ndarray  # (K,)
    residuals: np.ndarray  # T_eff x K
    sigma: np.ndarray  # K x K, ML divisor T_eff
    sample_start: QuarterIndex
    n_sample: int
    tail: np.ndarray  # p x K, last observed rows in levels
    exog_names: tuple[str, ...] = ()
    exog_lags: int = 0
    exog_coef: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    exog_values: np.ndarray | None = None  # in-sample rows
    exog_future: np.ndarray | None = None  # rows past the sample end

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def sample_end(self) -> QuarterIndex:
        return self.sample_start.shift(self.n_sample - 1)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "names": list(self.names),
            "coef_matrices": [a.tolist() for a in self.coef_matrices],
            "const": self.const.tolist(),
            "residuals": self.residuals.tolist(),
            "sigma": self.sigma.tolist(),
            "sample_start": str(self.sample_start),
            "n_sample": self.n_sample,
            "tail": self.tail.tolist(),
            "exog_names": list(self.exog_names),
            "exog_lags": self.exog_lags,
            "exog_coef": self.exog_coef.tolist(),
            "exog_values": None if self.exog_values is None else self.exog_values.tolist(),
            "exog_future": None if self.exog_future is None else self.exog_future.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VarFit":
        return cls(
            p=int(d["p"]),
            names=tuple(d["names"]),
            coef_matrices=tuple(np.array(a) for a in d["coef_matrices"]),
            const=np.array(d["const"]),
            residuals=np.array(d["residuals"]),
            sigma=np.array(d["sigma"]),
            sample_start=parse_quarter(d["sample_start"]),
            n_sample=int(d["n_sample"]),
            tail=np.array(d["tail"]),
            exog_names=tuple(d.get("exog_names", ())),
            exog_lags=int(d.get("exog_lags", 0)),
            exog_coef=np.array(d.get("exog_coef", [])).reshape(len(d["names"]), -1)
            if d.get("exog_names")
            else np.zeros((0, 0)),
            exog_values=None if d.get("exog_values") is None else np.array(d["exog_values"]),
            exog_future=None if d.get("exog_future") is None else np.array(d["exog_future"]),
        )


def _exog_features(values: np.ndarray, rows: Sequence[int], lags: int) -> np.ndarray:
    return np.hstack([values[[t - j for t in rows]] for j in range(lags + 1)])


def fit_var(
    frame: Frame,
    p: int,
    exog: ExogenousBlock | None = None,
    exog_lags: int = 0,
) -> VarFit:
    """Stacked-regression least squares of X_t on a constant, p own lags,
    and (optionally) contemporaneous-plus-lagged exogenous values."""
    if p < 1:
        raise DomainError(f"lag order must be >= 1, got {p}")
    k = frame.n_columns
    t = len(frame)
    t_eff = t - p

    features = None
    active = None
    n_active = 0
    if exog is not None:
        if not 0 <= exog_lags <= p:
            raise DomainError(f"exog_lags must be in 0..p, got {exog_lags}")
        if exog.values.shape[0] < t:
            raise CoverageError(
                f"exogenous block covers {exog.values.shape[0]} rows, sample needs {t}"
            )
        features = _exog_features(exog.values, range(p, t), exog_lags)
        # an identically-zero exogenous column is unidentified; estimate the
        # rest and pin its coefficient at zero
        active = np.any(features != 0.0, axis=0)
        n_active = int(active.sum())
    if t_eff <= k * p + 1 + n_active:
        raise InsufficientDataError(
            f"{t} rows cannot identify a VAR({p}) with {k} variables"
            + (f" and {n_active} exogenous terms" if n_active else "")
        )

    design_parts = [np.ones((t_eff, 1)), lag_matrix(frame, p)]
    if features is not None:
        design_parts.append(features[:, active])
    design = np.hstack(design_parts)
    fit = ols(frame.values[p:], design)

    coef = fit.coefficients
    const = coef[0]
    mats = tuple(coef[1 + k * (i - 1) : 1 + k * i].T.copy() for i in range(1, p + 1))
    if exog is not None:
        exog_coef = np.zeros((k, features.shape[1]))
        exog_coef[:, active] = coef[1 + k * p :].T
    else:
        exog_coef = np.zeros((0, 0))

    return VarFit(
        p=p,
        names=frame.names,
        coef_matrices=mats,
        const=const.copy(),
        residuals=fit.residuals,
        sigma=fit.sigma,
        sample_start=frame.start,
        n_sample=t,
        tail=frame.tail_rows(p),
        exog_names=exog.names if exog is not None else (),
        exog_lags=exog_lags if exog is not None else 0,
        exog_coef=exog_coef,
        exog_values=exog.values[:t].copy() if exog is not None else None,
        exog_future=exog.values[t:].copy() if exog is not None else None,
    )


def companion_matrix(fit: VarFit) -> np.ndarray:
    """(K*p) x (K*p) block companion: A_1..A_p on top, identities below."""
    k, p = fit.n_vars, fit.p
    comp = np.zeros((k * p, k * p))
    for i, a in enumerate(fit.coef_matrices):
        comp[:k, i * k : (i + 1) * k] = a
    if p > 1:
        comp[k:, : k * (p - 1)] = np.eye(k * (p - 1))
    return comp


def stability_moduli(fit: VarFit) -> np.ndarray:
    """Eigenvalue moduli of the companion matrix, descending; all < 1 for
    a stable VAR, with unit moduli marking stochastic trends."""
    return eigen_moduli(companion_matrix(fit))


def forecast_var(
    fit: VarFit,
    horizon: int,
    exog_path: np.ndarray | None = None,
) -> Frame:
    """Dynamic point forecasts: each step feeds prior forecasts back as lags.

    If the fit has an exogenous block, future values are taken from
    ``exog_path`` (rows x n_exog) or, when omitted, from the surplus rows
    the block carried past the sample end.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    k = fit.n_vars

    exog_ext = None
    if fit.exog_names:
        future = exog_path if exog_path is not None else fit.exog_future
        future = None if future is None else np.asarray(future, dtype=float)
        if future is not None and future.ndim == 1:
            future = future.reshape(-1, 1)
        if future is None or future.shape[0] < horizon:
            have = 0 if future is None else future.shape[0]
            raise CoverageError(
                f"exogenous path covers {have} of {horizon} forecast steps"
            )
        if future.shape[1] != len(fit.exog_names):
            raise CoverageError(
                f"exogenous path has {future.shape[1]} columns, fit expects {len(fit.exog_names)}"
            )
        lags = fit.exog_lags
        past_tail = (
            fit.exog_values[-lags:] if lags > 0 else np.zeros((0, future.shape[1]))
        )
        exog_ext = np.vstack([past_tail, future])
    elif exog_path is not None:
        raise CoverageError("fit has no exogenous block but an exogenous path was given")

    history = [row for row in fit.tail]
    out = np.empty((horizon, k))
    for h in range(horizon):
        x = fit.const.copy()
        for i, a in enumerate(fit.coef_matrices, start=1):
            x += a @ history[-i]
        if exog_ext is not None:
            feats = np.concatenate(
                [exog_ext[fit.exog_lags + h - j] for j in range(fit.exog_lags + 1)]
            )
            x += fit.exog_coef @ feats
        out[h] = x
        history.append(x)

    return Frame(fit.sample_start.shift(fit.n_sample), fit.names, out)
