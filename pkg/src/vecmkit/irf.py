"""Moving-average representation and orthogonalized impulse responses.

psi_h is entry (response, impulse) of Phi_h P, where Phi_h are the MA
coefficient matrices of the fitted VAR and P is the Cholesky factor of the
residual covariance, so a unit impulse is one standard deviation of the
orthogonalized shock and the variable ordering of the fit decides the
orthogonalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import cholesky_lower
from .var import VarFit


def ma_coefficients(fit: VarFit, horizon: int) -> list[np.ndarray]:
    """Phi_0 = I and Phi_h = sum_{i=1..min(h,p)} A_i Phi_{h-i}."""
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    k = fit.n_vars
    phis = [np.eye(k)]
    for h in range(1, horizon + 1):
        acc = np.zeros((k, k))
        for i in range(1, min(h, fit.p) + 1):
            acc += fit.coef_matrices[i - 1] @ phis[h - i]
        phis.append(acc)
    return phis


@dataclass(frozen=True)
class IrfResult:
    """One impulse-response path plus the full K x K response matrices
    (Phi_h P) retained for audit."""

    horizon: int
    impulse: str
    response: str
    values: np.ndarray  # (horizon + 1,)
    ordering: tuple[str, ...]
    matrices: np.ndarray  # (horizon + 1) x K x K

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "impulse": self.impulse,
            "response": self.response,
            "values": self.values.tolist(),
            "ordering": list(self.ordering),
        }

    def csv_rows(self) -> list[tuple[int, float]]:
        """(step, response) pairs, ready for two-column plot output."""
        return [(h, float(v)) for h, v in enumerate(self.values)]


def orthogonalized_irf(
    fit: VarFit, horizon: int, impulse: str, response: str
) -> IrfResult:
    """Response path of one variable to a one-standard-deviation
    orthogonalized shock in another, over 0..horizon steps."""
    for label, name in (("impulse", impulse), ("response", response)):
        if name not in fit.names:
            raise DomainError(f"{label} variable {name!r} is not in the fit: {fit.names}")
    chol = cholesky_lower(fit.sigma)
    mats = np.stack([phi @ chol for phi in ma_coefficients(fit, horizon)])
    i = fit.names.index(impulse)
    j = fit.names.index(response)
    return IrfResult(
        horizon=horizon,
        impulse=impulse,
        response=response,
        values=mats[:, j, i].copy(),
        ordering=fit.names,
        matrices=mats,
    )
