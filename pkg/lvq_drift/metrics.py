"""Class-wise, reference and tracking generalization errors."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .const import DEGENERATE_STD, EMPIRICAL_CHUNK, LOGGER
from .exceptions import InvalidValueError
from .models import ErrorReport, OrderParams, PrototypeState
from .stream_gen import ModelParams, sample_cluster
from .theory_ode import Z_WEIGHTS, gaussian_moments


def winner_statistics(
    op: OrderParams, params: ModelParams, sigma: int
) -> tuple[float, float]:
    """Return mean and std of z = d_- - d_+ for a fresh example of cluster sigma."""
    moments = gaussian_moments(op, params, sigma)
    m = float(Z_WEIGHTS @ moments.mean) + op.q_mm - op.q_pp
    var = float(Z_WEIGHTS @ moments.cov @ Z_WEIGHTS)
    return m, math.sqrt(max(var, 0.0))


def is_degenerate(op: OrderParams, params: ModelParams) -> bool:
    """Return True if the prototypes coincide, so the winner is decided by the tie rule."""
    return winner_statistics(op, params, 1)[1] <= DEGENERATE_STD


def class_error_analytic(op: OrderParams, params: ModelParams, sigma: int) -> float:
    """Return the probability that an example of cluster sigma is misclassified.

    Prototype +1 wins iff z >= 0, so the error is Phi(-sigma m / s). With
    coinciding prototypes the tie rule decides: eps+ = 0 and eps- = 1.
    """
    m, s = winner_statistics(op, params, sigma)
    if s > DEGENERATE_STD:
        return float(ndtr(-sigma * m / s))
    LOGGER.warning("Coinciding prototypes at alpha=%s; tie rule decides", op.alpha)
    plus_wins = m >= 0
    if sigma == 1:
        return 0.0 if plus_wins else 1.0
    return 1.0 if plus_wins else 0.0


def class_error_empirical(
    state: PrototypeState,
    params: ModelParams,
    sigma: int,
    n_test: int,
    rng: np.random.Generator,
) -> float:
    """Return the fraction of n_test fresh cluster-sigma examples the prototypes misclassify."""
    if n_test < 1:
        raise InvalidValueError("n_test must be at least 1")
    w = state.w
    norms = np.einsum("ij,ij->i", w, w)
    wrong = 0
    remaining = n_test
    while remaining:
        size = min(remaining, EMPIRICAL_CHUNK)
        h = sample_cluster(params, sigma, size, rng) @ w.T
        # d_- - d_+ ; the squared input norm cancels.
        z = 2.0 * (h[:, 0] - h[:, 1]) + norms[1] - norms[0]
        predicted = np.where(z >= 0, 1, -1)
        wrong += int(np.count_nonzero(predicted != sigma))
        remaining -= size
    return wrong / n_test


def report(eps_plus: float, eps_minus: float, p_plus_current: float) -> ErrorReport:
    """Combine class-wise errors into reference (equal priors) and tracking errors."""
    for name, value in (
        ("eps_plus", eps_plus),
        ("eps_minus", eps_minus),
        ("p_plus_current", p_plus_current),
    ):
        if not 0.0 <= value <= 1.0:
            raise InvalidValueError(f"{name} must lie in [0, 1], got {value}")
    return ErrorReport(
        eps_plus=eps_plus,
        eps_minus=eps_minus,
        eps_ref=0.5 * (eps_plus + eps_minus),
        eps_track=p_plus_current * eps_plus + (1.0 - p_plus_current) * eps_minus,
    )


def error_report(op: OrderParams, params: ModelParams, p_plus: float) -> ErrorReport:
    """Return the analytic error report of a macroscopic state."""
    return report(
        class_error_analytic(op, params, 1),
        class_error_analytic(op, params, -1),
        p_plus,
    )
