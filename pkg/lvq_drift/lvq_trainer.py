"""Monte Carlo engine: LVQ1 training of two prototypes with optional weight decay."""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from .const import DEFAULT_ETA, DEFAULT_GAMMA, GRAM_TOL, GRID_TOL, LOGGER
from .exceptions import GramConditionError, ModelParamsError, StrideError
from .models import SIGNS, OrderParams, PrototypeState, sign_index
from .stream_gen import (
    FloatArray,
    LabelledExample,
    ModelParams,
    PriorSchedule,
    sample_block,
)

type Observer = Callable[[PrototypeState], None]


def init_prototypes(
    dim: int,
    q_hat: float,
    rng: np.random.Generator,
    *,
    eta: float = DEFAULT_ETA,
    gamma: float = DEFAULT_GAMMA,
) -> PrototypeState:
    """Return two independent random prototypes with squared norm exactly q_hat."""
    w = rng.standard_normal((2, dim))
    if q_hat == 0:
        w[:] = 0.0
    else:
        w *= math.sqrt(q_hat) / np.linalg.norm(w, axis=1, keepdims=True)
    return PrototypeState(w=w, mu=0, eta=eta, gamma=gamma)


def _winner(w: FloatArray, xi: FloatArray) -> int:
    """Return the row of the closest prototype; ties go to row 0 (label +1)."""
    diff = w - xi
    d_plus = float(diff[0] @ diff[0])
    d_minus = float(diff[1] @ diff[1])
    return 0 if d_plus <= d_minus else 1


def _step(w: FloatArray, xi: FloatArray, sigma: int, rate: float, decay: float) -> None:
    """Apply decay and one LVQ1 update to w in place."""
    if decay != 1.0:
        w *= decay
    j = _winner(w, xi)
    direction = 1.0 if SIGNS[j] == sigma else -1.0
    w[j] += (rate * direction) * (xi - w[j])


def classify(state: PrototypeState, xi: FloatArray) -> int:
    """Return the label of the nearest prototype (squared Euclidean, tie -> +1)."""
    return SIGNS[_winner(state.w, xi)]


def lvq1_step(state: PrototypeState, ex: LabelledExample) -> PrototypeState:
    """Train on one example; the state is updated in place and returned.

    Both prototypes are first shrunk by (1 - gamma/N); then the winner moves
    towards xi if its label matches sigma and away from it otherwise.
    """
    n = state.dim
    _step(state.w, ex.xi, ex.sigma, state.eta / n, 1.0 - state.gamma / n)
    state.mu += 1
    return state


def measure_order_params(state: PrototypeState, params: ModelParams) -> OrderParams:
    """Measure R_{S sigma} = w_S . B_sigma, Q_{ST} = w_S . w_T and alpha = mu/N."""
    r = state.w @ np.stack([params.b_plus, params.b_minus], axis=1)
    q = state.w @ state.w.T
    return OrderParams(
        r_pp=float(r[0, 0]),
        r_pm=float(r[0, 1]),
        r_mp=float(r[1, 0]),
        r_mm=float(r[1, 1]),
        q_pp=float(q[0, 0]),
        q_mm=float(q[1, 1]),
        q_pm=float(q[0, 1]),
        alpha=state.mu / state.dim,
    )


def steps_per_stride(stride: float, dim: int) -> int:
    """Return the number of examples per recording stride."""
    steps = round(stride * dim)
    if steps < 1 or abs(stride * dim - steps) > GRID_TOL:
        raise StrideError(translation_placeholders={"stride": stride, "dim": dim})
    return steps


def train(
    state: PrototypeState,
    params: ModelParams,
    schedule: PriorSchedule,
    *,
    alpha_max: float,
    stride: float,
    rng: np.random.Generator,
    observer: Observer | None = None,
) -> PrototypeState:
    """Train on a drifting stream until alpha_max, observing every stride.

    The observer sees the starting state, the state after every
    ``stride * N`` examples and the final state at alpha_max, which may
    close a shorter last block. Example mu is drawn with prior p_+(mu/N).
    """
    n = params.dim
    if state.dim != n:
        raise ModelParamsError(f"prototypes have dim {state.dim}, model has {n}")
    block = steps_per_stride(stride, n)
    mu_end = round(alpha_max * n)
    if abs(alpha_max * n - mu_end) > GRID_TOL:
        raise StrideError(
            translation_key="alpha_max_mismatch",
            translation_placeholders={"alpha_max": alpha_max, "dim": n},
        )
    rate = state.eta / n
    decay = 1.0 - state.gamma / n
    w = state.w

    if observer is not None:
        observer(state)
    while state.mu < mu_end:
        size = min(block, mu_end - state.mu)
        p_plus = schedule.evaluate((state.mu + np.arange(size)) / n)
        xi, sigma = sample_block(params, p_plus, rng)
        for x, s in zip(xi, sigma, strict=True):
            _step(w, x, int(s), rate, decay)
        state.mu += size
        if observer is not None:
            observer(state)
    LOGGER.debug("Trained %d examples (alpha=%.3f)", state.mu, state.alpha)
    return state


def _complement_pair(params: ModelParams) -> tuple[FloatArray, FloatArray]:
    """Return two orthonormal vectors orthogonal to B_+ and B_-."""
    if params.dim < 4:
        raise ModelParamsError("building prototypes from overlaps needs dim >= 4")
    found: list[FloatArray] = []
    for k in range(params.dim):
        v = np.zeros(params.dim)
        v[k] = 1.0
        for u in (params.b_plus, params.b_minus, *found):
            v -= (u @ v) * u
        norm = float(np.linalg.norm(v))
        if norm > 0.5:
            found.append(v / norm)
        if len(found) == 2:
            break
    return found[0], found[1]


def prototypes_from_order_params(
    op: OrderParams,
    params: ModelParams,
    *,
    eta: float = DEFAULT_ETA,
    gamma: float = DEFAULT_GAMMA,
) -> PrototypeState:
    """Return prototypes whose measured order parameters equal op.

    The part of w_S outside span{B_+, B_-} is placed in two further
    orthonormal directions with Gram matrix Q - R R^T.
    """
    r = op.r_matrix()
    residual = op.q_matrix() - r @ r.T
    eigval, eigvec = np.linalg.eigh(residual)
    if eigval.min() < -GRAM_TOL:
        raise GramConditionError(op.alpha, op)
    factor = eigvec * np.sqrt(np.clip(eigval, 0.0, None))
    u1, u2 = _complement_pair(params)
    w = np.empty((2, params.dim))
    for s in SIGNS:
        i = sign_index(s)
        w[i] = (
            r[i, 0] * params.b_plus
            + r[i, 1] * params.b_minus
            + factor[i, 0] * u1
            + factor[i, 1] * u2
        )
    mu = round(op.alpha * params.dim)
    return PrototypeState(w=w, mu=mu, eta=eta, gamma=gamma)
