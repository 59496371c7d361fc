"""Thermodynamic-limit engine: order-parameter ODEs for LVQ1 with weight decay.

For an example of cluster sigma the projections h_S = w_S . xi and
b_tau = B_tau . xi are jointly Gaussian with

* <h_S> = lam R_{S sigma}, <b_tau> = lam delta_{tau sigma},
* Cov(h_S, h_T) = v_sigma Q_{ST}, Cov(h_S, b_tau) = v_sigma R_{S tau},
  Cov(b_rho, b_tau) = v_sigma delta_{rho tau}.

Prototype S wins when z_S = S z >= 0 (z >= 0 for S = +1 at a tie), with
z = 2 (h_+ - h_-) + Q_{--} - Q_{++}. For jointly Gaussian (x, z) with z-mean
m and z-std s,

    <Theta(S z)>   = Phi(S m / s)
    <x Theta(S z)> = <x> Phi(S m / s) + S Cov(x, z) phi(m / s) / s

and f_S = S sigma Theta(S z). Terms of order 1/N are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .const import (
    DEFAULT_D_ALPHA,
    DEFAULT_OUTPUT_STRIDE,
    DEGENERATE_STD,
    GRAM_TOL,
    GRID_TOL,
    LOGGER,
)
from .exceptions import GramConditionError, InvalidValueError
from .models import SIGNS, AverageTerms, GaussianMoments, OrderParams, sign_index
from .stream_gen import FloatArray, ModelParams, PriorSchedule

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# z = Z_WEIGHTS . (h_+, h_-, b_+, b_-) + offset
Z_WEIGHTS = np.array([2.0, -2.0, 0.0, 0.0])


@dataclass(frozen=True)
class HeavisideArgument:
    """Linear form a_+ h_+ + a_- h_- + offset whose sign selects the winner."""

    coef_plus: float
    coef_minus: float
    offset: float

    def __call__(self, h_plus: float, h_minus: float) -> float:
        """Evaluate the form."""
        return self.coef_plus * h_plus + self.coef_minus * h_minus + self.offset


def modulation_argument(op: OrderParams, label: int = 1) -> HeavisideArgument:
    """Return d_{-S} - d_S in terms of h_+, h_- for prototype S = label.

    |xi|^2 enters both distances and cancels.
    """
    return HeavisideArgument(
        coef_plus=2.0 * label,
        coef_minus=-2.0 * label,
        offset=label * (op.q_mm - op.q_pp),
    )


def gaussian_moments(op: OrderParams, params: ModelParams, sigma: int) -> GaussianMoments:
    """Return the mean and covariance of (h_+, h_-, b_+, b_-) under cluster sigma."""
    r = op.r_matrix()
    c = sign_index(sigma)
    mean = np.empty(4)
    mean[:2] = params.lam * r[:, c]
    mean[2:] = 0.0
    mean[2 + c] = params.lam
    cov = np.empty((4, 4))
    cov[:2, :2] = op.q_matrix()
    cov[:2, 2:] = r
    cov[2:, :2] = r.T
    cov[2:, 2:] = np.eye(2)
    cov *= params.variance(sigma)
    return GaussianMoments(sigma=sigma, mean=mean, cov=cov)


def average_terms(op: OrderParams, params: ModelParams) -> AverageTerms:
    """Return the conditional averages of the modulation terms for both clusters."""
    offset = op.q_mm - op.q_pp
    f = np.empty((2, 2))
    theta = np.empty((2, 2))
    bf = np.empty((2, 2, 2))
    hf = np.empty((2, 2, 2))
    ff = np.zeros((2, 2, 2))
    degenerate = False

    for sigma in SIGNS:
        c = sign_index(sigma)
        moments = gaussian_moments(op, params, sigma)
        m = float(Z_WEIGHTS @ moments.mean) + offset
        cov_xz = moments.cov @ Z_WEIGHTS
        var = float(Z_WEIGHTS @ cov_xz)
        if var > DEGENERATE_STD**2:
            s = math.sqrt(var)
            u = m / s
            phi_plus = float(ndtr(u))
            density = _INV_SQRT_2PI * math.exp(-0.5 * u * u) / s
        else:
            # Coinciding prototypes: the tie goes to +1.
            phi_plus = 1.0 if m >= 0 else 0.0
            density = 0.0
            degenerate = True
        theta[c] = (phi_plus, 1.0 - phi_plus)

        for label in SIGNS:
            k = sign_index(label)
            x_theta = moments.mean * theta[c, k] + label * cov_xz * density
            sign = label * sigma
            f[c, k] = sign * theta[c, k]
            hf[c, :, k] = sign * x_theta[:2]
            bf[c, :, k] = sign * x_theta[2:]
            # f_S f_T vanishes for S != T: only one prototype wins.
            ff[c, k, k] = theta[c, k]

    if degenerate:
        LOGGER.debug("Degenerate winner statistics at alpha=%s", op.alpha)
    return AverageTerms(f=f, theta=theta, bf=bf, hf=hf, ff=ff, degenerate=degenerate)


def _rhs(
    op: OrderParams, params: ModelParams, p_plus: float, gamma: float, eta: float
) -> tuple[FloatArray, bool]:
    """Return d(order parameters)/d(alpha) as a vector and the degenerate flag."""
    terms = average_terms(op, params)
    f_w, bf_w, hf_w = terms.weighted(p_plus)
    r = op.r_matrix()
    q = op.q_matrix()

    # bf_w[t, s] = <b_tau f_S>, hf_w[t, s] = <h_T f_S>.
    d_r = eta * (bf_w.T - r * f_w[:, None]) - gamma * r
    noise = (
        p_plus * params.v_plus * terms.ff[0] + (1.0 - p_plus) * params.v_minus * terms.ff[1]
    )
    d_q = (
        eta * (hf_w + hf_w.T - q * (f_w[:, None] + f_w[None, :]))
        + eta**2 * noise
        - 2.0 * gamma * q
    )
    vector = np.array(
        [d_r[0, 0], d_r[0, 1], d_r[1, 0], d_r[1, 1], d_q[0, 0], d_q[1, 1], d_q[0, 1]]
    )
    return vector, terms.degenerate


def ode_rhs(
    op: OrderParams, params: ModelParams, p_plus: float, gamma: float, eta: float
) -> OrderParams:
    """Return the derivatives of all order parameters with respect to alpha.

    The result is an ``OrderParams`` whose fields hold derivatives; its
    ``alpha`` is the time the derivative was taken at.
    """
    vector, _ = _rhs(op, params, p_plus, gamma, eta)
    return OrderParams.from_array(vector, op.alpha)


@dataclass(frozen=True)
class IntegrationResult:
    """Trajectory on the output grid plus integration diagnostics."""

    trajectory: list[OrderParams]
    alpha: FloatArray
    p_plus: FloatArray
    steps: int
    degenerate_evaluations: int


def output_grid(start: float, alpha_max: float, stride: float) -> FloatArray:
    """Return start, start + stride, ... and alpha_max as the last point.

    A final interval shorter than stride ends the grid when alpha_max is not
    on it.
    """
    count = math.floor((alpha_max - start) / stride + GRID_TOL)
    grid = start + stride * np.arange(count + 1)
    if alpha_max - grid[-1] > GRID_TOL:
        grid = np.append(grid, alpha_max)
    return grid


def _stops(grid: FloatArray, breakpoints: tuple[float, ...]) -> list[float]:
    """Merge the output grid with interior breakpoints."""
    stops = [float(a) for a in grid]
    for bp in breakpoints:
        if grid[0] < bp < grid[-1] and np.min(np.abs(grid - bp)) > GRID_TOL:
            stops.append(float(bp))
    return sorted(stops)


def integrate(
    init: OrderParams,
    params: ModelParams,
    schedule: PriorSchedule,
    gamma: float,
    eta: float,
    alpha_max: float,
    d_alpha: float = DEFAULT_D_ALPHA,
    *,
    output_stride: float = DEFAULT_OUTPUT_STRIDE,
) -> IntegrationResult:
    """Integrate the order-parameter ODEs with fixed-step RK4.

    Integration restarts at every schedule breakpoint; inside an interval the
    prior is taken left-continuously, so a sudden switch at alpha_o acts from
    alpha_o on. States are emitted on the output grid, whose last point is
    alpha_max.
    """
    if d_alpha <= 0:
        raise InvalidValueError("d_alpha must be positive")
    if alpha_max <= init.alpha:
        raise InvalidValueError("alpha_max must exceed the initial alpha")

    grid = output_grid(init.alpha, alpha_max, output_stride)
    stops = _stops(grid, schedule.breakpoints())
    y = init.as_array()
    trajectory = [init]
    steps = 0
    degenerate = 0

    def derivative(alpha: float, state: FloatArray, right: float) -> FloatArray:
        nonlocal degenerate
        p_plus = schedule.evaluate(min(alpha, math.nextafter(right, -math.inf)))
        vector, flag = _rhs(
            OrderParams.from_array(state, alpha), params, p_plus, gamma, eta
        )
        degenerate += flag
        return vector

    for left, right in zip(stops[:-1], stops[1:], strict=True):
        n = max(1, math.ceil((right - left) / d_alpha - GRID_TOL))
        h = (right - left) / n
        for i in range(n):
            a = left + i * h
            k1 = derivative(a, y, right)
            k2 = derivative(a + 0.5 * h, y + 0.5 * h * k1, right)
            k3 = derivative(a + 0.5 * h, y + 0.5 * h * k2, right)
            k4 = derivative(a + h, y + h * k3, right)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            steps += 1
            state = OrderParams.from_array(y, a + h)
            if state.gram_violation() > GRAM_TOL:
                raise GramConditionError(a + h, state)
        if np.min(np.abs(grid - right)) <= GRID_TOL:
            trajectory.append(OrderParams.from_array(y, right))

    if degenerate:
        LOGGER.warning(
            "%d of %d right-hand side evaluations had coinciding prototypes",
            degenerate,
            4 * steps,
        )
    LOGGER.debug(
        "Integrated to alpha=%s in %d RK4 steps (%d degenerate evaluations)",
        alpha_max,
        steps,
        degenerate,
    )
    return IntegrationResult(
        trajectory=trajectory,
        alpha=grid,
        p_plus=np.asarray(schedule.evaluate(grid)),
        steps=steps,
        degenerate_evaluations=degenerate,
    )
