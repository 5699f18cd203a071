"""Time integration of the modal system.

Two steppers:

* ``implicit_midpoint`` (default): A-stable, so the step size is set by the
  wave period of interest, not by the stiff heat modes. Each step solves the
  midpoint system exactly per mode; the only nonlinearity is the scalar
  Kirchhoff coefficient, which is resolved by fixed-point iteration. The
  linear (m1 = 0) problem converges in one pass.
* ``rk4``: classical explicit Runge-Kutta, for convergence studies. Subject
  to the real-axis stability limit of the heat block, enforced as
  dt * lambda_max <= 2.5.

Both steppers accumulate the dissipation integral int_0^t E' ds alongside the
state (midpoint: the exact discrete flux dt * D(midpoint); RK4: the same
Runge-Kutta quadrature as the state). Re-integrating that quantity from
thinned records afterwards is too lossy for the a-priori identity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import EnergyRecord, energy
from .model import ModelParams, ModalState, grad_norm_sq, kirchhoff_coefficient, rhs
from .spectrum import EigenBasis

RK4_STABILITY_LIMIT = 2.5


class SolverDivergenceError(RuntimeError):
    """Midpoint fixed-point iteration failed to converge."""

    def __init__(self, message: str, residual: float, t: float):
        super().__init__(message)
        self.residual = residual
        self.t = t


@dataclass(frozen=True)
class StepperConfig:
    method: str = "implicit_midpoint"
    dt: float = 1e-3
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.method not in ("implicit_midpoint", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (self.newton_tol > 0.0):
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.newton_max_iter < 1:
            raise ValueError(f"newton_max_iter must be >= 1, got {self.newton_max_iter}")


@dataclass
class Trajectory:
    """Thinned simulation output: states and energy records at the same
    sample times (every record_every-th step, plus t = 0 and t = t_end)."""

    params: ModelParams
    basis: EigenBasis
    config: StepperConfig
    states: list[ModalState] = field(default_factory=list)
    records: list[EnergyRecord] = field(default_factory=list)
    n_steps: int = 0

    @property
    def final_state(self) -> ModalState:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])


def default_dt(params: ModelParams, basis: EigenBasis, state: ModalState) -> float:
    """0.1 / sqrt(phi(S0) * lambda_max): ~ a tenth of the fastest retained
    wave period at the initial stiffness."""
    phi = kirchhoff_coefficient(params, grad_norm_sq(basis, state.h))
    return 0.1 / math.sqrt(phi * basis.lambda_max)


def _midpoint_step(params: ModelParams, basis: EigenBasis, state: ModalState,
                   dt: float, tol: float, max_iter: int):
    """One implicit-midpoint step via exact per-mode solves.

    With a = dt/2 and phi frozen, the midpoint system per mode is linear:

        m_h - a m_v                       = h
        a phi lam m_h + m_v - a alpha lam m_c = v
        a beta lam m_v + (1 + a lam) m_c  = c

    Cramer's rule gives m = n / det with det = d0 + d1 phi and n_h
    independent of phi, so the fixed point runs on the scalar phi alone.
    """
    lam = basis.lambdas
    a = 0.5 * dt
    s_ = 1.0 + a * lam
    q = a * params.alpha * lam
    r_ = a * params.beta * lam
    d0 = s_ + a * a * params.alpha * params.beta * lam * lam
    d1 = a * a * lam * s_

    b1, b2, b3 = state.h, state.v, state.c
    n_h = (s_ + q * r_) * b1 + a * s_ * b2 + a * q * b3

    phi = kirchhoff_coefficient(params, grad_norm_sq(basis, state.h))
    if params.linear:
        det = d0 + d1 * phi
        m_h = n_h / det
    else:
        converged = False
        for _ in range(max_iter):
            det = d0 + d1 * phi
            m_h = n_h / det
            s_mid = float(lam @ (m_h * m_h))
            phi_new = params.m0 + params.m1 * s_mid
            resid = abs(phi_new - phi)
            phi = phi_new
            if resid <= tol * max(1.0, abs(phi)):
                converged = True
                break
        if not converged:
            raise SolverDivergenceError(
                f"midpoint iteration stalled at t={state.t:.6g} (residual {resid:.3e})",
                residual=resid, t=state.t)
        det = d0 + d1 * phi
        m_h = n_h / det

    m_v = (s_ * b2 + q * b3 - phi * a * lam * s_ * b1) / det
    m_c = (b3 - r_ * b2 + phi * a * lam * (r_ * b1 + a * b3)) / det

    h_new = 2.0 * m_h - b1
    v_new = 2.0 * m_v - b2
    c_new = 2.0 * m_c - b3
    if not (np.isfinite(h_new).all() and np.isfinite(v_new).all() and np.isfinite(c_new).all()):
        raise FloatingPointError(f"non-finite state after step at t={state.t:.6g}")
    # exact discrete heat flux of the midpoint scheme
    d_inc = -dt * (params.alpha / params.beta) * float(lam @ (m_c * m_c))
    return ModalState(t=state.t + dt, h=h_new, v=v_new, c=c_new), d_inc


def _rk4_step(params: ModelParams, basis: EigenBasis, state: ModalState, dt: float):
    lam = basis.lambdas
    ab = params.alpha / params.beta

    def f(h, v, c):
        phi = params.m0 + params.m1 * float(lam @ (h * h))
        return v, -phi * lam * h + params.alpha * lam * c, -lam * c - params.beta * lam * v

    def d_of(c):
        return -ab * float(lam @ (c * c))

    h, v, c = state.h, state.v, state.c
    k1 = f(h, v, c)
    d1 = d_of(c)
    s2 = (h + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], c + 0.5 * dt * k1[2])
    k2 = f(*s2)
    d2 = d_of(s2[2])
    s3 = (h + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], c + 0.5 * dt * k2[2])
    k3 = f(*s3)
    d3 = d_of(s3[2])
    s4 = (h + dt * k3[0], v + dt * k3[1], c + dt * k3[2])
    k4 = f(*s4)
    d4 = d_of(s4[2])

    h_new = h + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v_new = v + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    c_new = c + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    if not (np.isfinite(h_new).all() and np.isfinite(v_new).all() and np.isfinite(c_new).all()):
        raise FloatingPointError(f"non-finite state after step at t={state.t:.6g}")
    d_inc = dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    return ModalState(t=state.t + dt, h=h_new, v=v_new, c=c_new), d_inc


def step(params: ModelParams, basis: EigenBasis, state: ModalState,
         config: StepperConfig, dt: float | None = None):
    """Advance one step of size `dt` (default config.dt). Returns the new
    state and the increment of the dissipation integral over the step."""
    if dt is None:
        dt = config.dt
    if config.method == "implicit_midpoint":
        return _midpoint_step(params, basis, state, dt,
                              config.newton_tol, config.newton_max_iter)
    return _rk4_step(params, basis, state, dt)


def simulate(params: ModelParams, basis: EigenBasis, state0: ModalState,
             t_end: float, config: StepperConfig | None = None,
             record_every: int = 1) -> Trajectory:
    """Integrate from state0.t to t_end, landing on t_end exactly (the last
    step shrinks as needed). Snapshots are kept every `record_every`-th step
    plus the endpoints."""
    if config is None:
        config = StepperConfig()
    if not (t_end > state0.t):
        raise ValueError(f"t_end={t_end} must exceed start time {state0.t}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if config.method == "rk4" and config.dt * basis.lambda_max > RK4_STABILITY_LIMIT:
        raise ValueError(
            f"rk4 unstable: dt * lambda_max = {config.dt * basis.lambda_max:.3g} "
            f"> {RK4_STABILITY_LIMIT}; shrink dt below "
            f"{RK4_STABILITY_LIMIT / basis.lambda_max:.3e} or use implicit_midpoint")

    span = t_end - state0.t
    n_full = int(math.floor(span / config.dt + 1e-9))
    dt_last = span - n_full * config.dt
    if dt_last < 1e-12 * config.dt:
        dt_last = 0.0

    traj = Trajectory(params=params, basis=basis, config=config)
    state = state0.copy()
    diss = 0.0
    traj.states.append(state.copy())
    traj.records.append(energy(params, basis, state, diss_int=diss))

    t0 = state0.t
    for n in range(1, n_full + 1):
        state, d_inc = step(params, basis, state, config)
        state.t = t0 + n * config.dt  # avoid accumulated roundoff in t
        diss += d_inc
        if n % record_every == 0 and not (n == n_full and dt_last == 0.0):
            traj.states.append(state.copy())
            traj.records.append(energy(params, basis, state, diss_int=diss))
    if dt_last > 0.0:
        state, d_inc = step(params, basis, state, config, dt=dt_last)
        diss += d_inc
    state.t = t_end
    traj.states.append(state.copy())
    traj.records.append(energy(params, basis, state, diss_int=diss))
    traj.n_steps = n_full + (1 if dt_last > 0.0 else 0)
    return traj
