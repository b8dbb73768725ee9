"""Noiseless mean-field model and amplitude-death classification.

The state is the 4-vector (x1, y1, x2, y2) of Cartesian components of the
two oscillation amplitudes alpha_m = x_m + i y_m, in the rotating frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels
from .errors import StepSizeUnderflow
from .params import SystemParams

DEATH_THRESHOLD = 1e-8
DEFAULT_T_FINAL = 500.0
DEFAULT_TAIL_FRACTION = 0.2
DEFAULT_N_STARTS = 8


@dataclass(frozen=True)
class PhaseState:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def alpha1(self) -> complex:
        return self.x1 + 1j * self.y1

    @property
    def alpha2(self) -> complex:
        return self.x2 + 1j * self.y2

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2])

    @classmethod
    def from_array(cls, arr) -> "PhaseState":
        x1, y1, x2, y2 = np.asarray(arr, dtype=float)
        return cls(x1, y1, x2, y2)


def classical_rhs(state: PhaseState, params: SystemParams) -> PhaseState:
    """Time derivative of the mean-field amplitudes.

    d alpha_m/dt = -i (omega_m + 2 K_m |alpha_m|^2) alpha_m + (G/2) alpha_m
                   - kappa |alpha_m|^2 alpha_m + (V/2)(alpha_other - alpha_m)
    """
    a1, a2 = state.alpha1, state.alpha2
    r1, r2 = abs(a1) ** 2, abs(a2) ** 2
    g, v, kap = params.gain, params.v, params.kappa
    da1 = (
        -1j * (params.omega1 + 2.0 * params.k1 * r1) * a1
        + 0.5 * g * a1
        - kap * r1 * a1
        + 0.5 * v * (a2 - a1)
    )
    da2 = (
        -1j * (params.omega2 + 2.0 * params.k2 * r2) * a2
        + 0.5 * g * a2
        - kap * r2 * a2
        + 0.5 * v * (a1 - a2)
    )
    return PhaseState(da1.real, da1.imag, da2.real, da2.imag)


def _rhs_array(y: np.ndarray, params: SystemParams) -> np.ndarray:
    return _np_rhs(y, params.delta, params.v, params.k1, params.k2,
                   params.kappa, params.gain, params.frame_shift)


def _np_rhs(y, delta, v, k1, k2, kappa, gain, shift):
    x1, y1, x2, y2 = y
    r1 = x1 * x1 + y1 * y1
    r2 = x2 * x2 + y2 * y2
    w1 = shift + 2.0 * k1 * r1
    w2 = delta + shift + 2.0 * k2 * r2
    c1 = 0.5 * gain - kappa * r1 - 0.5 * v
    c2 = 0.5 * gain - kappa * r2 - 0.5 * v
    return np.array([
        w1 * y1 + c1 * x1 + 0.5 * v * x2,
        -w1 * x1 + c1 * y1 + 0.5 * v * y2,
        w2 * y2 + c2 * x2 + 0.5 * v * x1,
        -w2 * x2 + c2 * y2 + 0.5 * v * y1,
    ])


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray   # (n,)
    states: np.ndarray  # (n, 4)

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.states[-1])

    def amp_sq(self, mode: int) -> np.ndarray:
        col = 0 if mode == 1 else 2
        return self.states[:, col] ** 2 + self.states[:, col + 1] ** 2


def integrate_classical(
    state0: PhaseState, params: SystemParams, t_final: float, tol: float
) -> ClassicalTrajectory:
    """Adaptive RK45 integration; returns the solver's accepted samples."""
    if t_final <= 0:
        raise ValueError(f"t_final must be > 0, got {t_final!r}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    sol = solve_ivp(
        lambda _t, y: _rhs_array(y, params),
        (0.0, t_final),
        state0.as_array(),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
    )
    if not sol.success:
        raise StepSizeUnderflow(f"classical integration failed: {sol.message}")
    return ClassicalTrajectory(sol.t, sol.y.T)


def random_starts(params: SystemParams, n_starts: int, seed) -> np.ndarray:
    """Uniform draws from the disk |alpha_m| <= 2 sqrt(G/kappa').

    kappa' = max(kappa, 0.05 G) keeps the disk finite for kappa = 0.
    """
    rng = np.random.default_rng(seed)
    kap_eff = max(params.kappa, 0.05 * params.gain)
    r_max = 2.0 * np.sqrt(params.gain / kap_eff)
    radius = r_max * np.sqrt(rng.random((n_starts, 2)))
    phase = 2.0 * np.pi * rng.random((n_starts, 2))
    return np.column_stack([
        radius[:, 0] * np.cos(phase[:, 0]),
        radius[:, 0] * np.sin(phase[:, 0]),
        radius[:, 1] * np.cos(phase[:, 1]),
        radius[:, 1] * np.sin(phase[:, 1]),
    ])


def _batch_dt(params_max_rotation: float) -> float:
    return min(0.02, 0.35 / max(params_max_rotation, 1.0))


def _rotation_scale(delta, v, k1, k2, kappa, gain) -> float:
    kap_eff = np.maximum(kappa, 0.05 * gain)
    r_bound = 4.0 * gain / kap_eff  # IC disk covers |alpha|^2 up to this
    return float(np.max(np.abs(delta) + 0.5 * v + 0.5 * gain
                        + 2.0 * np.maximum(k1, k2) * r_bound))


def long_time_amplitude(
    params: SystemParams,
    n_starts: int = DEFAULT_N_STARTS,
    *,
    seed: int = 2025,
    t_final: float = DEFAULT_T_FINAL,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    tol: float = 1e-10,
    method: str = "adaptive",
) -> float:
    """Long-time |alpha_1|^2, maximized over random starts.

    Each start is integrated to t_final and |alpha_1|^2 is time-averaged over
    the final tail; the maximum over starts is returned so that a surviving
    limit cycle is detected regardless of basin.  method="batch" uses the
    fixed-step RK4 kernel (what the sweep harness runs); "adaptive" uses
    solve_ivp at the given tolerance.
    """
    if n_starts < 1:
        raise ValueError(f"n_starts must be >= 1, got {n_starts!r}")
    amp1, _ = long_time_amplitude_pair(
        params, n_starts, seed=seed, t_final=t_final,
        tail_fraction=tail_fraction, tol=tol, method=method,
    )
    return amp1


def long_time_amplitude_pair(
    params: SystemParams,
    n_starts: int = DEFAULT_N_STARTS,
    *,
    seed: int = 2025,
    t_final: float = DEFAULT_T_FINAL,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    tol: float = 1e-10,
    method: str = "adaptive",
) -> tuple[float, float]:
    """Same as long_time_amplitude but for both modes."""
    starts = random_starts(params, n_starts, seed)
    if method == "batch":
        cols = [np.full(n_starts, getattr(params, f)) for f in
                ("delta", "v", "k1", "k2", "kappa")]
        scale = _rotation_scale(*cols, params.gain)
        dt = _batch_dt(scale)
        n_steps = int(np.ceil(t_final / dt))
        n_tail = max(1, int(round(tail_fraction * n_steps)))
        a1, a2 = _kernels.classical_tail_averages(
            starts, *cols, params.gain, dt, n_steps, n_tail)
        return float(a1.max()), float(a2.max())
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    best = [-np.inf, -np.inf]
    for i in range(n_starts):
        traj = integrate_classical(PhaseState.from_array(starts[i]), params,
                                   t_final, tol)
        mask = traj.times >= (1.0 - tail_fraction) * t_final
        ts = traj.times[mask]
        span = ts[-1] - ts[0]
        for j, mode in enumerate((1, 2)):
            series = traj.amp_sq(mode)[mask]
            avg = float(np.trapezoid(series, ts) / span) if span > 0 else float(series[-1])
            best[j] = max(best[j], avg)
    return best[0], best[1]


def batch_long_time_amplitudes(
    delta: np.ndarray,
    v: np.ndarray,
    k1: np.ndarray,
    k2: np.ndarray,
    kappa: np.ndarray,
    gain: float,
    *,
    n_starts: int = DEFAULT_N_STARTS,
    seed: int = 2025,
    t_final: float = DEFAULT_T_FINAL,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized long-time amplitudes over a parameter grid (sweep backend).

    Start states are drawn per point from a seed sequence keyed by the point
    index, so results do not depend on how points are batched.
    """
    n_points = delta.size
    rows = n_points * n_starts
    starts = np.empty((rows, 4))
    for p in range(n_points):
        kap_eff = max(float(kappa[p]), 0.05 * gain)
        r_max = 2.0 * np.sqrt(gain / kap_eff)
        rng = np.random.default_rng(np.random.SeedSequence((seed, p)))
        radius = r_max * np.sqrt(rng.random((n_starts, 2)))
        phase = 2.0 * np.pi * rng.random((n_starts, 2))
        block = slice(p * n_starts, (p + 1) * n_starts)
        starts[block, 0] = radius[:, 0] * np.cos(phase[:, 0])
        starts[block, 1] = radius[:, 0] * np.sin(phase[:, 0])
        starts[block, 2] = radius[:, 1] * np.cos(phase[:, 1])
        starts[block, 3] = radius[:, 1] * np.sin(phase[:, 1])
    rep = lambda arr: np.repeat(np.asarray(arr, dtype=float), n_starts)
    cols = (rep(delta), rep(v), rep(k1), rep(k2), rep(kappa))
    scale = _rotation_scale(*cols, gain)
    dt = _batch_dt(scale)
    n_steps = int(np.ceil(t_final / dt))
    n_tail = max(1, int(round(tail_fraction * n_steps)))
    a1, a2 = _kernels.classical_tail_averages(starts, *cols, gain, dt,
                                              n_steps, n_tail)
    a1 = a1.reshape(n_points, n_starts).max(axis=1)
    a2 = a2.reshape(n_points, n_starts).max(axis=1)
    return a1, a2


def is_dead(amp_sq: float) -> bool:
    """Rest-state classification used by the death maps."""
    return amp_sq < DEATH_THRESHOLD


def effective_detuning(state: PhaseState, params: SystemParams) -> float:
    """Amplitude-shifted frequency difference of the two oscillators.

    omega_eff_m = omega_m + 2 K_m |alpha_m|^2; returns mode 2 minus mode 1.
    The common frame shift cancels.
    """
    r1 = abs(state.alpha1) ** 2
    r2 = abs(state.alpha2) ** 2
    return params.delta + 2.0 * params.k2 * r2 - 2.0 * params.k1 * r1
