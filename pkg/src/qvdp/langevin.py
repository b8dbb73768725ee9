"""Semiclassical model: drift-diffusion dynamics simulated as Langevin ensembles.

The drift differs from the noiseless mean-field flow by exactly +kappa*X
(the phase-space correspondence shifts the nonlinear-loss term), and the
diffusion matrix is state dependent through |alpha_m|^2 only.  Noise
strength is the symmetric matrix square root sigma of the diffusion matrix,
so that sigma sigma^T = D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .classical import PhaseState
from .errors import Divergence, IndefiniteDiffusion
from .params import SystemParams

CLAMP_TOL = 1e-9
DIVERGENCE_RADIUS = 1e3
DEFAULT_N_TRAJ = 256
DEFAULT_DT = 1e-3
DEFAULT_BURN_IN = 100.0
DEFAULT_AVERAGE_TIME = 400.0
SCHEMES = ("euler", "rotating")


def drift(state: PhaseState, params: SystemParams) -> np.ndarray:
    """Drift vector (mu_x1, mu_y1, mu_x2, mu_y2) of the semiclassical model."""
    x1, y1, x2, y2 = state.as_array()
    r1 = x1 * x1 + y1 * y1
    r2 = x2 * x2 + y2 * y2
    w1 = params.omega1 + 2.0 * params.k1 * r1
    w2 = params.omega2 + 2.0 * params.k2 * r2
    g, v, kap = params.gain, params.v, params.kappa
    c1 = 0.5 * g - kap * (r1 - 1.0) - 0.5 * v
    c2 = 0.5 * g - kap * (r2 - 1.0) - 0.5 * v
    return np.array([
        w1 * y1 + c1 * x1 + 0.5 * v * x2,
        -w1 * x1 + c1 * y1 + 0.5 * v * y2,
        w2 * y2 + c2 * x2 + 0.5 * v * x1,
        -w2 * x2 + c2 * y2 + 0.5 * v * y1,
    ])


def diffusion(state: PhaseState, params: SystemParams) -> np.ndarray:
    """4x4 diffusion matrix in (x1, y1, x2, y2) coordinates.

    Half of [[nu1, 0, -V/2, 0], [0, nu1, 0, -V/2], [-V/2, 0, nu2, 0],
    [0, -V/2, 0, nu2]] with nu_m = G/2 + kappa (2 |alpha_m|^2 - 1) + V/2.
    """
    r1 = state.x1**2 + state.y1**2
    r2 = state.x2**2 + state.y2**2
    g, v, kap = params.gain, params.v, params.kappa
    nu1 = 0.5 * g + kap * (2.0 * r1 - 1.0) + 0.5 * v
    nu2 = 0.5 * g + kap * (2.0 * r2 - 1.0) + 0.5 * v
    mat = np.array([
        [nu1, 0.0, -0.5 * v, 0.0],
        [0.0, nu1, 0.0, -0.5 * v],
        [-0.5 * v, 0.0, nu2, 0.0],
        [0.0, -0.5 * v, 0.0, nu2],
    ])
    return 0.5 * mat


def noise_matrix(diff: np.ndarray, *, clamp_tol: float = CLAMP_TOL) -> np.ndarray:
    """Symmetric square root of the diffusion matrix.

    Eigenvalues in [-clamp_tol, 0) are clamped to zero before the root;
    anything below raises IndefiniteDiffusion, since an indefinite diffusion
    matrix means the drift-diffusion truncation has left its validity regime.
    """
    diff = np.asarray(diff, dtype=float)
    if diff.shape != (4, 4) or not np.allclose(diff, diff.T, atol=1e-12):
        raise ValueError("diffusion matrix must be symmetric 4x4")
    eigvals, eigvecs = np.linalg.eigh(diff)
    if eigvals.min() < -clamp_tol:
        raise IndefiniteDiffusion(
            f"diffusion eigenvalue {eigvals.min():.3e} below -{clamp_tol:.0e}"
        )
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


@dataclass(frozen=True)
class LangevinTrajectory:
    times: np.ndarray   # (n,)
    states: np.ndarray  # (n, 4)

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.states[-1])

    def amp_sq(self, mode: int) -> np.ndarray:
        col = 0 if mode == 1 else 2
        return self.states[:, col] ** 2 + self.states[:, col + 1] ** 2


def simulate_trajectory(
    state0: PhaseState,
    params: SystemParams,
    dt: float,
    t_final: float,
    seed: int,
    *,
    record_every: int = 1,
    noise_scale: float = 1.0,
) -> LangevinTrajectory:
    """Single Euler-Maruyama trajectory X <- X + mu dt + sigma sqrt(dt) xi.

    The four noise components per step come from the counter-based stream
    keyed by the seed, so the trajectory is bit-reproducible for a given
    (seed, dt).  noise_scale = 0 gives the deterministic drift flow.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if t_final < dt:
        raise ValueError("t_final must be at least one step")
    n_steps = int(round(t_final / dt))
    noise = _kernels.philox_normals(np.uint64(seed), n_steps)
    x = state0.as_array()
    sqdt = np.sqrt(dt) * noise_scale
    times = [0.0]
    states = [x.copy()]
    state = state0
    for step in range(n_steps):
        sigma = noise_matrix(diffusion(state, params))
        x = x + drift(state, params) * dt + sqdt * (sigma @ noise[step])
        if np.linalg.norm(x) > DIVERGENCE_RADIUS:
            raise Divergence(
                f"|X| exceeded {DIVERGENCE_RADIUS:g} at t = {(step + 1) * dt:g}"
            )
        state = PhaseState.from_array(x)
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            times.append((step + 1) * dt)
            states.append(x.copy())
    return LangevinTrajectory(np.array(times), np.array(states))


@dataclass(frozen=True)
class EnsembleStats:
    mean_amp_sq_1: float
    mean_amp_sq_2: float
    standard_error_1: float
    standard_error_2: float
    n_trajectories: int
    burn_in_time: float
    average_time: float
    n_diverged: int = 0


def limit_cycle_radius(params: SystemParams) -> float:
    """Start radius for ensembles: the uncoupled deterministic amplitude.

    For kappa = 0 the uncoupled limit cycle is unbounded, so the radius
    falls back to the kappa' = 0.05 G convention used for classical starts.
    """
    kap_eff = max(params.kappa, 0.05 * params.gain)
    return float(np.sqrt(params.gain / (2.0 * kap_eff)))


def batch_tail_averages(
    delta: np.ndarray,
    v: np.ndarray,
    k1: np.ndarray,
    k2: np.ndarray,
    kappa: np.ndarray,
    gain: float,
    stream_keys: np.ndarray,
    *,
    n_traj: int,
    dt: float,
    burn_in: float,
    average_time: float,
    scheme: str = "euler",
    noise_scale: float = 1.0,
    max_rows: int = 4096,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-point, per-trajectory time averages of |alpha_m|^2 (sweep backend).

    The per-point arrays describe grid points; trajectory t of point p runs
    on the Philox stream keyed stream_keys[p] + t, so results are independent
    of batching and thread count.  A common frame shift only rotates the
    amplitudes and is therefore not a parameter here.  Returns
    (avg1, avg2, status) with shape (n_points, n_traj).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    n_burn = int(round(burn_in / dt))
    n_steps = n_burn + int(round(average_time / dt))
    if n_steps <= n_burn:
        raise ValueError("average_time must cover at least one step")
    n_points = int(np.asarray(delta).size)
    avg1 = np.empty((n_points, n_traj))
    avg2 = np.empty((n_points, n_traj))
    status = np.empty((n_points, n_traj), dtype=np.int8)
    block = max(1, max_rows // n_traj)
    rep = lambda arr, sl: np.repeat(np.asarray(arr, dtype=float)[sl], n_traj)
    for start in range(0, n_points, block):
        sl = slice(start, min(start + block, n_points))
        cols = tuple(rep(arr, sl) for arr in (delta, v, k1, k2, kappa))
        kap_eff = np.maximum(cols[4], 0.05 * gain)
        radius = np.sqrt(gain / (2.0 * kap_eff))
        keys = (np.repeat(np.asarray(stream_keys, dtype=np.uint64)[sl], n_traj)
                + np.tile(np.arange(n_traj, dtype=np.uint64), sl.stop - sl.start))
        a1, a2, st = _kernels.langevin_tail_averages(
            keys, *cols, gain, radius, dt, n_burn, n_steps,
            scheme == "rotating", noise_scale)
        rows = sl.stop - sl.start
        avg1[sl] = a1.reshape(rows, n_traj)
        avg2[sl] = a2.reshape(rows, n_traj)
        status[sl] = st.reshape(rows, n_traj)
    return avg1, avg2, status


def ensemble_average(
    params: SystemParams,
    n_traj: int = DEFAULT_N_TRAJ,
    dt: float = DEFAULT_DT,
    burn_in: float = DEFAULT_BURN_IN,
    average_time: float = DEFAULT_AVERAGE_TIME,
    seed: int = 0,
    *,
    scheme: str = "euler",
) -> EnsembleStats:
    """Ensemble- and time-averaged |alpha_m|^2 with standard errors.

    Trajectory i runs on the stream keyed seed + i, starting on the
    limit-cycle radius with a random phase; |alpha_m|^2 is time-averaged
    after the burn-in and the ensemble spread of those per-trajectory
    averages gives the standard errors.  Raises Divergence when more than
    5% of the trajectories leave |X| < 1e3, and IndefiniteDiffusion when
    any trajectory meets an inadmissible diffusion matrix.
    """
    if n_traj < 2:
        raise ValueError(f"n_traj must be >= 2, got {n_traj!r}")
    avg1, avg2, status = batch_tail_averages(
        np.array([params.delta]), np.array([params.v]), np.array([params.k1]),
        np.array([params.k2]), np.array([params.kappa]), params.gain,
        np.array([seed], dtype=np.uint64),
        n_traj=n_traj, dt=dt, burn_in=burn_in, average_time=average_time,
        scheme=scheme,
    )
    status = status[0]
    if np.any(status == _kernels.STATUS_INDEFINITE):
        raise IndefiniteDiffusion(
            "diffusion matrix left the admissible regime during the ensemble"
        )
    ok = status == _kernels.STATUS_OK
    n_div = int(n_traj - ok.sum())
    if n_div > 0.05 * n_traj:
        raise Divergence(f"{n_div} of {n_traj} trajectories diverged")
    a1 = avg1[0][ok]
    a2 = avg2[0][ok]
    n_ok = int(ok.sum())
    return EnsembleStats(
        mean_amp_sq_1=float(a1.mean()),
        mean_amp_sq_2=float(a2.mean()),
        standard_error_1=float(a1.std(ddof=1) / np.sqrt(n_ok)),
        standard_error_2=float(a2.std(ddof=1) / np.sqrt(n_ok)),
        n_trajectories=n_ok,
        burn_in_time=burn_in,
        average_time=average_time,
        n_diverged=n_div,
    )
