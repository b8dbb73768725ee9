"""Liouvillian assembly, steady states, time evolution and observables.

Vectorization is row-major (C order): ``vec(rho) = rho.reshape(-1)``, so
``vec(A rho B) = kron(A, B.T) vec(rho)``.  Under this convention

    -i[H, .]  ->  -i (kron(H, I) - kron(I, H.T))
    D[C]      ->  kron(C, conj(C)) - (kron(C'C, I) + kron(I, (C'C).T)) / 2

which is verified against the dense Lindblad definition in the tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import InvariantViolation, SingularSolve, StepSizeUnderflow
from .fock import (
    annihilation,
    collective_jump,
    mode_annihilation,
    number_op,
)
from .params import SystemParams, TruncationSpec, check_mode

DENSE_FALLBACK_MAX_DIM2 = 2500
TRUNCATION_WARN = 1e-6
TRUNCATION_ERROR = 1e-3


def hamiltonian_superop(h: sp.spmatrix) -> sp.csr_matrix:
    """Superoperator of the commutator part, -i[H, rho]."""
    d = h.shape[0]
    eye = sp.identity(d, format="csr", dtype=complex)
    return (-1j * (sp.kron(h, eye) - sp.kron(eye, h.T))).tocsr()


def lindblad_term(c: sp.spmatrix) -> sp.csr_matrix:
    """Superoperator of the dissipator D[c] rho = c rho c' - {c'c, rho}/2."""
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {c.shape}")
    d = c.shape[0]
    eye = sp.identity(d, format="csr", dtype=complex)
    cdc = (c.conj().T @ c).tocsr()
    return (
        sp.kron(c, c.conj()) - 0.5 * (sp.kron(cdc, eye) + sp.kron(eye, cdc.T))
    ).tocsr()


def build_hamiltonian(
    params: SystemParams, mode: int, trunc: TruncationSpec
) -> sp.csr_matrix:
    """Single-oscillator Hamiltonian omega_m n + K_m n^2, embedded in the pair space."""
    check_mode(mode)
    n_max = trunc.n_max(mode)
    levels = np.arange(0.0, n_max + 1)
    diag = params.omega(mode) * levels + params.kerr(mode) * levels**2
    h_mode = sp.diags(diag, 0, format="csr", dtype=complex)
    from .fock import embed

    return embed(h_mode, mode, trunc)


def build_liouvillian(params: SystemParams, trunc: TruncationSpec) -> sp.csr_matrix:
    """Generator of the master equation for the coupled pair.

    Per oscillator: the Kerr Hamiltonian commutator, one-phonon gain
    G D[a'] and two-phonon loss kappa D[a^2]; plus the collective
    dissipator V D[a1 - a2].
    """
    liouv = hamiltonian_superop(build_hamiltonian(params, 1, trunc))
    liouv = liouv + hamiltonian_superop(build_hamiltonian(params, 2, trunc))
    for mode in (1, 2):
        a_m = mode_annihilation(mode, trunc)
        liouv = liouv + params.gain * lindblad_term(a_m.conj().T.tocsr())
        if params.kappa > 0.0:
            liouv = liouv + params.kappa * lindblad_term((a_m @ a_m).tocsr())
    if params.v > 0.0:
        liouv = liouv + params.v * lindblad_term(collective_jump(trunc))
    return liouv.tocsr()


def single_mode_liouvillian(
    gain: float, kappa: float, kerr: float, n_max: int, omega: float = 0.0
) -> sp.csr_matrix:
    """Generator of one uncoupled oscillator (used by oracle cross-checks)."""
    a = annihilation(n_max)
    n = number_op(n_max)
    h = (omega * n + kerr * (n @ n)).tocsr()
    liouv = hamiltonian_superop(h) + gain * lindblad_term(a.conj().T.tocsr())
    if kappa > 0.0:
        liouv = liouv + kappa * lindblad_term((a @ a).tocsr())
    return liouv.tocsr()


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateInfo:
    residual: float       # ||L vec(rho)||_inf
    rel_residual: float   # residual / ||L||_inf
    method: str           # "sparse-lu" or "dense-null-space"


def _trace_row(d: int) -> sp.csr_matrix:
    idx = np.arange(d) * d + np.arange(d)
    return sp.csr_matrix(
        (np.ones(d), (np.zeros(d, dtype=np.int64), idx)), shape=(1, d * d), dtype=complex
    )


def _matrix_inf_norm(liouv: sp.csr_matrix) -> float:
    return float(np.abs(liouv).sum(axis=1).max())


def steady_state(
    liouv: sp.spmatrix, *, validate: bool = True, return_info: bool = False
):
    """Solve L vec(rho) = 0 with unit trace.

    Row 0 of L is replaced by the trace functional and the resulting system
    is solved by sparse LU; below dim^2 = 2500 a dense null-space solve is
    used as fallback if the factorization fails.  The result is Hermitized,
    renormalized and (optionally) validated against the density-matrix
    invariants.
    """
    d2 = liouv.shape[0]
    d = math.isqrt(d2)
    if d * d != d2 or liouv.shape[1] != d2:
        raise ValueError(f"expected a d^2 x d^2 superoperator, got {liouv.shape}")
    liouv = liouv.tocsr()
    rhs = np.zeros(d2, dtype=complex)
    rhs[0] = 1.0
    system = sp.vstack([_trace_row(d), liouv[1:, :]]).tocsc()
    method = "sparse-lu"
    try:
        vec = spla.splu(system).solve(rhs)
        if not np.all(np.isfinite(vec)):
            raise RuntimeError("non-finite solution")
    except Exception as exc:
        if d2 > DENSE_FALLBACK_MAX_DIM2:
            raise SingularSolve(f"sparse steady-state solve failed: {exc}") from exc
        method = "dense-null-space"
        vec = _dense_null_vector(liouv.toarray(), d)
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-300:
        raise SingularSolve("steady-state solution has vanishing trace")
    rho = rho / trace
    residual = float(np.abs(liouv @ rho.reshape(-1)).max())
    rel_residual = residual / _matrix_inf_norm(liouv)
    if rel_residual > 1e-10:
        raise SingularSolve(
            f"steady-state residual {rel_residual:.2e} exceeds 1e-10 of ||L||_inf; "
            "kernel may not be one-dimensional"
        )
    if validate:
        validate_density_matrix(rho)
    if return_info:
        return rho, SteadyStateInfo(residual, rel_residual, method)
    return rho


def _dense_null_vector(gen: np.ndarray, d: int) -> np.ndarray:
    eigvals, eigvecs = la.eig(gen)
    order = np.argsort(np.abs(eigvals))
    if np.abs(eigvals[order[1]]) < 1e-10:
        raise SingularSolve("generator kernel is not one-dimensional")
    return eigvecs[:, order[0]]


def validate_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-12,
    trace_tol: float = 1e-9,
    eig_floor: float = -1e-8,
) -> None:
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise InvariantViolation(f"Hermiticity violated by {herm:.2e}")
    trace_err = abs(np.trace(rho).real - 1.0)
    if trace_err > trace_tol:
        raise InvariantViolation(f"trace deviates from 1 by {trace_err:.2e}")
    min_eig = float(la.eigvalsh(rho).min())
    if min_eig < eig_floor:
        raise InvariantViolation(
            f"minimum eigenvalue {min_eig:.2e} below floor {eig_floor:.0e}; "
            "truncation is too small"
        )


@dataclass(frozen=True)
class SteadySolve:
    """Steady state together with its solve diagnostics."""

    rho: np.ndarray
    trunc: TruncationSpec
    residual: float
    rel_residual: float
    truncation_check: float
    escalated: bool


def solve_steady(
    params: SystemParams,
    trunc: TruncationSpec,
    *,
    escalate: bool = True,
    validate: bool = True,
) -> SteadySolve:
    """Build the Liouvillian, solve for the steady state, police truncation.

    If the top two Fock levels of either mode hold more than
    ``TRUNCATION_ERROR`` population the truncation is escalated once and the
    solve repeated; a second failure raises InvariantViolation.
    """
    escalated = False
    while True:
        liouv = build_liouvillian(params, trunc)
        rho, info = steady_state(liouv, validate=validate, return_info=True)
        check = check_truncation(rho, trunc)
        if check <= TRUNCATION_ERROR:
            break
        if escalate and not escalated:
            trunc = trunc.escalated()
            escalated = True
            continue
        raise InvariantViolation(
            f"top-level population {check:.2e} exceeds {TRUNCATION_ERROR:.0e} "
            f"at truncation ({trunc.n_max_1}, {trunc.n_max_2})"
        )
    if check > TRUNCATION_WARN:
        warnings.warn(
            f"top-level population {check:.2e} above {TRUNCATION_WARN:.0e}; "
            "observables may carry truncation bias",
            RuntimeWarning,
            stacklevel=2,
        )
    return SteadySolve(rho, trunc, info.residual, info.rel_residual, check, escalated)


# ---------------------------------------------------------------------------
# time evolution
# ---------------------------------------------------------------------------

def evolve(
    rho0: np.ndarray, liouv: sp.spmatrix, t_final: float, tol: float
) -> np.ndarray:
    """Integrate vec(rho)' = L vec(rho) with an adaptive explicit RK method."""
    if t_final < 0:
        raise ValueError(f"t_final must be >= 0, got {t_final!r}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if t_final == 0.0:
        return rho0.copy()
    liouv = liouv.tocsr()
    sol = solve_ivp(
        lambda _t, y: liouv @ y,
        (0.0, t_final),
        np.asarray(rho0, dtype=complex).reshape(-1),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        t_eval=[t_final],
    )
    if not sol.success:
        raise StepSizeUnderflow(f"evolution failed: {sol.message}")
    d = rho0.shape[0]
    rho = sol.y[:, -1].reshape(d, d)
    drift = abs(np.trace(rho).real - 1.0)
    if drift > 1e-9:
        raise InvariantViolation(f"trace drifted by {drift:.2e} during evolution")
    return rho


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def mode_populations(rho: np.ndarray, mode: int, trunc: TruncationSpec) -> np.ndarray:
    """Diagonal of the reduced state of one mode (populations of 0..n_max)."""
    check_mode(mode)
    blocks = rho.reshape(trunc.d1, trunc.d2, trunc.d1, trunc.d2)
    if mode == 1:
        diag = np.einsum("ijij->i", blocks)
    else:
        diag = np.einsum("ijij->j", blocks)
    imag = np.abs(diag.imag).max()
    if imag > 1e-10:
        raise InvariantViolation(f"population imaginary residue {imag:.2e}")
    return diag.real


def mean_phonon(rho: np.ndarray, mode: int, trunc: TruncationSpec) -> float:
    """<a_m' a_m> of the given mode."""
    pops = mode_populations(rho, mode, trunc)
    return float(np.dot(np.arange(pops.size), pops))


def phonon_difference(rho: np.ndarray, trunc: TruncationSpec) -> float:
    """<a1'a1 - a2'a2>."""
    return mean_phonon(rho, 1, trunc) - mean_phonon(rho, 2, trunc)


def check_truncation(rho: np.ndarray, trunc: TruncationSpec) -> float:
    """Population of the top two Fock levels, maximized over the two modes."""
    p1 = mode_populations(rho, 1, trunc)
    p2 = mode_populations(rho, 2, trunc)
    return float(max(p1[-2:].sum(), p2[-2:].sum()))
