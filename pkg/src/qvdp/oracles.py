"""Closed-form and brute-force references used to validate the solvers.

The dense steady-state oracle deliberately rebuilds the generator from the
Lindblad definition with plain dense algebra, sharing nothing with the sparse
superoperator path except the ladder-operator matrix elements.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import AmbiguousKernel, NonConvergence
from .fock import annihilation
from .params import SystemParams, TruncationSpec

MAX_SERIES_TERMS = 100_000


def pochhammer(x: float, n: int) -> float:
    """Rising factorial x (x+1) ... (x+n-1); empty product is 1."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


def kummer_phi(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric series sum_k (a)_k z^k / ((b)_k k!).

    Plain power series with compensated summation; adequate for the
    moderate nonnegative arguments this model needs (z = G/kappa <~ 10).
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    if b <= 0 and b == int(b):
        raise ValueError(f"b must not be a non-positive integer, got {b!r}")
    total = 1.0
    comp = 0.0  # Kahan carry
    term = 1.0
    for k in range(MAX_SERIES_TERMS):
        term *= (a + k) * z / ((b + k) * (k + 1))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-16 * abs(total):
            return total
    raise NonConvergence(
        f"kummer_phi({a}, {b}, {z}) did not converge in {MAX_SERIES_TERMS} terms"
    )


def single_vdp_steady_diag(g_over_kappa: float, n_max: int) -> np.ndarray:
    """Steady-state Fock populations of one uncoupled oscillator.

    p_n = r^n Phi(1+n, r+n, r) / [(r)_n Phi(1, r, 2r)]  with r = G/kappa.
    Depends only on r, not on the Kerr parameter.  The returned entries are
    the raw series values; their sum approaches 1 as n_max grows.
    """
    r = g_over_kappa
    if r <= 0:
        raise ValueError(f"g_over_kappa must be > 0, got {r!r}")
    denom = kummer_phi(1.0, r, 2.0 * r)
    probs = np.empty(n_max + 1)
    for n in range(n_max + 1):
        probs[n] = r**n * kummer_phi(1.0 + n, r + n, r) / (pochhammer(r, n) * denom)
    return probs


def aronson_death_region(g: float, v: float, delta: float) -> bool:
    """True where the classical rest-state is stable: G < V < (D^2+G^2)/(2G)."""
    if g <= 0:
        raise ValueError(f"g must be > 0, got {g!r}")
    return g < v < (delta * delta + g * g) / (2.0 * g)


def _dense_generator(params: SystemParams, trunc: TruncationSpec) -> np.ndarray:
    d1, d2 = trunc.d1, trunc.d2
    d = d1 * d2
    a1 = np.kron(annihilation(trunc.n_max_1).toarray(), np.eye(d2))
    a2 = np.kron(np.eye(d1), annihilation(trunc.n_max_2).toarray())
    n1 = a1.conj().T @ a1
    n2 = a2.conj().T @ a2
    h = (
        params.omega1 * n1
        + params.k1 * n1 @ n1
        + params.omega2 * n2
        + params.k2 * n2 @ n2
    )
    jumps = [
        (params.gain, a1.conj().T),
        (params.gain, a2.conj().T),
        (params.kappa, a1 @ a1),
        (params.kappa, a2 @ a2),
        (params.v, a1 - a2),
    ]

    def apply(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        for rate, c in jumps:
            if rate > 0.0:
                cd = c.conj().T
                out += rate * (c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c))
        return out

    gen = np.empty((d * d, d * d), dtype=complex)
    for j in range(d * d):
        basis = np.zeros((d, d), dtype=complex)
        basis[j // d, j % d] = 1.0
        gen[:, j] = apply(basis).reshape(-1)
    return gen


def dense_steady_oracle(params: SystemParams, trunc: TruncationSpec) -> np.ndarray:
    """Steady state from a full dense eigendecomposition of the generator.

    Selects the eigenvector whose eigenvalue is nearest zero and normalizes
    it by trace.  Raises AmbiguousKernel when the kernel is not clearly
    one-dimensional.
    """
    if trunc.dim**2 > 4096:
        raise ValueError(
            f"dense oracle limited to dim^2 <= 4096, got {trunc.dim ** 2}"
        )
    gen = _dense_generator(params, trunc)
    eigvals, eigvecs = la.eig(gen)
    order = np.argsort(np.abs(eigvals))
    if np.abs(eigvals[order[1]]) < 1e-10:
        raise AmbiguousKernel(
            "two generator eigenvalues within 1e-10 of zero; steady state not unique"
        )
    d = trunc.dim
    rho = eigvecs[:, order[0]].reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
