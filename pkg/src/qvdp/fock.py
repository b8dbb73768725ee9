"""Sparse ladder operators on the truncated two-mode Fock space.

Tensor ordering is fixed project-wide: mode 1 is the left factor, so a
two-mode operator is ``kron(op_1, op_2)`` and basis states are ordered
``|n1, n2> -> n1 * d2 + n2``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .params import TruncationSpec, check_mode


def annihilation(n_max: int) -> sp.csr_matrix:
    """Single-mode annihilation operator: <n-1|a|n> = sqrt(n)."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max!r}")
    return sp.diags(
        np.sqrt(np.arange(1.0, n_max + 1)), 1, format="csr", dtype=complex
    ).tocsr()


def creation(n_max: int) -> sp.csr_matrix:
    return annihilation(n_max).conj().T.tocsr()


def number_op(n_max: int) -> sp.csr_matrix:
    """Diagonal number operator diag(0..n_max)."""
    return sp.diags(np.arange(0.0, n_max + 1), 0, format="csr", dtype=complex).tocsr()


def identity(n_max: int) -> sp.csr_matrix:
    return sp.identity(n_max + 1, format="csr", dtype=complex)


def embed(op: sp.spmatrix, mode: int, trunc: TruncationSpec) -> sp.csr_matrix:
    """Embed a single-mode operator into the two-mode space.

    Mode 1 goes on the left tensor factor, mode 2 on the right.
    """
    check_mode(mode)
    d_own = trunc.d1 if mode == 1 else trunc.d2
    if op.shape != (d_own, d_own):
        raise ValueError(
            f"operator shape {op.shape} does not match mode-{mode} dimension {d_own}"
        )
    if mode == 1:
        return sp.kron(op, identity(trunc.n_max_2), format="csr")
    return sp.kron(identity(trunc.n_max_1), op, format="csr")


def mode_annihilation(mode: int, trunc: TruncationSpec) -> sp.csr_matrix:
    return embed(annihilation(trunc.n_max(mode)), mode, trunc)


def mode_number(mode: int, trunc: TruncationSpec) -> sp.csr_matrix:
    return embed(number_op(trunc.n_max(mode)), mode, trunc)


def collective_jump(trunc: TruncationSpec) -> sp.csr_matrix:
    """Jump operator a1 - a2 of the shared-reservoir dissipator."""
    return (mode_annihilation(1, trunc) - mode_annihilation(2, trunc)).tocsr()
