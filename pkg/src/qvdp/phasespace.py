"""Reduced states and Wigner functions of the steady states.

Normalization convention: integral of W over the complex plane
(d^2 alpha = d Re alpha d Im alpha) is 1, so the vacuum peaks at 2/pi.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvariantViolation
from .params import SystemParams, TruncationSpec, check_mode


def partial_trace(rho: np.ndarray, keep: int, trunc: TruncationSpec) -> np.ndarray:
    """Reduced density matrix of one mode of the pair state."""
    check_mode(keep)
    blocks = rho.reshape(trunc.d1, trunc.d2, trunc.d1, trunc.d2)
    if keep == 1:
        return np.einsum("ikjk->ij", blocks)
    return np.einsum("kikj->ij", blocks)


@dataclass(frozen=True)
class WignerGrid:
    """Rectangular phase-space window with optional evaluated values.

    ``values[i_im, i_re]`` is W at alpha = re_axis[i_re] + 1j * im_axis[i_im].
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int = 101
    n_im: int = 101
    values: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("window bounds must be ordered")
        if self.n_re < 8 or self.n_im < 8:
            raise ValueError("grid resolution must be at least 8 per axis")
        if self.values is not None and self.values.shape != (self.n_im, self.n_re):
            raise ValueError(
                f"values shape {self.values.shape} != ({self.n_im}, {self.n_re})"
            )

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @classmethod
    def square(cls, half_width: float, n: int = 101) -> "WignerGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n)


def default_grid(params: SystemParams, n: int = 101) -> WignerGrid:
    """Window of +-3.5 in amplitude units scaled by sqrt(G/kappa) when kappa > 0."""
    scale = np.sqrt(params.gain / params.kappa) if params.kappa > 0 else 1.0
    return WignerGrid.square(3.5 * scale, n)


def wigner(rho_single: np.ndarray, grid: WignerGrid) -> WignerGrid:
    """Wigner function of a single-mode state on the grid.

    Evaluated from the Fock matrix elements by the displaced-parity series,
    with the generalized Laguerre polynomials built by their three-term
    recurrence and the factorial-ratio prefactor accumulated as a running
    product to avoid overflow.
    """
    d = rho_single.shape[0]
    if rho_single.shape != (d, d):
        raise ValueError("single-mode density matrix must be square")
    herm = np.abs(rho_single - rho_single.conj().T).max()
    if herm > 1e-10:
        raise InvariantViolation(f"input not Hermitian to 1e-10 (residue {herm:.2e})")
    alpha = grid.re_axis[None, :] + 1j * grid.im_axis[:, None]
    x = 4.0 * np.abs(alpha) ** 2
    total = np.zeros(alpha.shape, dtype=complex)
    for k in range(d):
        # series over the k-th diagonal of rho: terms rho[n+k, n]
        lag_prev = np.zeros_like(x)
        lag = np.ones_like(x)
        ratio = 1.0  # sqrt(n! / (n+k)!) running value
        if k > 0:
            for j in range(1, k + 1):
                ratio /= np.sqrt(j)
            offset = (2.0 * np.conj(alpha)) ** k
        acc = np.zeros(alpha.shape, dtype=complex)
        for n in range(d - k):
            if n > 0:
                ratio *= np.sqrt(n / (n + k))
            acc += rho_single[n + k, n] * ((-1.0) ** n) * ratio * lag
            lag_next = ((2 * n + 1 + k - x) * lag - (n + k) * lag_prev) / (n + 1)
            lag_prev, lag = lag, lag_next
        if k == 0:
            total += acc
        else:
            total += 2.0 * (offset * acc).real
    values = (2.0 / np.pi) * np.exp(-2.0 * np.abs(alpha) ** 2) * total
    residue = np.abs(values.imag).max()
    if residue > 1e-10:
        raise InvariantViolation(f"Wigner imaginary residue {residue:.2e}")
    return replace(grid, values=values.real)


def grid_integral(grid: WignerGrid, weight: np.ndarray | None = None) -> float:
    """Trapezoid integral of W (optionally times a weight) over the window."""
    if grid.values is None:
        raise ValueError("grid has no values")
    integrand = grid.values if weight is None else grid.values * weight
    inner = np.trapezoid(integrand, grid.re_axis, axis=1)
    return float(np.trapezoid(inner, grid.im_axis))


def mean_amp_sq(grid: WignerGrid) -> float:
    """Symmetric-ordered moment integral |alpha|^2 W d^2 alpha."""
    alpha2 = grid.re_axis[None, :] ** 2 + grid.im_axis[:, None] ** 2
    return grid_integral(grid, alpha2)


def ring_radius(grid: WignerGrid) -> float:
    """Radius |alpha| at which W is largest (0 for an origin-peaked state)."""
    if grid.values is None:
        raise ValueError("grid has no values")
    idx = np.unravel_index(int(np.argmax(grid.values)), grid.values.shape)
    return float(np.hypot(grid.re_axis[idx[1]], grid.im_axis[idx[0]]))
