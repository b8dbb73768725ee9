"""Physical parameters and Fock-space truncation.

All rates are expressed in units of the one-phonon gain ``gain`` (normally 1).
The rotating frame puts oscillator 1 at frequency ``frame_shift`` and
oscillator 2 at ``delta + frame_shift``; observables are invariant under
``frame_shift``, which exists so that invariance can be tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

DEFAULT_DIM_CAP = 4096


@dataclass(frozen=True)
class TruncationSpec:
    """Per-mode Fock cutoffs; mode m keeps levels 0..n_max_m."""

    n_max_1: int
    n_max_2: int
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self) -> None:
        for name in ("n_max_1", "n_max_2"):
            n = getattr(self, name)
            if not isinstance(n, int) or n < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {n!r}")
        if self.dim > self.dim_cap:
            raise ValueError(
                f"total Hilbert dimension {self.dim} exceeds cap {self.dim_cap}"
            )

    @property
    def d1(self) -> int:
        return self.n_max_1 + 1

    @property
    def d2(self) -> int:
        return self.n_max_2 + 1

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    def n_max(self, mode: int) -> int:
        check_mode(mode)
        return self.n_max_1 if mode == 1 else self.n_max_2

    def escalated(self) -> "TruncationSpec":
        """One step up the truncation ladder (used when the top levels fill up)."""
        return replace(
            self,
            n_max_1=max(self.n_max_1 + 4, math.ceil(1.5 * self.n_max_1)),
            n_max_2=max(self.n_max_2 + 4, math.ceil(1.5 * self.n_max_2)),
        )


def check_mode(mode: int) -> None:
    if mode not in (1, 2):
        raise ValueError(f"mode index must be 1 or 2, got {mode!r}")


@dataclass(frozen=True)
class SystemParams:
    """Rates of the two-oscillator model, in units of the gain.

    delta   frequency detuning of oscillator 2 relative to oscillator 1
    k1, k2  Kerr (anharmonicity) parameters
    v       dissipative coupling strength
    kappa   two-phonon loss rate
    gain    one-phonon gain rate (the unit)
    frame_shift  common frequency offset of the rotating frame
    """

    delta: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    v: float = 0.0
    kappa: float = 0.0
    gain: float = 1.0
    frame_shift: float = 0.0

    def __post_init__(self) -> None:
        for name in ("delta", "k1", "k2", "v", "kappa", "gain", "frame_shift"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.gain <= 0:
            raise ValueError(f"gain must be > 0, got {self.gain!r}")
        for name in ("k1", "k2", "v", "kappa"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def omega1(self) -> float:
        return self.frame_shift

    @property
    def omega2(self) -> float:
        return self.delta + self.frame_shift

    def omega(self, mode: int) -> float:
        check_mode(mode)
        return self.omega1 if mode == 1 else self.omega2

    def kerr(self, mode: int) -> float:
        check_mode(mode)
        return self.k1 if mode == 1 else self.k2
