"""Exception types shared across the package."""


class QvdpError(Exception):
    """Base class for all package-specific failures."""


class NonConvergence(QvdpError):
    """A series or iteration exceeded its term/step budget."""


class SingularSolve(QvdpError):
    """Steady-state linear solve failed or the kernel is not one-dimensional."""


class AmbiguousKernel(QvdpError):
    """Dense null-space oracle found more than one near-zero eigenvalue."""


class InvariantViolation(QvdpError):
    """A computed state violates density-matrix or truncation invariants."""


class StepSizeUnderflow(QvdpError):
    """An adaptive integrator stalled below its minimum step size."""


class IndefiniteDiffusion(QvdpError):
    """Diffusion matrix has an eigenvalue below the clamping tolerance."""


class Divergence(QvdpError):
    """A stochastic trajectory left the admissible phase-space region."""


class ConfigError(QvdpError):
    """A sweep/wigner configuration file is missing keys or has bad values."""
