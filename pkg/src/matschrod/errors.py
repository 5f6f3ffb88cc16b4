"""Exception and warning types shared across the package."""


class GridMismatchError(ValueError):
    """States or coefficient fields live on different grids."""


class EllipticityError(ValueError):
    """Diffusion samples are not uniformly positive definite."""


class GuaranteeUnavailableError(ValueError):
    """The requested inequality is only guaranteed for diagonal diffusion.

    Raised by the projection/positivity helpers when the assembled diffusion
    matrix has off-diagonal entries and the caller did not explicitly ask for
    an informational (guarantee-free) evaluation.
    """


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance.

    The partially converged report, when one exists, is attached as the
    ``partial`` attribute so callers can inspect what was achieved.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class QuadratureError(RuntimeError):
    """Step-halving disagreement revealed an under-resolved quadrature."""


class ConfigError(ValueError):
    """An experiment configuration failed schema validation."""


class EllipticityWarning(UserWarning):
    """Sampled diffusion violates uniform ellipticity (lower bound <= 0)."""
