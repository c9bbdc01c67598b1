"""Exception hierarchy shared by all modules."""


class CCBondError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(CCBondError, ValueError):
    """Invalid model or run parameter. ``field`` names the offending input."""

    kind = "InvalidParameter"

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"{self.kind}({field})")


class NonPositiveError(ParameterError):
    kind = "NonPositive"


class NegativeCouponError(ParameterError):
    kind = "NegativeCoupon"

    def __init__(self, field="c", message=None):
        super().__init__(field, message or "NegativeCoupon(c)")


class NonFiniteError(ParameterError):
    kind = "NonFinite"


class NonPositiveXError(ParameterError):
    kind = "NonPositiveX"

    def __init__(self, field="x", message=None):
        super().__init__(field, message or "NonPositiveX: stock price must be > 0")


class RegimeMismatch(CCBondError):
    """An operation was called for parameters outside its surrender-price regime."""


class BoundViolated(CCBondError):
    """A root bound that must hold analytically failed; signals a solver defect."""


class InternalBound(CCBondError):
    """A denominator or sign condition that the theory guarantees did not hold."""


class SmoothFitResidual(CCBondError):
    """Closed-form coefficients do not satisfy their own smooth-fit equations."""


class Truncated(CCBondError):
    """A simulated path reached the arrival cap before the game was decided."""

    def __init__(self, n_max, count=1):
        self.n_max = n_max
        self.count = count
        super().__init__(f"Truncated(N_max={n_max}): {count} path(s) hit the arrival cap")


class EmptyGrid(CCBondError, ValueError):
    pass


class NoConvergence(CCBondError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"NoConvergence after {iterations} iterations (last sup-change {residual:.3e})")


class NoCrossing(CCBondError):
    pass


class MultipleCrossings(CCBondError):
    pass


class NonMonotoneLadder(CCBondError, ValueError):
    pass


class StrategyParseError(CCBondError, ValueError):
    pass
