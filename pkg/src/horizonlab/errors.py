"""Exception taxonomy. Every domain failure raised by the library derives from
HorizonLabError so the CLI can map it to exit code 1 with the originating
module's message."""


class HorizonLabError(Exception):
    pass


class SeriesError(HorizonLabError):
    pass


class BasePointMismatch(SeriesError):
    pass


class NonFiniteCoefficient(SeriesError):
    pass


class NotInvertible(SeriesError):
    """Constant term vanishes where a reciprocal/root/fractional power is
    needed; at a horizon this is exactly the regularity failure of the
    expansion."""


class ExprError(HorizonLabError):
    pass


class UnboundVariable(ExprError):
    pass


class BranchPointError(ExprError):
    """sqrt/recip/fractional power hit a zero or negative base; message names
    the offending subexpression."""


class ModelError(HorizonLabError):
    pass


class DualityError(HorizonLabError):
    pass


class NoRealBranch(DualityError):
    pass


class AmbiguousBranch(DualityError):
    def __init__(self, roots):
        self.roots = tuple(roots)
        super().__init__(
            "ambiguous branch: multiple gauge-field roots %s" % (self.roots,)
        )


class BranchSignError(DualityError):
    pass


class HorizonError(HorizonLabError):
    pass


class PoleError(HorizonLabError):
    pass


class DegenerateHorizonError(HorizonLabError):
    pass


class HigherDegeneracyError(DegenerateHorizonError):
    """Degeneracy beyond double; the local expansion implemented here does
    not cover it."""


class IntegrationError(HorizonLabError):
    pass


class ConstraintError(IntegrationError):
    pass


class UnsupportedForm(HorizonLabError):
    pass


class ConfigError(HorizonLabError):
    pass
