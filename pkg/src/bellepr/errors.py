class StructuralError(ValueError):
    """A table or model does not cover the index set its scenario demands."""


class UnsupportedScenarioError(ValueError):
    pass


class ExactnessError(TypeError):
    """An exact-arithmetic procedure received float-mode data."""


class UndefinedConditionalError(ZeroDivisionError):
    pass


class IncompatibleConditionError(ValueError):
    """Conditioning information has zero probability under the prior information."""


class PreconditionError(ValueError):
    pass
