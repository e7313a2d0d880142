"""Exception and warning types shared across the package."""


class TeleoError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TeleoError):
    """A machine description violates a structural invariant."""


class MissingTransition(ValidationError):
    """A positive-probability (state, input, output) triple has no successor."""


class BadDistribution(ValidationError):
    """An emission distribution does not sum to one (beyond tolerance) or is empty."""


class UnknownSymbol(ValidationError):
    """A state, input or output name is not declared."""


class UnreachableState(ValidationError):
    """A declared state cannot be reached from the initial state."""


class AlphabetMismatch(TeleoError):
    """Two machines that must share alphabets do not."""


class ImpossibleOutput(TeleoError):
    """An evolution step used an output with zero probability at the current state.

    The optional ``step`` attribute carries the 1-based index of the offending
    step when the error arises from a sequence.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class LengthMismatch(TeleoError):
    """Paired input/output sequences have different lengths."""


class ZeroProbabilityEvidence(TeleoError):
    """A filtering update conditioned on evidence no state in the belief can produce.

    ``step`` is the 1-based index of the offending step when filtering a trace.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class StateCapExceeded(TeleoError):
    """Lazy state materialization grew past its configured cap."""


class NotDeterministic(TeleoError):
    """An operation that requires a deterministic policy received a stochastic one."""


class BadSensorDist(ValidationError):
    """A sensor distribution misses support or fails to normalize."""


class NotDecidable(TeleoError):
    """The environment is not decidable at the requested depth."""


class UnsupportedClass(TeleoError):
    """The constrained class is outside what the optimizer supports."""


class BudgetExceeded(TeleoError):
    """An enumeration would exceed its configured budget; nothing was computed."""


class ImpossibleTrajectory(UserWarning):
    """A splice trajectory has zero probability under the base machine.

    The spliced machine is still constructed (the patched region is simply
    unreachable); this warning flags that the splice point cannot occur.
    """
