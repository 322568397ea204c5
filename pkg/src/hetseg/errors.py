"""Exception and warning classes raised across the package."""


class HetsegError(ValueError):
    """Base class for every input or pipeline error raised by hetseg."""


class LengthMismatch(HetsegError):
    pass


class EmptyInterval(HetsegError):
    pass


class NonFiniteValue(HetsegError):
    pass


class TooShort(HetsegError):
    pass


class IntervalTooSparse(HetsegError):
    def __init__(self, label, count):
        super().__init__(
            f"variance interval {label} admits {count} difference(s); at least 2 required"
        )
        self.label = label
        self.count = count


class ZeroScale(HetsegError):
    def __init__(self, label):
        super().__init__(f"robust scale of variance interval {label} is zero")
        self.label = label


class InvalidRange(HetsegError):
    pass


class KmaxTooLarge(HetsegError):
    pass


class TooManySegmentations(HetsegError):
    pass


class DegenerateFit(HetsegError):
    pass


class ParseError(HetsegError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateDate(HetsegError):
    pass


class UnknownColumn(HetsegError):
    pass


class SelectionWarning(UserWarning):
    """A selection criterion fell back to a default choice."""


class FlatContrast(SelectionWarning):
    pass


class NoJump(SelectionWarning):
    pass
