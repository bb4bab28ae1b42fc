"""Exception taxonomy shared across the package."""


class PadicOrbError(Exception):
    """Base class for all package errors."""


class PrecisionError(PadicOrbError):
    """An operation needed more p-adic digits than the operand carries."""


class DomainError(PadicOrbError):
    """Input outside the mathematical domain of the operation (e.g. x = 0)."""


class IrregularPointError(DomainError):
    """Orbital integral requested at an irregular base point (0 or -1)."""


class KindError(PadicOrbError):
    """Split/inert mismatch between data and operation."""


class WindowError(PadicOrbError):
    """Requested value lies outside the certified output window."""


class PoleError(PadicOrbError):
    """Evaluation at a pole of a spectral prefactor."""


class UnsupportedAtomError(PadicOrbError):
    """Tail/atom species not supported by the requested transform."""


class UnsupportedSectionError(PadicOrbError):
    """Section datum outside the implemented Kuznetsov reduction."""


class RepresentationError(PadicOrbError):
    """A window+germ representation failed its internal consistency fit."""
