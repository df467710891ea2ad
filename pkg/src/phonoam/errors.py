"""Exception types shared across the package."""


class PhonoamError(Exception):
    """Base class for all package-specific errors."""


# feature table parsing / encoding
class WrongFeatureCount(PhonoamError):
    pass


class MalformedRow(PhonoamError):
    pass


class UnknownMark(PhonoamError):
    pass


class DuplicatePhone(PhonoamError):
    pass


class UnknownPhone(PhonoamError):
    pass


# inventories
class DuplicateLanguageId(PhonoamError):
    pass


class InventoryMismatch(PhonoamError):
    pass


# numerics
class DimensionMismatch(PhonoamError):
    pass


# kept distinct so optimizer call sites read naturally
ShapeMismatch = DimensionMismatch


class NonFiniteInput(PhonoamError):
    pass


class ModeHeadMismatch(PhonoamError):
    pass


# sequence losses
class InfeasibleLength(PhonoamError):
    pass


class EmptyResult(PhonoamError):
    pass


class EmptyCorpus(PhonoamError):
    pass


class StaleCache(PhonoamError):
    pass


class IoFailure(PhonoamError):
    pass
