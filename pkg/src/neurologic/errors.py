"""Exception hierarchy shared across the package."""


class NeuroLogicError(Exception):
    """Base class for all domain errors raised by this package."""


# ---- file formats / datasets ----

class FormatError(NeuroLogicError):
    pass


class BadMagic(FormatError):
    pass


class MalformedHeader(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class MissingLabelColumn(NeuroLogicError):
    pass


class NonNumericCell(NeuroLogicError):
    def __init__(self, row, col, cell):
        super().__init__(f"non-numeric cell {cell!r} at row {row}, column {col}")
        self.row = row
        self.col = col


class LabelOutOfRange(NeuroLogicError):
    pass


class DegenerateSplit(NeuroLogicError):
    pass


class ParseError(NeuroLogicError):
    def __init__(self, path, message, line=None):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


# ---- models / mining ----

class ShapeMismatch(NeuroLogicError):
    pass


class NonFiniteLoss(NeuroLogicError):
    def __init__(self, epoch):
        super().__init__(f"training loss became non-finite in epoch {epoch}")
        self.epoch = epoch


class LayerOutOfRange(NeuroLogicError):
    pass


class OneClassOnly(NeuroLogicError):
    pass


class KTooLarge(NeuroLogicError):
    pass


class LayerMismatch(NeuroLogicError):
    pass


# ---- trees / rules ----

class EmptyInput(NeuroLogicError):
    pass


class FeatureOutOfRange(NeuroLogicError):
    pass


class LengthMismatch(NeuroLogicError):
    pass


# ---- grounding ----

class EmptyClass(NeuroLogicError):
    pass


class TrivialTarget(NeuroLogicError):
    pass


class IndexOutsideSentence(NeuroLogicError):
    pass


class PredicateNotActive(NeuroLogicError):
    pass


class EmptyCorpus(NeuroLogicError):
    pass


# ---- oracle / protocol ----

class OracleFailure(NeuroLogicError):
    pass


class MaskUnsupported(NeuroLogicError):
    pass


class Transport(NeuroLogicError):
    pass


class ProtocolViolation(NeuroLogicError):
    pass


class HandshakeFailed(NeuroLogicError):
    pass


class Timeout(NeuroLogicError):
    pass


class PeerClosed(NeuroLogicError):
    pass
