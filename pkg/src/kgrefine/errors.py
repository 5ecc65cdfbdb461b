"""Exception types shared across the toolkit."""


class KgRefineError(Exception):
    """Base class for all kgrefine errors."""


# --- graph store ---

class DuplicateId(KgRefineError):
    pass


class UnknownNode(KgRefineError):
    pass


class DuplicateTriple(KgRefineError):
    pass


class FrozenGraphError(KgRefineError):
    pass


class ParseError(KgRefineError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# --- ingest ---

class MissingColumn(KgRefineError):
    pass


class BadNumeric(KgRefineError):
    def __init__(self, message, row):
        super().__init__(f"row {row}: {message}")
        self.row = row


class UnitMismatch(KgRefineError):
    pass


class NoApplicableRange(KgRefineError):
    pass


class InvalidConfig(KgRefineError):
    pass


# --- embeddings ---

class EmptyCorpus(KgRefineError):
    pass


class InvalidDimension(KgRefineError):
    pass


class UnknownToken(KgRefineError):
    pass


class ZeroVector(KgRefineError):
    pass


# --- link prediction ---

class InsufficientAbsentPairs(KgRefineError):
    pass


class DegenerateLabels(KgRefineError):
    pass


class NonConvergence(KgRefineError):
    pass


class DimensionMismatch(KgRefineError):
    pass


# --- evaluation harness ---

class TooFewEdges(KgRefineError):
    pass


class MissingPrediction(KgRefineError):
    pass


class InvalidAxis(KgRefineError):
    pass


# --- review service ---

class UnknownCandidate(KgRefineError):
    pass


class InvalidCode(KgRefineError):
    pass
