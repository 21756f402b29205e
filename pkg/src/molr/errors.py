"""Exception taxonomy shared across the package."""


class MolrError(Exception):
    """Base class for all package-specific errors."""


class ZeroNormError(MolrError):
    """A vector that must be normalized has (near-)zero norm."""


class DimensionMismatchError(MolrError):
    """Operand shapes are inconsistent with the operation's contract."""


class OutOfRangeError(MolrError):
    """An index or count falls outside its valid range."""


class LengthOverflowError(MolrError):
    """Integer dot product length exceeds the int32 accumulator safety bound."""


class EmptyCandidatesError(MolrError):
    """Top-k selection was asked to rank an empty candidate set."""


class EmptyCorpusError(MolrError):
    """Model construction requires at least one user and one item."""


class EmptyEvalSetError(MolrError):
    """Metric computation requires at least one evaluation pair."""


class EmptyInputError(MolrError):
    """Histogram computation requires at least one recommendation."""


class ParseError(MolrError):
    """An interaction file line failed to parse.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyAfterFilterError(MolrError):
    """Minimum-count filtering removed every interaction."""


class TooFewInteractionsError(MolrError):
    """A user has too few interactions for a leave-one-out split.

    Carries the offending user ids.
    """

    def __init__(self, user_ids):
        self.user_ids = list(user_ids)
        super().__init__(f"users with fewer than 3 interactions: {self.user_ids}")
