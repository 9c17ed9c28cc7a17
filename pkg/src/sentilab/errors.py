"""Exception types shared across the package."""


class SentilabError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatch(SentilabError):
    """Operands have incompatible shapes for the requested operation."""


class NumericFailure(SentilabError):
    """A non-finite value (NaN/Inf) appeared, or a numeric precondition failed."""

    def __init__(self, op: str, message: str = ""):
        self.op = op
        super().__init__(f"numeric failure in '{op}'" + (f": {message}" if message else ""))


class NonScalarLoss(SentilabError):
    """backward() was called on a tensor that is not a scalar."""


class InvalidConfig(SentilabError):
    """A configuration object failed validation."""


class InvalidRate(SentilabError):
    """Dropout rate outside [0, 1)."""


class EmptySequence(SentilabError):
    """A sequence operation received a zero-length sequence."""


class AllMasked(SentilabError):
    """Pooling over a sequence whose mask hides every time step."""


class EmptyCorpus(SentilabError):
    """An operation that needs at least one document received none."""


class EmptyVocab(SentilabError):
    """Vocabulary construction produced no entries."""


class EmptyDataset(SentilabError):
    """Training or fitting requires a non-empty dataset."""


class UnknownScheme(SentilabError):
    """Unrecognised lexicon scoring scheme name."""


class UnknownLabel(SentilabError):
    """A label outside {-1, 0, +1} was encountered."""


class LengthMismatch(SentilabError):
    """Paired inputs differ in length."""


class EmptyMatrix(SentilabError):
    """Metrics requested on a confusion matrix with zero total count."""


class TooFewExamples(SentilabError):
    """Not enough examples per class (or overall) for the requested fold count."""


class ZeroVariance(SentilabError):
    """Paired differences are all identical; the t statistic is undefined."""


class TooManyTokens(SentilabError):
    """Exact Shapley enumeration is capped; the document has too many tokens."""


class BadPartition(SentilabError):
    """A token partition does not cover the document or has too many groups."""


class ModelFailure(SentilabError):
    """The wrapped model raised while evaluating a coalition or perturbation."""


class DegenerateSamples(SentilabError):
    """All perturbation samples are identical; the surrogate fit is ill-posed."""


class MalformedFile(SentilabError):
    """An input file does not follow its documented format."""


class MalformedCsv(MalformedFile):
    """A corpus CSV is missing required columns or is otherwise unreadable."""


class DuplicateId(SentilabError):
    """Two corpus rows share a document id."""


class DimensionMismatch(SentilabError):
    """Imported embedding vectors disagree on dimensionality."""


class BadRatios(SentilabError):
    """Split ratios do not sum to 1 or are otherwise invalid."""


class ArtifactMismatch(SentilabError):
    """A pipeline stage refused inputs whose recorded config hash disagrees."""
