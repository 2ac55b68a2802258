"""Exception hierarchy shared by all activesearch modules."""


class ActiveSearchError(Exception):
    """Base class for every error raised by this package."""


# corpus
class AllTermsFiltered(ActiveSearchError):
    """No vocabulary term survived the document-frequency cutoff."""


class EmptyAfterVectorize(ActiveSearchError):
    """A query shares no terms with the vocabulary."""


# cluster
class DegenerateClustering(ActiveSearchError):
    """A centroid captured zero mass even after initialization repair."""


class MalformedMembership(ActiveSearchError):
    """Membership file violates the row-stochastic contract."""


# classifier
class NoPositives(ActiveSearchError):
    """Training set assembly found no positive example."""


class NonFiniteLoss(ActiveSearchError):
    """Loss or gradient became NaN/Inf during training."""


# bandit
class DimensionMismatch(ActiveSearchError):
    """Reward batch memberships do not match the number of arms."""


class HistoryGap(ActiveSearchError):
    """Reward history has missing or out-of-order rounds."""


# search
class EmptyPool(ActiveSearchError):
    """Selection requested from an empty pool."""


class NoSeeds(ActiveSearchError):
    """Seed set yields no positive instance."""


class OracleTimeout(ActiveSearchError):
    """A label oracle failed to answer a proposed batch in time."""


# eval
class NoRelevantInTruth(ActiveSearchError):
    """Recall is undefined: the ground truth contains no relevant document."""


class MixedConfigs(ActiveSearchError):
    """Runs being aggregated disagree on topic, strategy, or targets."""


# service
class UnknownSession(ActiveSearchError):
    """No session with the given id."""


class UnknownCorpus(ActiveSearchError):
    """No ingested corpus registered under the given name."""


class UnknownIds(ActiveSearchError):
    """Label submission mentions ids outside the pending batch."""


class PartialLabels(ActiveSearchError):
    """Label submission does not cover the entire pending batch."""


class SessionFinished(ActiveSearchError):
    """The session already reached its budget or exhausted the pool."""
