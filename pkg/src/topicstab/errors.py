"""Exception hierarchy for the pipeline.

Every class carries a distinct ``exit_code`` so the CLI can translate any
failure into a stable, scriptable shell exit status.
"""


class TopicStabError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigError(TopicStabError):
    """Bad or missing configuration value."""

    exit_code = 3


class MissingArtifactError(TopicStabError):
    """A stage was invoked before the stage that produces its inputs."""

    exit_code = 4


# corpus

class EmptyVocabularyError(TopicStabError):
    exit_code = 10


class TooFewDocumentsError(TopicStabError):
    exit_code = 11


class EmptyCorpusError(TopicStabError):
    exit_code = 12


class EmptyHoldoutError(TopicStabError):
    exit_code = 13


# tuning

class InvalidBoundsError(TopicStabError):
    exit_code = 20


# embedding

class MalformedLineError(TopicStabError):
    exit_code = 30


class EmptyEmbeddingError(TopicStabError):
    exit_code = 31


class InconsistentVocabularyError(TopicStabError):
    exit_code = 32


class DimensionMismatchError(TopicStabError):
    exit_code = 33


# clustering

class ZeroVectorError(TopicStabError):
    exit_code = 40


class KOutOfRangeError(TopicStabError):
    exit_code = 41


class SingleClusterError(TopicStabError):
    exit_code = 42


# stability

class DepthMismatchError(TopicStabError):
    exit_code = 50


class ZeroMarginalError(TopicStabError):
    exit_code = 51
