"""Exception hierarchy shared by every module.

``exit_code`` drives the CLI convention: 1 for contract/validation
problems, 2 for I/O problems. Anything not raised by this package is a bug.
"""


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterError(ArtifactError):
    """An argument value is outside its documented range."""


class ContractError(ArtifactError):
    """Operation inputs violate a shape or type contract."""


class ConfigurationError(ArtifactError):
    """Unknown architecture, layer id, or invalid configuration field."""


class PreprocessingError(ArtifactError):
    """An image cannot be brought to the model's input format."""


class ManifestError(ArtifactError):
    """Manifest content is malformed or violates a manifest invariant."""


class SplitError(ArtifactError):
    """A requested split cannot be produced."""


class StatisticsError(ArtifactError):
    """Frequency statistics requested on an empty or unlabeled manifest."""


class TrainingError(ArtifactError):
    """Training preconditions violated or optimization diverged."""


class EvaluationError(ArtifactError):
    """Evaluation preconditions violated or metrics out of bounds."""


class ReportError(ArtifactError):
    """Report emission asked for with no data."""


class AgreementError(ArtifactError):
    """Attention agreement cannot be scored (e.g. empty reference mask)."""


class CheckpointError(ArtifactError):
    """Checkpoint unreadable, wrong version, or taxonomy mismatch."""


class WeightsUnavailableError(ArtifactError):
    """Pretrained backbone weights could not be fetched."""


class ValidationError(ArtifactError):
    """A submitted annotation payload failed validation."""


class UsageError(ArtifactError):
    """Command line misuse (unknown subcommand, bad flag)."""


class ArtifactIOError(ArtifactError):
    """File could not be read, written, or decoded."""

    exit_code = 2


class IngestError(ArtifactIOError):
    """A source video could not be opened or decoded."""


class OutputError(ArtifactIOError):
    """An output path could not be written."""
