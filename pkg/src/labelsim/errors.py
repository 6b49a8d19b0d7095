"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: input/format problems exit 2,
consistency problems exit 3, numeric/degenerate-data problems exit 4.
"""


class LabelsimError(Exception):
    """Base class for all labelsim errors."""


class InputFormatError(LabelsimError):
    """A file or record could not be parsed (carries file/line context)."""


class ConsistencyError(LabelsimError):
    """Inputs disagree with each other: duplicate ids, unknown classes,
    count mismatches, mismatched keys."""


class DegenerateDataError(LabelsimError):
    """Numerically undefined or empty situations: zero vectors, empty
    vocabularies, all-OOV documents, undefined correlations."""
