"""Exception types shared across the package."""


class MNNError(Exception):
    """Base class for every error raised by mnn_assoc."""


class ShapeError(MNNError, ValueError):
    pass


class NumericError(MNNError, ValueError):
    pass


class DomainError(MNNError, ValueError):
    """Input values outside the [-1, 1] range the networks expect."""


class InvalidArchitecture(MNNError, ValueError):
    pass


class InvalidConfig(MNNError, ValueError):
    pass


class InvalidArgument(MNNError, ValueError):
    pass


class InvalidSpec(MNNError, ValueError):
    pass


class EmptyDataset(MNNError, ValueError):
    pass


class InsufficientData(MNNError, ValueError):
    pass


class MissingGroupData(MNNError, ValueError):
    def __init__(self, group):
        super().__init__(f"no training pairs routed to group {group!r}")
        self.group = group


class FormatError(MNNError, ValueError):
    """Unreadable or unsupported media / vector file."""


class ArchiveError(MNNError):
    pass


class IntegrityError(ArchiveError):
    pass


class UnsupportedVersion(ArchiveError):
    pass


class ArchiveParseError(ArchiveError):
    def __init__(self, section, message):
        super().__init__(f"[{section}] {message}")
        self.section = section
