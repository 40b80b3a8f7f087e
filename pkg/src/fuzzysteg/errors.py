"""Exception types shared across the package."""


class FuzzystegError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedFormatError(FuzzystegError):
    """Input file is not a usable 8-bit PNG (alpha, exotic mode, or corrupt)."""


class DimensionMismatchError(FuzzystegError):
    """Two images that must share dimensions do not."""


class ImageTooSmallError(FuzzystegError):
    """Image is below the minimum size an operation supports."""


class UnknownCategoryError(FuzzystegError):
    """Requested corpus category does not exist."""


class CapacityExceededError(FuzzystegError):
    """Payload does not fit into the carrier at the planned depths."""

    def __init__(self, required_bits: int, available_bits: int):
        self.required_bits = required_bits
        self.available_bits = available_bits
        super().__init__(
            f"payload needs {required_bits} bits but only "
            f"{available_bits} are available"
        )


class MalformedHeaderError(FuzzystegError):
    """Extracted length header is inconsistent with the carrier capacity.

    Almost always means a wrong seed/method or a non-stego image.
    """


class MalformedPayloadError(FuzzystegError):
    """Serialized payload is structurally invalid (too short to parse)."""


class AuthenticationError(FuzzystegError):
    """Decryption failed authentication; no plaintext is recoverable."""


class KdfError(FuzzystegError):
    """Key derivation failed (typically resource exhaustion)."""


class InsufficientDataError(FuzzystegError):
    """Detector input carries too little data for the statistic."""


class ModelNotTrainedError(FuzzystegError):
    """Feature detector used before training."""


class EmptyTrainingSetError(FuzzystegError):
    """Feature detector training requires nonempty cover and stego sets."""


class DegenerateVarianceError(FuzzystegError):
    """Paired test input has zero sample variance."""


class InsufficientSamplesError(FuzzystegError):
    """Paired test input has fewer than two samples."""
