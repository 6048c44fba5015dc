"""Exception types raised across the package."""


class SecoptError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SecoptError):
    """Invalid configuration: bad bounds, bad parameters, malformed files."""


class DimensionError(SecoptError):
    """Shapes of problem data and variables do not line up."""


class DomainError(SecoptError):
    """A local objective was evaluated outside its domain."""


class EncodingOverflowError(SecoptError):
    """A real value exceeds the representable fixed-point range or the
    configured message magnitude bound."""


class SchemeError(SecoptError):
    """Ciphertext operands have incompatible schemes, keys, or scales, or
    the requested operation is unsupported by the scheme."""


class DivergenceError(SecoptError):
    """Non-finite values encountered during iteration."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class ProtocolStallError(SecoptError):
    """A protocol round is missing an expected message."""


class KeyMismatchError(SecoptError):
    """Decryption produced values outside the plausible message range,
    indicating the wrong private key."""


class SecurityRegressionError(SecoptError):
    """An adversary-view audit assertion failed."""
