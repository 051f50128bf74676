"""Exception hierarchy shared across the package."""


class PdmpError(Exception):
    """Base class for all package errors."""


class InputError(PdmpError, ValueError):
    """Malformed arguments: dimension mismatch, negative times, bad sizes."""


class ConfigError(PdmpError, ValueError):
    """Model or run configuration that violates a structural requirement."""


class DomainError(PdmpError, ValueError):
    """A quantity is undefined for the given parameters (divergent integral, alpha >= lambda)."""


class HorizonError(PdmpError, ValueError):
    """A time query lies beyond the simulated part of a trajectory."""


class WindowError(PdmpError, ValueError):
    """A rate fit has too few points above the Monte Carlo noise floor."""


class SamplerExhausted(PdmpError, RuntimeError):
    """A hypothesis-check sampler produced fewer samples than requested."""


class InvariantViolation(PdmpError, RuntimeError):
    """An internal construction produced an impossible value (negative mass, q > 1)."""
