"""Exception types shared across the package.

The CLI maps these onto exit codes (config 2, input 3, resource 4);
ordinary precondition violations raise ValueError.
"""


class PartialFreeError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PartialFreeError):
    """A run configuration is invalid or inconsistent."""


class InputError(PartialFreeError):
    """External input (matrix files, CSV sequences) could not be parsed."""


class ResourceLimitError(PartialFreeError):
    """A configured resource bound (walk length, ...) would be exceeded."""
