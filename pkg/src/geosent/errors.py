"""Error categories shared across the pipeline.

Each class maps to one CLI exit code so stage failures stay diagnosable
from shell scripts (see cli.EXIT_CODES).
"""


class PipelineError(Exception):
    """Base class for all pipeline failures."""


class ConfigError(PipelineError):
    """Configuration file missing, unparseable, or schema-invalid."""


class InputError(PipelineError):
    """Input data unreadable or violating a documented file contract."""


class StageOrderError(PipelineError):
    """A stage was invoked before the stage that produces its inputs."""


class AdapterError(PipelineError):
    """External classifier adapter unreachable or protocol-violating."""
