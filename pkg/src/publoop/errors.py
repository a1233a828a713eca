"""Error types shared across the simulator.

Two failure classes matter operationally: bad configuration (caller can fix
the input, CLI exit code 2) and internal consistency violations (a bug or a
corrupted run, CLI exit code 3; the audit log stays intact up to the abort).
"""


class ConfigError(ValueError):
    """Invalid configuration value, unknown key, or malformed scenario."""


class ConsistencyError(RuntimeError):
    """Internal bookkeeping violation; the run aborts."""
