"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`CsClockError`.
The two intermediate classes decide the CLI exit status: problems with inputs
(files, configs, datasets) are :class:`ConfigError`, failures during a
computation are :class:`ComputeError`.
"""
from __future__ import annotations


class CsClockError(Exception):
    """Base class for all package errors."""


class ConfigError(CsClockError):
    """Bad input file, dataset, or run configuration."""


class ComputeError(CsClockError):
    """A computation could not be carried out for the given arguments."""


# --- core data ---------------------------------------------------------------

class MissingFile(ConfigError, FileNotFoundError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class DuplicateTransition(ConfigError):
    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"duplicate transition {pair[0]} -> {pair[1]}")


class MissingLifetime(ConfigError):
    def __init__(self, level: str):
        self.level = level
        super().__init__(f"no lifetime given for {level}")


class UnknownUnit(ComputeError, ValueError):
    pass


# --- angular -----------------------------------------------------------------

class InvalidQuantumNumbers(ComputeError, ValueError):
    pass


class ForbiddenTransition(ComputeError):
    pass


class InvalidGeometry(ComputeError, ValueError):
    pass


# --- polarizability ----------------------------------------------------------

class TooCloseToResonance(ComputeError):
    def __init__(self, transition, wavelength_nm: float):
        self.transition = transition
        super().__init__(
            f"{wavelength_nm:.4f} nm is inside the exclusion zone of "
            f"{transition.lower.label}-{transition.upper.label} "
            f"at {transition.wavelength_nm:.4f} nm"
        )


class EmptyDataset(ComputeError):
    pass


class InvalidF(ComputeError, ValueError):
    pass


class InvalidM(ComputeError, ValueError):
    pass


class EmptyWindow(ComputeError, ValueError):
    pass


class NegativeTemperature(ComputeError, ValueError):
    pass


# --- zeeman ------------------------------------------------------------------

class MissingHyperfineConstants(ComputeError):
    pass


class GridMismatch(ComputeError):
    pass


class DegenerateInput(ComputeError):
    pass


# --- lattice -----------------------------------------------------------------

class SubwavelengthPeriod(ComputeError, ValueError):
    pass


class ZeroArea(ComputeError, ValueError):
    pass


class ZeroBuildup(ComputeError, ValueError):
    pass


# --- systematics -------------------------------------------------------------

class MissingModelInput(ComputeError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing model input: {name}")


class ZeroSensitivity(ComputeError):
    def __init__(self, row: str):
        self.row = row
        super().__init__(f"row {row!r} has zero sensitivity")


# --- locksim -----------------------------------------------------------------

class UnstableServo(ComputeError):
    pass


class TooShortTrace(ComputeError, ValueError):
    pass
