"""Design and simulation toolkit for a Cs 685 nm quadrupole lattice clock."""
from .constants import CONST, convert_polarizability
from .dataset import AtomicDataset, LevelId, load_bundled, load_dataset, validate_dataset
from .errors import ComputeError, ConfigError, CsClockError

__version__ = "0.1.0"

__all__ = [
    "CONST", "AtomicDataset", "ComputeError", "ConfigError", "CsClockError", "LevelId",
    "convert_polarizability", "load_bundled", "load_dataset", "validate_dataset", "__version__",
]
