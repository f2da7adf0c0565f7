"""Rotations of a compact angular-momentum register via a 3D lattice wavefunction."""
from .errors import (ConditioningError, EmptySupportError, LeakageError, NumericalFailure,
                     PrecisionError, ResolutionError, ValidationError)
from .lattice import Grid3, LatticeState, ShellSpec, decode, encode, translate_isometry
from .pipeline import FidelityReport, PipelineConfig, rotate_via_lattice
from .specfun import CompactState, RotationSpec, exact_rotate, wigner_oracle, ylm

__version__ = "0.1.0"
