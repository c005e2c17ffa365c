"""Truncated-Fock-space simulation of postselected weak-measurement state engineering.

A weak three-wave-mixing interaction couples a signal (pointer) mode to the
idler arm of an unbalanced interferometer; postselecting one idler photon
approximately adds a photon to the signal input. The package computes the
resulting states, their figures of merit and the figure data series.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DegenerateError,
    DimensionMismatchError,
    ModeMismatchError,
    NumericGuardError,
    OrthogonalPostselectionError,
    RangeError,
    TruncationError,
    UnknownFigureError,
)
from .protocol import ProtocolParams  # noqa: E402
from .states import PointerInput  # noqa: E402
