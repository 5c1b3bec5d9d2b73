"""Photon-number statistics, photon subtraction and quadrature reconstruction."""

from ._photstat import *  # noqa: F401,F403
from ._photstat import PhotonModel, FitResult, SubtractionRecord, Error  # noqa: F401

__version__ = "0.1.0"
