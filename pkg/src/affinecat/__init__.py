"""Executable affine reflections of symmetric monoidal categories.

Isometries and channels, Stinespring dilations, the reflection ``L(C)`` of a
monoidal category into an affine one, the Tennent category of injections
with discarding, and a small circuit language tying them together.
"""
from .cptp import CptpMor, is_cptp
from .isometry import FunctionMor, InjectionMor, IsometryMor
from .linalg import DEFAULT_TOL, ToleranceConfig
from .stinespring import StinespringDilation, connect_dilations, dilate
from .tennent import EquivRelation, TennentMor

__all__ = [
    "CptpMor", "DEFAULT_TOL", "EquivRelation", "FunctionMor", "InjectionMor", "IsometryMor",
    "StinespringDilation", "TennentMor", "ToleranceConfig", "connect_dilations", "dilate", "is_cptp",
]
__version__ = "0.1.0"
