"""Executable computable analysis over dyadic rationals.

Exact dyadic arithmetic and computable reals; sets given by pixel oracles
and by Hausdorff-close point clouds; functions given by their graphs; and a
real-number register machine with finite-precision modifications.
"""

from .dyadic import Box, Dyadic, DyadicInterval, ExactRational, Point
from .creal import BitFunction, CostMeter, CReal, Order, bitfunc_eval, soft_compare
from .sets import ComputableSet, raster, set_primitive
from .weak import DyadicCloud, cloud_from_oracle, hausdorff_sq, oracle_from_cloud
from .graphfn import GraphFunction, gf_eval
from .bssvm import RunMode, bss_parse, bss_run, bss_to_bitfunc

__version__ = "0.1.0"

__all__ = [
    "BitFunction",
    "Box",
    "ComputableSet",
    "CostMeter",
    "CReal",
    "Dyadic",
    "DyadicCloud",
    "DyadicInterval",
    "ExactRational",
    "GraphFunction",
    "Order",
    "Point",
    "RunMode",
    "bitfunc_eval",
    "bss_parse",
    "bss_run",
    "bss_to_bitfunc",
    "cloud_from_oracle",
    "gf_eval",
    "hausdorff_sq",
    "oracle_from_cloud",
    "raster",
    "set_primitive",
    "soft_compare",
]
