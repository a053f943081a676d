"""Extended-real grids, convex bodies and discrete Legendre transforms."""
from okrwn.convex.bodies import ConvexBody, Halfspace, convex_hull, lattice_points
from okrwn.convex.grids import (
    NEG_INF,
    POS_INF,
    Grid1D,
    GridFunction,
    decode_ext,
    encode_ext,
    ext_add,
)
from okrwn.convex.legendre import (
    gradient_image_body,
    legendre_conjugate,
    partial_inf_transform,
    partial_sup_transform,
)

GridFunctionND = GridFunction

__all__ = [
    "NEG_INF",
    "POS_INF",
    "ConvexBody",
    "Grid1D",
    "GridFunction",
    "GridFunctionND",
    "Halfspace",
    "convex_hull",
    "decode_ext",
    "encode_ext",
    "ext_add",
    "gradient_image_body",
    "lattice_points",
    "legendre_conjugate",
    "partial_inf_transform",
    "partial_sup_transform",
]
