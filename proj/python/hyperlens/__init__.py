"""Hyperbolic lens on object-centric slot bundles.

Thin wrapper around the compiled extension; the heavy lifting lives in C++.
"""

from hyperlens._core import (
    __version__,
    HyperlensError,
    analyze_bundle,
    cosine_distance,
    distance_to_origin,
    exp_map_origin,
    generate_bundle,
    gromov_delta,
    kde_overlap,
    lorentz_centroid,
    lorentz_distance,
    lorentz_inner,
    validate_bundle,
)

__all__ = [
    "__version__",
    "HyperlensError",
    "analyze_bundle",
    "cosine_distance",
    "distance_to_origin",
    "exp_map_origin",
    "generate_bundle",
    "gromov_delta",
    "kde_overlap",
    "lorentz_centroid",
    "lorentz_distance",
    "lorentz_inner",
    "validate_bundle",
]
