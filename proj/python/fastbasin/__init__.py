"""Attractors, fast basins and fractal continuations of iterated function systems."""

from ._fastbasin import (
    AffineAttractorOracle,
    Attractor,
    AttractorOracle,
    FastbasinError,
    GenerationField,
    IfsSystem,
    IntervalOracle,
    ParabolaOracle,
    Raster,
    RasterOracle,
    SegmentOracle,
    analyze,
    attractor_on,
    basin_estimate,
    box_dimension,
    compute_attractor,
    connected_components,
    continuation,
    criterion_check,
    expansivity_check,
    fast_basin,
    generation_forward,
    load_ifs,
    max_solid_square,
    parse_ifs,
    png_available,
    read_fbg1,
    read_fbr1,
    set_max_threads,
    slow_basin,
)

__all__ = [name for name in dir() if not name.startswith("_")]
