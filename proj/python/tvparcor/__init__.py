"""Time-varying vector PARCOR models: lattice fits, spectra, order selection, forecasts."""

from ._core import (
    ParcorFit,
    TimeSeries,
    TvparcorError,
    ase,
    fit,
    forecast,
    make_grid,
    parse_series,
    read_series,
    select,
    simulate,
    spectra,
)

__all__ = [
    "ParcorFit",
    "TimeSeries",
    "TvparcorError",
    "ase",
    "fit",
    "forecast",
    "make_grid",
    "parse_series",
    "read_series",
    "select",
    "simulate",
    "spectra",
]
