"""Multichannel Jost matrices and their power-series expansion in energy.

Typical use::

    from jostexp import ChannelSet, NoroTaylorPotential, DirectSource, find_spectral_point

    cs = ChannelSet.from_lists([0.0, 0.1])
    src = DirectSource(cs, NoroTaylorPotential())
    find_spectral_point(src, cs, 4.7, "--")
"""

from .analysis import (
    DirectSource,
    ExpansionSource,
    RootNotFoundError,
    SingularJostError,
    SpectralPoint,
    bound_state_scan,
    cross_sections,
    det_fin,
    find_spectral_point,
    flux_normalized_s,
    s_matrix,
    symmetry_residual,
)
from .channels import Channel, ChannelSet, SheetSelector, channel_momenta, enumerate_sheets, physical_sheet
from .expansion import (
    AccuracyMap,
    GridSpec,
    accuracy_map,
    domain_boundary,
    domain_d_contains,
    jost_from_expansion,
    load_table,
    save_table,
)
from .ode import DivergenceError, IntegrationError
from .potential import (
    ExponentialPotential,
    NoroTaylorPotential,
    OutsideSectorError,
    RadialPotential,
    ScaledPotential,
    TabulatedPotential,
    ZeroPotential,
)
from .solver import (
    DomainError,
    ExpansionTable,
    JostPair,
    SolverSettings,
    ThresholdError,
    TildePair,
    build_contour,
    integrate_coefficients,
    integrate_direct,
    integrate_tilde,
    jost_from_tilde,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyMap",
    "Channel",
    "ChannelSet",
    "DirectSource",
    "DivergenceError",
    "DomainError",
    "ExpansionSource",
    "ExpansionTable",
    "ExponentialPotential",
    "GridSpec",
    "IntegrationError",
    "JostPair",
    "NoroTaylorPotential",
    "OutsideSectorError",
    "RadialPotential",
    "RootNotFoundError",
    "ScaledPotential",
    "SheetSelector",
    "SingularJostError",
    "SolverSettings",
    "SpectralPoint",
    "TabulatedPotential",
    "ThresholdError",
    "TildePair",
    "ZeroPotential",
    "accuracy_map",
    "bound_state_scan",
    "build_contour",
    "channel_momenta",
    "cross_sections",
    "det_fin",
    "domain_boundary",
    "domain_d_contains",
    "enumerate_sheets",
    "find_spectral_point",
    "flux_normalized_s",
    "integrate_coefficients",
    "integrate_direct",
    "integrate_tilde",
    "jost_from_expansion",
    "jost_from_tilde",
    "load_table",
    "physical_sheet",
    "s_matrix",
    "save_table",
    "symmetry_residual",
]
