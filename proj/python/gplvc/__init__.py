"""Vibronic-coupling quantum dynamics near conical intersections.

Thin Python layer over the C++ core: model evaluation, the effective-mode
transformation, Ohmic bath discretization, closed and TCL2 propagation, and
perturbative transfer-channel estimates.
"""

from _core import (  # noqa: F401
    BathParameters,
    CouplingAxis,
    GridSpec,
    Representation,
    SubsystemParameters,
    __version__,
    bath_correlation,
    derive_geometry,
    discretize_ohmic,
    dressed_integral,
    evaluate_potentials,
    fc_overlap,
    run_closed,
    run_config,
    run_tcl2,
    tdpt_channels,
    transform_lvc,
)


def symmetric_setup(omega=2.0, x0=1.5, c_y=3.0):
    """The symmetric two-well subsystem used throughout the study."""
    p = SubsystemParameters()
    p.omega_x = p.omega_y = omega
    p.x0 = x0
    p.c_y = c_y
    return p
