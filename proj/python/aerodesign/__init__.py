"""Airfoil design workflow: geometry, panel analysis, sampling and optimisation."""

from ._core import (
    AerodesignError,
    analyze,
    cli,
    discrepancy,
    kulfan_fit,
    kulfan_profile,
    naca4,
    optimize,
    render_svg,
    sample,
    thickness_at,
)

__all__ = [
    "AerodesignError",
    "analyze",
    "cli",
    "discrepancy",
    "kulfan_fit",
    "kulfan_profile",
    "naca4",
    "optimize",
    "render_svg",
    "sample",
    "thickness_at",
]
