"""Normal forms of input-invariant dynamical systems.

Systems invariant under a one-parameter Lie group of input transformations
(scale-invariance ``u -> exp(p) u`` being the prominent case) can always be
written as an integral feedback that estimates the applied transformation
``p_hat``, undoes it on the input (``u_hat = pi_{-p_hat}(u)``), and feeds the
result into a system-specific variable part.  This package checks invariance
numerically, builds and simulates such normal forms, and analyzes their
transmissible inputs.
"""

from ._numerics import DomainError
from .dynamics import DynamicalSystem, Trajectory, simulate
from .equivariance import (
    equivariance_residual,
    equivariance_sweep,
    independence_margin,
    invariance_io_test,
    pde_residuals,
)
from .groups import (
    SCALING,
    TRANSLATION,
    StateTransformationFamily,
    TransformationGroup,
    infinitesimal,
    scaling_family,
    translation_family,
    verify_group_axioms,
)
from .normalform import (
    CrossSection,
    NormalFormSystem,
    apply_coordinate_change,
    as_flat_system,
    gauge_transform,
    rectify_group_action,
    simulate_normal_form,
)
from .signals import InputSignal, transform_signal
from .transmissible import TransmissibleInput, basin_sample, classify_stability, find_constant_transmissible

__version__ = "0.1.0"

__all__ = [
    "DomainError", "DynamicalSystem", "Trajectory", "simulate",
    "equivariance_residual", "equivariance_sweep", "independence_margin", "invariance_io_test",
    "pde_residuals", "SCALING", "TRANSLATION", "StateTransformationFamily", "TransformationGroup",
    "infinitesimal", "scaling_family", "translation_family", "verify_group_axioms", "CrossSection",
    "NormalFormSystem", "apply_coordinate_change", "as_flat_system", "gauge_transform",
    "rectify_group_action", "simulate_normal_form", "InputSignal", "transform_signal",
    "TransmissibleInput", "basin_sample", "classify_stability", "find_constant_transmissible",
]
