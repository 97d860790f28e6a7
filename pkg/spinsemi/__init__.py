"""A package for exact and semiclassical spin-1/2 propagators in coherent states."""

from spinsemi.analytic import (
    KummerParams,
    LzBasis,
    constant_field_ab,
    constant_field_exponent,
    constant_field_paths,
    constant_field_semiclassical,
    kummer_phi,
    lz_ab,
    lz_asymptote,
    lz_basis,
    lz_paths,
)
from spinsemi.config import get_config, set_config
from spinsemi.errors import *  # noqa: F403
from spinsemi.exact import (
    IntegratorConfig,
    LabelEvolution,
    Su2Propagator,
    accumulated_phase,
    compose,
    evolve_label,
    exact_propagator,
    integrate_ab,
    label_trajectory,
    matrix_element,
    propagator_matrix,
    transition_probability,
)
from spinsemi.field import (
    ConstantField,
    FieldSample,
    FieldSpec,
    FourierField,
    LandauZenerField,
    RotatedField,
    TabulatedField,
    classical_rhs,
    field_at,
    hamiltonian_angles,
    hamiltonian_stereo,
    parse_field,
    read_fourier,
    read_table,
    shifted,
)
from spinsemi.semiclassical import (
    ClassicalTrajectory,
    JumpData,
    LayerPoint,
    RegularizationConfig,
    SemiclassicalResult,
    boundary_layer_path,
    classical_factor,
    euler_lagrange_residual,
    jump_data,
    propagator_action_route,
    propagator_endpoint_route,
    riccati_rhs,
    solve_trajectory,
)
from spinsemi.sphere import (
    SpinMatrixElements,
    SphereAngles,
    StereoPair,
    expectation,
    from_stereo,
    identity_resolution_defect,
    label_from_spinor,
    overlap,
    quarter_root,
    spin_matrix_elements,
    spin_ratios_stereo,
    spinor,
    to_stereo,
)

__version__ = "0.1.0-dev"
