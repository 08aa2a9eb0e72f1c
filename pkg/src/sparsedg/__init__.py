"""Sparse grid discontinuous Galerkin discretizations."""

__version__ = "0.1.0"

from .basis1d import (
    Basis1D,
    PiecewisePoly,
    build_basis,
    hierarchical_function,
    legendre_eval,
    multiwavelets,
    nodal_function,
)
from .grid import (
    CoeffDict,
    Layout,
    Scheme,
    D2V,
    V2D,
    cells,
    index_set,
    l2_norm,
    load_coeff_vector,
    save_coeff_vector,
    space_dim,
)
from .project import coeffs_DG, dg_function, mcerr, project_1d, reconstruct_DG, tensor_construct
from .operators import (
    D_matrix,
    derivative_1d_hier,
    derivative_1d_nodal,
    grad_matrix,
    laplacian_matrix,
)
from .evolve import (
    EvolveOptions,
    Trajectory,
    WaveState,
    energy,
    travelling_wave_solver,
    wave_evolve,
    wave_rhs,
)
