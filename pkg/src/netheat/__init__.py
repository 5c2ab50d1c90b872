"""Heat kernels and Keller-Segel chemotaxis on finite weighted metric graphs."""

from .network import (
    Network,
    PointOnGraph,
    GraphPath,
    build_network,
    transfer_coefficient,
    path_weight,
    make_path,
    enumerate_paths,
    path_distance,
    geodesic_data,
)
from .functions import GraphFunction, quad_weights, mesh_coordinates
from .kernel import (
    KernelParams,
    KernelValue,
    gauss_kernel,
    truncation_depth,
    eval_H,
    eval_dH_dy,
    apply_semigroup,
    verify_vertex_conditions,
    get_engine,
)
from .elliptic import elliptic_solve, verify_elliptic_bounds, EllipticSystem
from .diagnostics import (
    weighted_integral,
    free_energy,
    dissipation_residual,
    DiagnosticsRecord,
)
from .picard import SimState
from .chemotaxis_pp import (
    PPConfig,
    PPResult,
    init_pp,
    eval_c,
    eval_grad_c,
    picard_step,
    run_pp,
)
from .chemotaxis_pe import PEConfig, PEResult, init_pe, run_pe
from .io import (
    NetworkSpec,
    parse_network_file,
    load_network_file,
    serialize_network,
    compile_expression,
)

__version__ = "0.1.0"
