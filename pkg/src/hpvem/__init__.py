"""hp virtual element method for elliptic eigenvalue problems on polygons."""

from .assembly import (DIRICHLET, NEUMANN, BoundaryCondition, CoefficientField,
                       GlobalDofMap, SystemMatrices, assemble, build_dof_map,
                       constant_vector, write_coo)
from .bench import (ConvergenceRecord, ReferenceSpectrum, StudyConfig, emit_report,
                    fit_rates, generate_reference_file, get_test_case,
                    reference_spectrum, run_study, run_study_with_config)
from .degrees import DegreeMap, assign_hp, assign_uniform
from .eigensolve import (EigenResult, SolverConfig, match_eigenvalues,
                         solve_generalized)
from .geometry import (GeometryError, LayeredMesh, MeshError, PolyMesh,
                       RegularityReport, build_edges, check_regularity,
                       compute_layers, generate_cartesian, generate_graded,
                       generate_voronoi, read_mesh, subtriangulate, write_mesh)
from .local import (DRECIPE, EXPLICIT, DofLayout, LocalMatrices, LocalSpace,
                    ProjectorSet, StabChoice, dof_layout, local_matrices,
                    project_grad_L2, project_L2, project_nabla, stab_s0, stab_s1)
from .polyspace import (ConditioningError, EdgeNodes, MonomialBasis, OrthoBasis,
                        QuadratureRule, gauss_lobatto, orthonormalize,
                        polygon_quadrature)

__version__ = "0.1.0"
