"""Matrix Schur-class interpolation through isometric colligations.

Typical use::

    from schur_interp import NevanlinnaPickData, build_nevanlinna_pick, Solver

    data = NevanlinnaPickData([0.0, 0.5], [[[0.0]], [[0.25]]])
    solver = Solver(build_nevanlinna_pick(data))
    s = solver.central()
    s.evaluate([0.1, 0.2j])
"""
from .colligation import (Colligation, DefectSpaces, PartitionedUnitary, SchurParameter,
                          build_colligation, coupling_unitary, defect_spaces,
                          unitary_extension)
from .data import (AipData, NevanlinnaPickData, SarasonData, build_nevanlinna_pick,
                   build_sarason, solvability, validate_fi)
from .errors import (ConsistencyError, DomainError, InterpolationError, InvalidDataError,
                     NotPSDError, NotSolvableError, SingularLFTError, SpectrumError)
from .kernels import BACKEND
from .linalg import (PsdReport, defect_quadratic, gram_factor, psd_check,
                     pseudo_inverse_quadratic, pseudo_sqrt_solve)
from .scattering import (CoefficientBlocks, SolutionEvaluator, Solver, coefficient_matrix,
                         disk_grid, lft_apply, scattering_eval)
from .tolerances import DEFAULT, Tolerances
from .verification import (FsValue, QuadratureSpec, f_transform_eval, fmi_check,
                           fmi_prime_check, herglotz_diagnostic, shift_identity_residual,
                           interpolation_check, ks_norm_quadrature, verify_solution)

__version__ = "0.1.0"

__all__ = [
    "AipData", "NevanlinnaPickData", "SarasonData", "build_nevanlinna_pick",
    "build_sarason", "validate_fi", "solvability",
    "Colligation", "DefectSpaces", "PartitionedUnitary", "SchurParameter",
    "build_colligation", "defect_spaces", "coupling_unitary", "unitary_extension",
    "CoefficientBlocks", "SolutionEvaluator", "Solver", "coefficient_matrix", "disk_grid",
    "lft_apply", "scattering_eval",
    "FsValue", "QuadratureSpec", "fmi_check", "fmi_prime_check", "f_transform_eval",
    "shift_identity_residual", "ks_norm_quadrature", "herglotz_diagnostic",
    "interpolation_check", "verify_solution",
    "PsdReport", "psd_check", "gram_factor", "pseudo_sqrt_solve",
    "pseudo_inverse_quadratic", "defect_quadratic",
    "Tolerances", "DEFAULT", "BACKEND",
    "InterpolationError", "InvalidDataError", "NotPSDError", "DomainError",
    "NotSolvableError", "ConsistencyError", "SpectrumError", "SingularLFTError",
    "__version__",
]
