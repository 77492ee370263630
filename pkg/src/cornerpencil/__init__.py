"""Operator pencils at corner points: spectra, multiplicities, weighted
Fredholm verdicts, singular asymptotics, and a sector finite-difference
cross-check for elliptic problems with nonlocal boundary conditions."""

from .errors import (
    PencilError,
    NonEllipticSymbol,
    ContourTooClose,
    NonIntegerWinding,
    RankAmbiguous,
    NoConvergence,
    NotAnEigenvalue,
    LineNotClean,
    UnsupportedProblemClass,
    OutOfDomain,
    GridShiftMismatch,
    SingularSystem,
)
from .pencil import (
    TrigPoly,
    PencilOperator,
    BCTerm,
    BoundaryRow,
    Component,
    PencilProblem,
    validate_problem,
    builtin_problem,
    polar_pencil_from_symbol,
    full_circle_from_symbol,
    Discretization,
    discretize,
    CompiledPencil,
    compile_pencil,
    assemble,
    assemble_derivative,
)
from .nep import (
    NepOptions,
    Rectangle,
    EigenEstimate,
    LineVerdict,
    count_in_rectangle,
    beyn_eigs,
    refine,
    line_free,
)
from .multiplicity import JordanChain, EigenRecord, nullspace, jordan_system
from .report import (
    WeightLine,
    Verdict,
    SingularFunction,
    TransitionReport,
    AdjointReport,
    fredholm_verdict,
    strip_scan,
    singular_functions,
    eval_singular,
    weight_transition_report,
    adjoint_pencil,
    adjoint_symmetry_check,
)
from .sector import (
    SectorProblem2D,
    PolarGrid,
    GridSolution,
    solve_sector,
    grid_function,
    manufactured_case,
    convergence_study,
    RateRecord,
    fit_exponent,
    resolvent_scan,
    ResolventScan,
    weighted_norm,
    ring_norms,
    refine_grid,
)

__version__ = "0.1.0"

__all__ = [
    "PencilError", "NonEllipticSymbol", "ContourTooClose", "NonIntegerWinding",
    "RankAmbiguous", "NoConvergence", "NotAnEigenvalue", "LineNotClean",
    "UnsupportedProblemClass", "OutOfDomain", "GridShiftMismatch",
    "SingularSystem",
    "TrigPoly", "PencilOperator", "BCTerm", "BoundaryRow", "Component",
    "PencilProblem", "validate_problem", "builtin_problem",
    "polar_pencil_from_symbol", "full_circle_from_symbol", "Discretization",
    "discretize", "CompiledPencil", "compile_pencil", "assemble",
    "assemble_derivative",
    "NepOptions", "Rectangle", "EigenEstimate", "LineVerdict",
    "count_in_rectangle", "beyn_eigs", "refine", "line_free",
    "JordanChain", "EigenRecord", "nullspace", "jordan_system",
    "WeightLine", "Verdict", "SingularFunction", "TransitionReport",
    "AdjointReport", "fredholm_verdict", "strip_scan", "singular_functions",
    "eval_singular", "weight_transition_report", "adjoint_pencil",
    "adjoint_symmetry_check",
    "SectorProblem2D", "PolarGrid", "GridSolution", "solve_sector",
    "grid_function", "manufactured_case", "convergence_study", "RateRecord",
    "fit_exponent", "resolvent_scan", "ResolventScan", "weighted_norm",
    "ring_norms", "refine_grid",
    "__version__",
]
