"""Exception hierarchy shared across the package.

Everything raised on a *mathematical* failure path derives from
:class:`PencilError` so callers (and the CLI) can separate domain errors
from plain usage mistakes.
"""

from __future__ import annotations


class PencilError(Exception):
    """Base class for domain-level failures."""


class NonEllipticSymbol(PencilError):
    """The second-order symbol vanishes on a real direction."""


class ContourTooClose(PencilError):
    """An integration contour passes too close to the spectrum.

    Raised when the smallest singular value of T(lambda) drops below the
    absolute guard threshold at some quadrature node.
    """

    def __init__(self, where: complex, sigma: float):
        self.where = complex(where)
        self.sigma = float(sigma)
        super().__init__(
            f"sigma_min(T) = {sigma:.3e} at contour point {where}; "
            "move the rectangle or enlarge it away from the spectrum"
        )


class NonIntegerWinding(PencilError):
    """The raw winding integral is not close enough to an integer."""

    def __init__(self, raw: complex):
        self.raw = complex(raw)
        super().__init__(
            f"winding integral {raw} deviates from the nearest integer "
            "by more than 0.1; increase quad_points or move the contour"
        )


class RankAmbiguous(PencilError):
    """No clear singular-value gap when truncating the moment matrix."""


class NoConvergence(PencilError):
    """Newton refinement failed to reach the residual tolerance."""


class NotAnEigenvalue(PencilError):
    """sigma_min(T(lambda)) is too large for nullspace extraction."""

    def __init__(self, lam: complex, sigma: float, tol: float):
        self.lam = complex(lam)
        self.sigma = float(sigma)
        super().__init__(
            f"sigma_min(T({lam})) = {sigma:.3e} exceeds tol = {tol:.3e}"
        )


class LineNotClean(PencilError):
    """A weight line that must be eigenvalue-free carries spectrum."""

    def __init__(self, height: float, witness: complex | None = None):
        self.height = float(height)
        self.witness = witness
        msg = f"line Im lambda = {height} is not eigenvalue-free"
        if witness is not None:
            msg += f" (witness {witness})"
        super().__init__(msg)


class UnsupportedProblemClass(PencilError):
    """Operation defined only for a narrower class of problems."""


class OutOfDomain(PencilError):
    """Evaluation point outside the function's angular interval or r <= 0."""


class GridShiftMismatch(PencilError):
    """A nonlocal shift does not land on an angular grid line."""


class SingularSystem(PencilError):
    """The discrete linear system is numerically singular."""

    def __init__(self, cond_estimate: float):
        self.cond_estimate = float(cond_estimate)
        super().__init__(
            f"linear system is numerically singular "
            f"(condition estimate {cond_estimate:.3e})"
        )
