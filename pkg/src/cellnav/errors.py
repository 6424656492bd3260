"""Exception types shared across the package."""


class CellnavError(Exception):
    """Base class for all cellnav errors."""


class Infeasible(CellnavError):
    """The mission cannot keep the requested link quality at all times."""


class UnachievableSnr(Infeasible):
    """The SNR target exceeds what the link supports even at zero horizontal distance."""


class DegenerateSequence(CellnavError):
    """Two consecutive towers in an association sequence share the same position."""


class NoBoundaryCrossing(CellnavError):
    """No point of the segment toward the next handover lies on the coverage circle."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"no boundary crossing for handover point {index}")


class NonConvergence(CellnavError):
    """Handover refinement ran out of iterations; carries the best iterate found."""

    def __init__(self, best_points, sweeps, last_decrease):
        self.best_points = best_points
        self.sweeps = sweeps
        self.last_decrease = last_decrease
        super().__init__(
            f"refinement did not converge after {sweeps} sweeps "
            f"(last per-sweep decrease {last_decrease:.3e} m)"
        )


class InvalidQuantLevels(CellnavError):
    """Boundary quantization needs at least two levels."""


class NoOverlap(CellnavError):
    """The two coverage disks do not intersect."""
