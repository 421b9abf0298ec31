from typing import Optional


class PdemScatterError(Exception):
    """
    Base class for every error raised by pdemscatter.
    """


class PoleError(PdemScatterError):
    """
    Argument sits on (or within tolerance of) a pole of the Gamma function.
    """


class NonConvergence(PdemScatterError):
    """
    A series or continuation ran out of its term budget.
    """


class DegenerateParameters(PdemScatterError):
    """
    A connection formula hit a Gamma pole that the epsilon shift could not resolve.
    """


class SubThresholdEnergy(PdemScatterError):
    """
    Energy below the scattering threshold of the heterojunction.
    """


class InvalidGrid(PdemScatterError):
    """
    Profile grid that violates its slicing invariants.
    """


class InvalidParameters(PdemScatterError, ValueError):
    """
    Model parameters outside the regime an operation requires.
    """


class IllConditionedMatching(PdemScatterError):
    """
    Junction matching system too close to singular to trust.
    """

    def __init__(self, energy: float, condition: float) -> None:
        self.energy = energy
        self.condition = condition
        super().__init__(
            f"Matching system at E={energy} is ill-conditioned (condition {condition:.3e})."
        )


class EvanescentOverflow(PdemScatterError, OverflowError):
    """
    Transfer-matrix product too large to represent, even in scaled form.
    """


class NotConverged(PdemScatterError):
    """
    Richardson check failed to reach tolerance at the largest slice count.
    """

    def __init__(self, error: float, n_slices: int) -> None:
        self.error = error
        self.n_slices = n_slices
        super().__init__(
            f"Oracle did not converge: relative error {error:.3e} at n={n_slices}."
        )


class NoPeakFound(PdemScatterError):
    """
    No transmission peak above threshold inside the scanned window.
    """

    def __init__(self, peak: float, threshold: float, window: Optional[tuple] = None):
        self.peak = peak
        self.threshold = threshold
        self.window = window
        super().__init__(
            f"Largest |T|^2 in window {window} is {peak:.6g}, below threshold {threshold:.6g}."
        )


class AsymmetricGrid(PdemScatterError):
    """
    Sample grid lacks the mirror point of at least one sample.
    """


class BrokenPTPhase(PdemScatterError):
    """
    Operation requires exact PT symmetry but the parameters are in the broken phase.
    """
