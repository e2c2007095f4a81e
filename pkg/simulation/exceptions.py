from typing import Optional

from django.core.exceptions import ValidationError


class SimulationError(Exception):
    """Base class for every failure raised by the simulation services"""


class InvalidParameterError(SimulationError, ValueError):
    """A physical parameter is outside its admissible domain"""


class TruncationInfeasibleError(SimulationError):
    """The amplitude series could not be truncated within the configured caps"""

    def __init__(self, message: str, achieved_norm: float):
        super().__init__(f"{message} (achieved norm {achieved_norm:.12g})")
        self.achieved_norm = achieved_norm


class UnderTruncatedError(SimulationError):
    """An amplitude table holds too little probability to take moments from"""

    def __init__(self, captured_norm: float):
        super().__init__(
            f"Amplitude table is under-truncated: captured norm {captured_norm:.12g}"
        )
        self.captured_norm = captured_norm


class CutoffTooSmallError(SimulationError):
    """Evolution pushed too much probability into the Fock cutoff shell"""

    def __init__(self, leakage: float, n_max: int):
        super().__init__(
            f"Fock cutoff n_max={n_max} too small: leakage {leakage:.3e}"
        )
        self.leakage = leakage
        self.n_max = n_max


class CutoffMismatchError(SimulationError):
    """Two Fock states live on grids with different cutoffs"""


class EvolutionAccuracyError(SimulationError):
    """The propagator failed its unitarity certificate"""


class ResonanceRegionError(SimulationError):
    """A detuning falls inside the region where the dispersive model fails"""

    def __init__(self, detuning: float, cutoff: float):
        super().__init__(
            f"Detuning {detuning:.6g} Hz lies inside the resonance cutoff "
            f"of {cutoff:.6g} Hz"
        )
        self.detuning = detuning
        self.cutoff = cutoff


class ScenarioConfigError(ValidationError):
    """A scenario file could not be parsed or failed validation"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

    def __str__(self):
        return self.message
