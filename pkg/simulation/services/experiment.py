"""
Photon budget, momentum transfer and displacement fringe of the
Mirror-BEC driven by the two amplified beams.

The displacement model is a rigid mirror: each pulse transfers
(N'+ - N'-) photon recoils of 2 h nu / c, multiplied by the cavity bounce
factor Q; the momentum of all repetitions is shared by the whole
condensate (N_D * N_at atoms) and converted to a displacement over the
free-flight time.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import constants

from ..exceptions import InvalidParameterError
from .atom_optics import (
    AtomicSpecies,
    CondensateSample,
    DiskLatticeGeometry,
    ScatteringEstimate,
    scattering_probability,
)
from .fock_opa import fringe_curve, gain_params, total_photons, visibility

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Figures quoted alongside the computed photon budget
QUOTED_ACTIVE_FRACTION = 0.03
QUOTED_ACTIVE_RANGE = (150.0, 300.0)
QUOTED_MEAN_PHOTONS = 80000.0


@dataclass(frozen=True)
class KickExperimentConfig:
    gain: float
    species: AtomicSpecies
    geometry: DiskLatticeGeometry
    sample: CondensateSample
    source_bandwidth: float             # Hz
    stopband: float                     # Hz, reflecting band of the mirror
    degradation: float = 1.0
    repetitions: int = 1
    cavity_q_factor: float = 1.0
    flight_time: float = 50e-6          # s
    pulse_duration: float = 1e-12       # s
    pulse_spacing: Optional[float] = None  # s, defaults to pulse_duration
    operating_detuning: float = 2e9     # Hz, for the scattering estimate

    def __post_init__(self):
        if self.repetitions < 1:
            raise InvalidParameterError(f"Repetitions must be >= 1, got {self.repetitions}")
        if not self.flight_time > 0:
            raise InvalidParameterError(f"Flight time must be positive, got {self.flight_time}")
        if self.cavity_q_factor < 1:
            raise InvalidParameterError(f"Cavity Q factor must be >= 1, got {self.cavity_q_factor}")
        if not 0 < self.degradation <= 1:
            raise InvalidParameterError(f"Degradation must lie in (0, 1], got {self.degradation}")
        for name in ('source_bandwidth', 'stopband', 'pulse_duration'):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.pulse_spacing is not None and self.pulse_spacing < self.pulse_duration:
            raise InvalidParameterError("Pulse spacing cannot be shorter than the pulse duration")

    @property
    def effective_pulse_spacing(self) -> float:
        return self.pulse_duration if self.pulse_spacing is None else self.pulse_spacing

    @property
    def condensate_mass(self) -> float:
        return self.geometry.disk_count * self.sample.atoms_per_disk * self.species.mass

    @property
    def photon_momentum(self) -> float:
        """Head-on recoil 2 h nu / c of one reflected photon at resonance."""
        return 2.0 * constants.h / self.species.resonance_wavelength


@dataclass(frozen=True)
class ActivePhotons:
    count: ArrayLike
    fraction: float
    clamped: bool


def active_photons(n_photons: ArrayLike, stopband: float, source_bandwidth: float) -> ActivePhotons:
    """Photons inside the reflecting band, (stopband / bandwidth) * N."""
    if not (stopband > 0 and source_bandwidth > 0):
        raise InvalidParameterError("Stopband and source bandwidth must be positive")
    clamped = stopband > source_bandwidth
    fraction = 1.0 if clamped else stopband / source_bandwidth
    if clamped:
        logger.warning("Stopband %.4g Hz exceeds source bandwidth %.4g Hz; all photons active",
                       stopband, source_bandwidth)
    count = fraction * np.asarray(n_photons, dtype=float)
    return ActivePhotons(float(count) if count.ndim == 0 else count, fraction, clamped)


def resonant_photon_count(n_photons: float, atomic_linewidth: float, source_bandwidth: float) -> float:
    if not (atomic_linewidth > 0 and source_bandwidth > 0):
        raise InvalidParameterError("Bandwidths must be positive")
    return n_photons * atomic_linewidth / source_bandwidth


@dataclass(frozen=True)
class TimingReport:
    survival_time: float    # s
    exposure_time: float    # s
    flight_time: float      # s
    exposure_fits: bool
    flight_fits: bool
    exposure_margin: float  # s
    flight_margin: float    # s

    @property
    def feasible(self) -> bool:
        return self.exposure_fits and self.flight_fits


def timing_check(config: KickExperimentConfig, expansion_speed: float,
                 spoil_fraction: float = 0.25) -> TimingReport:
    """
    Lattice survival time (spoil_fraction * disk thickness) / expansion speed
    against the pulse train duration and the free-flight time.
    """
    if not expansion_speed > 0:
        raise InvalidParameterError(f"Expansion speed must be positive, got {expansion_speed}")
    survival = spoil_fraction * config.geometry.disk_thickness / expansion_speed
    exposure = config.repetitions * config.effective_pulse_spacing
    report = TimingReport(
        survival_time=survival,
        exposure_time=exposure,
        flight_time=config.flight_time,
        exposure_fits=exposure <= survival,
        flight_fits=config.flight_time <= survival,
        exposure_margin=survival - exposure,
        flight_margin=survival - config.flight_time,
    )
    if not report.feasible:
        logger.warning(
            "Timing infeasible: survival %.4g s, exposure %.4g s, flight %.4g s",
            survival, exposure, config.flight_time,
        )
    return report


@dataclass(frozen=True)
class DisplacementFringe:
    phases: np.ndarray
    displacement: np.ndarray    # m
    active_photons: np.ndarray  # N'+ per phase
    active_minus: np.ndarray    # N'- per phase
    scattering: ScatteringEstimate
    timing: Optional[TimingReport]
    active_clamped: bool
    amplitude: float = field(default=0.0)  # m, displacement at phi = 0

    @property
    def feasible(self) -> bool:
        timing_ok = self.timing is None or self.timing.feasible
        return timing_ok and self.scattering.valid


def displacement_fringe(config: KickExperimentConfig, phases: ArrayLike,
                        expansion_speed: Optional[float] = None) -> DisplacementFringe:
    """Mirror displacement after the flight time versus trigger phase."""
    params = gain_params(config.gain)
    curve = fringe_curve(params, phases, config.degradation)
    active = active_photons(curve.n_plus, config.stopband, config.source_bandwidth)
    active_minus = active.fraction * curve.n_minus

    per_pulse = (active.count - active_minus) * config.photon_momentum * config.cavity_q_factor
    velocity = per_pulse * config.repetitions / config.condensate_mass
    displacement = velocity * config.flight_time
    amplitude = (
        active.fraction * config.degradation * (2.0 * params.m_bar + 1.0)
        * config.photon_momentum * config.cavity_q_factor * config.repetitions
        / config.condensate_mass * config.flight_time
    )

    scattering = scattering_probability(config.sample.atoms_per_disk, config.species,
                                        config.operating_detuning)
    timing = timing_check(config, expansion_speed) if expansion_speed is not None else None
    return DisplacementFringe(
        phases=curve.phases,
        displacement=displacement,
        active_photons=np.asarray(active.count),
        active_minus=active_minus,
        scattering=scattering,
        timing=timing,
        active_clamped=active.clamped,
        amplitude=float(amplitude),
    )


def summarize(config: KickExperimentConfig, expansion_speed: float) -> Dict[str, object]:
    """The photon-budget chain from gain to displacement, as one flat report."""
    params = gain_params(config.gain)
    photons = total_photons(params)
    fringe = displacement_fringe(config, [0.0], expansion_speed)
    contrast_photons = config.degradation * (2.0 * params.m_bar + 1.0)
    active = active_photons(contrast_photons, config.stopband, config.source_bandwidth)
    timing = fringe.timing
    return {
        'gain': params.g,
        'm_bar_per_mode': params.m_bar,
        'photons_both_modes': photons,
        'quoted_mean_photons': QUOTED_MEAN_PHOTONS,
        'visibility_theory': visibility(params),
        'visibility_applied': config.degradation * visibility(params),
        'active_fraction': active.fraction,
        'quoted_active_fraction': QUOTED_ACTIVE_FRACTION,
        'active_photons_total': active.fraction * photons,
        'active_photons_contrast': active.count,
        'quoted_active_range': list(QUOTED_ACTIVE_RANGE),
        'resonant_photons': resonant_photon_count(photons, config.species.linewidth_gamma,
                                                  config.source_bandwidth),
        'scattering_probability': fringe.scattering.raw,
        'scattering_valid': fringe.scattering.valid,
        'survival_time_s': timing.survival_time,
        'exposure_time_s': timing.exposure_time,
        'flight_time_s': timing.flight_time,
        'timing_feasible': timing.feasible,
        'displacement_amplitude_m': fringe.amplitude,
        'feasible': fringe.feasible,
    }
