"""
Material model of the lattice-loaded condensate.

Detuning convention, used everywhere in the package:

    delta = nu_0 - nu

so positive detunings are red of resonance and give a refractive index
above one; blue detunings (delta < 0) give epsilon < 0.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from scipy import constants

from ..conf import sim_setting
from ..exceptions import InvalidParameterError, ResonanceRegionError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

TYPICAL_DENSITY_RANGE = (1e19, 1e20)            # atoms/m^3 (1e13 - 1e14 cm^-3)
TYPICAL_ATOMS_PER_DISK = (100, 1000)
TYPICAL_TRANSVERSE_RADIUS = (2e-6, 10e-6)       # m
TYPICAL_DISK_SIZE = (80e-9, 300e-9)             # m
TYPICAL_DISK_COUNT = (100, 200)


def _require_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class AtomicSpecies:
    name: str
    linewidth_gamma: float      # Hz
    resonance_wavelength: float  # m
    scattering_length: float    # m
    mass: float                 # kg

    def __post_init__(self):
        _require_positive(
            linewidth_gamma=self.linewidth_gamma,
            resonance_wavelength=self.resonance_wavelength,
            scattering_length=self.scattering_length,
            mass=self.mass,
        )

    @property
    def resonance_frequency(self) -> float:
        return constants.c / self.resonance_wavelength

    def resonance_cutoff(self, linewidths: Optional[float] = None) -> float:
        """Half-width of the excluded near-resonance region, in Hz."""
        if linewidths is None:
            linewidths = sim_setting('RESONANCE_CUTOFF_LINEWIDTHS')
        return linewidths * self.linewidth_gamma


# D1 line, matching the 795 nm down-converted source
RUBIDIUM_87 = AtomicSpecies(
    name='rb87',
    linewidth_gamma=6e6,
    resonance_wavelength=795e-9,
    scattering_length=5.77e-9,
    mass=86.909180520 * constants.atomic_mass,
)

SPECIES_PRESETS = {
    'rb87': RUBIDIUM_87,
}


@dataclass(frozen=True)
class CondensateSample:
    number_density: float       # atoms/m^3
    atoms_per_disk: float
    transverse_radius: float    # m
    longitudinal_size: float    # m
    ho_length: float            # m

    def __post_init__(self):
        _require_positive(
            number_density=self.number_density,
            atoms_per_disk=self.atoms_per_disk,
            transverse_radius=self.transverse_radius,
            longitudinal_size=self.longitudinal_size,
            ho_length=self.ho_length,
        )

    def typical_range_warnings(self, disk_count: Optional[int] = None) -> List[str]:
        """Deviations from the usual experimental windows, as messages."""
        checks = [
            ('number density', self.number_density, TYPICAL_DENSITY_RANGE, 'm^-3'),
            ('atoms per disk', self.atoms_per_disk, TYPICAL_ATOMS_PER_DISK, ''),
            ('transverse radius', self.transverse_radius, TYPICAL_TRANSVERSE_RADIUS, 'm'),
            ('longitudinal size', self.longitudinal_size, TYPICAL_DISK_SIZE, 'm'),
        ]
        if disk_count is not None:
            checks.append(('disk count', disk_count, TYPICAL_DISK_COUNT, ''))
        warnings = []
        for label, value, (low, high), unit in checks:
            if not low <= value <= high:
                suffix = f" {unit}" if unit else ''
                warnings.append(
                    f"{label} {value:.4g}{suffix} outside the typical range "
                    f"{low:.4g} - {high:.4g}{suffix}"
                )
        return warnings


@dataclass(frozen=True)
class DiskLatticeGeometry:
    disk_thickness: float   # m
    period: float           # m
    disk_count: int
    typical_thickness: bool = True

    def __post_init__(self):
        if not 0 < self.disk_thickness < self.period:
            raise InvalidParameterError(
                f"Disk thickness {self.disk_thickness} must lie in (0, period={self.period})"
            )
        if self.disk_count < 1:
            raise InvalidParameterError(f"Disk count must be >= 1, got {self.disk_count}")

    @property
    def gap(self) -> float:
        return self.period - self.disk_thickness


def rescaled_density(wavelength: float, number_density: ArrayLike) -> ArrayLike:
    """Density in units of the reduced wavelength cubed, (lambda / 2 pi)^3 N/V."""
    _require_positive(wavelength=wavelength)
    if np.any(np.asarray(number_density) < 0):
        raise InvalidParameterError("Number density must be non-negative")
    return (wavelength / (2.0 * np.pi)) ** 3 * number_density


def dispersive_epsilon(species: AtomicSpecies,
                       rescaled: float,
                       detuning: ArrayLike,
                       cutoff: Optional[float] = None) -> ArrayLike:
    """
    Far-detuned index shift epsilon = (3 pi / 2) N Gamma / delta, so that
    n_B = 1 + epsilon. Refuses detunings inside ``cutoff``.
    """
    if cutoff is None:
        cutoff = species.resonance_cutoff()
    _require_positive(cutoff=cutoff)
    delta = np.asarray(detuning, dtype=float)
    inside = np.abs(delta) < cutoff
    if np.any(inside):
        worst = float(delta[inside].flat[0]) if delta.ndim else float(delta)
        raise ResonanceRegionError(worst, cutoff)
    epsilon = 1.5 * np.pi * rescaled * species.linewidth_gamma / delta
    return float(epsilon) if epsilon.ndim == 0 else epsilon


def refractive_index(epsilon: ArrayLike) -> ArrayLike:
    return 1.0 + epsilon


@dataclass(frozen=True)
class ScatteringEstimate:
    raw: float
    probability: float
    valid: bool


def scattering_probability(atoms_per_disk: float,
                           species: AtomicSpecies,
                           detuning: float) -> ScatteringEstimate:
    """Incoherent scattering probability ~ N_at Gamma / |delta|, clamped at 1."""
    if detuning == 0 or not np.isfinite(detuning):
        raise InvalidParameterError("Scattering probability needs a finite non-zero detuning")
    if atoms_per_disk < 0:
        raise InvalidParameterError(f"Atom number must be non-negative, got {atoms_per_disk}")
    raw = atoms_per_disk * species.linewidth_gamma / abs(detuning)
    valid = raw < 1.0
    if not valid:
        logger.warning("Scattering probability %.3g >= 1 at detuning %.4g Hz", raw, detuning)
    return ScatteringEstimate(raw=raw, probability=min(raw, 1.0), valid=valid)


@dataclass(frozen=True)
class ThomasFermiDensity:
    """
    ``literal`` follows the printed expression and carries units of 1/m^2;
    ``audited`` is the three-dimensional peak density in 1/m^3, which is the
    literal value divided by the oscillator length.
    """
    literal: float
    audited: float
    literal_units: str = '1/m^2'
    audited_units: str = '1/m^3'
    literal_is_volume_density: bool = False


def thomas_fermi_peak_density(atoms_per_disk: float,
                              species: AtomicSpecies,
                              ho_length: float) -> ThomasFermiDensity:
    _require_positive(atoms_per_disk=atoms_per_disk, ho_length=ho_length)
    a = species.scattering_length
    literal = (1.0 / (8.0 * np.pi)) / (ho_length * a) * (15.0 * atoms_per_disk * a / ho_length) ** 0.4
    return ThomasFermiDensity(literal=literal, audited=literal / ho_length)


def quarter_wave_geometry(wavelength: float, disk_count: int) -> DiskLatticeGeometry:
    """Disks lambda/4 thick on a lambda/2 period."""
    _require_positive(wavelength=wavelength)
    thickness = wavelength / 4.0
    low, high = TYPICAL_DISK_SIZE
    return DiskLatticeGeometry(
        disk_thickness=thickness,
        period=wavelength / 2.0,
        disk_count=int(disk_count),
        typical_thickness=low <= thickness <= high,
    )


def lattice_disk_size(lattice_depth_s: float, wavenumber_k: float, prefactor: float = 1.0) -> float:
    """Longitudinal disk size prefactor * s^(-1/4) / k."""
    _require_positive(lattice_depth_s=lattice_depth_s, wavenumber_k=wavenumber_k, prefactor=prefactor)
    return prefactor * lattice_depth_s ** -0.25 / wavenumber_k


def detuning_to_frequency(species: AtomicSpecies, detuning: ArrayLike) -> ArrayLike:
    return species.resonance_frequency - np.asarray(detuning, dtype=float)


def detuning_to_wavelength(species: AtomicSpecies, detuning: ArrayLike) -> ArrayLike:
    return constants.c / detuning_to_frequency(species, detuning)


def wavelength_to_detuning(species: AtomicSpecies, wavelength: ArrayLike) -> ArrayLike:
    return species.resonance_frequency - constants.c / np.asarray(wavelength, dtype=float)


@dataclass(frozen=True)
class DensityProfile:
    """
    Atomic density sampled over one lattice period [0, period].

    ``interpolation`` is 'linear' for smooth profiles or 'previous' for
    piecewise-constant ones (each sample holds until the next position).
    """
    positions: np.ndarray
    densities: np.ndarray
    period: float
    interpolation: str = 'linear'

    def __post_init__(self):
        if len(self.positions) != len(self.densities) or len(self.positions) < 2:
            raise InvalidParameterError("Density profile needs matching position and density samples")
        if np.any(np.diff(self.positions) <= 0):
            raise InvalidParameterError("Density profile positions must be strictly increasing")
        if np.any(self.densities < 0):
            raise InvalidParameterError("Density profile contains negative densities")
        if self.interpolation not in ('linear', 'previous'):
            raise InvalidParameterError(f"Unknown interpolation {self.interpolation!r}")

    def density_at(self, z: np.ndarray) -> np.ndarray:
        z = np.mod(np.asarray(z, dtype=float), self.period)
        if self.interpolation == 'linear':
            return np.interp(z, self.positions, self.densities)
        idx = np.searchsorted(self.positions, z, side='right') - 1
        return self.densities[np.clip(idx, 0, len(self.densities) - 1)]

    @classmethod
    def top_hat(cls, peak_density: float, period: float, fill: float = 0.5) -> 'DensityProfile':
        """Uniform disk of width fill * period centred in the period."""
        if not 0 < fill < 1:
            raise InvalidParameterError(f"Fill factor must lie in (0, 1), got {fill}")
        edge = 0.5 * (1.0 - fill) * period
        return cls(
            positions=np.array([0.0, edge, period - edge]),
            densities=np.array([0.0, peak_density, 0.0]),
            period=period,
            interpolation='previous',
        )

    @classmethod
    def sinusoidal(cls, peak_density: float, period: float, samples: int = 2049) -> 'DensityProfile':
        """Lattice-site density peak * sin^2(pi z / period)."""
        z = np.linspace(0.0, period, samples)
        return cls(z, peak_density * np.sin(np.pi * z / period) ** 2, period)

    @classmethod
    def thomas_fermi(cls, peak_density: float, period: float, fill: float = 0.5,
                     samples: int = 2049) -> 'DensityProfile':
        """Inverted parabola of full width fill * period centred in the period."""
        if not 0 < fill <= 1:
            raise InvalidParameterError(f"Fill factor must lie in (0, 1], got {fill}")
        z = np.linspace(0.0, period, samples)
        half_width = 0.5 * fill * period
        shape = 1.0 - ((z - 0.5 * period) / half_width) ** 2
        return cls(z, peak_density * np.clip(shape, 0.0, None), period)
