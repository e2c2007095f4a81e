"""
Normal-incidence layered-media optics for the patterned condensate.

Every layer is described by its characteristic matrix

    [[cos d, i sin d / n], [i n sin d, cos d]],   d = 2 pi n t / lambda

and a stack by the ordered product of its layers, with vacuum (index 1) on
both sides. All kernels work on stacked (..., 2, 2) arrays so that whole
wavelength scans are evaluated at once.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import constants

from ..conf import sim_setting
from ..exceptions import InvalidParameterError
from .atom_optics import (
    AtomicSpecies,
    CondensateSample,
    DensityProfile,
    DiskLatticeGeometry,
    detuning_to_wavelength,
    dispersive_epsilon,
    rescaled_density,
    wavelength_to_detuning,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

THICKNESS_MODES = ('optical', 'geometric')


@dataclass(frozen=True)
class Layer:
    refractive_index: float
    thickness: float  # m

    def __post_init__(self):
        if not (np.isfinite(self.refractive_index) and self.refractive_index > 0):
            raise InvalidParameterError(f"Refractive index must be positive, got {self.refractive_index}")
        if not (np.isfinite(self.thickness) and self.thickness >= 0):
            raise InvalidParameterError(f"Layer thickness must be non-negative, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    layers: Tuple[Layer, ...]
    ambient_index: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'layers', tuple(self.layers))

    def __len__(self):
        return len(self.layers)

    def __add__(self, other: 'LayerStack') -> 'LayerStack':
        return LayerStack(self.layers + other.layers, self.ambient_index)

    def repeated(self, count: int) -> 'LayerStack':
        return LayerStack(self.layers * int(count), self.ambient_index)

    def reversed(self) -> 'LayerStack':
        return LayerStack(self.layers[::-1], self.ambient_index)

    @property
    def indices(self) -> np.ndarray:
        return np.array([layer.refractive_index for layer in self.layers])

    @property
    def thicknesses(self) -> np.ndarray:
        return np.array([layer.thickness for layer in self.layers])


@dataclass(frozen=True)
class CharacteristicMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'CharacteristicMatrix':
        return cls(complex(array[0, 0]), complex(array[0, 1]),
                   complex(array[1, 0]), complex(array[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    def determinant(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: 'CharacteristicMatrix') -> 'CharacteristicMatrix':
        return CharacteristicMatrix.from_array(self.as_array() @ other.as_array())


def _characteristic_arrays(index: ArrayLike, thickness: ArrayLike, wavelengths: ArrayLike) -> np.ndarray:
    """Broadcast layer matrices over index, thickness and wavelength arrays."""
    index, thickness, wavelengths = np.broadcast_arrays(
        np.asarray(index, dtype=float),
        np.asarray(thickness, dtype=float),
        np.asarray(wavelengths, dtype=float),
    )
    phase = 2.0 * np.pi * index * thickness / wavelengths
    cos_d = np.cos(phase)
    sin_d = np.sin(phase)
    matrices = np.empty(phase.shape + (2, 2), dtype=complex)
    matrices[..., 0, 0] = cos_d
    matrices[..., 0, 1] = 1j * sin_d / index
    matrices[..., 1, 0] = 1j * index * sin_d
    matrices[..., 1, 1] = cos_d
    return matrices


def _check_wavelengths(wavelengths: np.ndarray):
    if np.any(~np.isfinite(wavelengths)) or np.any(wavelengths <= 0):
        raise InvalidParameterError("Wavelengths must be positive and finite")


def layer_matrix(layer: Layer, wavelength: float) -> CharacteristicMatrix:
    _check_wavelengths(np.atleast_1d(wavelength))
    return CharacteristicMatrix.from_array(
        _characteristic_arrays(layer.refractive_index, layer.thickness, wavelength)
    )


def _stack_arrays(stack: LayerStack, wavelengths: np.ndarray) -> np.ndarray:
    total = np.broadcast_to(np.eye(2, dtype=complex), wavelengths.shape + (2, 2)).copy()
    for layer in stack.layers:
        total = total @ _characteristic_arrays(layer.refractive_index, layer.thickness, wavelengths)
    return total


def stack_matrix(stack: LayerStack, wavelength: float) -> CharacteristicMatrix:
    """Ordered product of the layer matrices, first layer on the left."""
    wavelengths = np.atleast_1d(np.asarray(wavelength, dtype=float))
    _check_wavelengths(wavelengths)
    return CharacteristicMatrix.from_array(_stack_arrays(stack, wavelengths)[0])


def _amplitudes(matrices: np.ndarray, ambient: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Amplitude reflection and transmission for equal ambient media."""
    b = matrices[..., 0, 0] + matrices[..., 0, 1] * ambient
    c = matrices[..., 1, 0] + matrices[..., 1, 1] * ambient
    denominator = ambient * b + c
    return (ambient * b - c) / denominator, 2.0 * ambient / denominator


def _as_output(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def stack_reflectivity(stack: LayerStack, wavelength: ArrayLike):
    """|r|^2 of the stack; a float for scalar input, an array otherwise."""
    scalar = np.ndim(wavelength) == 0
    wavelengths = np.atleast_1d(np.asarray(wavelength, dtype=float))
    _check_wavelengths(wavelengths)
    r, _ = _amplitudes(_stack_arrays(stack, wavelengths), stack.ambient_index)
    return _as_output(np.clip(np.abs(r) ** 2, 0.0, 1.0), scalar)


def stack_transmissivity(stack: LayerStack, wavelength: ArrayLike):
    scalar = np.ndim(wavelength) == 0
    wavelengths = np.atleast_1d(np.asarray(wavelength, dtype=float))
    _check_wavelengths(wavelengths)
    _, t = _amplitudes(_stack_arrays(stack, wavelengths), stack.ambient_index)
    return _as_output(np.abs(t) ** 2, scalar)


def stack_reflection_amplitude(stack: LayerStack, wavelength: float) -> complex:
    r, _ = _amplitudes(_stack_arrays(stack, np.atleast_1d(float(wavelength))), stack.ambient_index)
    return complex(r[0])


def periodic_reflectivity(unit_cell: LayerStack, repeats: int, wavelength: ArrayLike):
    """Reflectivity of ``repeats`` copies of ``unit_cell`` via matrix powers."""
    if repeats < 0:
        raise InvalidParameterError(f"Repeat count must be non-negative, got {repeats}")
    scalar = np.ndim(wavelength) == 0
    wavelengths = np.atleast_1d(np.asarray(wavelength, dtype=float))
    _check_wavelengths(wavelengths)
    cell = _stack_arrays(unit_cell, wavelengths)
    r, _ = _amplitudes(np.linalg.matrix_power(cell, int(repeats)), unit_cell.ambient_index)
    return _as_output(np.clip(np.abs(r) ** 2, 0.0, 1.0), scalar)


def quarter_wave_stack(n_b: float, n_d: int, wavelength: float,
                       thickness_mode: str = 'optical') -> LayerStack:
    """
    ``n_d`` pairs of (index n_b, vacuum) layers. In 'optical' mode the
    dense layer is an optical quarter wave, lambda / (4 n_b); in
    'geometric' mode it is lambda / 4 thick.
    """
    if thickness_mode not in THICKNESS_MODES:
        raise InvalidParameterError(f"Unknown thickness mode {thickness_mode!r}")
    dense = wavelength / (4.0 * n_b) if thickness_mode == 'optical' else wavelength / 4.0
    cell = (Layer(n_b, dense), Layer(1.0, wavelength / 4.0))
    return LayerStack(cell * int(n_d))


def closed_form_reflectivity(n_b: float, n_d: int) -> float:
    """((n^2N - 1) / (n^2N + 1))^2 evaluated as tanh^2(N ln n)."""
    if n_b <= 0:
        raise InvalidParameterError(f"Index must be positive, got {n_b}")
    if n_d < 1:
        raise InvalidParameterError(f"Disk count must be >= 1, got {n_d}")
    return float(np.tanh(n_d * np.log(n_b)) ** 2)


def stopband_width(n_b: float, frequency: float) -> float:
    """Full width (4 nu / pi) arcsin(|n - 1| / (n + 1)) of the reflection band."""
    if n_b <= 0:
        raise InvalidParameterError(f"Index must be positive, got {n_b}")
    return float(4.0 * frequency / np.pi * np.arcsin(abs(n_b - 1.0) / (n_b + 1.0)))


def stopband_width_small_index(n_b: float, frequency: float) -> float:
    return float(2.0 * frequency / np.pi * abs(n_b - 1.0))


def measured_stopband_width(n_b: float, disk_count: int, design_wavelength: float,
                            points: int = 4001, span: float = 1.5) -> float:
    """
    Width in Hz of the contiguous R > 1/2 band around the design frequency
    of an optical quarter-wave stack, with linearly interpolated edges.
    """
    nu_0 = constants.c / design_wavelength
    predicted = stopband_width(n_b, nu_0)
    if predicted == 0.0:
        return 0.0
    # odd, so nu_0 sits on the grid
    points = points + 1 - points % 2
    frequencies = nu_0 + np.linspace(-span * predicted, span * predicted, points)
    cell = quarter_wave_stack(n_b, 1, design_wavelength)
    reflectivity = periodic_reflectivity(cell, disk_count, constants.c / frequencies)

    centre = points // 2
    if reflectivity[centre] <= 0.5:
        return 0.0
    left = centre
    while left > 0 and reflectivity[left - 1] > 0.5:
        left -= 1
    right = centre
    while right < points - 1 and reflectivity[right + 1] > 0.5:
        right += 1
    if left == 0 or right == points - 1:
        raise InvalidParameterError("Reflection band extends past the scanned span")

    def crossing(inside: int, outside: int) -> float:
        r_in, r_out = reflectivity[inside], reflectivity[outside]
        fraction = (r_in - 0.5) / (r_in - r_out)
        return frequencies[inside] + fraction * (frequencies[outside] - frequencies[inside])

    return float(crossing(right, right + 1) - crossing(left, left - 1))


@dataclass(frozen=True)
class ReflectivitySpectrum:
    """
    Reflectivity versus detuning. Masked points carry NaN for epsilon and
    reflectivity; ``masked_region`` is the excluded detuning interval.
    """
    detunings: np.ndarray
    wavelengths: np.ndarray
    epsilon: np.ndarray
    reflectivity: np.ndarray
    masked: np.ndarray
    masked_region: Optional[Tuple[float, float]] = None

    def __len__(self):
        return len(self.detunings)


def _spectrum_chunk(detunings: np.ndarray, species: AtomicSpecies, rescaled: float,
                    geometry: DiskLatticeGeometry, cutoff: float,
                    thickness_mode: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    masked = np.abs(detunings) < cutoff
    epsilon = np.full(detunings.shape, np.nan)
    reflectivity = np.full(detunings.shape, np.nan)
    live = ~masked
    if np.any(live):
        epsilon[live] = dispersive_epsilon(species, rescaled, detunings[live], cutoff)
        opaque = live & (1.0 + epsilon <= 0.0)
        if np.any(opaque):
            logger.warning("%d scan points have a non-positive index and are masked", int(opaque.sum()))
            masked |= opaque
            epsilon[opaque] = np.nan
            live &= ~opaque
    if np.any(live):
        n_b = 1.0 + epsilon[live]
        dense = geometry.disk_thickness / n_b if thickness_mode == 'optical' else geometry.disk_thickness
        wavelengths = detuning_to_wavelength(species, detunings[live])
        cell = (
            _characteristic_arrays(n_b, dense, wavelengths)
            @ _characteristic_arrays(1.0, geometry.gap, wavelengths)
        )
        # vacuum on both sides
        r, _ = _amplitudes(np.linalg.matrix_power(cell, geometry.disk_count))
        reflectivity[live] = np.clip(np.abs(r) ** 2, 0.0, 1.0)
    return epsilon, reflectivity, masked


def reflectivity_spectrum(species: AtomicSpecies,
                          sample: CondensateSample,
                          geometry: DiskLatticeGeometry,
                          detunings: ArrayLike,
                          cutoff: Optional[float] = None,
                          thickness_mode: str = 'optical',
                          threads: int = 1,
                          chunk_size: Optional[int] = None) -> ReflectivitySpectrum:
    """
    Fully dispersive reflectivity scan of the disk lattice. Each point uses
    epsilon at its own detuning and is evaluated at its own wavelength.
    Points within ``cutoff`` of resonance are masked, not computed.
    Results do not depend on ``threads``.
    """
    if thickness_mode not in THICKNESS_MODES:
        raise InvalidParameterError(f"Unknown thickness mode {thickness_mode!r}")
    detunings = np.atleast_1d(np.asarray(detunings, dtype=float))
    if np.any(np.diff(detunings) < 0):
        raise InvalidParameterError("Detuning grid must be sorted")
    if cutoff is None:
        cutoff = species.resonance_cutoff()
    if chunk_size is None:
        chunk_size = sim_setting('SPECTRUM_CHUNK')
    rescaled = rescaled_density(species.resonance_wavelength, sample.number_density)

    starts = range(0, len(detunings), chunk_size)
    chunks = [detunings[start:start + chunk_size] for start in starts]

    def run(chunk):
        return _spectrum_chunk(chunk, species, rescaled, geometry, cutoff, thickness_mode)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(chunk) for chunk in chunks]

    if results:
        epsilon, reflectivity, masked = (np.concatenate(parts) for parts in zip(*results))
    else:
        epsilon = reflectivity = np.empty(0)
        masked = np.empty(0, dtype=bool)
    logger.info(
        "Spectrum of %d points: %d masked, N = %.4g", len(detunings), int(masked.sum()), rescaled,
    )
    return ReflectivitySpectrum(
        detunings=detunings,
        wavelengths=detuning_to_wavelength(species, detunings),
        epsilon=epsilon,
        reflectivity=reflectivity,
        masked=masked,
        masked_region=(-cutoff, cutoff),
    )


def reflective_band(spectrum: ReflectivitySpectrum, threshold: float) -> List[Tuple[float, float]]:
    """Contiguous (first, last) detunings whose unmasked reflectivity exceeds ``threshold``."""
    above = ~spectrum.masked & (np.nan_to_num(spectrum.reflectivity, nan=0.0) > threshold)
    if not np.any(above):
        return []
    edges = np.diff(np.concatenate(([0], above.astype(int), [0])))
    begins = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [(float(spectrum.detunings[b]), float(spectrum.detunings[e])) for b, e in zip(begins, ends)]


def graded_stack_from_profile(profile: DensityProfile,
                              species: AtomicSpecies,
                              wavelength: float,
                              sublayers_per_period: int,
                              periods: int,
                              cutoff: Optional[float] = None) -> LayerStack:
    """
    Staircase discretisation of a density profile: each period is cut into
    ``sublayers_per_period`` slabs whose index is 1 + epsilon at the
    midpoint density, for light at ``wavelength``.
    """
    if sublayers_per_period < 2:
        raise InvalidParameterError(f"Need at least 2 sublayers per period, got {sublayers_per_period}")
    if periods < 1:
        raise InvalidParameterError(f"Need at least one period, got {periods}")
    width = profile.period / sublayers_per_period
    midpoints = (np.arange(sublayers_per_period) + 0.5) * width
    densities = profile.density_at(midpoints)
    detuning = float(wavelength_to_detuning(species, wavelength))
    rescaled = rescaled_density(species.resonance_wavelength, densities)
    epsilon = np.atleast_1d(dispersive_epsilon(species, rescaled, detuning, cutoff))
    cell = LayerStack(tuple(Layer(1.0 + eps, width) for eps in epsilon))
    return cell.repeated(periods)
