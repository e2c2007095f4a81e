from typing import Dict, List

import numpy as np

from ..conf import sim_setting
from ..exceptions import SimulationError, TruncationInfeasibleError
from .atom_optics import dispersive_epsilon, rescaled_density
from .bragg_stack import (
    closed_form_reflectivity,
    quarter_wave_stack,
    reflectivity_spectrum,
    stack_matrix,
    stack_reflection_amplitude,
    stack_reflectivity,
    stack_transmissivity,
)
from .experiment import active_photons, displacement_fringe
from .fock_opa import (
    fringe_curve,
    gain_params,
    macro_amplitudes,
    moments_from_amplitudes,
    total_photons,
    visibility,
)
from .oracle import macro_state, oracle_equivalence, overlap, recommended_cutoff
from .scenario import ScenarioConfig

ORACLE_TOLERANCE = 1e-6
ORTHOGONALITY_TOLERANCE = 1e-8
MOMENT_TOLERANCE = 1e-6
FRINGE_SUM_TOLERANCE = 1e-9
MATRIX_TOLERANCE = 1e-10


def _result(errors: List[str], warnings: List[str], checks: List[str]) -> Dict:
    return {
        'isValid': len(errors) == 0,
        'errors': errors,
        'warnings': warnings,
        'checks': checks,
    }


class ScenarioValidator:
    """
    Runs the invariant suites of every service on one scenario.
    Each suite returns {'isValid', 'errors', 'warnings', 'checks'}.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.params = gain_params(config.gain)

    def validate_photon_statistics(self) -> Dict:
        """Closed-form fringe sum and visibility bounds"""
        errors, warnings, checks = [], [], []
        total = total_photons(self.params)
        curve = fringe_curve(self.params, self.config.phases())
        drift = float(np.max(np.abs(curve.n_plus + curve.n_minus - total))) if len(curve) else 0.0
        checks.append(f"fringe sum drift {drift:.3e} (4m+1 = {total:.6g})")
        if drift > FRINGE_SUM_TOLERANCE * total:
            errors.append(f"Fringe sum deviates from 4m+1 by {drift:.3e}")

        vis = visibility(self.params)
        checks.append(f"visibility {vis:.12g}")
        if not 0.5 < vis <= 1.0:
            errors.append(f"Visibility {vis} outside (1/2, 1]")
        if visibility(gain_params(0.0)) != 1.0:
            errors.append("Visibility at zero gain is not exactly 1")
        if self.config.degradation < 1.0:
            degraded = fringe_curve(self.params, self.config.phases(), self.config.degradation)
            checks.append(f"degraded contrast {degraded.contrast():.12g}")
        return _result(errors, warnings, checks)

    def validate_amplitudes(self) -> Dict:
        """Truncated macro-state table: normalisation, moments, selection rule"""
        errors, warnings, checks = [], [], []
        if not self.config.enumerate_amplitudes:
            warnings.append("Amplitude enumeration disabled; closed forms only")
            return _result(errors, warnings, checks)
        tolerance = self.config.tail_tolerance
        try:
            amps = macro_amplitudes(self.params, tolerance)
        except TruncationInfeasibleError as exc:
            errors.append(f"Truncation infeasible: {exc}")
            return _result(errors, warnings, checks)

        checks.append(f"captured norm {amps.captured_norm:.15f} (i_max={amps.i_max}, j_max={amps.j_max})")
        if amps.captured_norm < 1.0 - tolerance:
            errors.append(f"Captured norm {amps.captured_norm} below 1 - {tolerance}")

        n_aligned, n_orthogonal = moments_from_amplitudes(amps)
        expected_aligned = 3.0 * self.params.m_bar + 1.0
        deviation = max(abs(n_aligned - expected_aligned), abs(n_orthogonal - self.params.m_bar))
        checks.append(f"moments ({n_aligned:.12g}, {n_orthogonal:.12g}), deviation {deviation:.3e}")
        if deviation > MOMENT_TOLERANCE * expected_aligned:
            errors.append(f"Moments deviate from (3m+1, m) by {deviation:.3e}")

        aligned_n, orthogonal_n = amps.photon_counts()
        if np.any(aligned_n % 2 != 1) or np.any(orthogonal_n % 2 != 0):
            errors.append("Stored kets violate the odd/even photon-number structure")
        return _result(errors, warnings, checks)

    def validate_oracle(self) -> Dict:
        """Brute-force evolution against the closed-form table"""
        errors, warnings, checks = [], [], []
        if not self.config.enumerate_amplitudes:
            warnings.append("Oracle comparison skipped with amplitude enumeration disabled")
            return _result(errors, warnings, checks)
        if self.params.g > sim_setting('AMPLITUDE_GAIN_CAP'):
            errors.append(f"Oracle comparison not possible at g = {self.params.g}: truncation infeasible")
            return _result(errors, warnings, checks)

        n_max = self.config.oracle_n_max
        if n_max < recommended_cutoff(self.params.m_bar):
            warnings.append(
                f"Cutoff n_max={n_max} below the recommended {recommended_cutoff(self.params.m_bar)}"
            )
        try:
            comparison = oracle_equivalence(self.params.g, n_max, self.config.tail_tolerance)
            plus = macro_state(self.params.g, 1, n_max)
            minus = macro_state(self.params.g, -1, n_max)
        except SimulationError as exc:
            errors.append(f"Oracle evolution failed: {exc}")
            return _result(errors, warnings, checks)

        checks.append(f"max amplitude deviation {comparison.max_deviation:.3e}")
        checks.append(f"selection-rule residual {comparison.selection_residual:.3e}")
        checks.append(f"cutoff leakage {comparison.leakage:.3e}")
        if comparison.max_deviation > ORACLE_TOLERANCE:
            errors.append(f"Evolved state deviates from the table by {comparison.max_deviation:.3e}")
        if comparison.selection_residual > ORACLE_TOLERANCE:
            errors.append(f"Evolved state has {comparison.selection_residual:.3e} outside odd/even kets")

        cross = abs(overlap(plus, minus))
        checks.append(f"|<Phi+|Phi->| = {cross:.3e}")
        if cross > ORTHOGONALITY_TOLERANCE:
            errors.append(f"Macro-states are not orthogonal: overlap {cross:.3e}")
        return _result(errors, warnings, checks)

    def validate_bragg_stack(self) -> Dict:
        """Transfer matrices at the operating detuning and over the scan"""
        errors, warnings, checks = [], [], []
        config = self.config
        species = config.species
        rescaled = rescaled_density(species.resonance_wavelength, config.sample.number_density)
        try:
            epsilon = dispersive_epsilon(species, rescaled, config.operating_detuning, config.cutoff)
        except SimulationError as exc:
            errors.append(f"Operating detuning unusable: {exc}")
            return _result(errors, warnings, checks)
        n_b = 1.0 + epsilon
        if n_b <= 0:
            errors.append(f"Non-positive index {n_b} at the operating detuning")
            return _result(errors, warnings, checks)

        wavelength = species.resonance_wavelength
        stack = quarter_wave_stack(n_b, config.disk_count, wavelength)
        determinant = stack_matrix(stack, wavelength).determinant()
        checks.append(f"|det M - 1| = {abs(determinant - 1):.3e} over {len(stack)} layers")
        if abs(determinant - 1) > MATRIX_TOLERANCE * max(1.0, len(stack) / 1000.0):
            errors.append(f"Stack matrix not unimodular: det = {determinant}")

        reflectivity = stack_reflectivity(stack, wavelength)
        closed = closed_form_reflectivity(n_b, config.disk_count)
        checks.append(f"R = {reflectivity:.12g} vs closed form {closed:.12g}")
        if abs(reflectivity - closed) > MATRIX_TOLERANCE:
            errors.append(f"Transfer matrix and closed form differ by {abs(reflectivity - closed):.3e}")

        energy = reflectivity + stack_transmissivity(stack, wavelength)
        if abs(energy - 1.0) > 1e-9:
            errors.append(f"R + T = {energy} for a lossless stack")
        forward = abs(stack_reflection_amplitude(stack, wavelength * 1.0001))
        backward = abs(stack_reflection_amplitude(stack.reversed(), wavelength * 1.0001))
        if abs(forward - backward) > MATRIX_TOLERANCE:
            errors.append(f"Reciprocity violated: |r| {forward} vs {backward}")

        spectrum = reflectivity_spectrum(
            species, config.sample, config.geometry, config.detunings(),
            cutoff=config.cutoff, thickness_mode=config.thickness_mode,
        )
        live = spectrum.reflectivity[~spectrum.masked]
        checks.append(f"spectrum: {len(spectrum)} points, {int(spectrum.masked.sum())} masked")
        if live.size and (np.nanmin(live) < 0 or np.nanmax(live) > 1):
            errors.append("Spectrum reflectivity outside [0, 1]")
        if not config.geometry.typical_thickness:
            warnings.append(f"Disk thickness {config.geometry.disk_thickness:.4g} m outside 80 - 300 nm")
        return _result(errors, warnings, checks)

    def validate_experiment(self) -> Dict:
        """Photon budget bookkeeping and validity flags"""
        errors, warnings, checks = [], [], []
        config = self.config
        kick = config.kick_config()
        fringe = displacement_fringe(kick, config.phases(), config.expansion_speed)
        photons = total_photons(self.params)
        active = active_photons(photons, kick.stopband, kick.source_bandwidth)
        checks.append(f"active fraction {active.fraction:.6g}, displacement amplitude {fringe.amplitude:.6g} m")
        if active.count > photons:
            errors.append("More active photons than photons")
        if active.clamped:
            warnings.append("Stopband wider than the source bandwidth; fraction clamped to 1")
        if not fringe.scattering.valid:
            warnings.append(
                f"Scattering probability {fringe.scattering.raw:.4g} >= 1: incoherent-loss regime"
            )
        timing = fringe.timing
        checks.append(
            f"survival {timing.survival_time:.4g} s, exposure {timing.exposure_time:.4g} s, "
            f"flight {timing.flight_time:.4g} s"
        )
        if not timing.exposure_fits:
            warnings.append("Pulse train outlasts the lattice survival time")
        if not timing.flight_fits:
            warnings.append(
                f"Flight time exceeds the lattice survival time by {-timing.flight_margin:.4g} s"
            )
        warnings.extend(config.sample.typical_range_warnings(config.disk_count))
        return _result(errors, warnings, checks)

    def validate_all(self) -> Dict:
        sections = {
            'photon statistics': self.validate_photon_statistics(),
            'amplitudes': self.validate_amplitudes(),
            'oracle': self.validate_oracle(),
            'bragg stack': self.validate_bragg_stack(),
            'experiment': self.validate_experiment(),
        }
        return {
            'isValid': all(result['isValid'] for result in sections.values()),
            'sections': sections,
        }
