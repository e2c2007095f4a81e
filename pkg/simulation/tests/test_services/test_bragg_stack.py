# tests/test_services/test_bragg_stack.py
import numpy as np
from scipy import constants

from ..test_base import BaseTestCase
from ...exceptions import InvalidParameterError
from ...services.atom_optics import (
    RUBIDIUM_87,
    CondensateSample,
    DensityProfile,
    detuning_to_wavelength,
    dispersive_epsilon,
    quarter_wave_geometry,
    rescaled_density,
)
from ...services.bragg_stack import (
    Layer,
    LayerStack,
    closed_form_reflectivity,
    graded_stack_from_profile,
    layer_matrix,
    measured_stopband_width,
    periodic_reflectivity,
    quarter_wave_stack,
    reflective_band,
    reflectivity_spectrum,
    stack_matrix,
    stack_reflection_amplitude,
    stack_reflectivity,
    stack_transmissivity,
    stopband_width,
    stopband_width_small_index,
)

WAVELENGTH = 795e-9


def random_stack(rng, layers, max_index=2.5):
    indices = rng.uniform(1.0, max_index, layers)
    thicknesses = rng.uniform(10e-9, 400e-9, layers)
    return LayerStack(tuple(Layer(n, d) for n, d in zip(indices, thicknesses)))


class TestLayerMatrices(BaseTestCase):
    def test_zero_thickness_is_identity(self):
        """Test a zero-thickness layer has the identity matrix"""
        matrix = layer_matrix(Layer(1.7, 0.0), WAVELENGTH)
        np.testing.assert_allclose(matrix.as_array(), np.eye(2), atol=1e-15)

    def test_quarter_wave_layer(self):
        """Test an optical quarter wave has zero diagonal"""
        matrix = layer_matrix(Layer(1.5, WAVELENGTH / 6), WAVELENGTH)
        self.assertAlmostEqual(abs(matrix.m11), 0.0, places=15)
        self.assertAlmostEqual(abs(matrix.m22), 0.0, places=15)
        self.assertAlmostEqual(abs(matrix.determinant() - 1), 0.0, places=15)

    def test_unimodular_long_stack(self):
        """Test det M = 1 for a thousand random dilute-gas layers"""
        stack = random_stack(np.random.default_rng(7), 1000, max_index=1.05)
        self.assertLess(abs(stack_matrix(stack, WAVELENGTH).determinant() - 1), 1e-10)

    def test_unimodular_high_contrast_stack(self):
        """Test det M = 1 to rounding of the entries for high-contrast layers"""
        matrix = stack_matrix(random_stack(np.random.default_rng(7), 1000), WAVELENGTH)
        scale = max(1.0, np.max(np.abs(matrix.as_array())) ** 2)
        self.assertLess(abs(matrix.determinant() - 1), 1e-10 * scale)

    def test_matrix_product_order(self):
        """Test the stack matrix is the ordered product of its layers"""
        a, b = Layer(1.3, 120e-9), Layer(2.1, 80e-9)
        product = layer_matrix(a, WAVELENGTH) @ layer_matrix(b, WAVELENGTH)
        np.testing.assert_allclose(stack_matrix(LayerStack((a, b)), WAVELENGTH).as_array(),
                                   product.as_array(), atol=1e-14)

    def test_invalid_layers(self):
        """Test invalid indices, thicknesses and wavelengths are rejected"""
        with self.assertRaises(InvalidParameterError):
            Layer(0.0, 1e-7)
        with self.assertRaises(InvalidParameterError):
            Layer(1.2, -1e-9)
        with self.assertRaises(InvalidParameterError):
            stack_reflectivity(LayerStack((Layer(1.2, 1e-7),)), -1.0)


class TestStackReflectivity(BaseTestCase):
    def test_empty_stack(self):
        """Test an empty stack does not reflect"""
        self.assertEqual(stack_reflectivity(LayerStack(()), WAVELENGTH), 0.0)

    def test_vacuum_layer_is_invisible(self):
        """Test an index-1 layer changes nothing"""
        stack = quarter_wave_stack(1.05, 20, WAVELENGTH)
        padded = LayerStack((Layer(1.0, 333e-9),)) + stack + LayerStack((Layer(1.0, 71e-9),))
        self.assertAlmostEqual(stack_reflectivity(padded, WAVELENGTH),
                               stack_reflectivity(stack, WAVELENGTH), places=12)

    def test_half_wave_slab(self):
        """Test an absentee half-wave layer does not reflect"""
        slab = LayerStack((Layer(1.5, WAVELENGTH / 3),))
        self.assertAlmostEqual(stack_reflectivity(slab, WAVELENGTH), 0.0, places=12)

    def test_energy_conservation(self):
        """Test R + T = 1 for lossless random stacks"""
        rng = np.random.default_rng(11)
        wavelengths = np.linspace(500e-9, 1100e-9, 25)
        for _ in range(5):
            stack = random_stack(rng, 40)
            total = stack_reflectivity(stack, wavelengths) + stack_transmissivity(stack, wavelengths)
            np.testing.assert_allclose(total, 1.0, atol=1e-9)

    def test_reciprocity(self):
        """Test |r| is the same from both sides"""
        stack = random_stack(np.random.default_rng(3), 60)
        forward = abs(stack_reflection_amplitude(stack, WAVELENGTH))
        backward = abs(stack_reflection_amplitude(stack.reversed(), WAVELENGTH))
        self.assertAlmostEqual(forward, backward, delta=1e-10)

    def test_scalar_and_array_inputs(self):
        """Test scalar wavelengths give floats and arrays give arrays"""
        stack = quarter_wave_stack(1.1, 5, WAVELENGTH)
        self.assertIsInstance(stack_reflectivity(stack, WAVELENGTH), float)
        self.assertEqual(stack_reflectivity(stack, np.array([WAVELENGTH, 800e-9])).shape, (2,))

    def test_periodic_matches_sequential(self):
        """Test matrix powers equal the explicit layer product"""
        cell = LayerStack((Layer(1.2, 150e-9), Layer(1.0, 210e-9)))
        wavelengths = np.linspace(600e-9, 1000e-9, 11)
        np.testing.assert_allclose(periodic_reflectivity(cell, 40, wavelengths),
                                   stack_reflectivity(cell.repeated(40), wavelengths), atol=1e-12)


class TestQuarterWaveStack(BaseTestCase):
    def test_closed_form_agreement(self):
        """Test transfer matrices against tanh^2(N ln n) on random stacks"""
        rng = np.random.default_rng(20240601)
        for _ in range(50):
            n_b = rng.uniform(1.0001, 1.1)
            n_d = int(rng.integers(1, 301))
            stack = quarter_wave_stack(n_b, n_d, WAVELENGTH)
            self.assertAlmostEqual(stack_reflectivity(stack, WAVELENGTH),
                                   closed_form_reflectivity(n_b, n_d), delta=1e-10,
                                   msg=f"n_b={n_b} n_d={n_d}")

    def test_closed_form_values(self):
        """Test reference points of the closed form"""
        self.assertEqual(closed_form_reflectivity(1.0, 100), 0.0)
        self.assertAlmostEqual(closed_form_reflectivity(1.028, 150), 0.99899, places=5)
        weak = closed_form_reflectivity(1 + 1e-4, 100)
        self.assertAlmostEqual(weak / 1e-4, 1.0, delta=0.01)

    def test_monotone_in_disk_count(self):
        """Test reflectivity grows with every added disk"""
        values = [stack_reflectivity(quarter_wave_stack(1.02, n, WAVELENGTH), WAVELENGTH)
                  for n in range(1, 61)]
        self.assertTrue(np.all(np.diff(values) > 0))

    def test_geometric_thickness_detunes_band(self):
        """Test lambda/4 geometric disks reflect less at the design wavelength"""
        optical = quarter_wave_stack(1.05, 40, WAVELENGTH)
        geometric = quarter_wave_stack(1.05, 40, WAVELENGTH, thickness_mode='geometric')
        self.assertAlmostEqual(geometric.thicknesses[0], WAVELENGTH / 4, delta=1e-20)
        self.assertLess(stack_reflectivity(geometric, WAVELENGTH), stack_reflectivity(optical, WAVELENGTH))
        with self.assertRaises(InvalidParameterError):
            quarter_wave_stack(1.05, 4, WAVELENGTH, thickness_mode='physical')

    def test_invalid_closed_form(self):
        """Test non-physical inputs are rejected"""
        with self.assertRaises(InvalidParameterError):
            closed_form_reflectivity(-1.0, 10)
        with self.assertRaises(InvalidParameterError):
            closed_form_reflectivity(1.1, 0)


class TestStopband(BaseTestCase):
    def test_formulas(self):
        """Test the stopband formula and its small-index limit"""
        frequency = constants.c / WAVELENGTH
        self.assertEqual(stopband_width(1.0, frequency), 0.0)
        exact = stopband_width(1 + 1e-6, frequency)
        self.assertAlmostEqual(exact / stopband_width_small_index(1 + 1e-6, frequency), 1.0, delta=1e-6)

    def test_measured_width_matches_formula(self):
        """Test the R > 1/2 band of a long stack against the formula"""
        n_b = 1.005
        measured = measured_stopband_width(n_b, 3000, WAVELENGTH)
        predicted = stopband_width(n_b, constants.c / WAVELENGTH)
        self.assertLess(abs(measured - predicted) / predicted, 0.05)

    def test_weak_stack_has_no_band(self):
        """Test a stack that never reaches R = 1/2 has zero width"""
        self.assertEqual(measured_stopband_width(1.001, 10, WAVELENGTH), 0.0)


class TestReflectivitySpectrum(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.sample = CondensateSample(1e20, 500, 5e-6, 200e-9, 1e-6)
        self.geometry = quarter_wave_geometry(WAVELENGTH, 150)

    def test_red_plateau(self):
        """Test a finite R > 0.99 band just outside the resonance mask"""
        detunings = np.linspace(0.0, 1e9, 100001)
        spectrum = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings)
        bands = reflective_band(spectrum, 0.99)
        self.assertEqual(len(bands), 1)
        start, stop = bands[0]
        self.assertAlmostEqual(start, 6e7, delta=1e4)
        self.assertAlmostEqual(stop, 284.17e6, delta=0.5e6)
        self.assertLess(spectrum.reflectivity[-1], 0.5)

    def test_blue_plateau(self):
        """Test blue detuning also shows a reflecting band"""
        detunings = np.linspace(-1e9, 0.0, 20001)
        spectrum = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings)
        bands = reflective_band(spectrum, 0.99)
        self.assertEqual(len(bands), 1)
        self.assertLess(bands[0][0], -2.8e8)
        self.assertAlmostEqual(bands[0][1], -6e7, delta=1e5)

    def test_masked_region(self):
        """Test near-resonance points are flagged and not computed"""
        detunings = np.linspace(-2e8, 2e8, 401)
        spectrum = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings)
        inside = np.abs(detunings) < 6e7
        np.testing.assert_array_equal(spectrum.masked, inside)
        self.assertTrue(np.all(np.isnan(spectrum.reflectivity[inside])))
        self.assertFalse(np.any(np.isnan(spectrum.reflectivity[~inside])))
        self.assertEqual(spectrum.masked_region, (-6e7, 6e7))

    def test_far_wings_transparent(self):
        """Test reflectivity vanishes beyond a terahertz"""
        detunings = np.array([-2e12, -1.5e12, -1e12, 1e12, 1.5e12, 2e12])
        spectrum = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings)
        self.assertTrue(np.all(spectrum.reflectivity < 1e-6))

    def test_bounded_and_thread_independent(self):
        """Test a large scan stays in [0, 1] and does not depend on threads"""
        detunings = np.linspace(-1e11, 1e11, 200000)
        single = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings,
                                       chunk_size=30000)
        threaded = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, detunings,
                                         threads=4, chunk_size=30000)
        np.testing.assert_array_equal(single.reflectivity, threaded.reflectivity)
        live = single.reflectivity[~single.masked]
        self.assertGreaterEqual(live.min(), 0.0)
        self.assertLessEqual(live.max(), 1.0)

    def test_matches_quarter_wave_stack(self):
        """Test a scan point against an explicit stack at its own wavelength"""
        detuning = 5e8
        spectrum = reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, np.array([detuning]))
        epsilon = dispersive_epsilon(RUBIDIUM_87, rescaled_density(WAVELENGTH, 1e20), detuning)
        n_b = 1 + epsilon
        stack = LayerStack(
            (Layer(n_b, self.geometry.disk_thickness / n_b), Layer(1.0, self.geometry.gap))
        ).repeated(150)
        expected = stack_reflectivity(stack, detuning_to_wavelength(RUBIDIUM_87, detuning))
        self.assertAlmostEqual(spectrum.reflectivity[0], expected, delta=1e-10)

    def test_unsorted_grid(self):
        """Test unsorted detunings are rejected"""
        with self.assertRaises(InvalidParameterError):
            reflectivity_spectrum(RUBIDIUM_87, self.sample, self.geometry, np.array([1e9, -1e9]))


class TestGradedStack(BaseTestCase):
    def setUp(self):
        super().setUp()
        self.period = WAVELENGTH / 2
        self.wavelength = float(detuning_to_wavelength(RUBIDIUM_87, 1e9))

    def test_top_hat_matches_two_level_stack(self):
        """Test a half-filled top hat equals the geometric quarter-wave stack"""
        peak = 1e20
        profile = DensityProfile.top_hat(peak, self.period)
        graded = graded_stack_from_profile(profile, RUBIDIUM_87, self.wavelength, 8, 100)
        epsilon = dispersive_epsilon(RUBIDIUM_87, rescaled_density(WAVELENGTH, peak), 1e9)
        two_level = quarter_wave_stack(1 + epsilon, 100, WAVELENGTH, thickness_mode='geometric')
        self.assertAlmostEqual(stack_reflectivity(graded, self.wavelength),
                               stack_reflectivity(two_level, self.wavelength), delta=1e-9)

    def test_zero_density_is_transparent(self):
        """Test an empty lattice does not reflect"""
        profile = DensityProfile.top_hat(0.0, self.period)
        graded = graded_stack_from_profile(profile, RUBIDIUM_87, self.wavelength, 8, 20)
        self.assertAlmostEqual(stack_reflectivity(graded, self.wavelength), 0.0, places=12)

    def test_refinement_converges(self):
        """Test successive sublayer refinements change R less and less"""
        profile = DensityProfile.sinusoidal(1.746e18, self.period)
        values = [
            stack_reflectivity(
                graded_stack_from_profile(profile, RUBIDIUM_87, self.wavelength, sublayers, 50),
                self.wavelength,
            )
            for sublayers in (4, 8, 16, 32, 64)
        ]
        changes = np.abs(np.diff(values))
        self.assertTrue(np.all(np.diff(changes) < 0))
        self.assertLess(changes[-1], 1e-6)

    def test_invalid_discretisation(self):
        """Test too few sublayers or periods are rejected"""
        profile = DensityProfile.top_hat(1e20, self.period)
        with self.assertRaises(InvalidParameterError):
            graded_stack_from_profile(profile, RUBIDIUM_87, self.wavelength, 1, 10)
        with self.assertRaises(InvalidParameterError):
            graded_stack_from_profile(profile, RUBIDIUM_87, self.wavelength, 8, 0)
