# tests/test_services/test_scenario.py
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import override_settings

from ..test_base import BaseTestCase
from ..utils_data import DEFAULT_SECTIONS, scenario_text
from ...exceptions import ScenarioConfigError
from ...services.atom_optics import RUBIDIUM_87
from ...services.scenario import load_scenario, locate_line, parse_scenario

SCENARIO_DIR = Path(settings.BASE_DIR) / 'scenarios'


class TestParseScenario(BaseTestCase):
    def test_empty_text_uses_defaults(self):
        """Test every section and key has a default"""
        config = parse_scenario('')
        self.assertEqual(config.gain, 1.0)
        self.assertEqual(config.degradation, 1.0)
        self.assertEqual(config.species, RUBIDIUM_87)
        self.assertEqual(config.disk_count, 150)
        self.assertEqual(config.thickness_mode, 'optical')
        self.assertEqual(config.cutoff, 6e7)
        self.assertAlmostEqual(config.expansion_speed, 1e-3, places=15)
        self.assertIsNone(config.pulse_spacing)
        self.assertTrue(config.enumerate_amplitudes)

    def test_unit_conversion(self):
        """Test unit-suffixed values arrive in SI units"""
        config = self.default_config
        self.assertAlmostEqual(config.sample.number_density, 1e20, delta=1e6)
        self.assertAlmostEqual(config.sample.transverse_radius, 5e-6, delta=1e-18)
        self.assertAlmostEqual(config.flight_time, 40e-6, delta=1e-18)
        self.assertAlmostEqual(config.source_bandwidth, 700e9, delta=1e-3)
        self.assertAlmostEqual(config.detuning_start, -2e9, delta=1e-6)

    def test_grids(self):
        """Test phase and detuning grids"""
        config = self.default_config
        phases = config.phases()
        self.assertEqual(len(phases), 72)
        self.assertEqual(phases[0], 0.0)
        self.assertLess(phases[-1], 2 * np.pi)
        detunings = config.detunings()
        self.assertEqual(len(detunings), 401)
        self.assertEqual(detunings[0], -2e9)
        self.assertEqual(detunings[-1], 2e9)

    def test_custom_species(self):
        """Test a fully specified custom species"""
        text = scenario_text(DEFAULT_SECTIONS, {'species': {
            'preset': 'custom', 'linewidth_mhz': '5.2', 'resonance_wavelength_nm': '780',
            'scattering_length_nm': '5.3', 'mass_amu': '85',
        }})
        species = parse_scenario(text).species
        self.assertEqual(species.name, 'custom')
        self.assertAlmostEqual(species.linewidth_gamma, 5.2e6, delta=1e-6)
        self.assertAlmostEqual(species.resonance_wavelength, 780e-9, delta=1e-20)

    def test_preset_override(self):
        """Test a preset property can be overridden"""
        text = scenario_text(DEFAULT_SECTIONS, {'species': {'linewidth_mhz': '5.75'}})
        species = parse_scenario(text).species
        self.assertAlmostEqual(species.linewidth_gamma, 5.75e6, delta=1e-6)
        self.assertEqual(species.resonance_wavelength, RUBIDIUM_87.resonance_wavelength)

    def test_experimental_degradation_preset(self):
        """Test degradation = experimental selects the measured visibility"""
        config = parse_scenario('[opa]\ngain = 2\ndegradation = Experimental\n')
        self.assertEqual(config.degradation, 0.13)
        with override_settings(SIMULATION={'EXPERIMENTAL_DEGRADATION': 0.2}):
            self.assertEqual(parse_scenario('[opa]\ndegradation = experimental\n').degradation, 0.2)
        self.assertEqual(self.default_config.degradation, 1.0)

    def test_kick_config(self):
        """Test the experiment configuration built from a scenario"""
        kick = self.default_config.kick_config()
        self.assertEqual(kick.repetitions, 10000)
        self.assertEqual(kick.geometry.disk_count, 150)
        self.assertAlmostEqual(kick.stopband, 2e9, delta=1e-6)


class TestScenarioErrors(BaseTestCase):
    def assertConfigError(self, text, line, fragment):
        with self.assertRaises(ScenarioConfigError) as context:
            parse_scenario(text)
        self.assertEqual(context.exception.line, line)
        self.assertIn(f'line {line}', str(context.exception))
        self.assertIn(fragment, str(context.exception))
        return context.exception

    def test_unknown_key(self):
        """Test unknown keys are rejected at their line"""
        self.assertConfigError('[opa]\ngain = 1\ngian = 2\n', 3, 'gian')

    def test_unknown_section(self):
        """Test unknown sections are rejected at the header"""
        self.assertConfigError('[opa]\ngain = 1\n\n[mirror]\nsize = 2\n', 4, 'mirror')

    def test_invalid_value(self):
        """Test non-numeric values are rejected at their line"""
        self.assertConfigError('[geometry]\ndisk_count = many\n', 2, 'disk_count')

    def test_out_of_range_values(self):
        """Test serializer range checks"""
        self.assertConfigError('[opa]\ndegradation = 0\n', 2, 'degradation')
        self.assertConfigError('[opa]\ngain = -1\n', 2, 'gain')
        self.assertConfigError('[scan]\ndetuning_start_ghz = 2\ndetuning_stop_ghz = 1\n', 3,
                               'detuning_stop_ghz')
        self.assertConfigError('[experiment]\noperating_detuning_ghz = 0\n', 2, 'operating_detuning_ghz')

    def test_non_finite_values(self):
        """Test nan and infinite values are rejected at their own key"""
        self.assertConfigError('[opa]\ngain = nan\n', 2, 'finite')
        self.assertConfigError('[sample]\natoms_per_disk = inf\n', 2, 'atoms_per_disk')
        self.assertConfigError('[experiment]\nflight_time_us = -inf\n', 2, 'finite')
        error = self.assertConfigError('[scan]\ndetuning_start_ghz = nan\ndetuning_stop_ghz = 1\n', 2,
                                       'detuning_start_ghz')
        self.assertNotIn('detuning_stop_ghz', str(error))
        self.assertConfigError('[validate]\ntail_tolerance = NaN\n', 2, 'tail_tolerance')

    def test_custom_species_requires_all(self):
        """Test a custom species missing properties is rejected"""
        self.assertConfigError('[species]\npreset = custom\nlinewidth_mhz = 6\n', 1, 'Required')

    def test_syntax_errors(self):
        """Test lines that are neither headers nor key/value pairs"""
        self.assertConfigError('[opa]\ngain = 1\nthis is not valid\n', 3, 'neither')
        self.assertConfigError('gain = 1\n[opa]\n', 1, 'outside')

    def test_duplicates(self):
        """Test duplicate keys and sections are rejected"""
        self.assertConfigError('[opa]\ngain = 1\ngain = 2\n', 3, 'gain')
        self.assertConfigError('[opa]\ngain = 1\n[opa]\n', 3, 'opa')

    def test_is_validation_error(self):
        """Test scenario errors are Django validation errors"""
        error = self.assertConfigError('[opa]\nbogus = 1\n', 2, 'bogus')
        self.assertIsInstance(error, ValidationError)

    def test_missing_file(self):
        """Test an unreadable path is a configuration error"""
        with self.assertRaises(ScenarioConfigError):
            load_scenario(Path(self.tmpdir) / 'missing.ini')


class TestBundledScenarios(BaseTestCase):
    def test_default(self):
        """Test the bundled default scenario"""
        config = load_scenario(SCENARIO_DIR / 'default.ini')
        self.assertEqual(config.gain, 1.0)
        self.assertEqual(config.scan_points, 4001)

    def test_proposal(self):
        """Test the bundled proposal scenario"""
        config = load_scenario(SCENARIO_DIR / 'proposal.ini')
        self.assertEqual(config.gain, 6.0)
        self.assertEqual(config.degradation, 0.13)
        self.assertEqual(config.disk_count, 200)
        self.assertFalse(config.enumerate_amplitudes)

    def test_far_wing(self):
        """Test the bundled wide-scan scenario"""
        config = load_scenario(SCENARIO_DIR / 'far_wing.ini')
        self.assertEqual(config.detuning_start, -2e12)


class TestLocateLine(BaseTestCase):
    def test_sections_and_keys(self):
        """Test header and key line lookup"""
        text = '# comment\n[opa]\ngain = 1\n\n[scan]\npoints: 5\n'
        self.assertEqual(locate_line(text, 'opa'), 2)
        self.assertEqual(locate_line(text, 'opa', 'gain'), 3)
        self.assertEqual(locate_line(text, 'scan', 'points'), 6)
        self.assertIsNone(locate_line(text, 'scan', 'gain'))
