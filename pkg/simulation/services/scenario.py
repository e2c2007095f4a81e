"""
Scenario files: INI-style sections with unit-suffixed keys.

    [opa]
    gain = 1.0
    degradation = 0.13

    [scan]
    detuning_start_ghz = -2
    detuning_stop_ghz = 2

Missing sections and keys take the serializer defaults; unknown sections
and keys are rejected. Every error carries the line it refers to.
"""
import configparser
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from scipy import constants

from ..exceptions import ScenarioConfigError
from ..serializers import SECTION_SERIALIZERS
from .atom_optics import (
    SPECIES_PRESETS,
    AtomicSpecies,
    CondensateSample,
    DiskLatticeGeometry,
    quarter_wave_geometry,
)
from .experiment import KickExperimentConfig

GHZ = 1e9
MHZ = 1e6
NM = 1e-9
UM = 1e-6
PER_CM3 = 1e6
PS = 1e-12
US = 1e-6

_HEADER = re.compile(r'^\s*\[(?P<name>[^\]]+)\]\s*$')
_KEY = re.compile(r'^\s*(?P<key>[^=:\s][^=:]*?)\s*[=:]')


def locate_line(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    """Line number of a section header, or of ``key`` inside ``section``."""
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header:
            current = header.group('name').strip()
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section:
            match = _KEY.match(line)
            if match and match.group('key') == key:
                return number
    return None


@dataclass(frozen=True)
class ScenarioConfig:
    gain: float
    degradation: float
    phase_count: int
    species: AtomicSpecies
    sample: CondensateSample
    disk_count: int
    thickness_mode: str
    detuning_start: float       # Hz
    detuning_stop: float        # Hz
    scan_points: int
    cutoff_linewidths: float
    repetitions: int
    cavity_q_factor: float
    flight_time: float          # s
    pulse_duration: float       # s
    pulse_spacing: Optional[float]
    source_bandwidth: float     # Hz
    stopband: float             # Hz
    operating_detuning: float   # Hz
    expansion_speed: float      # m/s
    enumerate_amplitudes: bool
    oracle_n_max: int
    tail_tolerance: float
    source: str = '<string>'

    @property
    def geometry(self) -> DiskLatticeGeometry:
        return quarter_wave_geometry(self.species.resonance_wavelength, self.disk_count)

    @property
    def cutoff(self) -> float:
        return self.species.resonance_cutoff(self.cutoff_linewidths)

    def phases(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * np.pi, self.phase_count, endpoint=False)

    def detunings(self) -> np.ndarray:
        return np.linspace(self.detuning_start, self.detuning_stop, self.scan_points)

    def kick_config(self) -> KickExperimentConfig:
        return KickExperimentConfig(
            gain=self.gain,
            species=self.species,
            geometry=self.geometry,
            sample=self.sample,
            source_bandwidth=self.source_bandwidth,
            stopband=self.stopband,
            degradation=self.degradation,
            repetitions=self.repetitions,
            cavity_q_factor=self.cavity_q_factor,
            flight_time=self.flight_time,
            pulse_duration=self.pulse_duration,
            pulse_spacing=self.pulse_spacing,
            operating_detuning=self.operating_detuning,
        )


def _first_error(errors) -> str:
    while isinstance(errors, (list, tuple)) and errors:
        errors = errors[0]
    return str(errors)


def _validate_sections(text: str, parser: configparser.ConfigParser) -> Dict[str, dict]:
    for section in parser.sections():
        if section not in SECTION_SERIALIZERS:
            raise ScenarioConfigError(f"Unknown section [{section}]", locate_line(text, section))

    validated = {}
    for section, serializer_class in SECTION_SERIALIZERS.items():
        data = dict(parser[section]) if parser.has_section(section) else {}
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            key, messages = next(iter(serializer.errors.items()))
            if key == 'non_field_errors':
                line = locate_line(text, section)
                raise ScenarioConfigError(f"[{section}] {_first_error(messages)}", line)
            line = locate_line(text, section, key) or locate_line(text, section)
            raise ScenarioConfigError(f"[{section}] {key}: {_first_error(messages)}", line)
        validated[section] = serializer.validated_data
    return validated


def _build_species(data: dict) -> AtomicSpecies:
    base = SPECIES_PRESETS.get(data['preset'])
    name = data['preset']

    def pick(key, scale, fallback):
        return data[key] * scale if key in data else fallback

    return AtomicSpecies(
        name=name,
        linewidth_gamma=pick('linewidth_mhz', MHZ, base and base.linewidth_gamma),
        resonance_wavelength=pick('resonance_wavelength_nm', NM, base and base.resonance_wavelength),
        scattering_length=pick('scattering_length_nm', NM, base and base.scattering_length),
        mass=pick('mass_amu', constants.atomic_mass, base and base.mass),
    )


def parse_scenario(text: str, source: str = '<string>') -> ScenarioConfig:
    """Parse and validate scenario text, converting every value to SI units."""
    parser = configparser.ConfigParser(interpolation=None, default_section='__shared__')
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ScenarioConfigError(exc.message.split(':', 1)[-1].strip(), exc.lineno)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioConfigError('Key outside of any [section]', exc.lineno)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ScenarioConfigError('Line is neither a [section] header nor a key = value pair', line)
    except configparser.Error as exc:
        raise ScenarioConfigError(str(exc))

    sections = _validate_sections(text, parser)
    opa = sections['opa']
    sample = sections['sample']
    geometry = sections['geometry']
    scan = sections['scan']
    experiment = sections['experiment']
    checks = sections['validate']

    spacing = experiment.get('pulse_spacing_ps')
    return ScenarioConfig(
        gain=opa['gain'],
        degradation=opa['degradation'],
        phase_count=opa['phase_count'],
        species=_build_species(sections['species']),
        sample=CondensateSample(
            number_density=sample['number_density_per_cm3'] * PER_CM3,
            atoms_per_disk=sample['atoms_per_disk'],
            transverse_radius=sample['transverse_radius_um'] * UM,
            longitudinal_size=sample['longitudinal_size_nm'] * NM,
            ho_length=sample['ho_length_um'] * UM,
        ),
        disk_count=geometry['disk_count'],
        thickness_mode=geometry['thickness_mode'],
        detuning_start=scan['detuning_start_ghz'] * GHZ,
        detuning_stop=scan['detuning_stop_ghz'] * GHZ,
        scan_points=scan['points'],
        cutoff_linewidths=scan['cutoff_linewidths'],
        repetitions=experiment['repetitions'],
        cavity_q_factor=experiment['q_factor'],
        flight_time=experiment['flight_time_us'] * US,
        pulse_duration=experiment['pulse_duration_ps'] * PS,
        pulse_spacing=spacing * PS if spacing is not None else None,
        source_bandwidth=experiment['source_bandwidth_ghz'] * GHZ,
        stopband=experiment['stopband_ghz'] * GHZ,
        operating_detuning=experiment['operating_detuning_ghz'] * GHZ,
        # 1 nm/us is 1e-3 m/s
        expansion_speed=experiment['expansion_speed_nm_per_us'] * NM / US,
        enumerate_amplitudes=checks['enumerate_amplitudes'],
        oracle_n_max=checks['oracle_n_max'],
        tail_tolerance=checks['tail_tolerance'],
        source=source,
    )


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ScenarioConfigError(f"Cannot read scenario file {path}: {exc.strerror}")
    except UnicodeDecodeError:
        raise ScenarioConfigError(f"Scenario file {path} is not UTF-8 text")
    return parse_scenario(text, source=str(path))
