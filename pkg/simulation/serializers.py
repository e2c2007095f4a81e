# serializers.py
# Validation of scenario file sections. Every key carries its unit in its
# name; values arrive as text and are converted by the serializer fields.
import numpy as np
from rest_framework import serializers

from .conf import sim_setting
from .services.atom_optics import SPECIES_PRESETS
from .services.bragg_stack import THICKNESS_MODES


def positive(value):
    if not value > 0:
        raise serializers.ValidationError('Ensure this value is greater than 0.')


def probability(value):
    if not 0 < value < 1:
        raise serializers.ValidationError('Ensure this value lies strictly between 0 and 1.')


class FiniteFloatField(serializers.FloatField):
    default_error_messages = {
        'not_finite': 'Ensure this value is a finite number.',
    }

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not np.isfinite(value):
            self.fail('not_finite')
        return value


class DegradationField(FiniteFloatField):
    """Contrast factor, or ``experimental`` for the measured visibility preset."""

    def to_internal_value(self, data):
        if isinstance(data, str) and data.strip().lower() == 'experimental':
            return float(sim_setting('EXPERIMENTAL_DEGRADATION'))
        return super().to_internal_value(data)


class StrictSectionSerializer(serializers.Serializer):
    """Section serializer that rejects keys it does not declare."""

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ['Unknown key.'] for key in unknown})
        return super().to_internal_value(data)


class OpaSectionSerializer(StrictSectionSerializer):
    gain = FiniteFloatField(min_value=0.0, default=1.0)
    degradation = DegradationField(default=1.0)
    phase_count = serializers.IntegerField(min_value=1, default=72)

    def validate_degradation(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError('Degradation must lie in (0, 1].')
        return value


class SpeciesSectionSerializer(StrictSectionSerializer):
    preset = serializers.ChoiceField(choices=sorted(SPECIES_PRESETS) + ['custom'], default='rb87')
    linewidth_mhz = FiniteFloatField(required=False, validators=[positive])
    resonance_wavelength_nm = FiniteFloatField(required=False, validators=[positive])
    scattering_length_nm = FiniteFloatField(required=False, validators=[positive])
    mass_amu = FiniteFloatField(required=False, validators=[positive])

    def validate(self, data):
        """A custom species must set every property explicitly."""
        if data['preset'] == 'custom':
            missing = [name for name in self.fields if name != 'preset' and name not in data]
            if missing:
                raise serializers.ValidationError(
                    {missing[0]: 'Required when preset = custom.'}
                )
        return data


class SampleSectionSerializer(StrictSectionSerializer):
    number_density_per_cm3 = FiniteFloatField(default=1e14, validators=[positive])
    atoms_per_disk = FiniteFloatField(default=500.0, validators=[positive])
    transverse_radius_um = FiniteFloatField(default=5.0, validators=[positive])
    longitudinal_size_nm = FiniteFloatField(default=200.0, validators=[positive])
    ho_length_um = FiniteFloatField(default=1.0, validators=[positive])


class GeometrySectionSerializer(StrictSectionSerializer):
    disk_count = serializers.IntegerField(min_value=1, default=150)
    thickness_mode = serializers.ChoiceField(choices=THICKNESS_MODES, default='optical')


class ScanSectionSerializer(StrictSectionSerializer):
    detuning_start_ghz = FiniteFloatField(default=-2.0)
    detuning_stop_ghz = FiniteFloatField(default=2.0)
    points = serializers.IntegerField(min_value=2, default=4001)
    cutoff_linewidths = FiniteFloatField(default=10.0, validators=[positive])

    def validate(self, data):
        if not data['detuning_start_ghz'] < data['detuning_stop_ghz']:
            raise serializers.ValidationError(
                {'detuning_stop_ghz': 'Must be greater than detuning_start_ghz.'}
            )
        return data


class ExperimentSectionSerializer(StrictSectionSerializer):
    repetitions = serializers.IntegerField(min_value=1, default=10000)
    q_factor = FiniteFloatField(min_value=1.0, default=1.0)
    flight_time_us = FiniteFloatField(default=40.0, validators=[positive])
    pulse_duration_ps = FiniteFloatField(default=1.0, validators=[positive])
    pulse_spacing_ps = FiniteFloatField(required=False, validators=[positive])
    source_bandwidth_ghz = FiniteFloatField(default=700.0, validators=[positive])
    stopband_ghz = FiniteFloatField(default=2.0, validators=[positive])
    operating_detuning_ghz = FiniteFloatField(default=2.0)
    expansion_speed_nm_per_us = FiniteFloatField(default=1.0, validators=[positive])

    def validate_operating_detuning_ghz(self, value):
        if value == 0:
            raise serializers.ValidationError('Operating detuning must be non-zero.')
        return value

    def validate(self, data):
        spacing = data.get('pulse_spacing_ps')
        if spacing is not None and spacing < data['pulse_duration_ps']:
            raise serializers.ValidationError(
                {'pulse_spacing_ps': 'Pulse spacing cannot be shorter than the pulse duration.'}
            )
        return data


class ValidateSectionSerializer(StrictSectionSerializer):
    enumerate_amplitudes = serializers.BooleanField(default=True)
    oracle_n_max = serializers.IntegerField(min_value=1, default=80)
    tail_tolerance = FiniteFloatField(default=1e-10, validators=[probability])


SECTION_SERIALIZERS = {
    'opa': OpaSectionSerializer,
    'species': SpeciesSectionSerializer,
    'sample': SampleSectionSerializer,
    'geometry': GeometrySectionSerializer,
    'scan': ScanSectionSerializer,
    'experiment': ExperimentSectionSerializer,
    'validate': ValidateSectionSerializer,
}
