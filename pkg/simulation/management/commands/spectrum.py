from ...services.bragg_stack import reflective_band, reflectivity_spectrum
from ...services.export import spectrum_frame
from ._base import ScenarioCommand

PLATEAU_THRESHOLD = 0.99


class Command(ScenarioCommand):
    help = 'Reflectivity of the disk lattice versus detuning (detuning_hz, wavelength_m, epsilon, reflectivity, masked)'

    def run(self, config, options):
        spectrum = reflectivity_spectrum(
            config.species,
            config.sample,
            config.geometry,
            config.detunings(),
            cutoff=config.cutoff,
            thickness_mode=config.thickness_mode,
            threads=options['threads'],
        )
        bands = reflective_band(spectrum, PLATEAU_THRESHOLD)
        extra = {
            'masked_region_hz': list(spectrum.masked_region),
            'plateau_threshold': PLATEAU_THRESHOLD,
            'plateau_bands_hz': [list(band) for band in bands],
        }
        if options['verbosity'] >= 2:
            for start, stop in bands:
                self.stderr.write(f"R > {PLATEAU_THRESHOLD} from {start:.6g} Hz to {stop:.6g} Hz")
        self.emit(spectrum_frame(spectrum), options, extra)
