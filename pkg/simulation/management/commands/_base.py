import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ...exceptions import ScenarioConfigError, SimulationError
from ...services.export import FORMATS, render, write_output
from ...services.scenario import load_scenario

CONFIG_ERROR_STATUS = 2
FAILURE_STATUS = 1

VERBOSITY_LEVELS = {
    0: logging.ERROR,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
}


class ScenarioCommand(BaseCommand):
    """
    Shared options and error mapping for the simulation commands.
    Subclasses implement ``run(config, options)``.
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            default=str(settings.BASE_DIR / 'scenarios' / 'default.ini'),
            help='Scenario file (INI sections with unit-suffixed keys)',
        )
        parser.add_argument('--out', default=None, help='Output file; stdout when omitted')
        parser.add_argument('--format', choices=FORMATS, default='csv', dest='output_format')
        parser.add_argument('--threads', type=int, default=1, help='Worker threads for scans')

    def handle(self, *args, **options):
        logging.getLogger('simulation').setLevel(
            VERBOSITY_LEVELS.get(options['verbosity'], logging.DEBUG)
        )
        if options['threads'] < 1:
            raise CommandError('--threads must be at least 1', returncode=CONFIG_ERROR_STATUS)
        try:
            config = load_scenario(options['config'])
        except ScenarioConfigError as exc:
            raise CommandError(f"{options['config']}: {exc}", returncode=CONFIG_ERROR_STATUS)
        try:
            self.run(config, options)
        except SimulationError as exc:
            raise CommandError(str(exc), returncode=FAILURE_STATUS)

    def run(self, config, options):
        raise NotImplementedError

    def emit(self, frame, options, extra=None):
        """Write the frame in the requested format, to --out or stdout."""
        text = render(frame, options['output_format'], extra)
        if options['out']:
            write_output(text, options['out'])
            self.stdout.write(self.style.SUCCESS(f"Wrote {len(frame)} rows to {options['out']}"))
        else:
            self.stdout.write(text, ending='')
