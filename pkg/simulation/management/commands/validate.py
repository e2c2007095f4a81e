import json

from django.core.management.base import CommandError

from ...services.export import write_output
from ...services.validation import ScenarioValidator
from ._base import FAILURE_STATUS, ScenarioCommand


class Command(ScenarioCommand):
    help = 'Run the invariant suites (oracle, normalisation, transfer matrices, budget) on a scenario'

    def run(self, config, options):
        report = ScenarioValidator(config).validate_all()
        if options['output_format'] == 'json':
            text = json.dumps(report, indent=2) + '\n'
        else:
            text = self.format_report(config, report)
        if options['out']:
            write_output(text, options['out'])
        else:
            self.stdout.write(text, ending='')

        failed = [name for name, result in report['sections'].items() if not result['isValid']]
        if failed:
            raise CommandError(f"Failed checks: {', '.join(failed)}", returncode=FAILURE_STATUS)
        self.stderr.write(self.style.SUCCESS('All checks passed'))

    def format_report(self, config, report):
        lines = [f"Scenario {config.source} (g = {config.gain})", '']
        for name, result in report['sections'].items():
            status = 'PASS' if result['isValid'] else 'FAIL'
            lines.append(f"[{status}] {name}")
            lines.extend(f"    {check}" for check in result['checks'])
            lines.extend(f"    error: {error}" for error in result['errors'])
            lines.extend(f"    warning: {warning}" for warning in result['warnings'])
        return '\n'.join(lines) + '\n'
