from ...services.experiment import displacement_fringe, summarize
from ...services.export import displacement_frame
from ._base import ScenarioCommand


class Command(ScenarioCommand):
    help = 'Mirror-BEC displacement fringe versus trigger phase (phi_rad, active_photons, displacement_m, feasible)'

    def run(self, config, options):
        kick = config.kick_config()
        fringe = displacement_fringe(kick, config.phases(), config.expansion_speed)
        if not fringe.feasible:
            self.stderr.write(self.style.WARNING(
                'Configuration flagged infeasible (scattering or timing); see the validate command'
            ))
        extra = {'summary': summarize(kick, config.expansion_speed)}
        self.emit(displacement_frame(fringe), options, extra)
