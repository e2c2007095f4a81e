import numpy as np

from ...services.export import fringe_frame
from ...services.fock_opa import fringe_curve, gain_params, visibility
from ._base import ScenarioCommand


class Command(ScenarioCommand):
    help = 'Photon-number fringes N+, N- versus trigger phase (phi_rad, n_plus, n_minus, n_diff)'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--macro-state', choices=['plus', 'minus'], default='plus',
            help='Emit the |Phi+> fringe or the phase-opposed |Phi-> fringe',
        )

    def run(self, config, options):
        params = gain_params(config.gain)
        curve = fringe_curve(params, config.phases(), config.degradation)
        if options['macro_state'] == 'minus':
            curve = curve.opposed()
        extra = {
            'gain': params.g,
            'm_bar': params.m_bar,
            'degradation': config.degradation,
            'visibility': visibility(params),
            'contrast': curve.contrast(),
        }
        self.emit(fringe_frame(curve), options, extra)
