from evolution.serializers import read_moments
from experiments.commands import ExperimentCommand
from gsee.exceptions import ParameterError


class Command(ExperimentCommand):
    help = 'Sample ACDF curves, one per repetition, with JSON sidecars'

    sections = ['hamiltonian', 'state', 'filter', 'backend', 'sampling']
    output_prefix = 'acdf'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--moments', help='Reuse a moments CSV instead of evolving the state')

    def run(self, config, options):
        runner = self.runner(config, options)
        runner.build_hamiltonian()
        runner.design()
        if options.get('moments'):
            _, runner.moment_set = read_moments(options['moments'])
            if runner.moment_set.d < runner.fs.d:
                raise ParameterError(
                    f"{options['moments']} stops at j={2 * runner.moment_set.d + 1}, "
                    f"the filter needs j={runner.fs.D}"
                )
        else:
            runner.prepare_state()
            runner.compute_moments()
            runner.writer.moments(runner.moment_set, tau=runner.h.tau)
        curves = runner.sample_curves()
        paths = [runner.writer.curve(index, curve, runner.curve_meta()) for index, curve in enumerate(curves)]
        self.emit({'curves': paths, 'config_hash': runner.hash})
