from evolution.spectrum import diagonalize
from experiments.commands import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Write the spectral measure and the exact CDF of the initial state on the run grid'

    sections = ['hamiltonian', 'state', 'filter']
    output_prefix = 'exact-cdf'

    def run(self, config, options):
        runner = self.runner(config, options)
        h = runner.build_hamiltonian()
        runner.eigen = diagonalize(h)
        runner.prepare_state()
        runner.design()
        spectrum = runner.writer.spectrum(runner.eigen, runner.measure)
        cdf = runner.writer.cdf(runner.measure, runner.grid)
        self.emit({
            'spectrum': spectrum,
            'exact_cdf': cdf,
            'ground_energy': float(runner.eigen.energies[0]),
            'config_hash': runner.hash,
        })
