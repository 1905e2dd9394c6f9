from experiments.commands import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Compute the Fourier moments g_j needed by the filter'

    sections = ['hamiltonian', 'state', 'filter', 'backend']
    output_prefix = 'moments'

    def run(self, config, options):
        runner = self.runner(config, options)
        h = runner.build_hamiltonian()
        runner.prepare_state()
        runner.design()
        moments = runner.compute_moments()
        meta = runner.filter_meta()
        self.emit({
            'series': runner.writer.series(runner.fs, delta=meta['delta'], epsilon=meta['epsilon']),
            'moments': runner.writer.moments(moments, tau=h.tau),
            'backend': runner.backend,
            'count': len(moments),
            'config_hash': runner.hash,
        })
