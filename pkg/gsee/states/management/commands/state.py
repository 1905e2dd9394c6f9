from experiments.commands import ExperimentCommand
from states.vectors import sparsity_profile, write_state


class Command(ExperimentCommand):
    help = 'Prepare an initial state, write it in binary form and optionally its sparsity profile'

    sections = ['hamiltonian', 'state', 'output']
    output_prefix = 'state'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--profile', action='store_true',
                            help='Write overlap and L2 distance for S = 1, 2, 4, ..., 2^n')

    def run(self, config, options):
        runner = self.runner(config, options)
        runner.build_hamiltonian()
        psi = runner.prepare_state()
        runner.out_dir.mkdir(parents=True, exist_ok=True)
        path = runner.out_dir / 'state.bin'
        write_state(path, psi)
        payload = {'path': path, 'n_sites': psi.n_sites, 'config_hash': runner.hash}
        if runner.measure is not None and config['output']['spectrum']:
            payload['spectrum'] = runner.writer.spectrum(runner.eigen, runner.measure)
        if options['profile']:
            sizes = [1 << k for k in range(psi.n_sites + 1)]
            payload['sparsity'] = runner.writer.sparsity(sparsity_profile(psi, sizes))
        self.emit(payload)
