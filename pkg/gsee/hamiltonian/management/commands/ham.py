from experiments.commands import ExperimentCommand
from hamiltonian.serializers import dumps_hamiltonian


class Command(ExperimentCommand):
    help = 'Build and normalize a Hamiltonian and write it as text'

    sections = ['hamiltonian']
    output_prefix = 'ham'

    def run(self, config, options):
        runner = self.runner(config, options)
        h = runner.build_hamiltonian()
        path = runner.out_dir / 'hamiltonian.txt'
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_hamiltonian(h), encoding='utf-8')
        self.emit({
            'path': path,
            'n_sites': h.n_sites,
            'terms': len(h.terms),
            'tau': h.tau,
            'norm_bound': h.norm_bound,
            'lambda_bound': h.lambda_bound,
            'config_hash': runner.hash,
        })
