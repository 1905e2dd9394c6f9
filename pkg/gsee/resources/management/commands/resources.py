from experiments.commands import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Closed-form resource estimate (D, M, r, depth) and an optional resolvable-eta sweep'

    sections = ['hamiltonian', 'filter', 'backend', 'resources']
    output_prefix = 'resources'

    def run(self, config, options):
        runner = self.runner(config, options)
        h = runner.build_hamiltonian()
        runner.design()
        estimate = runner.estimate()
        payload = {'resources': runner.writer.resources(estimate), **estimate.to_dict()}
        if config['resources']['sweep']:
            payload['sweep'] = runner.writer.sweep(runner.sweep_rows(estimate), D=estimate.D, tau=h.tau)
        self.emit(payload)
