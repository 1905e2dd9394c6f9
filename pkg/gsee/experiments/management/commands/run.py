from experiments.commands import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Run the full pipeline: moments, ACDF curves, detection and resources'

    def run(self, config, options):
        result = self.runner(config, options).run()
        self.emit({
            'out_dir': result.out_dir,
            'config_hash': result.config_hash,
            'refined_x': result.refined_x,
            'energy': result.energy,
            'repetition_x': result.repetition_x,
        })
