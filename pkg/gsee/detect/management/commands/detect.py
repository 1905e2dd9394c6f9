from pathlib import Path

from acdf.serializers import read_curve
from detect.search import CERTIFIED_SEARCH, detect_inflection
from detect.serializers import DetectionResultSerializer, detection_kwargs
from experiments.commands import ExperimentCommand
from gsee.exceptions import ConfigError
from gsee.rendering import write_json


class Command(ExperimentCommand):
    help = 'Locate the inflection point of a curve CSV using the delta and lambda bound of its sidecar'

    sections = ['detection']

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--curve', required=True, help='Curve CSV written by the acdf or run command')

    def run(self, config, options):
        curve_path = Path(options['curve'])
        curve, sidecar = read_curve(curve_path)
        missing = [key for key in ('delta', 'lambda_bound') if key not in sidecar]
        if missing:
            raise ConfigError(curve_path, f"sidecar lacks {', '.join(missing)}")
        spec = config['detection']
        extra = {}
        if spec['method'] == CERTIFIED_SEARCH:
            epsilon = float(sidecar['epsilon'])
            extra = {'eta': spec['eta'] if spec['eta'] is not None else 4.0 * epsilon, 'epsilon': epsilon}
        result = detect_inflection(
            curve, float(sidecar['delta']), float(sidecar['lambda_bound']), **detection_kwargs(spec), **extra,
        )
        out = Path(options['out']) / 'detection.json' if options.get('out') else curve_path.with_suffix('.detection.json')
        payload = dict(DetectionResultSerializer(result).data)
        if 'tau' in sidecar:
            payload['energy'] = result.refined_energy / float(sidecar['tau'])
        write_json(out, {
            'config_hash': sidecar.get('config_hash'),
            'root_seed': sidecar.get('root_seed'),
            'curve': curve_path,
            **payload,
        })
        self.emit({'path': out, 'refined_x': result.refined_energy, 'energy': payload.get('energy')})
