import io
import logging
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from acdf.estimator import AcdfCurve, make_grid
from acdf.serializers import write_curve
from evolution.spectrum import diagonalize
from gsee.rendering import parse_json, read_json
from gsee.tables import read_table, write_table
from hamiltonian.operators import build_hamiltonian

from .commands import EXIT_CONFIG, EXIT_NOT_DETECTED, EXIT_NUMERIC, quiet_loggers
from .config import config_hash, load_config, merge, nest, parse_assignments, validate_config
from .pipeline import ExperimentRunner, experiment_hash, output_dir
from .serializers import detection_eta, flatten_errors

CONFIGS = Path(settings.BASE_DIR) / 'configs'


def command(name, *args, **options):
    """Run a management command and return its JSON payload"""
    out = io.StringIO()
    call_command(name, *args, stdout=out, **options)
    return parse_json(out.getvalue().encode('utf-8'))


def xxz4(**sections):
    config = {
        'hamiltonian': {'model': 'xxz', 'n': 4},
        'state': {'kind': 'random', 'seed': 7},
        'filter': {'epsilon': 0.1},
        'sampling': {'mode': 'infinite', 'root_seed': 3},
    }
    return validate_config(merge(config, sections))


def cumulative_weight(measure, level, tol=1e-9):
    """Exact CDF at ``level``"""
    return float(measure.weights[measure.lambdas <= level + tol].sum())


class ConfigLoadingTests(SimpleTestCase):
    """dotenv and JSON configs, overrides and validation errors"""

    def test_nest(self):
        self.assertEqual(nest({'a.b': '1', 'a.c': '2', 'd.e': None}), {'a': {'b': '1', 'c': '2'}})

    def test_key_without_section(self):
        with self.assertRaisesMessage(Exception, 'section.field'):
            nest({'epsilon': '0.1'})

    def test_dotenv_and_json_agree(self):
        from_env = validate_config(merge(load_config(CONFIGS / 'xxz4.env'), {
            'sampling': {'mode': 'infinite', 'M': 500, 'repetitions': 1, 'root_seed': 3},
        }))
        from_json = validate_config(load_config(CONFIGS / 'xxz4.json'))
        for section in ('hamiltonian', 'state', 'sampling'):
            self.assertEqual(from_env[section], from_json[section])

    def test_values_are_coerced(self):
        config = validate_config(load_config(CONFIGS / 'xxz4.env'))
        self.assertEqual(config['hamiltonian']['n'], 4)
        self.assertIs(config['hamiltonian']['periodic'], True)
        self.assertEqual(config['sampling']['M'], 10000)
        self.assertEqual(config['resources']['sweep_max'], 1e12)

    def test_missing_optional_sections_take_defaults(self):
        config = xxz4()
        self.assertEqual(config['detection']['method'], 'rupture')
        self.assertEqual((config['detection']['aggregate'], config['detection']['groups']), ('energies', 5))
        self.assertEqual(config['backend']['kind'], 'auto')
        self.assertEqual(config['output']['dir'], '')

    def test_assignments(self):
        self.assertEqual(
            parse_assignments(['filter.epsilon=0.2', 'sampling.M = 10']),
            {'filter': {'epsilon': '0.2'}, 'sampling': {'M': '10'}},
        )
        with self.assertRaisesMessage(Exception, 'section.key=value'):
            parse_assignments(['filter.epsilon'])

    def test_errors_carry_dotted_paths(self):
        with self.assertRaises(Exception) as cm:
            validate_config({
                'hamiltonian': {'model': 'heisenberg', 'n': 4},
                'state': {'kind': 'random', 'seed': 1},
                'filter': {'epsilon': 2.0},
            })
        messages = ' '.join(cm.exception.detail)
        self.assertIn('hamiltonian.seed', messages)
        self.assertIn('filter.epsilon', messages)

    def test_unknown_section(self):
        with self.assertRaises(Exception) as cm:
            validate_config({**load_config(CONFIGS / 'xxz4.json'), 'plotting': {}})
        self.assertIn('plotting', ' '.join(cm.exception.detail))

    def test_flatten_errors(self):
        errors = {'detection': {'eta': ['too small']}, 'non_field_errors': ['bad']}
        self.assertEqual(flatten_errors(errors), ['detection.eta: too small', 'bad'])

    def test_certified_search_needs_eta_above_two_epsilon(self):
        with self.assertRaises(Exception) as cm:
            xxz4(detection={'method': 'certified-search', 'eta': 0.15})
        self.assertIn('detection.eta', ' '.join(cm.exception.detail))
        config = xxz4(detection={'method': 'certified-search'})
        self.assertAlmostEqual(detection_eta(config), 0.4)

    def test_hash_is_stable_and_ignores_output(self):
        a = xxz4()
        b = xxz4(output={'dir': '/tmp/elsewhere'})
        self.assertEqual(experiment_hash(a), experiment_hash(b))
        self.assertEqual(config_hash(a), config_hash(xxz4()))
        self.assertNotEqual(experiment_hash(a), experiment_hash(xxz4(sampling={'root_seed': 4})))

    def test_default_output_dir(self):
        config = xxz4()
        path = output_dir(config, prefix='acdf')
        self.assertEqual(path.parent, Path(settings.GSEE_OUTPUT_DIR))
        self.assertEqual(path.name, f"acdf-{experiment_hash(config)[:12]}")
        self.assertEqual(output_dir(config, '/tmp/x'), Path('/tmp/x'))


class ExitCodeTests(SimpleTestCase):
    """Config, numeric and detection failures map to distinct exit codes"""

    def test_missing_config_file(self):
        with self.assertRaises(CommandError) as cm:
            command('run', config='/nonexistent/gsee.env', quiet=True)
        self.assertEqual(cm.exception.returncode, EXIT_CONFIG)

    def test_invalid_value(self):
        with self.assertRaises(CommandError) as cm:
            command('run', config=str(CONFIGS / 'xxz4.json'), set=['filter.epsilon=2'], quiet=True)
        self.assertEqual(cm.exception.returncode, EXIT_CONFIG)
        self.assertIn('filter.epsilon', str(cm.exception))

    def test_numeric_failure(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'short.csv'
            write_table(path, ['x', 'g', 'grad'], [(0.0, 0.5, 0.0)])
            with self.assertRaises(CommandError) as cm:
                command('detect', curve=str(path), quiet=True)
        self.assertEqual(cm.exception.returncode, EXIT_NUMERIC)

    def test_not_detected(self):
        grid = make_grid(0.01)
        curve = AcdfCurve(grid=grid, g_values=np.zeros(grid.size), grad_values=np.zeros(grid.size),
                          norm_F=1.0, m_samples=0)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_curve(Path(tmp) / 'flat.csv', curve, {'delta': 0.01, 'lambda_bound': 1.4})
            with self.assertRaises(CommandError) as cm:
                command('detect', curve=str(path), quiet=True)
        self.assertEqual(cm.exception.returncode, EXIT_NOT_DETECTED)

    def test_moments_too_short_for_filter(self):
        with tempfile.TemporaryDirectory() as tmp:
            short = command('moments', config=str(CONFIGS / 'xxz4.json'), set=['filter.epsilon=0.3'],
                            out=tmp, quiet=True)
            with self.assertRaises(CommandError) as cm:
                command('acdf', config=str(CONFIGS / 'xxz4.json'), moments=short['moments'],
                        out=tmp, quiet=True)
        self.assertEqual(cm.exception.returncode, EXIT_NUMERIC)


class QuietLoggingTests(SimpleTestCase):
    """--quiet reaches every configured logger"""

    def test_project_package_configured(self):
        self.assertIn('gsee', settings.GSEE_APPS)
        self.assertIn('gsee', settings.LOGGING['loggers'])

    def test_quiet_silences_project_modules(self):
        before = logging.getLogger('gsee').level
        with quiet_loggers(True):
            self.assertFalse(logging.getLogger('gsee.tables').isEnabledFor(logging.INFO))
            self.assertFalse(logging.getLogger('detect.search').isEnabledFor(logging.INFO))
        self.assertEqual(logging.getLogger('gsee').level, before)


class RunTests(SimpleTestCase):
    """Full pipeline on the four-site XXZ chain"""

    def run_xxz4(self, out, *sets, **options):
        return command('run', config=str(CONFIGS / 'xxz4.json'), set=list(sets), out=str(out), quiet=True,
                       **options)

    def test_infinite_mode_lands_on_a_level(self):
        config = validate_config(load_config(CONFIGS / 'xxz4.json'))
        runner = ExperimentRunner(config)
        runner.build_hamiltonian()
        runner.prepare_state()
        runner.design()
        with tempfile.TemporaryDirectory() as tmp:
            payload = self.run_xxz4(tmp)
        lambdas, _ = runner.measure.support(1e-8)
        nearest = lambdas[np.argmin(np.abs(lambdas - payload['refined_x']))]
        self.assertLessEqual(abs(payload['refined_x'] - nearest), runner.delta)
        self.assertTrue(cumulative_weight(runner.measure, nearest) >= 2 * 0.1 or nearest == lambdas[0])
        self.assertAlmostEqual(payload['energy'], payload['refined_x'] / runner.h.tau)

    def test_artifacts_carry_hash_and_seed(self):
        with tempfile.TemporaryDirectory() as tmp:
            payload = self.run_xxz4(tmp)
            summary = read_json(Path(tmp) / 'run.json')
            self.assertEqual(summary['config_hash'], payload['config_hash'])
            for name in ('spectrum.csv', 'exact_cdf.csv', 'series.csv', 'moments.csv',
                         'curves/curve_00.csv', 'curves/curve_00.json', 'detection.json',
                         'resources.json', 'sweep.csv'):
                self.assertIn(name, summary['artifacts'])
            for name in summary['artifacts']:
                path = Path(tmp) / name
                meta = read_table(path)[0] if path.suffix == '.csv' else read_json(path)
                self.assertEqual(meta['config_hash'], payload['config_hash'], name)
                self.assertEqual(str(meta['root_seed']), '3', name)
            sidecar = read_json(Path(tmp) / 'curves' / 'curve_00.json')
            self.assertEqual(sidecar['repetitions'], 1)
            self.assertEqual(sidecar['sampling_mode'], 'infinite')

    def test_rerun_is_bit_identical(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, second = Path(tmp) / 'a', Path(tmp) / 'b'
            sets = ['sampling.mode=exact', 'sampling.repetitions=3', 'sampling.M=5000']
            self.run_xxz4(first, *sets)
            self.run_xxz4(second, *sets)
            names = sorted(p.relative_to(first) for p in first.rglob('*') if p.is_file())
            self.assertEqual(names, sorted(p.relative_to(second) for p in second.rglob('*') if p.is_file()))
            for name in names:
                self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_seed_override_changes_hash(self):
        with tempfile.TemporaryDirectory() as tmp:
            sets = ['sampling.mode=exact', 'sampling.M=5000', 'sampling.repetitions=3']
            a = self.run_xxz4(Path(tmp) / 'a', *sets)
            b = self.run_xxz4(Path(tmp) / 'b', *sets, seed=4)
            self.assertNotEqual(a['config_hash'], b['config_hash'])
            self.assertEqual(read_json(Path(tmp) / 'b' / 'run.json')['root_seed'], 4)

    def test_single_shot_repetitions_stay_inside_the_spectrum(self):
        h = build_hamiltonian(xxz4()['hamiltonian'])
        ed = diagonalize(h)
        delta = h.tau * 0.1
        with tempfile.TemporaryDirectory() as tmp:
            payload = self.run_xxz4(tmp, 'sampling.mode=single-shot', 'sampling.repetitions=5',
                                    'sampling.M=10000', 'sampling.root_seed=2024')
            detection = read_json(Path(tmp) / 'detection.json')
            curves = sorted((Path(tmp) / 'curves').glob('curve_*.csv'))
        self.assertEqual(len(curves), 5)
        self.assertEqual(len(detection['repetitions']), 5)
        self.assertGreaterEqual(payload['refined_x'], ed.lambdas[0] - 2 * delta)
        self.assertLessEqual(payload['refined_x'], ed.lambdas[-1] + 2 * delta)

    def test_pointwise_aggregation_detects_once(self):
        h = build_hamiltonian(xxz4()['hamiltonian'])
        ed = diagonalize(h)
        delta = h.tau * 0.1
        with tempfile.TemporaryDirectory() as tmp:
            payload = self.run_xxz4(tmp, 'sampling.mode=single-shot', 'sampling.repetitions=5',
                                    'sampling.M=10000', 'sampling.root_seed=2024',
                                    'detection.aggregate=pointwise', 'detection.groups=5')
            detection = read_json(Path(tmp) / 'detection.json')
            sidecar = read_json(Path(tmp) / 'curves' / 'aggregate.json')
            self.assertEqual(len(sorted((Path(tmp) / 'curves').glob('curve_*.csv'))), 5)
        self.assertEqual(len(detection['repetitions']), 1)
        self.assertIn('pointwise', detection['aggregation'])
        self.assertEqual(sidecar['repetitions'], 5)
        self.assertEqual(sidecar['M'], 50000)
        self.assertEqual(sidecar['groups'], 5)
        self.assertEqual(detection['refined_x'], payload['refined_x'])
        self.assertGreaterEqual(payload['refined_x'], ed.lambdas[0] - 2 * delta)
        self.assertLessEqual(payload['refined_x'], ed.lambdas[-1] + 2 * delta)

    def test_exact_and_trotter_backends_agree(self):
        with tempfile.TemporaryDirectory() as tmp:
            exact = self.run_xxz4(Path(tmp) / 'exact')
            trotter = self.run_xxz4(Path(tmp) / 'trotter', 'backend.steps_per_unit=64', backend='trotter')
            grid = read_table(Path(tmp) / 'exact' / 'exact_cdf.csv')[1]
        spacing = float(grid[1]['x']) - float(grid[0]['x'])
        self.assertLessEqual(abs(exact['refined_x'] - trotter['refined_x']), 2 * spacing)

    def test_certified_search(self):
        config = validate_config(load_config(CONFIGS / 'xxz4.json'))
        runner = ExperimentRunner(config)
        runner.build_hamiltonian()
        runner.prepare_state()
        runner.design()
        with tempfile.TemporaryDirectory() as tmp:
            payload = self.run_xxz4(tmp, 'detection.method=certified-search')
            detection = read_json(Path(tmp) / 'detection.json')
        self.assertEqual(detection['method'], 'certified-search')
        self.assertTrue(detection['repetitions'][0]['decisions'])
        # the crossing of eta/2 lies inside the support of the measure
        self.assertGreaterEqual(payload['refined_x'], runner.measure.lambdas[0] - 2 * runner.delta)


class StageCommandTests(SimpleTestCase):
    """Single-stage commands and their hand-offs"""

    def test_ham(self):
        with tempfile.TemporaryDirectory() as tmp:
            payload = command('ham', config=str(CONFIGS / 'xxz4.json'), out=tmp, quiet=True)
            text = Path(payload['path']).read_text(encoding='utf-8')
        self.assertEqual(payload['terms'], 12)
        self.assertEqual(int(text.split()[0]), 4)
        self.assertAlmostEqual(payload['lambda_bound'], payload['tau'] * payload['norm_bound'])

    def test_state_with_profile(self):
        with tempfile.TemporaryDirectory() as tmp:
            payload = command('state', config=str(CONFIGS / 'xxz4.json'), out=tmp, profile=True, quiet=True)
            self.assertTrue(Path(payload['path']).is_file())
            _, rows = read_table(payload['sparsity'])
        self.assertEqual([int(r['S']) for r in rows], [1, 2, 4, 8, 16])
        self.assertAlmostEqual(float(rows[-1]['overlap']), 1.0)
        self.assertAlmostEqual(float(rows[-1]['l2_distance']), 0.0)

    def test_exact_cdf(self):
        with tempfile.TemporaryDirectory() as tmp:
            payload = command('exact_cdf', config=str(CONFIGS / 'xxz4.json'), out=tmp, quiet=True)
            _, spectrum = read_table(payload['spectrum'])
            _, cdf = read_table(payload['exact_cdf'])
        self.assertEqual(len(spectrum), 16)
        self.assertAlmostEqual(sum(float(r['p']) for r in spectrum), 1.0)
        self.assertAlmostEqual(float(spectrum[0]['energy']), payload['ground_energy'])
        values = [float(r['cdf']) for r in cdf]
        self.assertEqual(values[0], 0.0)
        self.assertAlmostEqual(values[-1], 1.0)
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_resources(self):
        with tempfile.TemporaryDirectory() as tmp:
            payload = command('resources', config=str(CONFIGS / 'xxz4.json'), set=['resources.sweep=true'],
                              out=tmp, quiet=True)
            _, sweep = read_table(payload['sweep'])
        self.assertEqual(payload['D'] % 2, 1)
        self.assertEqual(len(sweep), 41)

    def test_acdf_then_detect(self):
        with tempfile.TemporaryDirectory() as tmp:
            moments = command('moments', config=str(CONFIGS / 'xxz4.json'), out=tmp, quiet=True)
            self.assertEqual(moments['backend'], 'exact')
            curves = command('acdf', config=str(CONFIGS / 'xxz4.json'), moments=moments['moments'],
                             out=tmp, quiet=True)
            full = command('run', config=str(CONFIGS / 'xxz4.json'), out=str(Path(tmp) / 'run'), quiet=True)
            detected = command('detect', curve=curves['curves'][0], quiet=True)
            written = read_json(detected['path'])
        self.assertTrue(detected['path'].endswith('curve_00.detection.json'))
        self.assertAlmostEqual(detected['refined_x'], full['refined_x'])
        self.assertEqual(written['config_hash'], curves['config_hash'])
        self.assertAlmostEqual(written['energy'], full['energy'])


@tag('slow')
class SixSpinHeisenbergTests(SimpleTestCase):
    """Six-spin Heisenberg model with small overlaps on the two lowest levels"""

    def refined_x(self, root_seed):
        config = validate_config(merge(load_config(CONFIGS / 'heisenberg6.env'), {
            'sampling': {'root_seed': root_seed},
        }))
        with tempfile.TemporaryDirectory() as tmp:
            runner = ExperimentRunner(config, out_dir=tmp)
            runner.build_hamiltonian()
            runner.prepare_state()
            runner.design()
            runner.compute_moments()
            runner.sample_curves()
            _, _, refined = runner.detect()
        return runner, refined

    def test_single_shot_finds_the_first_excited_level(self):
        hits = []
        for root_seed in range(10):
            runner, refined = self.refined_x(root_seed)
            self.assertEqual(runner.config['sampling']['mode'], 'single-shot')
            hits.append(abs(refined - runner.eigen.lambdas[1]) <= runner.delta)
        self.assertGreaterEqual(sum(hits), 8, hits)
