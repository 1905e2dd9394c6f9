"""
End-to-end experiment: Hamiltonian, state, filter, moments, ACDF curves,
detection with median of means, resources and artifacts.

The single-stage commands reuse the stage methods of ExperimentRunner.
"""
from dataclasses import dataclass, field
import itertools
import logging
from pathlib import Path

import numpy as np
from django.conf import settings

from acdf.estimator import (
    INFINITE,
    POINTWISE,
    acdf_curves,
    aggregate_curves,
    draw_batch,
    evaluate_acdf,
    make_grid,
    median_of_means,
)
from detect.search import CERTIFIED_SEARCH, detect_inflection
from detect.serializers import detection_kwargs
from evolution.backends import build_policy, compute_moments, resolve_backend
from evolution.spectrum import diagonalize, spectral_measure
from gsee.exceptions import NotDetectedError
from gsee.streams import generator
from hamiltonian.operators import build_hamiltonian
from resources.estimates import design_filter, estimate_resources, log_grid, resolvable_eta_sweep
from states.vectors import build_state

from .artifacts import ArtifactWriter
from .config import config_hash
from .serializers import detection_eta

logger = logging.getLogger(__name__)


def experiment_hash(config):
    """Hash of everything but the output section"""
    return config_hash({k: v for k, v in config.items() if k != 'output'})


def output_dir(config, out=None, prefix='run'):
    if out:
        return Path(out)
    configured = config.get('output', {}).get('dir')
    if configured:
        return Path(configured)
    return Path(settings.GSEE_OUTPUT_DIR) / f"{prefix}-{experiment_hash(config)[:12]}"


@dataclass
class RunResult:
    """What a run produced"""

    out_dir: Path
    config_hash: str
    refined_x: float
    energy: float
    repetition_x: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)


class ExperimentRunner:
    """Runs the pipeline for one validated config"""

    def __init__(self, config, out_dir=None):
        self.config = config
        self.hash = experiment_hash(config)
        self.root_seed = config.get('sampling', {}).get('root_seed', 0)
        self.out_dir = Path(out_dir) if out_dir else output_dir(config)
        self.writer = ArtifactWriter(self.out_dir, self.hash, self.root_seed)
        self.h = None
        self.eigen = None
        self.psi = None
        self.measure = None
        self.backend = None
        self.delta = None
        self.fs = None
        self.grid = None
        self.moment_set = None
        self.curves = []
        self.aggregate = None

    # ==================== STAGES ====================

    def build_hamiltonian(self):
        self.h = build_hamiltonian(self.config['hamiltonian'])
        logger.info(
            f"Hamiltonian ready: n={self.h.n_sites}, terms={len(self.h.terms)}, "
            f"tau={self.h.tau:.6g}, lambda_bound={self.h.lambda_bound:.6g}"
        )
        return self.h

    def prepare_state(self):
        backend_spec = self.config.get('backend', {'kind': 'auto'})
        self.backend = resolve_backend(backend_spec.get('kind', 'auto'), self.h.n_sites)
        needs_eigen = self.config['state']['kind'] in ('overlaps', 'eigenstate') or (
            'backend' in self.config and self.backend == 'exact'
        )
        if needs_eigen and self.eigen is None:
            self.eigen = diagonalize(self.h)
        self.psi = build_state(self.config['state'], self.h.n_sites, self.eigen)
        if self.eigen is not None:
            self.measure = spectral_measure(self.eigen, self.psi)
        return self.psi

    def design(self):
        spec = self.config['filter']
        self.delta = spec['delta'] if spec.get('delta') else self.h.tau * spec['epsilon']
        self.fs = design_filter(spec['epsilon'], self.delta, D=spec.get('D'), beta=spec.get('beta'))
        self.grid = make_grid(self.delta, cap=spec.get('grid_points', 4096))
        logger.info(
            f"Filter: epsilon={spec['epsilon']}, delta={self.delta:.6g}, D={self.fs.D}, "
            f"beta={self.fs.beta:.6g}, grid={self.grid.size} points"
        )
        return self.fs

    def compute_moments(self):
        policy = build_policy(self.config['backend'], self.config['filter']['epsilon'])
        self.moment_set = compute_moments(self.h, self.psi, self.fs.d, self.backend, policy, self.eigen)
        return self.moment_set

    def sample_curves(self):
        spec = self.config['sampling']
        self.curves = acdf_curves(
            self.fs, self.moment_set, self.grid, spec['M'], spec['mode'],
            spec['root_seed'], spec['repetitions'],
        )
        return self.curves

    def _fresh_evaluator(self, repetition):
        """G(x) from a new batch per call, for the certified search"""
        spec = self.config['sampling']
        if spec['mode'] == INFINITE:
            curve = self.curves[0]
            return lambda x: float(np.interp(x, curve.grid, curve.g_values))
        seed = int(generator(spec['root_seed'], 'search', repetition).integers(2 ** 62))
        calls = itertools.count()

        def evaluate(x):
            batch = draw_batch(self.fs, self.moment_set, spec['M'], spec['mode'], seed, next(calls))
            return float(evaluate_acdf(batch, self.fs, np.array([x])).g_values[0])
        return evaluate

    def _detect_one(self, curve, repetition):
        spec = self.config['detection']
        extra = {}
        if spec['method'] == CERTIFIED_SEARCH:
            extra = {
                'eta': detection_eta(self.config),
                'epsilon': self.config['filter']['epsilon'],
                'evaluate': self._fresh_evaluator(repetition),
            }
        return detect_inflection(curve, self.delta, self.h.lambda_bound, **detection_kwargs(spec), **extra)

    def detect(self):
        """Per-curve detection with the median of means over the detected energies,
        or a single detection on the pointwise median of means of the curves"""
        spec = self.config['detection']
        if spec['aggregate'] == POINTWISE and len(self.curves) > 1:
            self.aggregate = aggregate_curves(self.curves, spec['groups'])
            result = self._detect_one(self.aggregate, 0)
            logger.info(
                f"Pointwise median of means over {len(self.curves)} curves in {spec['groups']} groups: "
                f"x={result.refined_energy:.8g}, energy={result.refined_energy / self.h.tau:.8g}"
            )
            return [result], [result.refined_energy], result.refined_energy

        results = []
        for rep, curve in enumerate(self.curves):
            try:
                results.append(self._detect_one(curve, rep))
            except NotDetectedError as e:
                logger.warning(f"Repetition {rep}: {str(e)}")
                results.append({'detected': False, 'repetition': rep, 'error': str(e)})
        found = [r.refined_energy for r in results if not isinstance(r, dict)]
        if not found:
            raise NotDetectedError(f"no repetition out of {len(results)} detected a jump")
        refined = median_of_means(found)
        logger.info(
            f"Detected {len(found)}/{len(results)} repetitions, median x={refined:.8g}, "
            f"energy={refined / self.h.tau:.8g}"
        )
        return results, found, refined

    def estimate(self):
        spec = self.config['filter']
        backend = self.config['backend']
        resources = self.config['resources']
        return estimate_resources(
            spec['epsilon'], self.delta, self.h.tau, self.h.n_sites,
            eta=resources.get('eta'), vartheta=resources['vartheta'],
            prefactor=backend['prefactor'], order=backend['order'],
            steps_policy=backend['steps_policy'], steps_per_unit=backend['steps_per_unit'],
            D=self.fs.D,
        )

    def sweep_rows(self, estimate):
        spec = self.config['resources']
        Ms = log_grid(spec['sweep_min'], spec['sweep_max'], spec['sweep_points'])
        return resolvable_eta_sweep(Ms, estimate.D, self.config['filter']['epsilon'], self.h.tau, spec['vartheta'])

    # ==================== RUN ====================

    def filter_meta(self):
        return {
            'tau': self.h.tau,
            'delta': self.delta,
            'epsilon': self.config['filter']['epsilon'],
            'lambda_bound': self.h.lambda_bound,
            'D': self.fs.D,
            'beta': self.fs.beta,
        }

    def curve_meta(self):
        sampling = self.config['sampling']
        return {**self.filter_meta(), 'sampling_mode': sampling['mode'], 'repetitions': sampling['repetitions']}

    def aggregation_label(self):
        if self.aggregate is not None:
            groups = self.aggregate.meta['groups']
            return f"pointwise median of means over {len(self.curves)} curves in {groups} groups"
        return 'median of per-repetition refined energies' if len(self.curves) > 1 else 'single curve'

    def run(self):
        self.build_hamiltonian()
        self.prepare_state()
        self.design()
        self.compute_moments()
        self.sample_curves()
        results, found, refined = self.detect()
        estimate = self.estimate()
        self.write(results, refined, estimate)
        return RunResult(
            out_dir=self.out_dir, config_hash=self.hash, refined_x=refined,
            energy=refined / self.h.tau, repetition_x=found, artifacts=list(self.writer.written),
        )

    def write(self, results, refined, estimate):
        writer = self.writer
        meta = self.filter_meta()
        if self.measure is not None and self.config['output']['spectrum']:
            writer.spectrum(self.eigen, self.measure)
            writer.cdf(self.measure, self.grid)
        writer.series(self.fs, delta=self.delta, epsilon=meta['epsilon'])
        writer.moments(self.moment_set, tau=self.h.tau)
        sampling = self.config['sampling']
        for index, curve in enumerate(self.curves):
            writer.curve(index, curve, self.curve_meta())
        if self.aggregate is not None:
            writer.curve('aggregate', self.aggregate, self.curve_meta())
        writer.detection(results, {
            'method': self.config['detection']['method'],
            'refined_x': refined,
            'energy': refined / self.h.tau,
            'aggregation': self.aggregation_label(),
        })
        writer.resources(estimate)
        if self.config['resources']['sweep']:
            writer.sweep(self.sweep_rows(estimate), D=estimate.D, tau=self.h.tau)
        writer.summary({
            **meta,
            'config': self.config,
            'backend': self.backend,
            'batch_reuse': 'one batch per repetition, shared by every grid point',
            'sampling_mode': sampling['mode'],
            'repetition_x': [r.refined_energy if not isinstance(r, dict) else None for r in results],
            'aggregation': self.aggregation_label(),
            'refined_x': refined,
            'energy': refined / self.h.tau,
        })
        logger.info(f"Wrote {len(writer.written)} artifacts to {self.out_dir}")
