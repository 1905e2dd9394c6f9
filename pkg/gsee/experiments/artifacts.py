"""Files of one run; every one carries the config hash and the root seed."""
import logging
from pathlib import Path

from acdf.serializers import write_curve
from detect.serializers import DetectionResultSerializer
from evolution.serializers import write_moments
from evolution.spectrum import exact_cdf
from fourier.serializers import write_series
from gsee.rendering import write_json
from gsee.tables import write_table
from resources.serializers import ResourceEstimateSerializer, write_sweep

logger = logging.getLogger(__name__)

SPECTRUM_FIELDS = ['k', 'lambda', 'energy', 'p']
CDF_FIELDS = ['x', 'cdf']
SPARSITY_FIELDS = ['S', 'overlap', 'l2_distance']


class ArtifactWriter:
    """Writes into one output directory and remembers what it wrote, in order"""

    def __init__(self, out_dir, config_hash, root_seed):
        self.out_dir = Path(out_dir)
        self.meta = {'config_hash': config_hash, 'root_seed': root_seed}
        self.written = []

    def _done(self, path):
        path = Path(path)
        self.written.append(str(path.relative_to(self.out_dir)))
        logger.debug(f"Wrote {path}")
        return path

    def path(self, name):
        return self.out_dir / name

    def table(self, name, fieldnames, rows, **extra):
        return self._done(write_table(self.path(name), fieldnames, rows, {**self.meta, **extra}))

    def json(self, name, payload):
        return self._done(write_json(self.path(name), {**self.meta, **payload}))

    # ==================== STAGES ====================

    def spectrum(self, eigen, measure):
        rows = (
            {'k': k, 'lambda': lam, 'energy': lam / eigen.tau, 'p': p}
            for k, (lam, p) in enumerate(measure.points)
        )
        return self.table('spectrum.csv', SPECTRUM_FIELDS, rows, tau=eigen.tau)

    def cdf(self, measure, grid):
        rows = zip(grid.tolist(), exact_cdf(measure, grid).tolist())
        return self.table('exact_cdf.csv', CDF_FIELDS, rows)

    def sparsity(self, profile):
        return self.table('sparsity.csv', SPARSITY_FIELDS, profile)

    def series(self, fs, **extra):
        return self._done(write_series(self.path('series.csv'), fs, {**self.meta, **extra}))

    def moments(self, moments, **extra):
        return self._done(write_moments(self.path('moments.csv'), moments, {**self.meta, **extra}))

    def curve(self, index, curve, sidecar):
        """curves/curve_XX.csv per repetition; a string index names the file directly"""
        name = f"curves/{index}.csv" if isinstance(index, str) else f"curves/curve_{index:02d}.csv"
        path = write_curve(self.path(name), curve, {**self.meta, **sidecar})
        self._done(path.with_suffix('.json'))
        return self._done(path)

    def detection(self, results, summary):
        payload = {
            **summary,
            'repetitions': [
                DetectionResultSerializer(r).data if hasattr(r, 'method') else r
                for r in results
            ],
        }
        return self.json('detection.json', payload)

    def resources(self, estimate):
        return self.json('resources.json', dict(ResourceEstimateSerializer(estimate).data))

    def sweep(self, rows, **extra):
        return self._done(write_sweep(self.path('sweep.csv'), rows, {**self.meta, **extra}))

    def summary(self, payload):
        return self.json('run.json', {**payload, 'artifacts': list(self.written)})
