"""Shared base for the gsee management commands."""
from contextlib import contextmanager
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from gsee.exceptions import ConfigError, GseeError, NotDetectedError
from gsee.rendering import render_json

from .config import load_config, merge, parse_assignments, validate_config
from .pipeline import ExperimentRunner, output_dir

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NOT_DETECTED = 4


@contextmanager
def quiet_loggers(enabled):
    """Raise every app logger to WARNING for the duration"""
    if not enabled:
        yield
        return
    loggers = [logging.getLogger(app) for app in settings.GSEE_APPS]
    levels = [lg.level for lg in loggers]
    for lg in loggers:
        lg.setLevel(logging.WARNING)
    try:
        yield
    finally:
        for lg, level in zip(loggers, levels):
            lg.setLevel(level)


class ExperimentCommand(BaseCommand):
    """Config loading, common flags and exit codes.

    Subclasses list the config ``sections`` they validate and implement
    ``run(config, options)``.
    """

    sections = None
    output_prefix = 'run'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Experiment config (dotenv section.key=value, or .json)')
        parser.add_argument('--set', action='append', default=[], metavar='SECTION.KEY=VALUE',
                            help='Override one config value; may be repeated')
        parser.add_argument('--seed', type=int, help='Override sampling.root_seed')
        parser.add_argument('--out', help='Output directory')
        parser.add_argument('--backend', choices=['exact', 'trotter'], help='Override backend.kind')
        parser.add_argument('--quiet', action='store_true', help='Only log warnings and errors')

    def load(self, options):
        data = load_config(options['config']) if options.get('config') else {}
        overrides = parse_assignments(options.get('set'))
        if options.get('seed') is not None:
            overrides.setdefault('sampling', {})['root_seed'] = options['seed']
        if options.get('backend'):
            overrides.setdefault('backend', {})['kind'] = options['backend']
        sections = self.sections
        if sections is not None:
            overrides = {k: v for k, v in overrides.items() if k in sections}
        return validate_config(merge(data, overrides), sections=sections)

    def runner(self, config, options):
        out = output_dir(config, options.get('out'), prefix=self.output_prefix)
        return ExperimentRunner(config, out_dir=out)

    def emit(self, payload):
        self.stdout.write(render_json(payload).decode('utf-8').rstrip('\n'))

    def handle(self, *args, **options):
        source = options.get('config') or '--set'
        with quiet_loggers(options.get('quiet')):
            try:
                config = self.load(options)
                self.run(config, options)
            except ConfigError as e:
                raise CommandError(str(e), returncode=EXIT_CONFIG)
            except serializers.ValidationError as e:
                detail = '; '.join(str(m) for m in e.detail) if isinstance(e.detail, list) else str(e.detail)
                raise CommandError(f"{source}: {detail}", returncode=EXIT_CONFIG)
            except NotDetectedError as e:
                raise CommandError(f"{source}: {str(e)}", returncode=EXIT_NOT_DETECTED)
            except GseeError as e:
                raise CommandError(f"{source}: {str(e)}", returncode=EXIT_NUMERIC)

    def run(self, config, options):
        raise NotImplementedError('subclasses of ExperimentCommand must provide a run() method')
