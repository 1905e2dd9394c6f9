"""
Django settings for the gsee project.

The project has no HTTP surface and no database: Django provides settings,
logging, the management-command CLI and the test runner for the spectral-CDF
ground-state energy estimation toolkit.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()


SECRET_KEY = os.environ.get('SECRET_KEY', 'gsee-local-only-key-not-used-for-signing')

DEBUG = os.environ.get('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'specfun',
    'hamiltonian',
    'states',
    'evolution',
    'fourier',
    'acdf',
    'detect',
    'resources',
    'experiments',
]

# Packages whose loggers are configured below and silenced by --quiet
GSEE_APPS = ['gsee'] + [app for app in INSTALLED_APPS if '.' not in app and app != 'rest_framework']

# Serializers and parsers only; no views are routed
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'UNAUTHENTICATED_USER': None,
    'COERCE_DECIMAL_TO_STRING': False,
}


# No database: every artifact is a file
DATABASES = {}

TIME_ZONE = 'UTC'

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# ==================== EXPERIMENT SETTINGS ====================
# Where run artifacts go unless --out is given
GSEE_OUTPUT_DIR = Path(os.getenv('GSEE_OUTPUT_DIR', BASE_DIR / 'runs'))

# Defaults for every tunable the config files may omit
GSEE_DEFAULTS = {
    'margin': 0.1,
    'grid_points': 4096,
    'steps_per_unit': 8,
    'steps_policy': 'fixed',
    'trotter_prefactor': 1.0,
    'trotter_order': 2,
    'repetitions': 10,
    'batch_size': 10_000,
    'sampling_mode': 'single-shot',
    'root_seed': 0,
    'detection_method': 'rupture',
    'alpha': 0.01,
    'orientation': 'standard',
    'guard_k': 2.0,
    'guard_l': 20,
    'scan_s': 3.0,
    'scan_window': 40,
    'scan_fraction': 0.8,
    'percentile_gate': False,
    'gate_percentile': 25.0,
    'gate_s': 1.0,
    'aggregate': 'energies',
    'mom_groups': 5,
    'vartheta': 0.05,
}


# ==================== LOGGING ====================
LOG_LEVEL = os.getenv('GSEE_LOG_LEVEL', 'INFO')
LOGS_DIR = Path(os.getenv('GSEE_LOG_DIR', BASE_DIR / 'logs'))

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'gsee.log',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': False,
        },
        **{
            app: {
                'handlers': ['console', 'file'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in GSEE_APPS
        },
    },
}

# Create logs directory if it doesn't exist
LOGS_DIR.mkdir(parents=True, exist_ok=True)
