"""
Django settings for the mirror_bec project.

The project has no web surface: Django hosts the management commands,
the settings-driven logging configuration and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# No sessions, cookies or signed data are ever produced; the key only
# satisfies Django's startup checks.
SECRET_KEY = 'mirror-bec-offline-simulation'

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    # my apps
    'simulation.apps.SimulationConfig',

    # Django's built-in apps
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # third-party apps
    'rest_framework',
]

# Database
# Only the test runner touches it; the simulation stores nothing.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework settings
# Serializers validate scenario files only; no API is exposed.
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}

# Logging
# Management commands raise the 'simulation' level from --verbosity.
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'simulation': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}

# Simulation defaults, overridable per deployment.
# See simulation/conf.py for the full list of keys.
SIMULATION = {
    'TAIL_TOLERANCE': 1e-10,
    'AMPLITUDE_GAIN_CAP': 3.0,
    'AMPLITUDE_INDEX_CAP': 4096,
    'LEAKAGE_THRESHOLD': 1e-8,
    'DEFAULT_N_MAX': 80,
    'RESONANCE_CUTOFF_LINEWIDTHS': 10.0,
    'EXPERIMENTAL_DEGRADATION': 0.13,
    'CSV_FLOAT_FORMAT': '%.17g',
    'SPECTRUM_CHUNK': 65536,
}
