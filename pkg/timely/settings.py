"""
Django settings for the timely project.

Solver budgets and tolerances live here as plain module constants so that the
solver package can import them without a configured Django environment.
Every value can be overridden from the environment.
"""

import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'timely-local-only')

DEBUG = True

ALLOWED_HOSTS = ['127.0.0.1', 'localhost']

# Application definition

INSTALLED_APPS = [
    'cli.apps.CliConfig',
    'django_rq',
]

# The toolkit keeps no relational state; the dummy backend is enough for
# management commands and SimpleTestCase.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

RQ_QUEUES = {
    'default': {
        'HOST': os.getenv('REDIS_HOST', '127.0.0.1'),
        'PORT': int(os.getenv('REDIS_PORT', 6379)),
        'DB': 0,
    },
    'sweep': {
        'HOST': os.getenv('REDIS_HOST', '127.0.0.1'),
        'PORT': int(os.getenv('REDIS_PORT', 6379)),
        'DB': 0,
        'DEFAULT_TIMEOUT': 3600,
    },
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'ERROR',
            'propagate': True,
        },
        'solver': {
            'handlers': ['console'],
            'level': os.getenv('TT_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'cli': {
            'handlers': ['console'],
            'level': os.getenv('TT_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}

# Solver budgets. Human notation ("2^24", "16M", "1e6") is accepted.
TT_EXHAUSTIVE_BUDGET = os.getenv('TT_EXHAUSTIVE_BUDGET', '2^24')
TT_GAP_BRUTE_FORCE_BUDGET = os.getenv('TT_GAP_BRUTE_FORCE_BUDGET', '2^22')
TT_GAP_NODE_BUDGET = os.getenv('TT_GAP_NODE_BUDGET', '1M')
TT_MDP_STATE_BUDGET = os.getenv('TT_MDP_STATE_BUDGET', '2^26')
TT_REWARD_STATE_BUDGET = os.getenv('TT_REWARD_STATE_BUDGET', '1e6')
TT_BRUTE_FORCE_REWARD_BUDGET = os.getenv('TT_BRUTE_FORCE_REWARD_BUDGET', '1e7')

# Numerical tolerances
TT_FRACTIONAL_TOL = float(os.getenv('TT_FRACTIONAL_TOL', 1e-9))
TT_BOUND_TOL = float(os.getenv('TT_BOUND_TOL', 1e-9))
TT_STATIONARY_TOL = float(os.getenv('TT_STATIONARY_TOL', 1e-10))

# Sweep defaults
TT_SWEEP_QUEUE = os.getenv('TT_SWEEP_QUEUE', None)
TT_SWEEP_TIMEOUT = int(os.getenv('TT_SWEEP_TIMEOUT', 3600))
TT_SIMULATION_INTERVALS = int(os.getenv('TT_SIMULATION_INTERVALS', 10000))

try:
    from .local_settings import *
except ModuleNotFoundError:
    pass
