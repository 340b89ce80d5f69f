"""
Django settings for the libexpert project.

libexpert mines git histories of library client projects, builds per-developer
expertise features and identifies likely library experts. There is no web
surface: Django provides configuration, the management-command dispatcher, the
run ledger database and the test runner.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv()


# Only used by Django internals; nothing here is signed or served.
SECRET_KEY = os.getenv('SECRET_KEY', 'libexpert-insecure-local-key')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    # Third party apps
    'rest_framework',

    # Local apps
    'corpus',
    'miner',
    'features',
    'preprocess',
    'learn',
    'cluster',
    'stats',
    'pipeline',
]


# Database
# Holds the run ledger only; mined data lives in the artifact files.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('LIBEXPERT_DB', str(BASE_DIR / 'db.sqlite3')),
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

LIBEXPERT_LOG_LEVEL = os.getenv('LIBEXPERT_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
            'stream': 'ext://sys.stderr',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': LIBEXPERT_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('libexpert', 'corpus', 'miner', 'features', 'preprocess',
                    'learn', 'cluster', 'stats', 'pipeline')
    },
}


# Code-hosting API (remote mode only)
LIBEXPERT_API_TOKEN = os.getenv('LIBEXPERT_API_TOKEN', '')
LIBEXPERT_API_URL = os.getenv('LIBEXPERT_API_URL', 'https://api.github.com')

# libexpert tunables
LIBEXPERT = {
    # corpus
    'MANIFEST_FILES': ['package.json', 'bower.json'],
    'SOURCE_EXTENSIONS': ['.js', '.jsx', '.mjs', '.cjs', '.ts', '.tsx', '.vue'],
    'VENDORED_DIRS': ['node_modules', 'bower_components', '.git'],

    # parallelism (joblib); 1 keeps everything in-process
    'JOBS': int(os.getenv('LIBEXPERT_JOBS', '1')),

    # preprocess
    'CORRELATION_THRESHOLD': 0.7,
    'SKEW_RATIO': 4.0,

    # learn
    'SMOTE_KNN': 3,
    'SMOTE_PCT': 0.30,
    'CV_FOLDS': 5,
    'FOREST_GRID': {
        'n_estimators': [100, 300],
        'max_depth': [None, 8],
        'max_features': ['sqrt', 'log2'],
    },
    'SVM_GRID': {
        'kernel': ['linear', 'rbf'],
        'C': [0.1, 1, 10, 100],
        # 'auto' is 1/p, 'scale' is 1/(p * var)
        'gamma': ['auto', 'scale'],
    },

    # cluster
    'KMEANS_RESTARTS': 50,
    'KMEANS_MAX_ITER': 300,
    'K_MAX': 8,
    'EXPERT_THRESHOLD_HIGH': 0.70,
    'EXPERT_THRESHOLD_LOW': 0.60,
    'EXPERT_BASE_RATE_SWITCH': 0.5,

    # stats
    'ALPHA': 0.05,
    'EXACT_TEST_LIMIT': 12,

    # hosting API
    'API_PAGE_SIZE': 100,
    'API_MAX_PAGES': 10,
    'API_MAX_RETRIES': 3,
    'API_TIMEOUT': 30,
}
