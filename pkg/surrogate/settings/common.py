"""
Django settings for the surrogate project.

The project has no web surface; Django provides the settings layer, the
management commands (``python manage.py dataset|solve|train|eval|export``),
signals and logging configuration.

For more information on this file, see
https://docs.djangoproject.com/en/3.2/topics/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'adsorption',
    'operator_net',
]

# Internationalization
# https://docs.djangoproject.com/en/3.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

ARTIFACTS_ROOT = os.path.join(BASE_DIR, 'artifacts')

SURROGATE = {
    'PARAMS_FILE': os.path.join(BASE_DIR, 'params.default.json'),
    'GRID': {
        'n_x': 100,
        'n_t': 101,
        'substeps': 1,
    },
    'DATASET': {
        'n_samples': 10000,
        'split_fractions': [0.72, 0.18, 0.10],
        'ood_samples': 1000,
    },
    'ARCHITECTURE': {
        'hidden_layers': 6,
        'width': 200,
        'latent': 100,
        'omega0': 20.0,
        'output_bias': True,
    },
    'TRAIN': {
        'lambda_ic': 3.0,
        'lambda_data': 1.0,
        'lr': 1e-4,
        'min_lr': 1e-7,
        'max_epochs': 500000,
        'val_every': 100,
        'early_stop_patience': 10000,
        'scheduler_factor': 0.5,
        'scheduler_patience': 2000,
        'scheduler_threshold': 1e-6,
        'batch_size': 64,
    },
    # (lambda_ic, lambda_data) pairs tried by the ablate command.
    'LAMBDA_ABLATION': '3:1,1:1,1:3,10:1,0:1',
    # Reported full-scale figures, carried as metadata only.
    'REFERENCE_METRICS': {
        'test_mean_rel_l2_gas_pct': 0.1684,
        'ood_mean_rel_l2_gas_pct': 2.282,
        'ood_parity_caption_pct': 0.4212,
    },
    'THREADS': 1,
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler'
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': 'pipeline.log',
            'formatter': 'verbose'
        }
    },
    'loggers': {
        '': {
            'handlers': ['console', 'file'],
            'level': os.environ.get('DJANGO_LOG_LEVEL', 'INFO')
        }
    },
    'formatters': {
        'verbose': {
            'format': '{asctime} ({levelname}) - {name} - {message}',
            'style': '{'
        }
    }
}
