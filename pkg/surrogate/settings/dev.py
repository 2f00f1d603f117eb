from .common import *

DEBUG = True

SECRET_KEY = 'django-insecure-surrogate-dev-only-key'

DATABASES = {}

ARTIFACTS_ROOT = os.path.join(BASE_DIR, 'artifacts')
