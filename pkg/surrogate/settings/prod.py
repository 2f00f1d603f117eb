import os
from .common import *

DEBUG = False

SECRET_KEY = os.environ['SECRET_KEY']

DATABASES = {}

ARTIFACTS_ROOT = os.environ['ARTIFACTS_ROOT']

SURROGATE['THREADS'] = int(os.environ.get('SURROGATE_THREADS', '1'))
