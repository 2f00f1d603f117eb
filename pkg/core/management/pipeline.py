import logging
import os
import shutil
from contextlib import contextmanager

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError as APIValidationError

from core.exceptions import ArtifactIOError, exit_code_for
from core.serializers import resolve_run_config

logger = logging.getLogger(__name__)


def _message(error):
    if isinstance(error, APIValidationError):
        return f'Invalid configuration: {error.detail}'
    if isinstance(error, ValidationError):
        if hasattr(error, 'error_dict'):
            return 'Invalid input: ' + '; '.join(
                f'{field}: {" ".join(messages)}'
                for field, messages in error.message_dict.items())
        return 'Invalid input: ' + ' '.join(error.messages)
    return str(error)


class PipelineCommand(BaseCommand):
    """
    Base for the pipeline subcommands. Subclasses implement ``run`` and get
    the global flags plus the mapping from pipeline errors to exit codes:
    0 ok, 2 validation, 3 numerical failure, 4 I/O.
    """
    requires_system_checks = []
    requires_seed = False
    requires_out = True

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='Master seed; required where sampling happens.')
        parser.add_argument('--out', help='Output directory.')
        parser.add_argument('--config', help='JSON run configuration.')
        parser.add_argument('--threads', type=int, help='Worker threads for batched solves.')
        parser.add_argument('--f32', action='store_true', default=None,
                            help='Build networks in 32-bit floats.')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            if self.requires_seed and options['seed'] is None:
                raise ValidationError({'seed': f'{self.command_name} needs --seed.'})
            if self.requires_out and not options['out']:
                raise ValidationError({'out': f'{self.command_name} needs --out.'})
            config = resolve_run_config(
                options['config'],
                seed=options['seed'],
                out=options['out'],
                threads=options['threads'],
                f32=options['f32'],
                **self.config_overrides(options))
            self.run(config, options)
        except CommandError:
            raise
        except Exception as exc:
            code = exit_code_for(exc)
            if code == 1:
                logger.exception('%s failed', self.command_name)
            else:
                logger.error('%s failed: %s', self.command_name, _message(exc))
            raise CommandError(_message(exc), returncode=code) from exc

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def config_overrides(self, options):
        return {}

    def run(self, config, options):
        raise NotImplementedError

    def require_directory(self, path, label):
        if not path or not os.path.isdir(path):
            raise ArtifactIOError(f'{label} directory {path!r} does not exist.')
        return path


@contextmanager
def atomic_directory(target):
    """Builds into a sibling temporary directory and renames it over ``target`` on success."""
    target = os.path.abspath(target)
    staging = f'{target}.partial-{os.getpid()}'
    shutil.rmtree(staging, ignore_errors=True)
    os.makedirs(staging)
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if os.path.isdir(target):
        shutil.rmtree(target)
    os.replace(staging, target)

