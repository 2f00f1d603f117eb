"""Exception hierarchy shared by the pipeline apps.

Each error carries the process exit code the management commands return
for it. Domain validation uses ``django.core.exceptions.ValidationError``
(exit code 2) and is not repeated here.
"""

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class PipelineError(Exception):
    exit_code = 1


class NumericalError(PipelineError):
    exit_code = EXIT_NUMERICAL


class NonFiniteGradientError(NumericalError):
    pass


class DegenerateNormError(NumericalError):
    pass


class TrainingDiverged(NumericalError):
    """
    Raised when the training loss stops being finite.
    epoch: the epoch at which the non-finite loss was observed.
    model: the best finite checkpoint seen before the failure.
    """

    def __init__(self, epoch, model=None):
        super().__init__(f'Non-finite training loss at epoch {epoch}.')
        self.epoch = epoch
        self.model = model


class ArtifactIOError(PipelineError):
    exit_code = EXIT_IO


class DatasetBuildError(PipelineError):
    def __init__(self, index, cause):
        super().__init__(f'Sample {index} failed: {cause}')
        self.index = index
        self.cause = cause

    @property
    def exit_code(self):
        return exit_code_for(self.cause)


def exit_code_for(error):
    from django.core.exceptions import ValidationError
    from rest_framework.exceptions import ValidationError as APIValidationError

    if isinstance(error, (ValidationError, APIValidationError)):
        return EXIT_VALIDATION
    if isinstance(error, PipelineError):
        return error.exit_code
    if isinstance(error, OSError):
        return EXIT_IO
    return 1
