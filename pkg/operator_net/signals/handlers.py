import logging

from django.dispatch import receiver

from operator_net.signals import learning_rate_reduced, training_finished, validation_improved

logger = logging.getLogger(__name__)


@receiver(validation_improved)
def log_new_best_checkpoint(sender, **kwargs):
    logger.info(
        'New best %s checkpoint at epoch %d (validation loss %.6e)',
        kwargs['phase'], kwargs['epoch'], kwargs['val_loss'])


@receiver(learning_rate_reduced)
def log_learning_rate_reduction(sender, **kwargs):
    logger.info('Learning rate reduced to %.3e at epoch %d', kwargs['lr'], kwargs['epoch'])


@receiver(training_finished)
def log_training_summary(sender, **kwargs):
    report = kwargs['report']
    logger.info(
        'Training of the %s model stopped (%s) after %d epochs; best epoch %d, '
        'validation loss %s, %.1f s',
        report.phase, report.stopped_reason, report.epochs_run, report.best_epoch,
        report.min_val_loss, report.wall_time_s)
