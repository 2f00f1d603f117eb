from django.dispatch import Signal

validation_improved = Signal()
learning_rate_reduced = Signal()
training_finished = Signal()
