from django.apps import AppConfig


class OperatorNetConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'operator_net'

    def ready(self) -> None:
        import operator_net.signals.handlers
