from django.apps import AppConfig


class AdsorptionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'adsorption'
