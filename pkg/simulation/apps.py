from django.apps import AppConfig


class SimulationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'simulation'
    verbose_name = 'Mirror-BEC simulation'
