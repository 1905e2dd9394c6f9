from django.apps import AppConfig


class AcdfConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'acdf'
    verbose_name = 'Approximate CDF'
