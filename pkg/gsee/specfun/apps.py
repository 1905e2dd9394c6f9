from django.apps import AppConfig


class SpecfunConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'specfun'
    verbose_name = 'Special functions'
