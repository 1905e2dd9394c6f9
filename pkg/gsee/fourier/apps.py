from django.apps import AppConfig


class FourierConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'fourier'
    verbose_name = 'Fourier filter'
