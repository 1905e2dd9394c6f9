from django.conf import settings


def setting_default(key):
    """Serializer default that reads settings.GSEE_DEFAULTS at validation time"""
    def default():
        return settings.GSEE_DEFAULTS[key]
    default.__name__ = f"default_{key}"
    return default
