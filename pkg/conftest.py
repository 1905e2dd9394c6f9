import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gsee.settings')
django.setup()
