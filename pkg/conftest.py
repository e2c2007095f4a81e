import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'mirror_bec.settings')
django.setup()
