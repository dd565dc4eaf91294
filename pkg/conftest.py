"""Pytest wiring: configure Django settings before test collection."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'project.settings')
django.setup()
