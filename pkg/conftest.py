"""Wiring para correr los tests de Django con pytest (equivale a `manage.py test`)."""

import os

import django
import pytest

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "nomapanel.settings")
django.setup()


@pytest.fixture(scope="session", autouse=True)
def _django_test_environment():
    from django.test.utils import setup_databases, setup_test_environment, teardown_databases, teardown_test_environment

    setup_test_environment()
    old_config = setup_databases(verbosity=0, interactive=False)
    yield
    teardown_databases(old_config, verbosity=0)
    teardown_test_environment()
