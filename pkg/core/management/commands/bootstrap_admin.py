import os

from django.contrib.auth import get_user_model
from django.core.management.base import BaseCommand


def _env(*names: str, default: str = "") -> str:
    for name in names:
        value = (os.environ.get(name) or "").strip()
        if value:
            return value
    return default


class Command(BaseCommand):
    help = (
        "Crea el superusuario para el navegador de corridas, solo si todavía no existe "
        "ninguno. Lee ADMIN_USERNAME / ADMIN_PASSWORD / ADMIN_EMAIL."
    )

    def handle(self, *args, **options):
        username = _env("ADMIN_USERNAME", "ADMIN_USER", "DJANGO_SUPERUSER_USERNAME")
        password = _env("ADMIN_PASSWORD", "DJANGO_SUPERUSER_PASSWORD")
        email = _env("ADMIN_EMAIL", "DJANGO_SUPERUSER_EMAIL", default="admin@example.com")

        if not username or not password:
            self.stdout.write(
                self.style.WARNING("bootstrap_admin: faltan ADMIN_USERNAME y/o ADMIN_PASSWORD; no se creó usuario.")
            )
            return

        User = get_user_model()
        if User.objects.filter(is_superuser=True).exists():
            self.stdout.write(self.style.SUCCESS("bootstrap_admin: ya existe un superusuario; sin cambios."))
            return

        User.objects.create_superuser(username=username, email=email, password=password)
        self.stdout.write(self.style.SUCCESS(f"bootstrap_admin: superusuario '{username}' creado."))
