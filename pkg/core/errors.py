"""Excepciones del dominio (enlace NOMA, motores de outage, barrido).

Todas heredan de `OutageError` para que el comando pueda mapearlas a un
código de salida sin atrapar errores ajenos.
"""

from __future__ import annotations


class OutageError(Exception):
    """Base de todos los errores del proyecto."""


class DomainError(OutageError, ValueError):
    """Precondición o invariante violada (índices, rangos, parámetros)."""


class UnsupportedShapeError(DomainError):
    """La forma cerrada requiere m0 entero; usar el oráculo."""


class ComplexityError(OutageError):
    """La forma cerrada supera el límite de términos configurado."""


class QuadratureError(OutageError):
    """La cuadratura adaptativa no alcanzó la tolerancia pedida."""


class ScenarioError(DomainError):
    """Escenario JSON / preset inválido. `path` apunta a la clave culpable."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class SweepIOError(OutageError, OSError):
    """Fallo de escritura del CSV (incluye ruta y causa del SO)."""

    def __init__(self, path: str, cause: OSError):
        self.path = path
        self.cause = cause
        reason = getattr(cause, "strerror", None) or str(cause)
        super().__init__(f"No se pudo escribir {path}: {reason}")
