"""Barrido de SNR de transmisión y emisión CSV de curvas de outage.

El eje "SNR de transmisión" es P en dB con sigma^2 = 1. Para cada punto
(snr, usuario, esquema, método) se produce una fila; el orden de salida es
siempre (snr, usuario, esquema, método) sin importar cuántos workers
procesen la grilla.
"""

from __future__ import annotations

import csv
import enum
import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TextIO

from .errors import ComplexityError, DomainError, OutageError, QuadratureError, SweepIOError, UnsupportedShapeError
from .link_model import Scenario, Scheme, db_to_linear
from .mc_engine import McConfig, estimate_outage
from .oracle_engine import outage_semi_analytic
from .outage_engine import DEFAULT_MAX_TERMS, OutageQuery, outage_closed_form, outage_query_for_user

logger = logging.getLogger(__name__)

CSV_HEADER = ("snr_db", "user", "scheme", "method", "p_out", "stderr", "trials")

SCHEME_ORDER = (Scheme.NOMA, Scheme.OMA)


class Method(str, enum.Enum):
    ANALYTIC = "analytic"
    MC = "mc"
    ORACLE = "oracle"


METHOD_ORDER = (Method.ANALYTIC, Method.MC, Method.ORACLE)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    user: int
    scheme: Scheme
    method: Method
    p_out: float | None
    stderr: float | None = None
    trials: int | None = None
    error: str = ""

    def __post_init__(self):
        if self.p_out is not None and not 0.0 <= self.p_out <= 1.0:
            raise DomainError(f"p_out fuera de [0, 1]: {self.p_out}")
        if self.p_out is not None and (self.stderr is None) != (self.method is Method.ANALYTIC):
            raise DomainError("stderr va si y solo si el método no es analítico")

    @property
    def sort_key(self) -> tuple:
        return (self.snr_db, self.user, SCHEME_ORDER.index(self.scheme), METHOD_ORDER.index(self.method))


@dataclass(frozen=True)
class SweepSettings:
    """Parámetros de ejecución que no cambian el resultado salvo trials/seed."""

    mc: McConfig = McConfig()
    oracle_samples: int = 1_000_000
    max_terms: int = DEFAULT_MAX_TERMS
    workers: int = 1


def parse_snr_grid(text: str) -> list[float]:
    """'start:stop:step' (extremo incluido) o lista separada por comas."""
    text = (text or "").strip()
    if not text:
        raise DomainError("grilla de SNR vacía")
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise DomainError(f"el paso de SNR debe ser > 0: {step}")
            if stop < start:
                raise DomainError(f"SNR final menor que la inicial: {text}")
            n = int(round((stop - start) / step))
            grid = [start + i * step for i in range(n + 1)]
            if grid[-1] > stop + 1e-9 * step:
                grid.pop()
            return [round(g, 12) for g in grid]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise DomainError(f"grilla de SNR inválida {text!r}: {exc}") from exc


def _point_rows(
    scenario: Scenario,
    snr_db: float,
    user: int,
    scheme: Scheme,
    methods: Sequence[Method],
    settings: SweepSettings,
) -> list[SweepRow]:
    point = replace(scenario, tx_power=db_to_linear(snr_db))
    coeffs, v = outage_query_for_user(point, user, point.threshold, scheme)
    rows = []
    for method in methods:
        base = {"snr_db": snr_db, "user": user, "scheme": scheme, "method": method}
        try:
            if method is Method.ANALYTIC:
                p = outage_closed_form(OutageQuery(coeffs, v), max_terms=settings.max_terms)
                rows.append(SweepRow(**base, p_out=p))
            elif method is Method.MC:
                est = estimate_outage(coeffs, v, settings.mc)
                rows.append(SweepRow(**base, p_out=est.p_hat, stderr=est.stderr, trials=est.trials))
            else:
                est = outage_semi_analytic(
                    coeffs, v, settings.oracle_samples, settings.mc.seed, batch_size=settings.mc.batch_size
                )
                rows.append(SweepRow(**base, p_out=est.p_hat, stderr=est.stderr, trials=est.trials))
        except (UnsupportedShapeError, ComplexityError, QuadratureError) as exc:
            logger.warning("snr=%s U%d %s %s: %s", snr_db, user, scheme.value, method.value, exc)
            rows.append(SweepRow(**base, p_out=None, error=str(exc)))
    return rows


def run_sweep(
    scenario: Scenario,
    snr_grid_db: Sequence[float],
    methods: Iterable[Method | str],
    schemes: Iterable[Scheme | str],
    settings: SweepSettings = SweepSettings(),
    users: Sequence[int] | None = None,
) -> list[SweepRow]:
    """Una fila por (snr, usuario, esquema, método), en orden determinístico.

    Todos los puntos usan la misma semilla (números aleatorios comunes).
    """
    grid = list(snr_grid_db)
    if not grid:
        raise DomainError("grilla de SNR vacía")
    method_set = {Method(m) for m in methods}
    scheme_set = {Scheme(s) for s in schemes}
    if not method_set:
        raise DomainError("no se pidió ningún método")
    if not scheme_set:
        raise DomainError("no se pidió ningún esquema")
    ordered_methods = [m for m in METHOD_ORDER if m in method_set]
    ordered_schemes = [s for s in SCHEME_ORDER if s in scheme_set]
    users = list(users) if users else list(range(1, scenario.n_users + 1))
    for u in users:
        scenario.user(u)

    jobs = [(snr, u, s) for snr in grid for u in users for s in ordered_schemes]

    def work(job) -> list[SweepRow]:
        snr, u, s = job
        rows = _point_rows(scenario, snr, u, s, ordered_methods, settings)
        logger.info("punto snr=%s dB U%d %s listo", snr, u, s.value)
        return rows

    if settings.workers <= 1:
        chunks = [work(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            chunks = list(pool.map(work, jobs))

    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: r.sort_key)
    return rows


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".17g")


def write_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [
                _fmt(r.snr_db),
                r.user,
                r.scheme.value,
                r.method.value,
                _fmt(r.p_out),
                _fmt(r.stderr),
                "" if r.trials is None else r.trials,
            ]
        )


def emit_csv(rows: Iterable[SweepRow], output_path: str | Path) -> None:
    path = Path(output_path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    except OSError as exc:
        raise SweepIOError(str(path), exc) from exc


__all__ = [
    "CSV_HEADER",
    "Method",
    "OutageError",
    "SweepRow",
    "SweepSettings",
    "emit_csv",
    "parse_snr_grid",
    "run_sweep",
    "write_csv",
]
