"""Simulador Monte Carlo de la outage (nivel potencia Gamma de la SINDR).

Cada lote n usa su propio generador Philox derivado de (seed, stream, n),
así que el resultado es idéntico bit a bit sin importar cuántos workers
procesen los lotes ni en qué orden: los conteos enteros se suman al final.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .link_model import SindrCoefficients

logger = logging.getLogger(__name__)

MC_STREAM = 0
ORACLE_STREAM = 1


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 20240101
    batch_size: int = 65_536

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials debe ser >= 1: {self.trials}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size debe ser >= 1: {self.batch_size}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed debe ser un entero sin signo de 64 bits: {self.seed}")

    def batches(self) -> list[tuple[int, int]]:
        """[(índice de lote, tamaño), ...] cubriendo exactamente `trials`."""
        full, rest = divmod(self.trials, self.batch_size)
        plan = [(n, self.batch_size) for n in range(full)]
        if rest:
            plan.append((full, rest))
        return plan


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise DomainError(f"p_hat fuera de [0, 1]: {self.p_hat}")
        if not self.stderr >= 0:
            raise DomainError(f"stderr negativo: {self.stderr}")

    @classmethod
    def from_counts(cls, hits: int, trials: int, seed: int) -> "OutageEstimate":
        p = hits / trials
        return cls(p_hat=p, stderr=math.sqrt(p * (1.0 - p) / trials), trials=trials, seed=seed)


def batch_generator(seed: int, batch_index: int, stream: int = MC_STREAM) -> np.random.Generator:
    """Subflujo contador: Philox con clave derivada de (seed, stream, lote)."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(stream, batch_index))
    return np.random.Generator(np.random.Philox(seq))


def draw_gamma(shape: float, scale: float, rng: np.random.Generator) -> float:
    """Una variable Gamma(shape, scale) exacta (rechazo de Marsaglia-Tsang en numpy)."""
    if not shape >= 0.5:
        raise DomainError(f"shape < 0.5: {shape}")
    if not scale > 0:
        raise DomainError(f"scale debe ser > 0: {scale}")
    return float(rng.gamma(shape, scale))


def interference_samples(coeffs: SindrCoefficients, rng: np.random.Generator, size: int) -> np.ndarray:
    """Y = sum_k Y_k para `size` realizaciones (ceros si K = 0)."""
    y = np.zeros(size)
    for m_k, beta_k in coeffs.interf_gammas:
        y += rng.gamma(m_k, beta_k, size)
    return y


def sindr_samples(coeffs: SindrCoefficients, rng: np.random.Generator, size: int) -> np.ndarray:
    """Realizaciones de a X / (b X + Y + Sigma). X se sortea antes que los Y_k."""
    m0, beta0 = coeffs.signal_gamma
    x = rng.gamma(m0, beta0, size)
    y = interference_samples(coeffs, rng, size)
    return coeffs.a * x / (coeffs.b * x + y + coeffs.sigma_total)


def sindr_sample(coeffs: SindrCoefficients, rng: np.random.Generator) -> float:
    return float(sindr_samples(coeffs, rng, 1)[0])


def _deterministic_outcome(coeffs: SindrCoefficients, threshold: float) -> float | None:
    """0 o 1 cuando el resultado no depende del sorteo."""
    if threshold == 0:
        return 0.0
    if coeffs.a - coeffs.b * threshold <= 0:
        return 1.0
    return None


def run_batches(
    plan: Sequence[tuple[int, int]],
    work: Callable[[int, int], object],
    workers: int = 1,
) -> list:
    """Ejecuta `work(batch_index, size)` por lote y devuelve resultados en orden de plan."""
    if workers <= 1 or len(plan) <= 1:
        return [work(n, size) for n, size in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: work(*item), plan))


def estimate_outage(
    coeffs: SindrCoefficients,
    threshold: float,
    config: McConfig,
    workers: int = 1,
) -> OutageEstimate:
    """p_hat = fracción de realizaciones con SINDR < v."""
    if threshold < 0:
        raise DomainError(f"umbral negativo: {threshold}")
    fixed = _deterministic_outcome(coeffs, threshold)
    if fixed is not None:
        return OutageEstimate(p_hat=fixed, stderr=0.0, trials=config.trials, seed=config.seed)

    def work(batch_index: int, size: int) -> int:
        rng = batch_generator(config.seed, batch_index, MC_STREAM)
        return int(np.count_nonzero(sindr_samples(coeffs, rng, size) < threshold))

    plan = config.batches()
    logger.debug("MC: %d lotes, trials=%d, seed=%d, workers=%d", len(plan), config.trials, config.seed, workers)
    hits = sum(run_batches(plan, work, workers))
    return OutageEstimate.from_counts(hits, config.trials, config.seed)


def estimate_outage_curve(
    coeffs: SindrCoefficients,
    thresholds: Sequence[float],
    config: McConfig,
    workers: int = 1,
) -> list[OutageEstimate]:
    """Outage empírica en varios umbrales sobre el mismo conjunto de muestras."""
    levels = np.asarray(thresholds, dtype=float)
    if np.any(levels < 0):
        raise DomainError("umbral negativo en la curva")

    def work(batch_index: int, size: int) -> np.ndarray:
        rng = batch_generator(config.seed, batch_index, MC_STREAM)
        s = np.sort(sindr_samples(coeffs, rng, size))
        return np.searchsorted(s, levels, side="left")

    counts = np.sum(run_batches(config.batches(), work, workers), axis=0)
    out = []
    for v, hits in zip(levels, counts):
        fixed = _deterministic_outcome(coeffs, float(v))
        if fixed is not None:
            out.append(OutageEstimate(p_hat=fixed, stderr=0.0, trials=config.trials, seed=config.seed))
        else:
            out.append(OutageEstimate.from_counts(int(hits), config.trials, config.seed))
    return out
