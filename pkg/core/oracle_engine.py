"""Oráculo semi-analítico de la outage.

Evalúa la integral sin expandir: condicionado a Y, la outage es la CDF
exacta de X, P(m0, v (Sigma + Y) / (beta0 (a - b v))). Solo se promedia
sobre Y (muestreo) o, con un único interferente, se integra por cuadratura
adaptativa. No usa composiciones ni la serie de la forma cerrada.
"""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np
from scipy import integrate, stats

from .errors import DomainError, QuadratureError
from .link_model import SindrCoefficients
from .mc_engine import (
    ORACLE_STREAM,
    McConfig,
    OutageEstimate,
    batch_generator,
    interference_samples,
    run_batches,
)
from .outage_engine import regularized_lower_gamma

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-10


def _conditional_rate(coeffs: SindrCoefficients, threshold: float) -> float:
    margin = coeffs.a - coeffs.b * threshold
    return threshold / (coeffs.signal_gamma[1] * margin)


def outage_semi_analytic(
    coeffs: SindrCoefficients,
    threshold: float,
    samples: int,
    seed: int,
    batch_size: int = 65_536,
    workers: int = 1,
) -> OutageEstimate:
    """mean_s P(m0, c (Sigma + Y_s)); stderr de la varianza muestral de P."""
    if samples < 1:
        raise DomainError(f"samples debe ser >= 1: {samples}")
    if threshold < 0:
        raise DomainError(f"umbral negativo: {threshold}")
    if coeffs.a - coeffs.b * threshold <= 0:
        return OutageEstimate(p_hat=1.0, stderr=0.0, trials=samples, seed=seed)
    if threshold == 0:
        return OutageEstimate(p_hat=0.0, stderr=0.0, trials=samples, seed=seed)

    m0 = coeffs.signal_gamma[0]
    c = _conditional_rate(coeffs, threshold)

    if coeffs.n_interferers == 0:
        p = regularized_lower_gamma(m0, c * coeffs.sigma_total)
        return OutageEstimate(p_hat=min(1.0, max(0.0, p)), stderr=0.0, trials=samples, seed=seed)

    config = McConfig(trials=samples, seed=seed, batch_size=batch_size)

    def work(batch_index: int, size: int) -> tuple[float, float]:
        rng = batch_generator(seed, batch_index, ORACLE_STREAM)
        y = interference_samples(coeffs, rng, size)
        p = regularized_lower_gamma(m0, c * (coeffs.sigma_total + y))
        return math.fsum(p), math.fsum(p * p)

    plan = config.batches()
    logger.debug("oráculo: %d muestras en %d lotes, K=%d", samples, len(plan), coeffs.n_interferers)
    sums = run_batches(plan, work, workers)
    s1 = math.fsum(s for s, _ in sums)
    s2 = math.fsum(s for _, s in sums)

    mean_p = s1 / samples
    if samples > 1:
        var_p = max(0.0, (s2 - samples * mean_p * mean_p) / (samples - 1))
        stderr = math.sqrt(var_p / samples)
    else:
        stderr = 0.0
    return OutageEstimate(p_hat=min(1.0, max(0.0, mean_p)), stderr=stderr, trials=samples, seed=seed)


def outage_quadrature_k1(coeffs: SindrCoefficients, threshold: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Outage con un solo interferente por cuadratura adaptativa (determinística).

    Se integra en u = y / beta1, así la densidad es Gamma(m1, 1) sin importar
    la escala del interferente.
    """
    if coeffs.n_interferers != 1:
        raise DomainError(f"outage_quadrature_k1 requiere K = 1 (K={coeffs.n_interferers})")
    if threshold < 0:
        raise DomainError(f"umbral negativo: {threshold}")
    if coeffs.a - coeffs.b * threshold <= 0:
        return 1.0
    if threshold == 0:
        return 0.0

    m0 = coeffs.signal_gamma[0]
    (m1, beta1), = coeffs.interf_gammas
    c = _conditional_rate(coeffs, threshold)
    density = stats.gamma(m1)

    def integrand(u: float) -> float:
        return regularized_lower_gamma(m0, c * (coeffs.sigma_total + beta1 * u)) * density.pdf(u)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"la cuadratura no convergió a rel_tol={rel_tol}: {exc}") from exc

    logger.debug("cuadratura K=1: valor=%.17g error estimado=%.3g", value, abserr)
    return min(1.0, max(0.0, value))
