"""Motor analítico de probabilidad de outage (forma cerrada exacta).

P_out = Pr[a X / (b X + Y + Sigma) < v]
      = 1 - exp(-c Sigma) sum_{q<m0} c^q sum_{t<=q} Sigma^(q-t)/(q-t)!
              sum_{l_1+..+l_K = t} prod_k Gamma(l_k+m_k)/(l_k! Gamma(m_k))
                                          beta_k^l_k (1 + c beta_k)^-(l_k+m_k)

con c = v / (beta0 (a - b v)). Requiere m0 entero. Cada término se arma en
dominio logarítmico y se exponencia una vez; las sumas son de términos
positivos y se acumulan con `math.fsum` (redondeo exacto).

Si a - b v <= 0 la SINDR nunca alcanza el umbral: P_out = 1.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import special

from .errors import ComplexityError, DomainError, UnsupportedShapeError
from .link_model import (
    Scenario,
    Scheme,
    SindrCoefficients,
    build_oma_coefficients,
    build_sindr_coefficients,
    limiting_sindr_terms,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_TERMS = 10**8

# hasta acá math.factorial entra holgado en un float
_EXACT_FACTORIAL_LIMIT = 171

# la cola se corta cuando el resto estimado queda por debajo de esto (relativo)
_TAIL_REL_TOL = 1e-17


# ---------------------------------------------------------------------------
# Funciones especiales


def log_gamma(x: float) -> float:
    """ln Gamma(x) para x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requiere x > 0: {x!r}")
    if float(x).is_integer() and x <= _EXACT_FACTORIAL_LIMIT:
        return math.log(math.factorial(int(x) - 1))
    return float(special.gammaln(x))


def _is_integer_shape(shape: float) -> bool:
    return float(shape).is_integer() and shape >= 1


def regularized_upper_gamma(shape: float, x):
    """Q(m, x) = Gamma(m, x) / Gamma(m).

    Para m entero usa la suma de Poisson finita e^-x sum_{q<m} x^q/q!;
    acepta escalares o arrays de numpy (mismo tipo de salida).
    """
    if not shape > 0:
        raise DomainError(f"shape debe ser > 0: {shape!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("regularized_upper_gamma requiere x >= 0")

    if _is_integer_shape(shape) and shape <= _EXACT_FACTORIAL_LIMIT:
        q = np.arange(int(shape), dtype=float).reshape((-1,) + (1,) * arr.ndim)
        log_terms = special.xlogy(q, arr) - arr - special.gammaln(q + 1.0)
        out = np.exp(log_terms).sum(axis=0)
        out = np.clip(out, 0.0, 1.0)
    else:
        out = special.gammaincc(shape, arr)

    if np.ndim(x) == 0:
        return float(out)
    return out


def regularized_lower_gamma(shape: float, x):
    """P(m, x) = 1 - Q(m, x), calculada directo (sin cancelación)."""
    if not shape > 0:
        raise DomainError(f"shape debe ser > 0: {shape!r}")
    out = special.gammainc(shape, np.asarray(x, dtype=float))
    if np.ndim(x) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Composiciones débiles


class CompositionCursor:
    """Recorre las composiciones débiles de `total` en `parts` partes.

    Orden colexicográfico: se compara la tupla invertida, así que la primera
    es (t, 0, ..., 0) y la última (0, ..., 0, t).
    """

    def __init__(self, total: int, parts: int):
        if total < 0:
            raise DomainError(f"total negativo: {total}")
        if parts < 0:
            raise DomainError(f"parts negativo: {parts}")
        if parts == 0 and total > 0:
            raise DomainError(f"no hay composiciones de {total} en 0 partes")
        self.total = total
        self.parts = parts
        self.current: list[int] = [total] + [0] * (parts - 1) if parts else []
        self._done = False

    def advance(self) -> bool:
        """Pasa a la siguiente composición; False si ya era la última."""
        c = self.current
        if self._done:
            return False
        if self.parts <= 1 or self.total == 0:
            self._done = True
            return False
        i = next(idx for idx, v in enumerate(c) if v > 0)
        if i == self.parts - 1:
            self._done = True
            return False
        moved = c[i]
        c[i] = 0
        c[i + 1] += 1
        c[0] = moved - 1
        return True

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        if self._done:
            return
        yield tuple(self.current)
        while self.advance():
            yield tuple(self.current)


def enumerate_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    return iter(CompositionCursor(total, parts))


def count_compositions(total: int, parts: int) -> int:
    if parts == 0:
        return 1 if total == 0 else 0
    return comb(total + parts - 1, parts - 1)


def count_closed_form_terms(m0: int, parts: int) -> int:
    """Cantidad de términos de la forma cerrada: sum_q sum_{t<=q} C(t+K-1, K-1)."""
    return sum(count_compositions(t, parts) for q in range(m0) for t in range(q + 1))


# ---------------------------------------------------------------------------
# Forma cerrada


@dataclass(frozen=True)
class OutageQuery:
    coeffs: SindrCoefficients
    threshold: float

    def __post_init__(self):
        if not self.threshold >= 0:
            raise DomainError(f"umbral negativo: {self.threshold}")
        m0 = self.coeffs.signal_gamma[0]
        if not _is_integer_shape(m0):
            raise UnsupportedShapeError(
                f"m0={m0} no es entero: la forma cerrada no aplica, usar el oráculo"
            )

    @property
    def m0(self) -> int:
        return int(self.coeffs.signal_gamma[0])

    @property
    def margin(self) -> float:
        """a - b v; si es <= 0 la outage es segura."""
        return self.coeffs.a - self.coeffs.b * self.threshold

    @property
    def rate(self) -> float:
        """c = v / (beta0 (a - b v))."""
        return self.threshold / (self.coeffs.signal_gamma[1] * self.margin)


def _part_log_tables(query: OutageQuery) -> list[list[float]]:
    """log de cada factor por interferente y por l_k = 0..m0-1."""
    c = query.rate
    tables = []
    for m_k, beta_k in query.coeffs.interf_gammas:
        log_beta = math.log(beta_k)
        log_shrink = math.log1p(c * beta_k)
        lg_m = log_gamma(m_k)
        tables.append(
            [
                log_gamma(ell + m_k) - log_gamma(ell + 1) - lg_m + ell * log_beta - (ell + m_k) * log_shrink
                for ell in range(query.m0)
            ]
        )
    return tables


def _log_composition_weight(t: int, tables: list[list[float]]) -> float:
    """log sum_{composiciones de t} prod_k factor_k(l_k); -inf si no hay."""
    parts = len(tables)
    if parts == 0:
        return 0.0 if t == 0 else -math.inf
    logs = [math.fsum(tab[ell] for tab, ell in zip(tables, comp)) for comp in enumerate_compositions(t, parts)]
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(lv - top) for lv in logs))


def _count_pmfs(query: OutageQuery, size: int) -> list[np.ndarray]:
    """pmf en 0..size-1 de cada conteo independiente cuya suma N da P_out = Pr[N >= m0].

    El ruido aporta una Poisson(c Sigma) y cada interferente una binomial
    negativa(m_k, c beta_k / (1 + c beta_k)); sus coeficientes son los mismos
    factores de la expansión por composiciones.
    """
    n = np.arange(size, dtype=float)
    c = query.rate
    mu = c * query.coeffs.sigma_total
    logs = [special.xlogy(n, mu) - mu - special.gammaln(n + 1.0)]
    for m_k, beta_k in query.coeffs.interf_gammas:
        cb = c * beta_k
        logs.append(
            special.gammaln(n + m_k)
            - special.gammaln(m_k)
            - special.gammaln(n + 1.0)
            + special.xlogy(n, cb)
            - (n + m_k) * math.log1p(cb)
        )
    return [np.exp(lp) for lp in logs]


def _outage_tail(query: OutageQuery, max_terms: int) -> float:
    """Pr[N >= m0] sumando la cola directamente; exacta en relativo para outages chicas."""
    m0 = query.m0
    parts = query.coeffs.n_interferers
    c = query.rate
    # razón asintótica de la binomial negativa más lenta y la suma de formas
    r_max = max(c * b / (1.0 + c * b) for _, b in query.coeffs.interf_gammas)
    shape_sum = sum(m for m, _ in query.coeffs.interf_gammas)
    size = 2 * m0 + 64
    while True:
        pmfs = _count_pmfs(query, size)
        pmf = pmfs[0]
        for other in pmfs[1:]:
            pmf = np.convolve(pmf, other)[:size]
        tail = math.fsum(pmf[m0:])
        last, prev = float(pmf[-1]), float(pmf[-2])
        if last == 0.0 or tail == 0.0:
            return tail
        ratio = max(last / prev, r_max * (size + shape_sum) / size)
        # resto acotado por una geométrica de razón `ratio`
        if ratio < 1.0 and last * ratio / (1.0 - ratio) <= _TAIL_REL_TOL * tail:
            logger.debug("cola de la forma cerrada: %d coeficientes, K=%d", size, parts)
            return tail
        size *= 2
        if (parts + 1) * size * size > max_terms:
            raise ComplexityError(
                f"la cola de la forma cerrada no convergió con {size // 2} coeficientes "
                f"(m0={m0}, K={parts}); usar el oráculo"
            )


def outage_closed_form(query: OutageQuery, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Probabilidad de outage exacta (m0 entero)."""
    coeffs = query.coeffs
    v = query.threshold
    if query.margin <= 0:
        return 1.0
    if v == 0:
        return 0.0

    m0 = query.m0
    parts = coeffs.n_interferers
    n_terms = count_closed_form_terms(m0, parts)
    if n_terms > max_terms:
        raise ComplexityError(
            f"la forma cerrada requiere {n_terms} términos (m0={m0}, K={parts}), "
            f"límite {max_terms}; usar el oráculo"
        )
    logger.debug("forma cerrada: m0=%d K=%d términos=%d", m0, parts, n_terms)

    c = query.rate
    log_c = math.log(c)
    log_sigma = math.log(coeffs.sigma_total)
    c_sigma = c * coeffs.sigma_total

    tables = _part_log_tables(query)
    t_max = m0 - 1 if parts else 0
    log_w = [_log_composition_weight(t, tables) for t in range(t_max + 1)]

    terms = []
    for q in range(m0):
        for t in range(min(q, t_max) + 1):
            if log_w[t] == -math.inf:
                continue
            s = q - t
            terms.append(math.exp(-c_sigma + q * log_c + s * log_sigma - log_gamma(s + 1) + log_w[t]))

    success = math.fsum(terms)
    if success > 0.5:
        # 1 - success cancela: la outage chica se suma como cola
        if parts == 0:
            return regularized_lower_gamma(m0, c_sigma)
        return min(1.0, _outage_tail(query, max_terms))
    return min(1.0, max(0.0, 1.0 - success))


def outage_binomial_k1(query: OutageQuery) -> float:
    """Evaluación directa para un solo interferente (binomio, sin composiciones).

    E[(Sigma + Y)^q e^{-cY}] = sum_t C(q,t) Sigma^(q-t) Gamma(t+m)/Gamma(m) beta^t (1+c beta)^-(t+m)
    """
    coeffs = query.coeffs
    if coeffs.n_interferers != 1:
        raise DomainError(f"outage_binomial_k1 requiere K = 1 (K={coeffs.n_interferers})")
    v = query.threshold
    if query.margin <= 0:
        return 1.0
    if v == 0:
        return 0.0
    (m1, beta1), = coeffs.interf_gammas
    c = query.rate
    sigma = coeffs.sigma_total
    total = 0.0
    for q in range(query.m0):
        moment = math.fsum(
            comb(q, t)
            * sigma ** (q - t)
            * math.exp(log_gamma(t + m1) - log_gamma(m1) + t * math.log(beta1) - (t + m1) * math.log1p(c * beta1))
            for t in range(q + 1)
        )
        total += c ** q / math.factorial(q) * moment
    return min(1.0, max(0.0, 1.0 - math.exp(-c * sigma) * total))


# ---------------------------------------------------------------------------
# Nivel de escenario


def outage_query_for_user(
    scenario: Scenario, user_index: int, threshold: float, scheme: Scheme = Scheme.NOMA
) -> tuple[SindrCoefficients, float]:
    """(coeficientes, umbral efectivo) de U_i para el esquema dado, sin validar m0."""
    if Scheme(scheme) is Scheme.OMA:
        coeffs, rule = build_oma_coefficients(scenario, user_index)
        return coeffs, rule(threshold)
    return build_sindr_coefficients(scenario, user_index, user_index), threshold


def outage_for_user(
    scenario: Scenario,
    user_index: int,
    threshold: float,
    scheme: Scheme = Scheme.NOMA,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Outage de U_i: su propio mensaje (el residuo de SIC entra por Psi~_i)."""
    coeffs, v = outage_query_for_user(scenario, user_index, threshold, scheme)
    return outage_closed_form(OutageQuery(coeffs, v), max_terms=max_terms)


def outage_floor(scenario: Scenario, user_index: int, threshold: float, scheme: Scheme = Scheme.NOMA) -> float:
    """Piso de outage para P -> inf: Pr[alpha X / (A X + D) < v].

    Con D = (1 + kappa^2) sigma_eps^2 (la interferencia y el ruido no escalan
    con P y desaparecen en el límite).
    """
    v = threshold
    if Scheme(scheme) is Scheme.OMA:
        _, rule = build_oma_coefficients(scenario, user_index)
        v = rule(threshold)
    alpha, a_term, d_term = limiting_sindr_terms(scenario, user_index, scheme)
    margin = alpha - a_term * v
    if margin <= 0:
        return 1.0
    if v == 0 or d_term == 0:
        return 0.0
    m0, beta0 = build_sindr_coefficients(scenario, user_index, user_index).signal_gamma
    return regularized_lower_gamma(m0, v * d_term / (beta0 * margin))
