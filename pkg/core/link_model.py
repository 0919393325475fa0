"""Modelo físico del enlace D2D mmWave con NOMA (no ideal).

Convierte un escenario legible (potencias, distancias, ganancias de antena,
asignación de potencia, SIC imperfecta, error de CSI y distorsión de hardware)
en los coeficientes canónicos de la SINDR:

    gamma = a X / (b X + Y + Sigma),   X ~ Gamma(m0, beta0),  Y = sum_k Y_k

que consumen tanto la forma cerrada (`outage_engine`) como el simulador
(`mc_engine`) y el oráculo (`oracle_engine`).

Convenciones:
- magnitudes en dB se convierten con 10^(x/10);
- sigma^2 = 1 por defecto, así que el "SNR de transmisión" de los barridos
  coincide con P en dB;
- G_m^2 / G_s^2 = producto de ganancias iguales en ambos extremos del enlace.

Todas las funciones son puras y los tipos son inmutables.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

from .errors import DomainError

logger = logging.getLogger(__name__)

ALPHA_SUM_TOL = 1e-12


class Scheme(str, enum.Enum):
    NOMA = "noma"
    OMA = "oma"


class EstimatePower(str, enum.Enum):
    """Potencia media del canal estimado, E[|h~|^2]."""

    UNIT = "unit"              # Omega~ = Omega (estimación normalizada)
    COMPLEMENT = "complement"  # Omega~ = Omega - sigma_eps^2


# ---------------------------------------------------------------------------
# Conversión de unidades


def db_to_linear(value_db: float) -> float:
    if not math.isfinite(value_db):
        raise DomainError(f"valor en dB no finito: {value_db!r}")
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if not value > 0:
        raise DomainError(f"no se puede expresar en dB un valor <= 0: {value!r}")
    return 10.0 * math.log10(value)


def rate_to_threshold(rate: float) -> float:
    """Umbral de SINDR para una tasa objetivo R (bits/s/Hz): v = 2^R - 1."""
    if rate < 0:
        raise DomainError(f"tasa negativa: {rate!r}")
    return 2.0 ** rate - 1.0


def threshold_to_rate(threshold: float) -> float:
    if threshold < 0:
        raise DomainError(f"umbral negativo: {threshold!r}")
    return math.log2(1.0 + threshold)


# ---------------------------------------------------------------------------
# Tipos del dominio


@dataclass(frozen=True)
class AntennaPattern:
    """Patrón sectorizado de dos niveles (lóbulo principal / secundario)."""

    main_gain: float
    side_gain: float
    beamwidth: float

    def __post_init__(self):
        if not (self.main_gain > self.side_gain > 0):
            raise DomainError(
                f"se requiere main_gain > side_gain > 0 (main={self.main_gain}, side={self.side_gain})"
            )
        if not (0 < self.beamwidth < math.pi):
            raise DomainError(f"beamwidth fuera de (0, pi): {self.beamwidth}")


@dataclass(frozen=True)
class FadingProfile:
    """Nakagami-m: la potencia del canal es Gamma(m, Omega/m)."""

    shape: float
    mean_power: float = 1.0
    path_loss_exp: float = 2.0
    los: bool = True

    def __post_init__(self):
        if not self.shape >= 0.5:
            raise DomainError(f"shape de Nakagami < 0.5: {self.shape}")
        if not self.mean_power > 0:
            raise DomainError(f"mean_power debe ser > 0: {self.mean_power}")
        if not self.path_loss_exp > 0:
            raise DomainError(f"path_loss_exp debe ser > 0: {self.path_loss_exp}")

    @property
    def gamma_scale(self) -> float:
        return self.mean_power / self.shape


@dataclass(frozen=True)
class UserLink:
    distance: float
    fading: FadingProfile
    csi_error_var: float = 0.0
    awgn_var: float = 1.0
    hw_impairment: float = 0.0

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError(f"distancia del usuario debe ser > 0: {self.distance}")
        if not self.csi_error_var >= 0:
            raise DomainError(f"csi_error_var negativo: {self.csi_error_var}")
        if not self.awgn_var > 0:
            raise DomainError(f"awgn_var debe ser > 0: {self.awgn_var}")
        if not self.hw_impairment >= 0:
            raise DomainError(f"hw_impairment negativo: {self.hw_impairment}")


@dataclass(frozen=True)
class Interferer:
    """Nodo interferente del cluster. El receptor víctima está en el origen,
    así que `distance` es el radio de su anillo; `polar_angle` solo documenta
    la disposición."""

    distance: float
    tx_power: float
    fading: FadingProfile
    hw_impairment: float = 0.0
    ring_index: int = 1
    polar_angle: float = 0.0
    side_gain: float | None = None  # None: usa la ganancia secundaria de la antena

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError(f"distancia del interferente debe ser > 0: {self.distance}")
        if not self.tx_power >= 0:
            raise DomainError(f"tx_power negativo: {self.tx_power}")
        if not self.hw_impairment >= 0:
            raise DomainError(f"hw_impairment negativo: {self.hw_impairment}")
        if self.ring_index < 1:
            raise DomainError(f"ring_index debe ser >= 1: {self.ring_index}")
        if self.side_gain is not None and not self.side_gain > 0:
            raise DomainError(f"side_gain debe ser > 0: {self.side_gain}")


@dataclass(frozen=True)
class NomaAllocation:
    alphas: tuple[float, ...]
    sic_residuals: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "sic_residuals", tuple(float(x) for x in self.sic_residuals))
        if not self.alphas:
            raise DomainError("la asignación NOMA necesita al menos un usuario")
        if len(self.sic_residuals) != len(self.alphas):
            raise DomainError(
                f"sic_residuals ({len(self.sic_residuals)}) y alphas ({len(self.alphas)}) difieren en largo"
            )
        if abs(math.fsum(self.alphas) - 1.0) > ALPHA_SUM_TOL:
            raise DomainError(f"los alphas deben sumar 1 (suman {math.fsum(self.alphas)!r})")
        if self.alphas[-1] <= 0:
            raise DomainError("todos los alphas deben ser > 0")
        for prev, cur in zip(self.alphas, self.alphas[1:]):
            if not prev > cur:
                raise DomainError(f"los alphas deben ser estrictamente decrecientes: {self.alphas}")
        for xi in self.sic_residuals:
            if not 0.0 <= xi <= 1.0:
                raise DomainError(f"residuo de SIC fuera de [0, 1]: {xi}")

    @property
    def size(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class Scenario:
    """Descripción completa de la red (usuarios indexados 1..N por alpha decreciente)."""

    tx_power: float
    antenna: AntennaPattern
    allocation: NomaAllocation
    users: tuple[UserLink, ...]
    clusters: tuple[tuple[Interferer, ...], ...] = ()
    threshold: float = field(default_factory=lambda: db_to_linear(3.0))
    estimate_power: EstimatePower = EstimatePower.UNIT

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        clusters = tuple(tuple(c) for c in self.clusters)
        if not clusters:
            clusters = tuple(() for _ in self.users)
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "estimate_power", EstimatePower(self.estimate_power))

        if not self.tx_power > 0:
            raise DomainError(f"tx_power debe ser > 0: {self.tx_power}")
        if len(self.users) != self.allocation.size:
            raise DomainError(
                f"hay {len(self.users)} usuarios pero la asignación define {self.allocation.size}"
            )
        if len(self.clusters) != len(self.users):
            raise DomainError(
                f"se esperan {len(self.users)} clusters (uno por usuario), hay {len(self.clusters)}"
            )
        if not self.threshold >= 0:
            raise DomainError(f"umbral negativo: {self.threshold}")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def user(self, index: int) -> UserLink:
        _check_user_index(index, self.n_users)
        return self.users[index - 1]

    def cluster(self, index: int) -> tuple[Interferer, ...]:
        _check_user_index(index, self.n_users)
        return self.clusters[index - 1]


@dataclass(frozen=True)
class SindrCoefficients:
    """Forma canónica de la SINDR: a X / (b X + sum_k Y_k + Sigma)."""

    a: float
    b: float
    sigma_total: float
    signal_gamma: tuple[float, float]
    interf_gammas: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "signal_gamma", (float(self.signal_gamma[0]), float(self.signal_gamma[1])))
        object.__setattr__(
            self, "interf_gammas", tuple((float(m), float(s)) for m, s in self.interf_gammas)
        )
        # a = 0 se admite (SINDR degenerada); el resto sigue el modelo canónico
        if not self.a >= 0:
            raise DomainError(f"a debe ser >= 0: {self.a}")
        if not self.b >= 0:
            raise DomainError(f"b debe ser >= 0: {self.b}")
        if not self.sigma_total > 0:
            raise DomainError(f"sigma_total debe ser > 0: {self.sigma_total}")
        for shape, scale in (self.signal_gamma, *self.interf_gammas):
            if not shape >= 0.5:
                raise DomainError(f"shape Gamma < 0.5: {shape}")
            if not scale > 0:
                raise DomainError(f"scale Gamma debe ser > 0: {scale}")

    @property
    def n_interferers(self) -> int:
        return len(self.interf_gammas)

    @property
    def sindr_ceiling(self) -> float:
        """Cota superior a/b de la SINDR (inf si b = 0)."""
        return math.inf if self.b == 0 else self.a / self.b


# ---------------------------------------------------------------------------
# Operaciones


def _check_user_index(index: int, n: int) -> None:
    if not 1 <= index <= n:
        raise DomainError(f"índice de usuario fuera de rango 1..{n}: {index}")


def antenna_gain(theta: float, pattern: AntennaPattern) -> float:
    if not -math.pi <= theta <= math.pi:
        raise DomainError(f"theta fuera de [-pi, pi]: {theta}")
    return pattern.main_gain if abs(theta) <= pattern.beamwidth else pattern.side_gain


def place_interferers(count: int, cluster_radius: float, per_orbit: int) -> list[tuple[int, float, float]]:
    """Ubica K interferentes en anillos concéntricos uniformes.

    C = ceil(K/M) anillos de radio c*R/C; se llenan de adentro hacia afuera
    (M por anillo, el último parcial). En el anillo c el k-ésimo nodo tiene
    ángulo 2*pi*k/M + c*pi/M.

    Returns: [(ring_index, radius, polar_angle), ...]
    """
    if count < 0:
        raise DomainError(f"cantidad de interferentes negativa: {count}")
    if not cluster_radius > 0:
        raise DomainError(f"radio del cluster debe ser > 0: {cluster_radius}")
    if per_orbit < 1:
        raise DomainError(f"per_orbit debe ser >= 1: {per_orbit}")
    if count == 0:
        return []

    rings = -(-count // per_orbit)
    out: list[tuple[int, float, float]] = []
    for n in range(count):
        c = n // per_orbit + 1
        k = n % per_orbit
        radius = c * cluster_radius / rings
        angle = 2.0 * math.pi * k / per_orbit + c * (math.pi / per_orbit)
        out.append((c, radius, angle))
    return out


def build_cluster(
    count: int,
    cluster_radius: float,
    per_orbit: int,
    *,
    tx_power: float,
    fading: FadingProfile,
    hw_impairment: float = 0.0,
    side_gain: float | None = None,
) -> tuple[Interferer, ...]:
    """Cluster homogéneo sobre la grilla de `place_interferers`."""
    return tuple(
        Interferer(
            distance=radius,
            tx_power=tx_power,
            fading=fading,
            hw_impairment=hw_impairment,
            ring_index=ring,
            polar_angle=angle,
            side_gain=side_gain,
        )
        for ring, radius, angle in place_interferers(count, cluster_radius, per_orbit)
    )


def compute_psi(message_index: int, allocation: NomaAllocation) -> tuple[float, float]:
    """(Psi_j, Psi~_j): potencia aún no decodificada y residuo de SIC imperfecta."""
    n = allocation.size
    if not 1 <= message_index <= n:
        raise DomainError(f"índice de mensaje fuera de rango 1..{n}: {message_index}")
    j = message_index
    psi = math.fsum(allocation.alphas[j:])
    psi_tilde = math.fsum(
        xi * alpha for xi, alpha in zip(allocation.sic_residuals[: j - 1], allocation.alphas[: j - 1])
    )
    return psi, psi_tilde


def _signal_gamma(scenario: Scenario, link: UserLink) -> tuple[float, float]:
    fading = link.fading
    if scenario.estimate_power is not EstimatePower.COMPLEMENT:
        return fading.shape, fading.gamma_scale
    omega = fading.mean_power - link.csi_error_var
    if not omega > 0:
        raise DomainError(
            f"E[|h~|^2] = Omega - sigma_eps^2 no es positivo ({omega}); usar estimate_power='unit'"
        )
    return fading.shape, omega / fading.shape


def _interference_gammas(scenario: Scenario, user_index: int) -> tuple[tuple[float, float], ...]:
    default_side = antenna_gain(math.pi, scenario.antenna)
    out = []
    for intf in scenario.cluster(user_index):
        g_s = intf.side_gain if intf.side_gain is not None else default_side
        rho_bar = intf.tx_power * g_s ** 2 * intf.distance ** (-intf.fading.path_loss_exp)
        zeta = (1.0 + intf.hw_impairment ** 2) * rho_bar
        m_k = intf.fading.shape
        out.append((m_k, zeta * intf.fading.gamma_scale))
    return tuple(out)


def _rho(scenario: Scenario, link: UserLink) -> float:
    g_m = antenna_gain(0.0, scenario.antenna)
    return scenario.tx_power * g_m ** 2 * link.distance ** (-link.fading.path_loss_exp)


def build_sindr_coefficients(scenario: Scenario, user_index: int, message_index: int) -> SindrCoefficients:
    """Coeficientes canónicos para que U_i decodifique x_j (j <= i)."""
    link = scenario.user(user_index)
    if not 1 <= message_index <= user_index:
        raise DomainError(
            f"U_{user_index} solo decodifica mensajes 1..{user_index} (pedido x_{message_index})"
        )
    rho = _rho(scenario, link)
    psi, psi_tilde = compute_psi(message_index, scenario.allocation)
    kappa2 = link.hw_impairment ** 2

    coeffs = SindrCoefficients(
        a=scenario.allocation.alphas[message_index - 1] * rho,
        b=rho * (psi + psi_tilde + kappa2),
        sigma_total=link.awgn_var + rho * (1.0 + kappa2) * link.csi_error_var,
        signal_gamma=_signal_gamma(scenario, link),
        interf_gammas=_interference_gammas(scenario, user_index),
    )
    logger.debug(
        "SINDR U%d<-x%d: rho=%.6g a=%.6g b=%.6g Sigma=%.6g K=%d",
        user_index, message_index, rho, coeffs.a, coeffs.b, coeffs.sigma_total, coeffs.n_interferers,
    )
    return coeffs


def build_oma_coefficients(scenario: Scenario, user_index: int) -> tuple[SindrCoefficients, "OmaThreshold"]:
    """Benchmark OMA: ranura exclusiva a potencia plena, tasa N*R."""
    link = scenario.user(user_index)
    rho = _rho(scenario, link)
    kappa2 = link.hw_impairment ** 2
    coeffs = SindrCoefficients(
        a=rho,
        b=rho * kappa2,
        sigma_total=link.awgn_var + rho * (1.0 + kappa2) * link.csi_error_var,
        signal_gamma=_signal_gamma(scenario, link),
        interf_gammas=_interference_gammas(scenario, user_index),
    )
    return coeffs, OmaThreshold(slots=scenario.n_users)


@dataclass(frozen=True)
class OmaThreshold:
    """Regla de umbral OMA: v_OMA = (1 + v)^N - 1 (tasa N veces mayor)."""

    slots: int

    def __call__(self, threshold: float) -> float:
        return (1.0 + threshold) ** self.slots - 1.0


def limiting_sindr_terms(scenario: Scenario, user_index: int, scheme: Scheme) -> tuple[float, float, float]:
    """Términos de la SINDR para P -> inf: gamma_inf = alpha X / (A X + D).

    Returns: (alpha, A, D) con D = (1 + kappa^2) sigma_eps^2.
    """
    link = scenario.user(user_index)
    kappa2 = link.hw_impairment ** 2
    if Scheme(scheme) is Scheme.OMA:
        alpha, a_term = 1.0, kappa2
    else:
        psi, psi_tilde = compute_psi(user_index, scenario.allocation)
        alpha, a_term = scenario.allocation.alphas[user_index - 1], psi + psi_tilde + kappa2
    return alpha, a_term, (1.0 + kappa2) * link.csi_error_var
