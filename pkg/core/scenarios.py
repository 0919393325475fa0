"""Escenarios: presets de la evaluación numérica y carga/volcado JSON.

Presets:
- fig2-ideal: 2 usuarios, hardware ideal, SIC/CSI perfectas, K en {0, 8, 24}.
- fig3-u2:    igual con K = 24; (kappa, sigma_eps^2, xi_1) recorren la grilla
              {0, 0.15, 0.3} x {0, 0.02, 0.2} x {0, 0.005}. Solo se reporta U_2.

En el JSON las magnitudes en dB llevan sufijo `_db` y se convierten al
cargar. Claves desconocidas se rechazan; los errores indican la ruta JSON
de la clave culpable (p. ej. `$.users[1].fading.shape`).
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .errors import DomainError, ScenarioError
from .link_model import (
    AntennaPattern,
    EstimatePower,
    FadingProfile,
    Interferer,
    NomaAllocation,
    Scenario,
    UserLink,
    build_cluster,
    db_to_linear,
    linear_to_db,
)

logger = logging.getLogger(__name__)

FIG2_IDEAL = "fig2-ideal"
FIG3_U2 = "fig3-u2"
PRESETS = (FIG2_IDEAL, FIG3_U2)

FIG3_KAPPAS = (0.0, 0.15, 0.3)
FIG3_CSI_VARS = (0.0, 0.02, 0.2)
FIG3_XIS = (0.0, 0.005)


@dataclass(frozen=True)
class PresetParams:
    """Parámetros de la evaluación numérica (valores lineales salvo aclaración)."""

    alphas: tuple[float, ...] = (0.8, 0.2)
    distances: tuple[float, ...] = (100.0, 50.0)
    main_gain_db: float = 12.0
    side_gain_db: float = -1.1092
    beamwidth: float = math.pi / 6
    interferer_power_db: float = 15.0
    threshold_db: float = 3.0
    shape: float = 4.0
    path_loss_exp: float = 2.0
    awgn_var: float = 1.0
    tx_power_db: float = 30.0
    cluster_radius: float = 30.0
    per_orbit: int = 8


def fig3_grid() -> list[tuple[float, float, float]]:
    """Las 18 combinaciones (kappa, sigma_eps^2, xi_1)."""
    return list(itertools.product(FIG3_KAPPAS, FIG3_CSI_VARS, FIG3_XIS))


def build_preset(
    name: str,
    *,
    k: int | None = None,
    kappa: float | None = None,
    csi_var: float | None = None,
    xi: float | None = None,
    params: PresetParams = PresetParams(),
) -> Scenario:
    """Arma un preset. kappa se aplica a usuarios e interferentes por igual."""
    if name not in PRESETS:
        raise ScenarioError(f"preset desconocido {name!r} (opciones: {', '.join(PRESETS)})")
    if k is None:
        k = 24 if name == FIG3_U2 else 8
    if k < 0:
        raise ScenarioError(f"K debe ser >= 0: {k}", "--k")
    kappa = 0.0 if kappa is None else kappa
    csi_var = 0.0 if csi_var is None else csi_var
    xi = 0.0 if xi is None else xi

    fading = FadingProfile(shape=params.shape, mean_power=1.0, path_loss_exp=params.path_loss_exp, los=True)
    n = len(params.alphas)
    users = tuple(
        UserLink(distance=d, fading=fading, csi_error_var=csi_var, awgn_var=params.awgn_var, hw_impairment=kappa)
        for d in params.distances
    )
    cluster = build_cluster(
        k,
        params.cluster_radius,
        params.per_orbit,
        tx_power=db_to_linear(params.interferer_power_db),
        fading=fading,
        hw_impairment=kappa,
    )
    # el último usuario decodifica sin residuo propio; el residuo xi_1 afecta a U_2..U_N
    residuals = (xi,) * (n - 1) + (0.0,)
    return Scenario(
        tx_power=db_to_linear(params.tx_power_db),
        antenna=AntennaPattern(
            main_gain=db_to_linear(params.main_gain_db),
            side_gain=db_to_linear(params.side_gain_db),
            beamwidth=params.beamwidth,
        ),
        allocation=NomaAllocation(alphas=params.alphas, sic_residuals=residuals),
        users=users,
        clusters=tuple(cluster for _ in users),
        threshold=db_to_linear(params.threshold_db),
    )


def default_users(name: str, scenario: Scenario) -> list[int]:
    if name == FIG3_U2:
        return [2]
    return list(range(1, scenario.n_users + 1))


def with_impairments(
    scenario: Scenario,
    *,
    kappa: float | None = None,
    csi_var: float | None = None,
    xi: float | None = None,
) -> Scenario:
    """Reemplaza impairments de un escenario JSON (kappa también en interferentes)."""
    users = scenario.users
    clusters = scenario.clusters
    allocation = scenario.allocation
    if kappa is not None:
        users = tuple(replace(u, hw_impairment=kappa) for u in users)
        clusters = tuple(tuple(replace(i, hw_impairment=kappa) for i in c) for c in clusters)
    if csi_var is not None:
        users = tuple(replace(u, csi_error_var=csi_var) for u in users)
    if xi is not None:
        n = allocation.size
        allocation = NomaAllocation(allocation.alphas, (xi,) * (n - 1) + allocation.sic_residuals[n - 1 :])
    return replace(scenario, users=users, clusters=clusters, allocation=allocation)


# ---------------------------------------------------------------------------
# JSON


class _Reader:
    """Lectura de un objeto JSON con ruta para mensajes y rechazo de claves extra."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ScenarioError("se esperaba un objeto", path)
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}"

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = ...):
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                raise ScenarioError("clave obligatoria ausente", self._key(key))
            return default
        return self.data[key]

    def number(self, key: str, default: Any = ...) -> float:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"se esperaba un número, llegó {value!r}", self._key(key))
        return float(value)

    def db(self, key: str, default: Any = ...) -> float:
        try:
            return db_to_linear(self.number(key, default))
        except ScenarioError:
            raise
        except DomainError as exc:
            raise ScenarioError(str(exc), self._key(key)) from exc

    def integer(self, key: str, default: Any = ...) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"se esperaba un entero, llegó {value!r}", self._key(key))
        return value

    def boolean(self, key: str, default: Any = ...) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ScenarioError(f"se esperaba true/false, llegó {value!r}", self._key(key))
        return value

    def array(self, key: str) -> list:
        value = self.raw(key)
        if not isinstance(value, list):
            raise ScenarioError("se esperaba una lista", self._key(key))
        return value

    def child(self, key: str) -> "_Reader":
        return _Reader(self.raw(key), self._key(key))

    def finish(self) -> None:
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ScenarioError(f"clave desconocida {extra[0]!r}", self._key(extra[0]))


def _wrap(path: str, fn, *args, **kwargs):
    """Ejecuta un constructor del dominio y re-etiqueta su error con la ruta."""
    try:
        return fn(*args, **kwargs)
    except ScenarioError:
        raise
    except DomainError as exc:
        raise ScenarioError(str(exc), path) from exc


def _fading(r: _Reader) -> FadingProfile:
    out = _wrap(
        r.path,
        FadingProfile,
        shape=r.number("shape"),
        mean_power=r.number("mean_power", 1.0),
        path_loss_exp=r.number("path_loss_exp", 2.0),
        los=r.boolean("los", True),
    )
    r.finish()
    return out


def _user(r: _Reader) -> UserLink:
    out = _wrap(
        r.path,
        UserLink,
        distance=r.number("distance"),
        fading=_fading(r.child("fading")),
        csi_error_var=r.number("csi_error_var", 0.0),
        awgn_var=r.number("awgn_var", 1.0),
        hw_impairment=r.number("hw_impairment", 0.0),
    )
    r.finish()
    return out


def _interferer(r: _Reader) -> Interferer:
    side = r.db("side_gain_db") if r.has("side_gain_db") else None
    out = _wrap(
        r.path,
        Interferer,
        distance=r.number("distance"),
        tx_power=r.db("tx_power_db"),
        fading=_fading(r.child("fading")),
        hw_impairment=r.number("hw_impairment", 0.0),
        ring_index=r.integer("ring_index", 1),
        polar_angle=r.number("polar_angle", 0.0),
        side_gain=side,
    )
    r.finish()
    return out


def _layout(r: _Reader) -> tuple[Interferer, ...]:
    out = _wrap(
        r.path,
        build_cluster,
        r.integer("count"),
        r.number("radius"),
        r.integer("per_orbit"),
        tx_power=r.db("tx_power_db"),
        fading=_fading(r.child("fading")),
        hw_impairment=r.number("hw_impairment", 0.0),
    )
    r.finish()
    return out


def scenario_from_dict(data: Any) -> Scenario:
    root = _Reader(data, "$")

    ant = root.child("antenna")
    antenna = _wrap(
        ant.path,
        AntennaPattern,
        main_gain=ant.db("main_gain_db"),
        side_gain=ant.db("side_gain_db"),
        beamwidth=ant.number("beamwidth"),
    )
    ant.finish()

    alloc = root.child("allocation")
    alphas = alloc.array("alphas")
    residuals = alloc.array("sic_residuals")
    for key, seq in (("alphas", alphas), ("sic_residuals", residuals)):
        for idx, value in enumerate(seq):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioError(f"se esperaba un número, llegó {value!r}", f"{alloc.path}.{key}[{idx}]")
    allocation = _wrap(alloc.path, NomaAllocation, alphas=tuple(alphas), sic_residuals=tuple(residuals))
    alloc.finish()

    users = tuple(_user(_Reader(u, f"$.users[{i}]")) for i, u in enumerate(root.array("users")))

    if root.has("clusters") and root.has("cluster_layout"):
        raise ScenarioError("usar 'clusters' o 'cluster_layout', no ambos", "$.cluster_layout")
    if root.has("cluster_layout"):
        cluster = _layout(root.child("cluster_layout"))
        clusters = tuple(cluster for _ in users)
    elif root.has("clusters"):
        clusters = []
        for ci, cluster in enumerate(root.array("clusters")):
            if not isinstance(cluster, list):
                raise ScenarioError("se esperaba una lista de interferentes", f"$.clusters[{ci}]")
            clusters.append(
                tuple(_interferer(_Reader(item, f"$.clusters[{ci}][{k}]")) for k, item in enumerate(cluster))
            )
        clusters = tuple(clusters)
    else:
        clusters = ()

    estimate = root.raw("estimate_power", EstimatePower.UNIT.value)
    if estimate not in {e.value for e in EstimatePower}:
        raise ScenarioError(f"valor inválido {estimate!r} (unit | complement)", "$.estimate_power")

    scenario = _wrap(
        "$",
        Scenario,
        tx_power=root.db("tx_power_db"),
        antenna=antenna,
        allocation=allocation,
        users=users,
        clusters=clusters,
        threshold=root.db("threshold_db", 3.0),
        estimate_power=EstimatePower(estimate),
    )
    root.finish()
    return scenario


def _fading_dict(f: FadingProfile) -> dict:
    return {"shape": f.shape, "mean_power": f.mean_power, "path_loss_exp": f.path_loss_exp, "los": f.los}


def scenario_to_dict(scenario: Scenario) -> dict:
    """Inverso de `scenario_from_dict` (potencias en dB).

    Potencias, ganancias o umbral nulos no tienen valor en dB y levantan ScenarioError.
    """

    def db(value: float, path: str) -> float:
        if not value > 0:
            raise ScenarioError(f"{value!r} no es representable en dB", path)
        return linear_to_db(value)

    def interferer(i: Interferer, path: str) -> dict:
        out = {
            "distance": i.distance,
            "tx_power_db": db(i.tx_power, f"{path}.tx_power_db"),
            "fading": _fading_dict(i.fading),
            "hw_impairment": i.hw_impairment,
            "ring_index": i.ring_index,
            "polar_angle": i.polar_angle,
        }
        if i.side_gain is not None:
            out["side_gain_db"] = db(i.side_gain, f"{path}.side_gain_db")
        return out

    return {
        "tx_power_db": linear_to_db(scenario.tx_power),
        "threshold_db": db(scenario.threshold, "$.threshold_db"),
        "estimate_power": scenario.estimate_power.value,
        "antenna": {
            "main_gain_db": linear_to_db(scenario.antenna.main_gain),
            "side_gain_db": db(scenario.antenna.side_gain, "$.antenna.side_gain_db"),
            "beamwidth": scenario.antenna.beamwidth,
        },
        "allocation": {
            "alphas": list(scenario.allocation.alphas),
            "sic_residuals": list(scenario.allocation.sic_residuals),
        },
        "users": [
            {
                "distance": u.distance,
                "fading": _fading_dict(u.fading),
                "csi_error_var": u.csi_error_var,
                "awgn_var": u.awgn_var,
                "hw_impairment": u.hw_impairment,
            }
            for u in scenario.users
        ],
        "clusters": [
            [interferer(intf, f"$.clusters[{ci}][{ii}]") for ii, intf in enumerate(cluster)]
            for ci, cluster in enumerate(scenario.clusters)
        ],
    }


def load_scenario(source: str | Path, **overrides) -> Scenario:
    """Carga un preset por nombre o un archivo JSON.

    `overrides` (k, kappa, csi_var, xi) van al preset; en archivos JSON
    solo se aceptan kappa / csi_var / xi.
    """
    name = str(source)
    if name in PRESETS:
        return build_preset(name, **overrides)

    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    except UnicodeDecodeError as exc:
        raise ScenarioError(f"el archivo no es UTF-8: {exc}", "$") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"JSON mal formado (línea {exc.lineno}, col {exc.colno}): {exc.msg}", "$") from exc

    scenario = scenario_from_dict(data)
    if overrides.get("k") is not None:
        raise ScenarioError("--k solo aplica a presets (usar cluster_layout en el JSON)", "--k")
    impairments = {key: overrides.get(key) for key in ("kappa", "csi_var", "xi")}
    if any(v is not None for v in impairments.values()):
        scenario = with_impairments(scenario, **impairments)
    logger.info("escenario cargado de %s: N=%d", path, scenario.n_users)
    return scenario
