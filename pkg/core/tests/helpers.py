"""Constructores compactos de escenarios para los tests."""

from __future__ import annotations

import math

from core.link_model import (
    AntennaPattern,
    FadingProfile,
    NomaAllocation,
    Scenario,
    UserLink,
    build_cluster,
    db_to_linear,
)

FADING_M4 = FadingProfile(shape=4.0)
ANTENNA = AntennaPattern(main_gain=db_to_linear(12.0), side_gain=db_to_linear(-1.1092), beamwidth=math.pi / 6)


def two_user_scenario(
    *,
    snr_db: float = 30.0,
    k: int = 0,
    kappa: float = 0.0,
    csi_var: float = 0.0,
    xi: float = 0.0,
) -> Scenario:
    users = tuple(
        UserLink(distance=d, fading=FADING_M4, csi_error_var=csi_var, hw_impairment=kappa) for d in (100.0, 50.0)
    )
    cluster = build_cluster(k, 30.0, 8, tx_power=db_to_linear(15.0), fading=FADING_M4, hw_impairment=kappa)
    return Scenario(
        tx_power=db_to_linear(snr_db),
        antenna=ANTENNA,
        allocation=NomaAllocation(alphas=(0.8, 0.2), sic_residuals=(xi, 0.0)),
        users=users,
        clusters=(cluster, cluster),
    )
