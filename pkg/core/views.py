from __future__ import annotations

import logging
from collections import defaultdict

from django.contrib.auth import logout
from django.contrib.auth.decorators import login_required
from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404, redirect, render
from django.utils import timezone
from django.views.decorators.http import require_http_methods

from .models import SweepRun
from .sweep_engine import write_csv

logger = logging.getLogger(__name__)


def logout_any(request):
    """Logout que acepta GET y POST (links viejos navegan /logout/ por GET)."""
    logout(request)
    return redirect("/login/")


# ---------------------------------------------------------------------------
# Corridas


@login_required
@require_http_methods(["GET"])
def runs(request):
    latest = SweepRun.objects.all()[:50]
    return render(request, "core/runs.html", {"runs": latest})


@login_required
@require_http_methods(["GET"])
def run_detail(request, run_id: int):
    run = get_object_or_404(SweepRun, pk=run_id)
    points = list(run.points.all())

    # una fila de tabla por (usuario, esquema, método), columnas = SNR
    snrs = sorted({p.snr_db for p in points})
    curves: dict[tuple, dict[float, object]] = defaultdict(dict)
    for p in points:
        curves[(p.user, p.scheme, p.method)][p.snr_db] = p
    table = [
        {"user": user, "scheme": scheme, "method": method, "cells": [cells.get(s) for s in snrs]}
        for (user, scheme, method), cells in sorted(curves.items())
    ]
    return render(
        request,
        "core/run_detail.html",
        {"run": run, "snrs": snrs, "table": table, "n_points": len(points)},
    )


@login_required
@require_http_methods(["GET"])
def run_csv(request, run_id: int):
    run = get_object_or_404(SweepRun, pk=run_id)
    response = HttpResponse(content_type="text/csv; charset=utf-8")
    response["Content-Disposition"] = f'attachment; filename="sweep_{run.pk}.csv"'
    write_csv((p.to_row() for p in run.points.all()), response)
    return response


# ---------------------------------------------------------------------------
# Health check


@require_http_methods(["GET"])
def healthz(request):
    return JsonResponse({"ok": True, "ts": timezone.now().isoformat()})
