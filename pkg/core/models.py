from django.db import models, transaction
from django.utils import timezone

from .link_model import Scenario, Scheme
from .scenarios import scenario_to_dict
from .sweep_engine import METHOD_ORDER, SCHEME_ORDER, Method, SweepRow


class TimeStamped(models.Model):
    created_at = models.DateTimeField(default=timezone.now, editable=False)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True


class SweepRun(TimeStamped):
    """Una corrida de `outage_sweep --save`: escenario resuelto + parámetros.

    El seed se guarda como texto porque puede ocupar los 64 bits completos.
    """

    label = models.CharField(max_length=120)
    preset = models.CharField(max_length=32, blank=True)
    scenario = models.JSONField(default=dict)
    snr_grid = models.CharField(max_length=200)
    methods = models.CharField(max_length=40)
    schemes = models.CharField(max_length=20)
    seed = models.CharField(max_length=20)
    trials = models.PositiveBigIntegerField()

    class Meta:
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.label} (#{self.pk})"

    @classmethod
    def record(
        cls,
        rows: list[SweepRow],
        *,
        scenario: Scenario,
        label: str,
        preset: str,
        snr_grid: str,
        seed: int,
        trials: int,
    ) -> "SweepRun":
        methods = [m.value for m in METHOD_ORDER if any(r.method is m for r in rows)]
        schemes = [s.value for s in SCHEME_ORDER if any(r.scheme is s for r in rows)]
        with transaction.atomic():
            run = cls.objects.create(
                label=label[:120],
                preset=preset,
                scenario=scenario_to_dict(scenario),
                snr_grid=snr_grid,
                methods=",".join(methods),
                schemes=",".join(schemes),
                seed=str(seed),
                trials=trials,
            )
            SweepPoint.objects.bulk_create(
                [
                    SweepPoint(
                        run=run,
                        snr_db=r.snr_db,
                        user=r.user,
                        scheme=r.scheme.value,
                        method=r.method.value,
                        p_out=r.p_out,
                        stderr=r.stderr,
                        trials=r.trials,
                        error=r.error[:400],
                    )
                    for r in rows
                ]
            )
        return run


class SweepPoint(models.Model):
    class SchemeChoice(models.TextChoices):
        NOMA = Scheme.NOMA.value, "NOMA"
        OMA = Scheme.OMA.value, "OMA"

    class MethodChoice(models.TextChoices):
        ANALYTIC = Method.ANALYTIC.value, "Forma cerrada"
        MC = Method.MC.value, "Monte Carlo"
        ORACLE = Method.ORACLE.value, "Oráculo"

    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name="points")
    snr_db = models.FloatField()
    user = models.PositiveSmallIntegerField()
    scheme = models.CharField(max_length=4, choices=SchemeChoice.choices)
    method = models.CharField(max_length=8, choices=MethodChoice.choices)
    p_out = models.FloatField(null=True, blank=True)
    stderr = models.FloatField(null=True, blank=True)
    trials = models.PositiveBigIntegerField(null=True, blank=True)
    error = models.CharField(max_length=400, blank=True)

    class Meta:
        # el orden alfabético de scheme/method coincide con el del CSV
        ordering = ["run", "snr_db", "user", "scheme", "method"]

    def __str__(self):
        return f"{self.snr_db} dB U{self.user} {self.scheme}/{self.method}"

    def to_row(self) -> SweepRow:
        return SweepRow(
            snr_db=self.snr_db,
            user=self.user,
            scheme=Scheme(self.scheme),
            method=Method(self.method),
            p_out=self.p_out,
            stderr=self.stderr,
            trials=self.trials,
            error=self.error,
        )
