# Generated by Django 5.2 on 2026-10-17
import django.db.models.deletion
import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SweepRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("created_at", models.DateTimeField(default=django.utils.timezone.now, editable=False)),
                ("updated_at", models.DateTimeField(auto_now=True)),
                ("label", models.CharField(max_length=120)),
                ("preset", models.CharField(blank=True, max_length=32)),
                ("scenario", models.JSONField(default=dict)),
                ("snr_grid", models.CharField(max_length=200)),
                ("methods", models.CharField(max_length=40)),
                ("schemes", models.CharField(max_length=20)),
                ("seed", models.CharField(max_length=20)),
                ("trials", models.PositiveBigIntegerField()),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="SweepPoint",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("snr_db", models.FloatField()),
                ("user", models.PositiveSmallIntegerField()),
                ("scheme", models.CharField(choices=[("noma", "NOMA"), ("oma", "OMA")], max_length=4)),
                ("method", models.CharField(choices=[("analytic", "Forma cerrada"), ("mc", "Monte Carlo"), ("oracle", "Oráculo")], max_length=8)),
                ("p_out", models.FloatField(blank=True, null=True)),
                ("stderr", models.FloatField(blank=True, null=True)),
                ("trials", models.PositiveBigIntegerField(blank=True, null=True)),
                ("error", models.CharField(blank=True, max_length=400)),
                ("run", models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name="points", to="core.sweeprun")),
            ],
            options={
                "ordering": ["run", "snr_db", "user", "scheme", "method"],
            },
        ),
    ]
