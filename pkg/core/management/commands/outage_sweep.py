import io
import json
import logging
import sys
from dataclasses import replace

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from core.errors import DomainError, SweepIOError
from core.link_model import Scheme, db_to_linear, rate_to_threshold
from core.mc_engine import McConfig
from core.models import SweepRun
from core.scenarios import PRESETS, default_users, load_scenario, scenario_to_dict
from core.sweep_engine import Method, SweepSettings, emit_csv, parse_snr_grid, run_sweep, write_csv

EXIT_VALIDATION = 1
EXIT_IO = 2


def _csv_list(text: str) -> list[str]:
    return [p.strip().lower() for p in (text or "").split(",") if p.strip()]


class Command(BaseCommand):
    help = (
        "Barre la SNR de transmisión y calcula la outage por usuario (forma cerrada, "
        "Monte Carlo y/o oráculo) para NOMA y OMA. Escribe un CSV."
    )

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def error(message):
            raise CommandError(f"Error: {message}", returncode=EXIT_VALIDATION)

        parser.error = error
        return parser

    def run_from_argv(self, argv):
        # parse_args corre fuera del manejo de CommandError de BaseCommand
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f"{exc.__class__.__name__}: {exc}")
            sys.exit(exc.returncode)

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--preset", choices=PRESETS, help="Escenario predefinido de la evaluación numérica")
        source.add_argument("--scenario", help="Ruta a un escenario JSON")

        parser.add_argument(
            "--snr",
            default=getattr(settings, "OUTAGE_SNR_GRID", "0:50:5"),
            help="Grilla de SNR en dB: start:stop:step (extremo incluido) o lista con comas",
        )
        parser.add_argument("--users", default="", help="Usuarios 1-based separados por coma (default: según preset)")
        parser.add_argument("--schemes", default="noma,oma", help="noma, oma")
        parser.add_argument("--methods", default="analytic,mc", help="analytic, mc, oracle")
        parser.add_argument("--trials", type=int, default=getattr(settings, "MC_DEFAULT_TRIALS", 1_000_000))
        parser.add_argument("--seed", type=int, default=getattr(settings, "MC_DEFAULT_SEED", 20240101))
        parser.add_argument("--out", default="", help="CSV de salida ('-' = stdout)")

        parser.add_argument("--k", type=int, default=None, help="Cantidad de interferentes (solo presets)")
        parser.add_argument("--kappa", type=float, default=None, help="Nivel de impairment de hardware")
        parser.add_argument("--csi-var", dest="csi_var", type=float, default=None, help="Varianza del error de CSI")
        parser.add_argument("--xi", type=float, default=None, help="Residuo de SIC xi_1")

        threshold = parser.add_mutually_exclusive_group()
        threshold.add_argument("--threshold-db", dest="threshold_db", type=float, default=None)
        threshold.add_argument("--rate", type=float, default=None, help="Tasa objetivo en bits/s/Hz (v = 2^R - 1)")

        parser.add_argument("--workers", type=int, default=getattr(settings, "SWEEP_WORKERS", 1))
        parser.add_argument("--batch-size", dest="batch_size", type=int, default=getattr(settings, "MC_BATCH_SIZE", 65_536))
        parser.add_argument(
            "--oracle-samples",
            dest="oracle_samples",
            type=int,
            default=getattr(settings, "ORACLE_DEFAULT_SAMPLES", 1_000_000),
        )
        parser.add_argument("--show-scenario", dest="show_scenario", action="store_true",
                            help="Imprime el escenario resuelto en JSON y termina")
        parser.add_argument("--save", action="store_true", help="Guarda la corrida en la base")
        parser.add_argument("--label", default="", help="Etiqueta de la corrida guardada")

    def handle(self, *args, **options):
        if options["verbosity"] >= 2:
            logging.getLogger("core").setLevel(logging.DEBUG)

        try:
            scenario, source = self._scenario(options)
            if options["show_scenario"]:
                self.stdout.write(json.dumps(scenario_to_dict(scenario), indent=2, ensure_ascii=False, allow_nan=False))
                return

            out = (options.get("out") or "").strip()
            if not out:
                raise CommandError("Falta --out (ruta del CSV o '-')", returncode=EXIT_VALIDATION)

            grid = parse_snr_grid(options["snr"])
            methods = [Method(m) for m in _csv_list(options["methods"])]
            schemes = [Scheme(s) for s in _csv_list(options["schemes"])]
            users = [int(u) for u in _csv_list(options["users"])]
            if not users and options.get("preset"):
                users = default_users(options["preset"], scenario)

            sweep_settings = SweepSettings(
                mc=McConfig(trials=options["trials"], seed=options["seed"], batch_size=options["batch_size"]),
                oracle_samples=options["oracle_samples"],
                max_terms=getattr(settings, "OUTAGE_MAX_TERMS", 10**8),
                workers=options["workers"],
            )
            rows = run_sweep(scenario, grid, methods, schemes, sweep_settings, users=users or None)
        except CommandError:
            raise
        except FileNotFoundError as exc:
            raise CommandError(f"No existe el escenario: {exc.filename}", returncode=EXIT_IO) from exc
        except OSError as exc:
            raise CommandError(f"No se pudo leer el escenario: {exc}", returncode=EXIT_IO) from exc
        except (DomainError, ValueError) as exc:
            raise CommandError(str(exc), returncode=EXIT_VALIDATION) from exc

        if out == "-":
            buf = io.StringIO()
            write_csv(rows, buf)
            self.stdout.write(buf.getvalue(), ending="")
        else:
            try:
                emit_csv(rows, out)
            except SweepIOError as exc:
                raise CommandError(str(exc), returncode=EXIT_IO) from exc

        failed = [r for r in rows if r.error]
        if failed:
            self.stderr.write(self.style.WARNING(f"{len(failed)} filas sin valor (ver log)"))

        if options["save"]:
            run = SweepRun.record(
                rows,
                scenario=scenario,
                label=options["label"] or source,
                preset=options.get("preset") or "",
                snr_grid=options["snr"],
                seed=options["seed"],
                trials=options["trials"],
            )
            self.stdout.write(self.style.SUCCESS(f"Corrida #{run.pk} guardada ({len(rows)} puntos)"))

        if out != "-":
            self.stdout.write(self.style.SUCCESS(f"{len(rows)} filas escritas en {out}"))

    def _scenario(self, options):
        overrides = {key: options.get(key) for key in ("kappa", "csi_var", "xi")}
        source = options.get("preset") or options["scenario"]
        scenario = load_scenario(source, k=options.get("k"), **overrides)

        if options.get("threshold_db") is not None:
            scenario = replace(scenario, threshold=db_to_linear(options["threshold_db"]))
        elif options.get("rate") is not None:
            scenario = replace(scenario, threshold=rate_to_threshold(options["rate"]))
        return scenario, source
