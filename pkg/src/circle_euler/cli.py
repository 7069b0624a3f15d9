"""Command-line entry point.

    circle-euler simulate --preset ch --u0 sin --t-end 1 --out run.csv
    circle-euler check --b 3
    circle-euler scan --b-file values.txt --out summary.csv
    circle-euler shock-verify --c 1 --resolution 256

Exit codes: 0 ok / realizable, 1 config error, 2 runtime or numerical
error, 3 not realizable, 4 invalid candidate operator.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .exact import GaussianRational, parse_rational
from .flow import REJECTED, SimulationConfig, simulate
from .operators import (
    B_NONLOCAL,
    EULER,
    FORMS,
    HELMHOLTZ,
    IDENTITY,
    EulerSystem,
    OperatorError,
    operator_from_json,
)
from .realizability import InvalidCandidateError, decide, normalize_step_a, residual
from .shock import WEAK_FORM, ShockWave, TestFunction, convergence_study, rankine_hugoniot_check
from .spectral import EXACT, SpectralFunction

log = logging.getLogger("circle_euler")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_NOT_REALIZABLE = 3
EXIT_INVALID_CANDIDATE = 4

PRESETS = {
    "burgers": lambda: EulerSystem(IDENTITY, None, EULER),
    "ch": lambda: EulerSystem(HELMHOLTZ, Fraction(2), EULER),
    "dp": lambda: EulerSystem(HELMHOLTZ, Fraction(3), B_NONLOCAL),
}

SIM_DEFAULTS = {
    "dt": 1e-3,
    "t_end": 1.0,
    "N": 64,
    "dealias": True,
    "monitor_stride": 10,
    "blowup_slope_threshold": 1e3,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise ConfigError(f"output directory {directory} does not exist")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_profile(source, N: int | None = None) -> SpectralFunction:
    """Initial-condition mini-language: sin, cos, const:<v>, or a coefficient table."""
    if isinstance(source, dict):
        return SpectralFunction.from_json_obj(source).to_double()
    if isinstance(source, list):
        return SpectralFunction.from_json_obj({"N": max(abs(int(r[0])) for r in source), "coeffs": source}).to_double()
    text = str(source).strip()
    if text == "sin":
        return SpectralFunction.sin(1)
    if text == "cos":
        return SpectralFunction.cos(1)
    if text.startswith("const:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad constant in {text!r}") from exc
        return SpectralFunction.constant(value)
    if text.startswith("{") or text.startswith("["):
        return parse_profile(json.loads(text), N)
    if text.startswith("@"):
        return parse_profile(json.loads(Path(text[1:]).read_text()), N)
    raise ConfigError(f"unknown initial profile {text!r} (use sin, cos, const:<v>, or a coefficient table)")


def system_from_obj(obj: dict) -> EulerSystem:
    if "preset" in obj:
        return PRESETS[obj["preset"]]()
    form = obj.get("form", EULER)
    if form not in FORMS:
        raise ConfigError(f"unknown form {form!r}")
    try:
        inertia = operator_from_json(obj.get("inertia", {"kind": "multiplier", "rule": "helmholtz"}))
        b = obj.get("b")
        b = None if b is None else parse_rational(b)
        return EulerSystem(inertia, b, form)
    except (OperatorError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad system: {exc}") from exc


def build_simulation(args) -> SimulationConfig:
    cfg: dict = dict(SIM_DEFAULTS)
    system = None
    initial = "sin"
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        for key in SIM_DEFAULTS:
            if key in raw:
                cfg[key] = raw[key]
        if "system" in raw:
            system = system_from_obj(raw["system"])
        if "preset" in raw:
            system = PRESETS[raw["preset"]]()
        initial = raw.get("initial", initial)
    if args.preset:
        system = PRESETS[args.preset]()
    if system is None:
        raise ConfigError("simulate needs --preset or --config with a system")
    overrides = {
        "dt": args.dt,
        "t_end": args.t_end,
        "N": args.n,
        "monitor_stride": args.stride,
        "blowup_slope_threshold": args.threshold,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_dealias:
        cfg["dealias"] = False
    if args.u0 is not None:
        initial = args.u0
    u0 = parse_profile(initial, cfg["N"])
    try:
        return SimulationConfig(
            system=system,
            initial=u0,
            dt=float(cfg["dt"]),
            t_end=float(cfg["t_end"]),
            N=int(cfg["N"]),
            dealias=bool(cfg["dealias"]),
            monitor_stride=int(cfg["monitor_stride"]),
            blowup_slope_threshold=float(cfg["blowup_slope_threshold"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args) -> int:
    sim = build_simulation(args)
    rec = simulate(sim)
    text = rec.to_csv()
    if args.out:
        atomic_write(args.out, text)
        atomic_write(str(args.out) + ".final.json", rec.final_state.to_json() + "\n")
        stream = sys.stdout
    else:
        sys.stdout.write(text)
        stream = sys.stderr
    print(
        f"simulate: {rec.termination} at t={rec.final_time:.6g}, "
        f"relative energy drift {rec.relative_energy_drift():.3e}, max slope {max(rec.max_slope):.4g}",
        file=stream,
    )
    return EXIT_RUNTIME if rec.termination == REJECTED else EXIT_OK


def _candidate_report(path: str, b: Fraction) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read candidate {path}: {exc}") from exc
    A = normalize_step_a(operator_from_json(raw))
    probes = {}
    limit = getattr(A, "N", 4)
    for n in range(1, min(limit, 4) + 1):
        u = SpectralFunction({n: GaussianRational(1), -n: GaussianRational(1)}, n, EXACT)
        try:
            r = residual(EulerSystem(A, b), u)
        except OperatorError:
            continue
        probes[f"cos{n}x"] = r.is_zero()
    return {"normalized": A.to_json_obj(), "residual_zero_on": probes}


def _parse_b(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational {text!r}; expected p/q or an integer") from exc


def cmd_check(args) -> int:
    b = _parse_b(args.b)
    out = {}
    if args.candidate:
        try:
            out["candidate"] = _candidate_report(args.candidate, b)
        except (InvalidCandidateError, OperatorError) as exc:
            payload = {"b": str(b), "candidate": args.candidate, "invalid": str(exc)}
            if isinstance(exc, InvalidCandidateError):
                payload["witness_mode"] = exc.mode
            print(json.dumps(payload, indent=2, sort_keys=True))
            return EXIT_INVALID_CANDIDATE
    cert = decide(b, scan_depth=args.scan_depth)
    obj = cert.to_json_obj()
    obj.update(out)
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        atomic_write(args.out, text)
        print(f"check: b={cert.b} {cert.verdict} ({cert.witness_kind})")
    else:
        sys.stdout.write(text)
    return EXIT_OK if cert.realizable else EXIT_NOT_REALIZABLE


def read_b_file(path: str) -> list[Fraction]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    stripped = text.strip()
    if stripped.startswith("["):
        items = json.loads(stripped)
    else:
        items = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            items.extend(tok for tok in line.replace(",", " ").split() if tok)
    try:
        values = [parse_rational(v) for v in items]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational in {path}: {exc}") from exc
    if not values:
        raise ConfigError(f"{path} lists no values of b")
    return values


def cmd_scan(args) -> int:
    values = read_b_file(args.b_file)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["b", "verdict", "witness_kind", "witness_detail"])
    n_real = 0
    for b in values:
        cert = decide(b, scan_depth=args.scan_depth)
        n_real += cert.realizable
        kind = "" if cert.realizable else cert.witness_kind
        writer.writerow([str(cert.b), cert.verdict, kind, cert.witness_detail()])
        if args.cert_dir:
            name = str(cert.b).replace("/", "_over_").replace("-", "m")
            atomic_write(Path(args.cert_dir) / f"b_{name}.json", cert.to_json() + "\n")
    if args.out:
        atomic_write(args.out, buf.getvalue())
        print(f"scan: {len(values)} values, {n_real} realizable")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_shock(args) -> int:
    if not args.c > 0:
        raise ConfigError("--c must be positive")
    if args.resolution < 256:
        raise ConfigError("--resolution must be at least 256")
    w = ShockWave(args.c)
    phi = TestFunction.sine(1)
    levels = [args.resolution * 2 ** i for i in range(args.levels)]
    study = convergence_study(w, phi, levels)
    speed, rh = rankine_hugoniot_check(w, 1.0)
    obj = {
        "c": args.c,
        "resolutions": study["resolutions"],
        "residuals": study["residuals"],
        "orders": study["orders"],
        "order_estimate": study["orders"][-1] if study["orders"] else None,
        "shock_speed": speed,
        "rh_discrepancy": rh,
        "weak_form": WEAK_FORM,
        "test_function": "sin(2 pi x) * bump(t), bump = exp(1 - 1/(4 s (1 - s))) on t in (0, 1)",
    }
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        atomic_write(args.out, text)
        print(f"shock-verify: residual {study['residuals'][-1]:.3e} at {levels[-1]}, order {obj['order_estimate']}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="circle-euler", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate an Euler or b-equation system")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="JSON simulation config")
    p.add_argument("--u0", help="initial profile: sin, cos, const:<v>, JSON table or @file")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--n", type=int, help="spectral resolution N")
    p.add_argument("--stride", type=int, help="monitor every this many steps")
    p.add_argument("--threshold", type=float, help="slope threshold for wave-breaking detection")
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("--out", help="CSV path; final state goes to <out>.final.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="decide realizability of the b-equation")
    p.add_argument("--b", required=True, help="rational b as p/q or integer")
    p.add_argument("--scan-depth", type=int, default=64, dest="scan_depth")
    p.add_argument("--candidate", help="JSON inertia operator to test against the identity")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="decide realizability for every b in a file")
    p.add_argument("--b-file", required=True, dest="b_file")
    p.add_argument("--scan-depth", type=int, default=64, dest="scan_depth")
    p.add_argument("--cert-dir", dest="cert_dir", help="also write one certificate JSON per b here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("shock-verify", help="weak-solution check of the DP shock")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=256, help="coarsest quadrature resolution")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_shock)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "scan_depth", 8) < 8:
            raise ConfigError("--scan-depth must be at least 8")
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OperatorError, ArithmeticError) as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
