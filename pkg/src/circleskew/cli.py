"""Command-line entry point: ``circleskew <command> --config FILE [--out DIR]``.

Exit codes: 0 when everything certifies, 1 when a certificate or hypothesis
fails, 2 on configuration or usage errors.  Errors are also written to stderr
as a single JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig
from .conjugacy import ConjugacyMap, check_exponent_invariance, pushforward_gap
from .covers import find_expanding_cover, minimality_probe, verify_cover
from .errors import CircleSkewError, ConfigError, StageError
from .construction import (StageCertificate, attracting_seed_search, run_sequence, seed_orbit,
                           verify_stage_certificate)
from .measures import density_report
from .skew import PeriodicOrbit

SCHEMA_VERSION = "1.0"
INVARIANCE_TOL = 1e-9


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Path):
        return str(x)
    return x


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, kind: str, obj: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json({"schema_version": SCHEMA_VERSION, "kind": kind, **obj}))


def write_orbit_csv(path: Path, orbit: PeriodicOrbit, fam):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["j", "symbol", "fiber_point", "log_deriv"])
        for j, s, x, ld in orbit.csv_rows(fam):
            out.writerow([j, s, f"{x:.17g}", f"{ld:.17g}"])


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from e


def orbit_json_path(out: Path, m: int) -> Path:
    return out / "orbits" / f"X{m}.json"


def certificate_path(out: Path, stage: int) -> Path:
    name = f"bootstrap_{-stage}.json" if stage < 0 else f"stage_{stage}.json"
    return out / "certificates" / name


def load_orbit(out: Path, m: int) -> PeriodicOrbit:
    return PeriodicOrbit.from_dict(_read_json(orbit_json_path(out, m))["orbit"])


# commands ------------------------------------------------------------------------------
def cmd_check_hypotheses(cfg: RunConfig, out: Path, args) -> int:
    fam = cfg.family()
    caps = cfg.caps
    res = {"minimality": {"eps": cfg.minimality_eps,
                          "certified": minimality_probe(fam, cfg.minimality_eps,
                                                        caps["minimality_word_len"],
                                                        cfg.minimality_samples)}}
    try:
        cover = find_expanding_cover(fam, cfg.nu, caps["cover_word_len"], cfg.circle_grid)
        points = np.linspace(0.0, 1.0, cfg.circle_grid, endpoint=False)
        passed = verify_cover(fam, cover, points)
        res["expanding_cover"] = {"certified": bool(passed.all()),
                                  "verification_points": points.size,
                                  "points_passed": int(passed.sum()), "cover": cover.to_dict()}
    except CircleSkewError as e:
        res["expanding_cover"] = {"certified": False, "error": type(e).__name__, "message": str(e)}
    try:
        seed = seed_orbit(fam, cfg.seed_word, cfg.fixpoint_tol) if cfg.seed_word is not None \
            else attracting_seed_search(fam, caps["seed_word_len"], cfg.fixpoint_tol)
        res["attracting_seed"] = {"certified": seed.exponent < 0, "orbit": seed.to_dict()}
    except CircleSkewError as e:
        res["attracting_seed"] = {"certified": False, "error": type(e).__name__, "message": str(e)}
    ok = all(res[k]["certified"] for k in ("minimality", "expanding_cover", "attracting_seed"))
    write_json(out / "hypotheses.json", "hypotheses", {"results": res, "certified": ok})
    return 0 if ok else 1


def cmd_build_sequence(cfg: RunConfig, out: Path, args) -> int:
    fam = cfg.family()
    report = run_sequence(cfg, raise_errors=False)
    d = report.to_dict()
    d["ok"] = report.ok
    write_json(out / "sequence_report.json", "sequence_report", d)
    for m, orbit in enumerate(report.orbits, start=1):
        write_orbit_csv(out / "orbits" / f"X{m}.csv", orbit, fam)
        write_json(orbit_json_path(out, m), "orbit", {"index": m, "orbit": orbit.to_dict()})
    for cert in report.bootstrap + report.stages:
        write_json(certificate_path(out, cert.stage), "stage_certificate",
                   {"certificate": cert.to_dict()})
    return 0 if report.ok else 1


def cmd_verify_certificate(cfg: RunConfig, out: Path, args) -> int:
    if args.stage is None:
        raise UsageError("verify-certificate needs --stage")
    d = _read_json(certificate_path(out, args.stage))
    try:
        cert = StageCertificate.from_dict(d["certificate"])
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"malformed certificate: {e}") from e
    checks = verify_stage_certificate(cert, cfg.family(), cfg.cert_slack)
    if cert.bootstrap:
        checks.pop("density", None)
        checks.pop("density_recomputed", None)
    ok = all(checks.values())
    write_json(out / "certificates" / f"verify_{certificate_path(out, args.stage).stem}.json",
               "certificate_verification", {"stage": args.stage, "checks": checks, "ok": ok})
    return 0 if ok else 1


def cmd_density(cfg: RunConfig, out: Path, args) -> int:
    if args.stage is None:
        raise UsageError("density needs --stage")
    eta = args.eta if args.eta is not None else cfg.eta(args.stage)
    if not eta > 0:
        raise ConfigError("--eta must be positive")
    rep = density_report(load_orbit(out, args.stage), eta, cfg.family())
    write_json(out / f"density_X{args.stage}.json", "density_report",
               {"orbit": args.stage, "report": rep.to_dict()})
    return 0 if rep.eta_dense else 1


def cmd_conjugacy_check(cfg: RunConfig, out: Path, args) -> int:
    phi = cfg.conjugacy_map
    if phi is None:
        raise ConfigError("conjugacy-check needs a conjugacy.phi section")
    fam = cfg.family()
    if args.stage is not None:
        X = load_orbit(out, args.stage)
    elif cfg.seed_word is not None:
        X = seed_orbit(fam, cfg.seed_word, cfg.fixpoint_tol)
    else:
        X = attracting_seed_search(fam, cfg.caps["seed_word_len"], cfg.fixpoint_tol)
    cm = ConjugacyMap(phi)
    lam, lam_hat = check_exponent_invariance(fam, cm, X)
    gap = pushforward_gap(fam, cm, X)
    ok = abs(lam - lam_hat) <= INVARIANCE_TOL
    write_json(out / "conjugacy.json", "conjugacy_check",
               {"phi": phi.to_dict(), "period": X.period, "fiber_point": X.fiber_point,
                "exponent": lam, "conjugated_exponent": lam_hat,
                "difference": abs(lam - lam_hat), "tolerance": INVARIANCE_TOL,
                "pushforward_gap": gap, "ok": ok})
    return 0 if ok else 1


COMMANDS = {
    "check-hypotheses": cmd_check_hypotheses,
    "build-sequence": cmd_build_sequence,
    "verify-certificate": cmd_verify_certificate,
    "density": cmd_density,
    "conjugacy-check": cmd_conjugacy_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="circleskew", description="Periodic orbits with shrinking fiber "
                "exponents for circle IFS skew-products.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", help="output directory (default: output_dir from the config)")
    p.add_argument("--stage", type=int, help="certificate stage, or orbit index for density")
    p.add_argument("--eta", type=float, help="fiber resolution for density")
    return p


def _error(kind: str, message: str, **extra):
    sys.stderr.write(dump_json({"schema_version": SCHEMA_VERSION, "error": kind,
                                "message": message, **extra}))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.from_file(args.config)
        out = Path(args.out) if args.out else cfg.output_dir
        return COMMANDS[args.command](cfg, out, args)
    except (UsageError, ConfigError) as e:
        _error(type(e).__name__, str(e))
        return 2
    except StageError as e:
        _error(type(e.cause).__name__, str(e), stage=e.stage)
        return 1
    except CircleSkewError as e:
        _error(type(e).__name__, str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
