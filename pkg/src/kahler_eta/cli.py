"""Command line interface: ``kahler-eta {validate,calibrate,eta,verify,sweep}``.

Structured output is JSON lines: a header line carrying the timestamp, then
one object per record.  CSV output has a header row, ``\\n`` line endings and
floats written with 17 significant digits.  Apart from the header line, the
output depends only on the config, the tolerance and the seed.
"""

import argparse
import csv
from dataclasses import replace
from datetime import datetime, timezone
from fractions import Fraction
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .ansatz import calibrate
from .config import ClosedConfig, RunConfig, SpecConfig, load_config, with_overrides
from .errors import ConfigError, GeometryError
from .hirzebruch import closed_eta_pipeline
from .invariants import eta_report
from .profiles import validate_interval
from .reference import REFERENCE_CLOSED, reference_suite
from .verification import run_verification

log = logging.getLogger("kahler_eta")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
COMMANDS = ("validate", "calibrate", "eta", "verify", "sweep")


# ---- record helpers --------------------------------------------------------------------


def _plain(v):
    """Convert to JSON-friendly builtins; non-finite floats become ``None``."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    try:
        f = float(v)
    except (TypeError, ValueError):
        return str(v)
    return f if math.isfinite(f) else None


def spec_record(spec):
    return {
        "name": spec.name,
        "case": spec.case,
        "family": spec.profile.family,
        "constants": list(spec.profile.constants),
        "c": spec.c,
        "tau0": spec.tau0,
        "abar": spec.abar,
        "p": spec.p,
        "bundle_degree": spec.bundle_degree,
        "kappa": spec.base.kappa,
        "area": spec.base.area,
        "euler_number": spec.euler_number,
        "fiber_period": spec.fiber_period,
    }


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = ";".join(_csv_cell(x) for x in v)
        else:
            out[key] = v
    return out


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(records, fh):
    rows = [_flatten(r) for r in records]
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in cols])


def write_structured(command, records, fh, stamp=None):
    stamp = stamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    header = {"kind": "header", "command": command, "timestamp": stamp, "version": __version__}
    fh.write(json.dumps(header) + "\n")
    for r in records:
        fh.write(json.dumps({"kind": "record", **_plain(r)}, sort_keys=False) + "\n")


# ---- commands ----------------------------------------------------------------------------


def _spec_cfg(cfg):
    return cfg.spec if cfg.spec is not None else SpecConfig()


def cmd_validate(cfg):
    sc = _spec_cfg(cfg)
    draft = sc.draft()
    rep = validate_interval(draft.profile, draft.interval)
    rec = {
        "name": sc.name,
        "interval": list(rep.interval),
        "positive_inside": rep.positive_inside,
        "q_at_zero": rep.q_at_zero,
        "boundary_regular": rep.boundary_regular,
        "simple_zero_at_endpoint": rep.simple_zero_at_endpoint,
        "q_prime_at_endpoint": rep.q_prime_at_endpoint,
        "min_inside": rep.min_inside,
        "ok": rep.ok,
        "messages": rep.messages,
    }
    return [rec], rep.ok


def _calibrated(cfg):
    run = cfg.run
    return calibrate(_spec_cfg(cfg).draft(), n_samples=run.n_samples, seed=run.seed)


def cmd_calibrate(cfg):
    res = _calibrated(cfg)
    ok = res.passed()
    rec = {
        **spec_record(res.spec),
        "einstein_constant": res.einstein_constant,
        "base_curvature": res.base_curvature,
        "cone_angle": res.info.get("cone_angle"),
        "residuals": res.residuals,
        "passed": ok,
    }
    return [rec], ok


def _eta_ok(report, cfg):
    return report.route_relative < cfg.run.route_tol and report.bounds_hold()


def cmd_eta(cfg):
    run = cfg.run
    if cfg.spec is None and cfg.closed is not None:
        cl = cfg.closed
        out = closed_eta_pipeline(cl.spec(), cl.sigma, run.tol, run.n_samples, run.seed)
        rec = {**spec_record(out.calibration.spec), **out.as_dict()}
        return [rec], _eta_ok(out.eta, cfg) and out.calibration.passed()
    res = _calibrated(cfg)
    rep = eta_report(res.spec, None, run.tol)
    rec = {**spec_record(res.spec), **rep.as_dict()}
    return [rec], _eta_ok(rep, cfg) and res.passed()


def cmd_verify(cfg):
    run = cfg.run
    specs, closed = [], []
    if cfg.spec is not None:
        specs.append(_calibrated(cfg).spec)
    if cfg.closed is not None:
        closed.append(cfg.closed.spec())
    if run.reference or not (specs or closed):
        specs.extend(reference_suite(run.n_samples, run.seed))
        closed.append(REFERENCE_CLOSED)
    table = run_verification(specs, closed, run.n_samples, run.seed, run.tol, cfg.threshold_map, cfg)
    return [r.as_dict() for r in table.rows], table.ok


_INT_FIELDS = {"bundle_degree", "genus", "euler_number"}


def cmd_sweep(cfg):
    run = cfg.run
    sw = cfg.sweep
    if sw is None:
        raise ConfigError(["sweep needs a [sweep] section"])
    records, ok = [], True
    for v in sw.values:
        if sw.parameter == "p":
            base = cfg.closed or ClosedConfig()
            cl = replace(base, p=_fraction(v), tau1=None if base.p != _fraction(v) else base.tau1)
            out = closed_eta_pipeline(cl.spec(), cl.sigma, run.tol, run.n_samples, run.seed)
            e = out.eta
            rec = {
                "p": str(cl.p),
                "chern_number": str(2 * cl.p),
                "c": cl.c,
                "tau1": out.spec.tau1,
                "tau0": out.spec.tau0,
                "sigma": out.sigma,
                "sigma_disk": out.sigma_disk,
                "implied_chern_number": out.implied_chern_number,
            }
        else:
            val = int(round(v)) if sw.parameter in _INT_FIELDS else float(v)
            sub = replace(cfg, spec=replace(_spec_cfg(cfg), **{sw.parameter: val}))
            res = _calibrated(sub)
            e = eta_report(res.spec, None, run.tol)
            rec = {sw.parameter: val, "tau0": res.spec.tau0, "sigma": e.sigma}
        rec.update(
            eta_reduced=e.eta_reduced,
            eta_curvature=e.eta_curvature,
            route_difference=e.route_difference,
            bound_lo=e.bound_lo,
            bound_hi=e.bound_hi,
            a=e.a,
            b=e.b,
        )
        ok = ok and _eta_ok(e, cfg)
        records.append(rec)
    return records, ok


def _fraction(v):
    return Fraction(v).limit_denominator(1000)


HANDLERS = {
    "validate": cmd_validate,
    "calibrate": cmd_calibrate,
    "eta": cmd_eta,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def run_command(command, cfg):
    """Run one subcommand; returns ``(records, ok)``."""
    return HANDLERS[command](cfg)


def build_parser():
    parser = argparse.ArgumentParser(prog="kahler-eta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "structured"), default=None)
        p.add_argument("--tol", type=float, help="quadrature tolerance")
        p.add_argument("--seed", type=int, help="sampling seed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = with_overrides(cfg, args.tol, args.seed)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("csv" if args.command in ("sweep", "verify") else "structured")
    log.info("running %s", args.command)
    try:
        records, ok = run_command(args.command, cfg)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    buf = io.StringIO()
    if fmt == "csv":
        write_csv(records, buf)
    else:
        write_structured(args.command, records, buf)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if not ok:
        log.warning("%s: some checks failed", args.command)
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
