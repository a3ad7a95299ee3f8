"""Run configuration: an INI file with a fixed set of sections and keys.

Example::

    [run]
    seed = 0
    n_samples = 50
    tol = 1e-9

    [spec]
    case = ii
    family = c
    constants = 0, 1, -1
    c = -2
    bundle_degree = -2

    [thresholds]
    route_agreement = 1e-4

Sections ``[spec]``, ``[closed]`` and ``[sweep]`` are optional.  Keys left out
take the defaults below; ``tau0`` defaults to the first zero of ``Q`` found
walking away from ``tau = 0``.  Floats are serialized with ``repr`` so that
``parse_config(cfg.serialize()) == cfg``.
"""

import configparser
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
import re

from .ansatz import TWO_PI, BaseSurface, CompactificationSpec
from .errors import ConfigError, GeometryError
from .hirzebruch import ClosedSurfaceSpec
from .profiles import QProfile, find_endpoint_zero


@dataclass(frozen=True)
class ConfigIssue:
    message: str
    section: str = None
    key: str = None
    line: int = None
    column: int = None

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}" + (f", column {self.column}" if self.column else ""))
        if self.section:
            where.append(f"[{self.section}]" + (f" {self.key}" if self.key else ""))
        return (", ".join(where) + ": " if where else "") + self.message


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt(conv):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "auto") else conv(text)

    return parse


@dataclass(frozen=True)
class RunSettings:
    seed: int = 0
    n_samples: int = 50
    tol: float = 1e-9
    route_tol: float = 1e-4
    reference: bool = False


@dataclass(frozen=True)
class SpecConfig:
    case: str = "ii"
    family: str = "c"
    constants: tuple = (0.0, 1.0, -1.0)
    c: float = -2.0
    tau0: float = None
    abar: float = None
    p: float = None
    bundle_degree: int = -2
    kappa: float = None
    area: float = None
    genus: int = None
    closed: bool = False
    euler_number: int = None
    fiber_period: float = TWO_PI
    name: str = "spec"

    def profile(self):
        if self.family == "c":
            return QProfile.family_c(*self.constants, self.c)
        return QProfile(self.family, self.constants)

    def resolved_tau0(self):
        if self.tau0 is not None:
            return self.tau0
        prof = self.profile()
        c = self.c if self.case == "ii" else None
        reach = 10.0 * max(1.0, abs(c or 0.0))
        for sgn in (1.0, -1.0):
            stop = sgn * reach
            if c is not None and c * sgn > 0:
                stop = c * (1.0 - 1e-9)
            z = find_endpoint_zero(prof, 0.0, stop)
            if z is not None and z != 0.0:
                return z
        raise ValueError("Q has no zero near tau = 0; set tau0 explicitly")

    def draft(self):
        return CompactificationSpec(
            self.case,
            self.profile(),
            self.resolved_tau0(),
            c=self.c if self.case == "ii" else None,
            abar=self.abar,
            p=self.p,
            bundle_degree=self.bundle_degree,
            base=BaseSurface(self.kappa, self.area, self.genus, self.closed),
            euler_number=self.euler_number,
            fiber_period=self.fiber_period,
            name=self.name,
        )


@dataclass(frozen=True)
class ClosedConfig:
    c: float = -1.0
    tau1: float = None
    p: Fraction = Fraction(3)
    chern_pairing: float = None
    constants: tuple = None
    hirzebruch: bool = True
    sigma: int = None
    name: str = "closed"

    def spec(self, tau1=None):
        from .hirzebruch import tau1_for_chern_number

        t1 = tau1 if tau1 is not None else self.tau1
        if t1 is None:
            t1 = tau1_for_chern_number(self.c, 2 * self.p)
        return ClosedSurfaceSpec(
            self.c, t1, self.p, self.chern_pairing, self.constants, self.hirzebruch, name=self.name
        )


@dataclass(frozen=True)
class SweepConfig:
    parameter: str = "p"
    values: tuple = (3.0, 4.0, 5.0)


def _frac(text):
    return Fraction(text.strip())


_SCHEMA = {
    "run": (RunSettings, {"seed": int, "n_samples": int, "tol": float, "route_tol": float, "reference": _bool}),
    "spec": (
        SpecConfig,
        {
            "case": str,
            "family": str,
            "constants": _floats,
            "c": float,
            "tau0": _opt(float),
            "abar": _opt(float),
            "p": _opt(float),
            "bundle_degree": _opt(int),
            "kappa": _opt(float),
            "area": _opt(float),
            "genus": _opt(int),
            "closed": _bool,
            "euler_number": _opt(int),
            "fiber_period": float,
            "name": str,
        },
    ),
    "closed": (
        ClosedConfig,
        {
            "c": float,
            "tau1": _opt(float),
            "p": _frac,
            "chern_pairing": _opt(float),
            "constants": _opt(_floats),
            "hirzebruch": _bool,
            "sigma": _opt(int),
            "name": str,
        },
    ),
    "sweep": (SweepConfig, {"parameter": str, "values": _floats}),
}


@dataclass(frozen=True)
class RunConfig:
    run: RunSettings = field(default_factory=RunSettings)
    spec: SpecConfig = None
    closed: ClosedConfig = None
    sweep: SweepConfig = None
    thresholds: tuple = ()

    @property
    def threshold_map(self):
        return dict(self.thresholds)

    def serialize(self):
        lines = []
        for name in ("run", "spec", "closed", "sweep"):
            obj = getattr(self, name)
            if obj is None:
                continue
            lines.append(f"[{name}]")
            for f in fields(obj):
                v = getattr(obj, f.name)
                lines.append(f"{f.name} = {'none' if v is None else _fmt(v)}")
            lines.append("")
        if self.thresholds:
            lines.append("[thresholds]")
            lines.extend(f"{k} = {v!r}" for k, v in self.thresholds)
            lines.append("")
        return "\n".join(lines)


def _key_lines(text):
    """``(section, key) -> (line, column)`` for every assignment in ``text``."""
    out, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            out[(section, None)] = (n, 1)
            continue
        m = re.match(r"\s*([^=:]+?)\s*[=:]", raw)
        if m and section:
            out[(section, m.group(1).strip().lower())] = (n, m.start(1) + 1)
    return out


def parse_config(text):
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        raise ConfigError(
            [ConfigIssue(f"cannot parse {line!r}", line=ln, column=1) for ln, line in exc.errors]
        ) from None
    except configparser.Error as exc:
        ln = getattr(exc, "lineno", None)
        raise ConfigError([ConfigIssue(exc.message.splitlines()[0], line=ln, column=1)]) from None
    locs = _key_lines(text)
    errors = []

    def issue(msg, section, key=None):
        line, col = locs.get((section, key), locs.get((section, None), (None, None)))
        errors.append(ConfigIssue(msg, section, key, line, col))

    from .verification import registry_names

    known = set(registry_names())
    parts = {}
    thresholds = []
    for section in parser.sections():
        if section == "thresholds":
            for key, val in parser.items(section):
                if key not in known:
                    issue(f"unknown invariant {key!r}", section, key)
                    continue
                try:
                    thresholds.append((key, float(val)))
                except ValueError:
                    issue(f"threshold must be a number, got {val!r}", section, key)
            continue
        if section not in _SCHEMA:
            issue(f"unknown section [{section}]", section)
            continue
        cls, conv = _SCHEMA[section]
        kw = {}
        for key, val in parser.items(section):
            if key not in conv:
                issue(f"unknown key {key!r}", section, key)
                continue
            try:
                kw[key] = conv[key](val)
            except (ValueError, ZeroDivisionError) as exc:
                issue(f"bad value {val!r}: {exc}", section, key)
        parts[section] = cls(**kw)
    cfg = RunConfig(
        run=parts.get("run", RunSettings()),
        spec=parts.get("spec"),
        closed=parts.get("closed"),
        sweep=parts.get("sweep"),
        thresholds=tuple(sorted(thresholds)),
    )
    if not errors:
        _semantic(cfg, issue)
    if errors:
        raise ConfigError(errors)
    return cfg


def _semantic(cfg, issue):
    r = cfg.run
    if r.n_samples < 1:
        issue("n_samples must be positive", "run", "n_samples")
    if not r.tol > 0:
        issue("tol must be positive", "run", "tol")
    s = cfg.spec
    if s is not None:
        if s.case not in ("i", "ii"):
            issue(f"case must be i or ii, got {s.case!r}", "spec", "case")
        elif s.family not in ("a", "b", "c"):
            issue(f"family must be a, b or c, got {s.family!r}", "spec", "family")
        elif len(s.constants) != 3:
            issue("constants takes three numbers", "spec", "constants")
        else:
            try:
                tau0 = s.resolved_tau0()
            except (ValueError, GeometryError) as exc:
                issue(str(exc), "spec", "tau0")
            else:
                lo, hi = sorted((0.0, tau0))
                if s.case == "ii" and lo <= s.c <= hi:
                    issue(
                        f"c = {s.c} lies in I0 = [{lo}, {hi}]; the opposite Kahler metric needs c outside I0",
                        "spec",
                        "c",
                    )
                else:
                    try:
                        s.draft()
                    except GeometryError as exc:
                        issue(str(exc), "spec")
    cl = cfg.closed
    if cl is not None and cl.tau1 is not None:
        try:
            cl.spec()
        except GeometryError as exc:
            issue(str(exc), "closed")
    sw = cfg.sweep
    if sw is not None:
        if sw.parameter != "p" and (s is None or sw.parameter not in {f.name for f in fields(SpecConfig)}):
            issue(f"cannot sweep {sw.parameter!r}", "sweep", "parameter")
        if not sw.values:
            issue("values is empty", "sweep", "values")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(cfg, tol=None, seed=None):
    run = cfg.run
    if tol is not None:
        run = replace(run, tol=float(tol))
    if seed is not None:
        run = replace(run, seed=int(seed))
    return replace(cfg, run=run)

