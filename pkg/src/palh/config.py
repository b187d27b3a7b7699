"""
Experiment configuration: bracketed sections of ``key = value`` lines.

Every experiment has a fixed schema; unknown sections or keys, malformed
values and values that violate module preconditions raise ConfigError
before any solve starts.
"""

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources

from . import geometry as geo
from .errors import ConfigError

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "parse_floats",
    "parse_ints",
    "parse_map",
    "parse_boundary",
    "load_config",
    "parse_config",
    "default_config_text",
    "bundled_config",
    "BUNDLED",
]

EXPERIMENTS = ("waveguide_compare", "circular_compare", "thickness_table", "scatter2d")
LAYER_KINDS = ("pal", "pml_n", "pml_inf")


def _num(tok):
    tok = tok.strip()
    try:
        val = float(tok)
    except ValueError:
        consts = {"pi": math.pi, "-pi": -math.pi}
        if tok in consts:
            return consts[tok]
        if "/" in tok:
            a, b = tok.split("/", 1)
            return _num(a) / _num(b)
        if "*" in tok:
            a, b = tok.split("*", 1)
            return _num(a) * _num(b)
        raise ConfigError(f"not a number: {tok!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"not a finite number: {tok!r}")
    return val


def parse_floats(text):
    """Comma separated numbers; ``pi``, ``a/b`` and ``a*b`` are accepted."""
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError("empty list")
    return [_num(t) for t in items]


def parse_ints(text):
    """Comma separated integers or inclusive ranges ``lo:hi[:step]``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if ":" in tok:
                parts = [int(p) for p in tok.split(":")]
                if len(parts) == 2:
                    parts.append(1)
                lo, hi, step = parts
                if step <= 0 or hi < lo:
                    raise ConfigError(f"bad range {tok!r}")
                out.extend(range(lo, hi + 1, step))
            else:
                out.append(int(tok))
        except ValueError:
            raise ConfigError(f"not an integer list: {text!r}") from None
    if not out:
        raise ConfigError("empty integer list")
    return out


def parse_map(text):
    """``key:value`` pairs, e.g. ``50:5.16, 100:2.78``; keys are numbers."""
    out = {}
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" not in tok:
            raise ConfigError(f"expected key:value, got {tok!r}")
        k, v = tok.split(":", 1)
        out[_num(k)] = _num(v)
    if not out:
        raise ConfigError("empty map")
    return out


_SHAPES = {
    "circle": (geo.circle, 1),
    "perturbed": (geo.perturbed, 2),
    "rectangle": (geo.rectangle, 2),
    "ellipse": (geo.ellipse, 2),
    "hexstar": (geo.hexstar, 4),
    "peanut": (geo.peanut, 4),
}


def parse_boundary(text):
    """``kind p1 p2 ...``, e.g. ``hexstar 0.5 0.15 6 pi/4``; star shapes may omit parameters."""
    toks = text.split()
    if not toks or toks[0] not in _SHAPES:
        raise ConfigError(f"boundary kind must be one of {sorted(_SHAPES)}, got {text!r}")
    fn, npar = _SHAPES[toks[0]]
    params = [_num(t) for t in toks[1:]]
    if toks[0] in ("hexstar", "peanut"):
        if params and len(params) != npar:
            raise ConfigError(f"{toks[0]} takes 0 or {npar} parameters")
    elif len(params) != npar:
        raise ConfigError(f"{toks[0]} takes {npar} parameters")
    try:
        return fn(*params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _kinds(text):
    out = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in out if t not in LAYER_KINDS]
    if bad or not out:
        raise ConfigError(f"layer kinds must be drawn from {LAYER_KINDS}, got {text!r}")
    return out


def _pos(fn):
    def check(text):
        val = fn(text)
        vals = val if isinstance(val, list) else list(val.values()) if isinstance(val, dict) else [val]
        if any(v <= 0 for v in vals):
            raise ConfigError(f"expected positive values, got {text!r}")
        return val
    return check


def _choice(*options):
    def check(text):
        t = text.strip()
        if t not in options:
            raise ConfigError(f"expected one of {options}, got {t!r}")
        return t
    return check


def _int_or_auto(text):
    t = text.strip()
    if t == "auto":
        return "auto"
    if ":" in t:
        return {k: int(v) for k, v in parse_map(t).items()}
    return parse_ints(t)[0]


def _degree_map(text):
    t = text.strip()
    if t == "auto":
        return "auto"
    if ":" in t:
        return {k: int(v) for k, v in parse_map(t).items()}
    return int(parse_ints(t)[0])


_pfloat = _pos(lambda t: _num(t))
_pfloats = _pos(parse_floats)
_pints = _pos(parse_ints)
_float = _num

# schema: section -> key -> (parser, default text)
SCHEMAS = {
    "waveguide_compare": {
        "problem": {"k": (_pfloat, "29.9"), "length": (_pfloat, "1"), "thickness": (_pfloats, "0.1, 0.5"),
                    "source": (parse_map, "5:1, 30:-1")},
        "pal": {"sigma0": (_pfloat, "1"), "sigma1": (_pfloat, "1")},
        "pml": {"sigma0": (_pfloat, "10"), "exponent": (_pints, "1")},
        "discretization": {"kinds": (_kinds, "pal, pml_n, pml_inf"), "degrees": (_pints, "8:48:4"),
                           "interior_degree": (_pints, "60")},
        "sampling": {"nx": (_pints, "201"), "ny": (_pints, "61")},
    },
    "circular_compare": {
        "problem": {"k": (_pfloats, "50, 100"), "r0": (_pfloat, "1"), "r1": (_pfloat, "2"), "r2": (_pfloat, "2.2"),
                    "theta0": (_float, "0")},
        "pal": {"sigma0": (_pfloat, "1"), "sigma1": (_pfloat, "1")},
        "pml": {"pml_n_sigma0": (_pos(parse_map), "50:5.16, 100:2.78"),
                "pml_inf_sigma0": (_pos(parse_map), "50:1/50, 100:1/100"), "exponent": (_pints, "1")},
        "discretization": {"kinds": (_kinds, "pal, pml_n, pml_inf"), "degrees": (_pints, "5:30:5"),
                           "interior_degree": (_degree_map, "160"), "modes": (_int_or_auto, "50:100, 100:200")},
        "sampling": {"nr": (_pints, "41"), "ntheta": (_pints, "128")},
    },
    "thickness_table": {
        "problem": {"k": (_pfloats, "10, 50, 100"), "thickness": (_pfloats, "1, 0.5, 0.1, 0.01, 0.001"),
                    "r0": (_pfloat, "1"), "r1": (_pfloat, "2"), "theta0": (_float, "0")},
        "pal": {"sigma0": (_pfloat, "1"), "sigma1": (_pfloat, "1")},
        "discretization": {"layer_degree": (_pints, "30"), "interior_degree": (_degree_map, "10:100, 50:100, 100:200"),
                           "modes": (_int_or_auto, "auto")},
        "sampling": {"nr": (_pints, "41"), "ntheta": (_pints, "128")},
    },
    "scatter2d": {
        "problem": {"k": (_pfloat, "30"), "theta0": (_float, "0"), "scatterer": (parse_boundary, "hexstar"),
                    "layer": (parse_boundary, "circle 1.3"), "layer_scale": (_pfloat, "1"),
                    "rho": (_pfloat, "1.55/1.3")},
        "pal": {"sigma0": (_pfloat, "1"), "sigma1": (_pfloat, "1")},
        "medium": {"refraction": (_choice("none", "gaussian"), "none"), "c0": (_float, "1"),
                   "c1": (_pfloat, "0.05"), "x0": (_float, "0"), "y0": (_float, "0.5")},
        "discretization": {"sectors": (_pints, "20"), "interior_rings": (_pints, "2"), "layer_rings": (_pints, "1"),
                           "interior_degree": (_pints, "20"), "degrees": (_pints, "5:15"),
                           "reference_degree": (_pints, "24")},
        "sampling": {"points": (_pints, "2000"), "seed": (_pints, "1"), "profile_points": (_pints, "201"),
                     "dump_nr": (_pints, "40"), "dump_ntheta": (_pints, "180")},
    },
}

_SCALARS = {"k", "length", "r0", "r1", "r2", "theta0", "sigma0", "sigma1", "layer_scale", "rho", "c0", "c1", "x0",
            "y0", "nx", "ny", "nr", "ntheta", "sectors", "interior_rings", "layer_rings", "reference_degree", "points",
            "seed", "profile_points", "dump_nr", "dump_ntheta", "layer_degree", "exponent", "interior_degree"}


@dataclass
class ExperimentConfig:
    """Validated parameters: ``sections[section][key]`` holds parsed values."""

    experiment: str
    sections: dict = field(default_factory=dict)

    def __getitem__(self, section):
        return self.sections[section]

    def get(self, section, key):
        return self.sections[section][key]

    def echo(self):
        """JSON-friendly copy of all parameters."""
        def plain(v):
            if isinstance(v, geo.StarBoundary):
                return {"kind": v.kind, "params": list(v.params), "scale": v.scale}
            if isinstance(v, dict):
                return {str(a): plain(b) for a, b in v.items()}
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            return v
        return {"experiment": self.experiment, **{s: plain(kv) for s, kv in self.sections.items()}}


_LIST_K = ("circular_compare", "thickness_table")


def _scalar_list(experiment, key, val):
    scalar = key in _SCALARS and not (key == "k" and experiment in _LIST_K)
    if scalar and isinstance(val, list):
        if len(val) != 1:
            raise ConfigError(f"{key} takes a single value")
        return val[0]
    return val


def parse_config(text, experiment):
    """Parse config text for ``experiment``; missing keys take schema defaults."""
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    schema = SCHEMAS[experiment]
    for sec in cp.sections():
        if sec not in schema:
            raise ConfigError(f"unknown section [{sec}] for {experiment}")
        for key in cp[sec]:
            if key not in schema[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    sections = {}
    for sec, keys in schema.items():
        sections[sec] = {}
        for key, (parser, default) in keys.items():
            raw = cp[sec][key] if cp.has_section(sec) and key in cp[sec] else default
            try:
                val = parser(raw)
            except ConfigError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}") from None
            sections[sec][key] = _scalar_list(experiment, key, val)
    cfg = ExperimentConfig(experiment, sections)
    _validate(cfg)
    return cfg


def load_config(path, experiment):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, experiment)


def _validate(cfg):
    s = cfg.sections
    e = cfg.experiment
    if e == "circular_compare":
        p = s["problem"]
        if not p["r0"] < p["r1"] < p["r2"]:
            raise ConfigError("need r0 < r1 < r2")
        for key in ("pml_n_sigma0", "pml_inf_sigma0"):
            missing = [k for k in p["k"] if k not in s["pml"][key]]
            if missing and any(kd != "pal" for kd in s["discretization"]["kinds"]):
                raise ConfigError(f"[pml] {key} has no entry for k = {missing}")
    if e == "thickness_table":
        p = s["problem"]
        if not p["r0"] < p["r1"]:
            raise ConfigError("need r0 < r1")
    if e in ("circular_compare", "thickness_table"):
        for key in ("interior_degree", "modes"):
            val = s["discretization"][key]
            if isinstance(val, dict):
                missing = [k for k in s["problem"]["k"] if k not in val]
                if missing:
                    raise ConfigError(f"[discretization] {key} has no entry for k = {missing}")
    if e == "scatter2d":
        d = s["discretization"]
        if d["reference_degree"] <= max(d["degrees"]):
            raise ConfigError("reference_degree must exceed every swept degree")
        if min(d["degrees"]) < 1 or d["interior_degree"] < 2:
            raise ConfigError("degrees must be at least 1 (interior at least 2)")
        if s["problem"]["rho"] <= 1:
            raise ConfigError("rho must exceed 1")
        if d["sectors"] < 3:
            raise ConfigError("need at least 3 sectors")
    if e == "waveguide_compare":
        src = s["problem"]["source"]
        if any(int(l) != l or l < 1 for l in src):
            raise ConfigError("source modes must be positive integers")
        if min(s["discretization"]["degrees"]) < 2:
            raise ConfigError("layer degrees must be at least 2")


def default_config_text(experiment):
    """Config file text spelling out every default for ``experiment``."""
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    lines = []
    for sec, keys in SCHEMAS[experiment].items():
        lines.append(f"[{sec}]")
        lines.extend(f"{key} = {default}" for key, (_, default) in keys.items())
        lines.append("")
    return "\n".join(lines)


# bundled config name -> experiment
BUNDLED = {
    "waveguide": "waveguide_compare",
    "circular": "circular_compare",
    "thickness": "thickness_table",
    "scatter_hexstar_circle": "scatter2d",
    "scatter_hexstar_star": "scatter2d",
    "scatter_peanut_ellipse": "scatter2d",
    "scatter_peanut_rectangle": "scatter2d",
    "scatter_peanut_rectangle_gaussian": "scatter2d",
}


def bundled_config(name):
    """Parsed copy of one of the configs shipped in ``palh/configs``."""
    if name not in BUNDLED:
        raise ConfigError(f"no bundled config {name!r}; choose from {sorted(BUNDLED)}")
    text = resources.files("palh").joinpath("configs", f"{name}.ini").read_text()
    return parse_config(text, BUNDLED[name])
