"""Experiment configuration: ``key = value`` lines grouped in ``[section]`` blocks.

Unknown sections or keys are errors. Numeric values may be written as simple
arithmetic over ``pi`` (``2*pi*17e6``). Lists are comma-separated; integer
ranges may be written ``1-100``.
"""
import ast
import copy
import math
import operator

from .errors import ConfigError

TASKS = ("sine_square", "mackey_glass")
RESERVOIRS = ("quantum", "static", "sto")
SWEEP_AXES = ("none", "neurons", "g", "kappa", "delay")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi}


def _arith(node):
    if isinstance(node, ast.Expression):
        return _arith(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _arith(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_arith(node.left), _arith(node.right))
    raise ValueError("unsupported expression")


def parse_float(text):
    try:
        return float(_arith(ast.parse(str(text).strip(), mode="eval")))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def parse_int(text):
    value = parse_float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_int_list(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo.strip():
            out.extend(range(parse_int(lo), parse_int(hi) + 1))
        else:
            out.append(parse_int(part))
    return out


def parse_float_list(text):
    return [parse_float(p) for p in str(text).split(",") if p.strip()]


def parse_optional_float(text):
    low = str(text).strip().lower()
    return None if low in ("", "none", "auto") else parse_float(text)


def _choice(options):
    def parse(text):
        value = str(text).strip()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {value!r}")
        return value
    return parse


def _text(text):
    return str(text).strip()


# section -> key -> (default, parser); None defaults mean "derived at run time"
SCHEMA = {
    "experiment": {
        "task": ("sine_square", _choice(TASKS)),
        "reservoir": ("quantum", _choice(RESERVOIRS)),
        "output_dir": ("", _text),
        "name": ("", _text),
    },
    "mixer": {
        "kappa_a": (2 * math.pi * 17e6, parse_float),
        "kappa_b": (2 * math.pi * 21e6, parse_float),
        "g": (2 * math.pi * 20e6, parse_float),
        "eps0_a": (None, parse_optional_float),
        "eps0_b": (None, parse_optional_float),
        "drive_scale": (None, parse_optional_float),
        "segment": (100e-9, parse_float),
        "dt": (5e-11, parse_float),
        "cutoff_a": (7, parse_int),
        "cutoff_b": (7, parse_int),
        "dissipator_mode": ("joint", _choice(("joint", "separate"))),
        "edge_budget": (2e-4, parse_float),
        "photons": (None, parse_optional_float),
        "truncation_tol": (1e-3, parse_float),
        "calibrate_from": ("baseline", _choice(("baseline", "self"))),
    },
    "readout": {
        "max_na": (3, parse_int),
        "max_nb": (3, parse_int),
        "bias": (True, parse_bool),
        "ridge": (0.0, parse_float),
        "threshold": (0.5, parse_float),
    },
    "dataset": {
        "seed": (42, parse_int),
        "train_waveforms": (100, parse_int),
        "test_waveforms": (100, parse_int),
        "train_len": (1000, parse_int),
        "test_len": (1000, parse_int),
        "delays": (list(range(1, 101)), parse_int_list),
        "mg_beta": (0.2, parse_float),
        "mg_gamma": (0.1, parse_float),
        "mg_tau": (17.0, parse_float),
        "mg_exponent": (10.0, parse_float),
        "mg_step": (0.1, parse_float),
        "mg_history": (1.2, parse_float),
        "mg_warmup": (1000, parse_int),
    },
    "static": {
        "size": (40, parse_int),
        "seed": (0, parse_int),
        "input_scale": (1.0, parse_float),
        "recurrent_scale": (0.9, parse_float),
        "variant": ("embedded", _choice(("embedded", "literal"))),
    },
    "sto": {
        "size": (24, parse_int),
        "seed": (0, parse_int),
        "gamma_damping": (1e6, parse_float),
        "q": (2.0, parse_float),
        "sigma": (1.0, parse_float),
        "input_gain": (1.3333333333333333e7, parse_float),
        "i_dc": (1.4666666666666667e7, parse_float),
        "w_min": (0.0, parse_float),
        "w_max": (1.0, parse_float),
        "dt": (None, parse_optional_float),
        "interval": (100e-9, parse_float),
        "p0": (0.1, parse_float),
    },
    "sweep": {
        "axis": ("none", _choice(SWEEP_AXES)),
        "values": ([], parse_float_list),
        "seeds": ([0, 1, 2, 3, 4], parse_int_list),
        "workers": (0, parse_int),
    },
}

# drive scale per task as written in the source design; calibration rescales it
TASK_EPS0 = {"sine_square": 2e6, "mackey_glass": 5e5}


def defaults():
    return {sec: {k: copy.deepcopy(v[0]) for k, v in keys.items()} for sec, keys in SCHEMA.items()}


def _set(cfg, section, key, raw, where):
    if section not in SCHEMA:
        raise ConfigError(f"{where}: unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
    try:
        cfg[section][key] = SCHEMA[section][key][1](raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: [{section}] {key}: {exc}") from None


def parse_text(text, source="<config>", base=None):
    """Parse config text on top of ``base`` (default: the built-in defaults)."""
    cfg = copy.deepcopy(base) if base is not None else defaults()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"{where}: key {key.strip()!r} outside any [section]")
        _set(cfg, section, key.strip(), value.strip(), where)
    return validate(cfg)


def load(path, base=None):
    with open(path) as fh:
        return parse_text(fh.read(), str(path), base)


def apply_overrides(cfg, overrides):
    """Apply ``section.key=value`` strings (command-line overrides)."""
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        dotted, sep, value = item.partition("=")
        section, dot, key = dotted.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r}: expected section.key=value")
        _set(cfg, section, key, value, f"override {item!r}")
    return validate(cfg)


def validate(cfg):
    m = cfg["mixer"]
    for key in ("kappa_a", "kappa_b", "segment", "dt", "edge_budget", "truncation_tol"):
        if not m[key] > 0:
            raise ConfigError(f"[mixer] {key} must be positive")
    if m["g"] < 0:
        raise ConfigError("[mixer] g must be >= 0")
    r = cfg["readout"]
    if r["max_na"] > m["cutoff_a"] or r["max_nb"] > m["cutoff_b"]:
        raise ConfigError("[readout] readout exceeds the Fock cutoff")
    d = cfg["dataset"]
    if min(d["train_waveforms"], d["test_waveforms"], d["train_len"], d["test_len"]) < 1:
        raise ConfigError("[dataset] sizes must be >= 1")
    if cfg["sweep"]["axis"] != "none" and not cfg["sweep"]["values"]:
        raise ConfigError("[sweep] values must be set when axis is not 'none'")
    return cfg


def resolved_eps0(cfg):
    task_default = TASK_EPS0[cfg["experiment"]["task"]]
    m = cfg["mixer"]
    a = m["eps0_a"] if m["eps0_a"] is not None else task_default
    b = m["eps0_b"] if m["eps0_b"] is not None else task_default
    return a, b


def dumps(cfg):
    """Render a config in the same format :func:`parse_text` reads."""
    lines = []
    for section, keys in cfg.items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            lines.append(f"{key} = {_render(value)}")
        lines.append("")
    return "\n".join(lines)


def _render(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        if value and all(isinstance(v, int) for v in value) and value == list(range(value[0], value[-1] + 1)) \
                and len(value) > 2:
            return f"{value[0]}-{value[-1]}"
        return ", ".join(_render(v) for v in value)
    return str(value)
