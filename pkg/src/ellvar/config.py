"""Line-oriented run configuration: dotted keys, strict schema.

Format: one `section.key = value` per line, UTF-8, `#` starts a comment.
Unknown keys are rejected and every validation message carries the line it
came from.  Values are floats, ints, bools, space-separated numeric lists,
or expression strings in the weights grammar.

lambda/mu may be given absolutely (problem.lambda, problem.mu) or through
problem.lambda_mu_fraction, in which case lambda + mu is resolved to the
given fraction of the computed admissibility window Lambda0 (split
equally).  weights.h_fraction similarly rescales h1, h2 by one common
factor so that |h1|^2 + |h2|^2 equals the fraction of the computed m.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex

__all__ = ["RunConfig", "ConfigError", "loads", "load_file", "dumps"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dim: int
    lo: tuple
    hi: tuple
    nodes: tuple
    q: float
    alpha: float
    beta: float
    lam: float | None
    mu: float | None
    lambda_mu_fraction: float | None
    phi1_family: int
    phi1_A: float
    phi1_p: float | None
    phi1_r: float | None
    phi2_family: int
    phi2_A: float
    phi2_p: float | None
    phi2_r: float | None
    w_a: str
    w_b: str
    w_c: str
    w_h1: str
    w_h2: str
    h_fraction: float | None
    max_iters: int
    step0: float
    residual_tol: float
    path_points: int
    backtracking: float
    seed: int
    eps_policy: str
    sp_restarts: int
    sp_seed: int
    out_dir: str
    sweep_param: str | None
    sweep_values: tuple


_FLOAT, _INT, _STR, _EXPR, _FLOATS, _INTS = range(6)

# key -> (attribute, kind, required, default)
_SCHEMA = {
    "grid.dim": ("dim", _INT, True, None),
    "grid.lo": ("lo", _FLOATS, True, None),
    "grid.hi": ("hi", _FLOATS, True, None),
    "grid.nodes": ("nodes", _INTS, True, None),
    "problem.q": ("q", _FLOAT, True, None),
    "problem.alpha": ("alpha", _FLOAT, True, None),
    "problem.beta": ("beta", _FLOAT, True, None),
    "problem.lambda": ("lam", _FLOAT, False, None),
    "problem.mu": ("mu", _FLOAT, False, None),
    "problem.lambda_mu_fraction": ("lambda_mu_fraction", _FLOAT, False, None),
    "phi1.family": ("phi1_family", _INT, True, None),
    "phi1.A": ("phi1_A", _FLOAT, True, None),
    "phi1.p": ("phi1_p", _FLOAT, False, None),
    "phi1.r": ("phi1_r", _FLOAT, False, None),
    "phi2.family": ("phi2_family", _INT, True, None),
    "phi2.A": ("phi2_A", _FLOAT, True, None),
    "phi2.p": ("phi2_p", _FLOAT, False, None),
    "phi2.r": ("phi2_r", _FLOAT, False, None),
    "weights.a": ("w_a", _EXPR, True, None),
    "weights.b": ("w_b", _EXPR, True, None),
    "weights.c": ("w_c", _EXPR, True, None),
    "weights.h1": ("w_h1", _EXPR, True, None),
    "weights.h2": ("w_h2", _EXPR, True, None),
    "weights.h_fraction": ("h_fraction", _FLOAT, False, None),
    "solver.max_iters": ("max_iters", _INT, False, 20000),
    "solver.step0": ("step0", _FLOAT, False, 1.0),
    "solver.residual_tol": ("residual_tol", _FLOAT, False, 1e-8),
    "solver.path_points": ("path_points", _INT, False, 41),
    "solver.backtracking": ("backtracking", _FLOAT, False, 0.5),
    "solver.seed": ("seed", _INT, False, 0),
    "thresholds.eps_policy": ("eps_policy", _STR, False, "symmetric"),
    "thresholds.sp_restarts": ("sp_restarts", _INT, False, 8),
    "thresholds.sp_seed": ("sp_seed", _INT, False, 7654321),
    "output.dir": ("out_dir", _STR, False, "out"),
    "sweep.param": ("sweep_param", _STR, False, None),
    "sweep.values": ("sweep_values", _FLOATS, False, ()),
}


def _convert(key, kind, raw, line_no):
    def bail(msg):
        raise ConfigError(f"line {line_no}: {key}: {msg}")

    if kind == _FLOAT:
        try:
            return float(raw)
        except ValueError:
            bail(f"expected a real number, got {raw!r}")
    if kind == _INT:
        try:
            return int(raw)
        except ValueError:
            bail(f"expected an integer, got {raw!r}")
    if kind == _FLOATS:
        try:
            return tuple(float(v) for v in raw.split())
        except ValueError:
            bail(f"expected space-separated reals, got {raw!r}")
    if kind == _INTS:
        try:
            return tuple(int(v) for v in raw.split())
        except ValueError:
            bail(f"expected space-separated integers, got {raw!r}")
    if kind == _EXPR:
        try:
            return ex.to_string(ex.parse(raw))
        except ex.ParseError as err:
            bail(f"bad expression: {err}")
    return raw


def loads(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    values = {}
    lines = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        attr, kind, _req, _default = _SCHEMA[key]
        values[attr] = _convert(key, kind, raw, line_no)
        lines[attr] = line_no

    fields = {}
    for key, (attr, _kind, required, default) in _SCHEMA.items():
        if attr in values:
            fields[attr] = values[attr]
        elif required:
            raise ConfigError(f"missing required key {key!r}")
        else:
            fields[attr] = default
    cfg = RunConfig(**fields)
    _validate(cfg, lines)
    return cfg


def _anchor(lines, attr):
    return f"line {lines[attr]}: " if attr in lines else ""


def _validate(cfg: RunConfig, lines: dict) -> None:
    def bail(attr, msg):
        raise ConfigError(f"{_anchor(lines, attr)}{msg}")

    if cfg.dim not in (1, 2, 3):
        bail("dim", "grid.dim must be 1, 2 or 3")
    for attr, name in (("lo", "grid.lo"), ("hi", "grid.hi"),
                       ("nodes", "grid.nodes")):
        if len(getattr(cfg, attr)) != cfg.dim:
            bail(attr, f"{name} must list {cfg.dim} value(s)")
    if any(n < 3 for n in cfg.nodes):
        bail("nodes", "need at least 3 nodes per axis")
    if any(b <= a for a, b in zip(cfg.lo, cfg.hi)):
        bail("hi", "grid.hi must exceed grid.lo on every axis")
    if not (1.0 < cfg.q < 2.0):
        bail("q", "problem.q must lie in (1, 2)")
    if cfg.alpha <= 1.0:
        bail("alpha", "problem.alpha must exceed 1")
    if cfg.beta <= 1.0:
        bail("beta", "problem.beta must exceed 1")
    ab = cfg.alpha + cfg.beta
    if ab <= 2.0:
        bail("alpha", "alpha + beta must exceed 2")
    if cfg.dim == 3 and ab >= 6.0:
        bail("alpha", "alpha + beta must stay below 6 on a 3-d grid")
    has_abs = cfg.lam is not None or cfg.mu is not None
    if cfg.lambda_mu_fraction is not None:
        if has_abs:
            bail("lambda_mu_fraction",
                 "give either problem.lambda/problem.mu or "
                 "problem.lambda_mu_fraction, not both")
        if cfg.lambda_mu_fraction <= 0:
            bail("lambda_mu_fraction", "fraction must be positive")
    else:
        if cfg.lam is None or cfg.mu is None:
            raise ConfigError(
                "set problem.lambda and problem.mu, or "
                "problem.lambda_mu_fraction")
        if cfg.lam <= 0 or cfg.mu <= 0:
            bail("lam", "lambda and mu must be positive")
    if cfg.h_fraction is not None and cfg.h_fraction <= 0:
        bail("h_fraction", "weights.h_fraction must be positive")
    if cfg.max_iters <= 0:
        bail("max_iters", "solver.max_iters must be positive")
    if cfg.step0 <= 0:
        bail("step0", "solver.step0 must be positive")
    if cfg.residual_tol <= 0:
        bail("residual_tol", "solver.residual_tol must be positive")
    if cfg.path_points < 3:
        bail("path_points", "solver.path_points must be at least 3")
    if not (0.0 < cfg.backtracking < 1.0):
        bail("backtracking", "solver.backtracking must lie in (0, 1)")
    if cfg.eps_policy not in ("symmetric", "golden"):
        bail("eps_policy", "thresholds.eps_policy must be symmetric or golden")
    if cfg.sp_restarts < 1:
        bail("sp_restarts", "thresholds.sp_restarts must be at least 1")
    if cfg.sweep_param is not None and cfg.sweep_param not in (
            "lambda_mu_fraction", "h_fraction"):
        bail("sweep_param",
             "sweep.param must be lambda_mu_fraction or h_fraction")


def _format(kind, value):
    if kind in (_FLOATS, _INTS):
        return " ".join(repr(v) if kind == _FLOATS else str(v) for v in value)
    if kind == _FLOAT:
        return repr(value)
    if kind == _INT:
        return str(value)
    return str(value)


def dumps(cfg: RunConfig) -> str:
    """Emit the normalized configuration; loads(dumps(c)) is idempotent."""
    out = []
    for key, (attr, kind, _req, _default) in _SCHEMA.items():
        value = getattr(cfg, attr)
        if value is None or (kind in (_FLOATS, _INTS) and len(value) == 0):
            continue
        out.append(f"{key} = {_format(kind, value)}")
    return "\n".join(out) + "\n"


def load_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
