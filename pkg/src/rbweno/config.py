"""Run configuration: a small TOML-subset parser and the validated RunConfig.

The accepted syntax covers what run files need: ``[table]`` headers and
``key = value`` lines with strings, numbers, booleans, and flat numeric
arrays. The parser tracks line numbers so unknown keys and range errors
point at the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields

BENCHMARKS = (
    "sbr",
    "kpp",
    "titarev_toro",
    "kelvin_helmholtz",
    "double_mach",
    "cdr_mms",
    "cdr_layer",
)
SCHEMES = ("galerkin", "low_only", "weno", "rb_weno")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass
class RunConfig:
    benchmark: str = ""
    scheme: str = "weno"
    degree: int = 2
    elements: tuple = (64,)          # per-axis element counts
    theta: float = 1.0
    q: float = 1.0
    q_beta: float | None = None
    r: int = 2
    eps_w: float = 1e-6
    delta: float = 1e-6
    neighbor_weight: float = 1e-3
    uniform_weights: bool = False
    cfl: float = 0.3
    t_final: float | None = None     # benchmark default when None
    levels: int = 4                  # convergence studies
    eta: float | None = None         # SIP penalty (default 10 p^2)
    omega_mode: str = "computed"
    residual_source: str = "time_dependent"
    seed: int = 0
    output_dir: str = "out"
    profile_csv: str | None = None
    vtk_file: str | None = None
    diagnostics_csv: str | None = None

    def validate(self, lines: dict | None = None):
        def fail(key, msg):
            raise ConfigError(f"{key}: {msg}", (lines or {}).get(key))

        if self.benchmark not in BENCHMARKS:
            fail("benchmark", f"unknown benchmark {self.benchmark!r} (choose from {BENCHMARKS})")
        if self.scheme not in SCHEMES:
            fail("scheme", f"unknown scheme {self.scheme!r}")
        if self.degree not in (1, 2):
            fail("degree", f"degree must be 1 or 2, got {self.degree}")
        if not all(isinstance(e, int) and e >= 2 for e in self.elements):
            fail("elements", f"element counts must be integers >= 2, got {self.elements}")
        if self.theta < 0:
            fail("theta", f"theta must be >= 0, got {self.theta}")
        if self.q <= 0:
            fail("q", f"q must be positive, got {self.q}")
        if self.r < 1 or int(self.r) != self.r:
            fail("r", f"r must be a positive integer, got {self.r}")
        if self.eps_w <= 0:
            fail("eps_w", f"eps_w must be positive, got {self.eps_w}")
        if self.delta <= 0:
            fail("delta", f"delta must be positive, got {self.delta}")
        if not 0 < self.neighbor_weight < 1:
            fail("neighbor_weight", f"must lie in (0, 1), got {self.neighbor_weight}")
        if not 0 < self.cfl <= 1:
            fail("cfl", f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_final is not None and self.t_final <= 0:
            fail("t_final", f"t_final must be positive, got {self.t_final}")
        if self.levels < 1:
            fail("levels", f"levels must be >= 1, got {self.levels}")
        if self.eta is not None and self.eta <= 0:
            fail("eta", f"eta must be positive, got {self.eta}")
        if self.omega_mode not in ("computed", "one"):
            fail("omega_mode", f"unknown omega_mode {self.omega_mode!r}")
        if self.residual_source not in ("time_dependent", "spatial_only"):
            fail("residual_source", f"unknown residual_source {self.residual_source!r}")
        return self

    def weno_config(self):
        from .weno import WenoConfig

        return WenoConfig(
            neighbor_weight=self.neighbor_weight,
            uniform_weights=self.uniform_weights,
            r=int(self.r),
            eps=self.eps_w,
            delta=self.delta,
            theta=self.theta,
            q=self.q,
            q_beta=self.q_beta,
        )

    @property
    def stab_mode(self) -> str:
        return {
            "galerkin": "none",
            "low_only": "low_only",
            "weno": "weno_classical",
            "rb_weno": "rb_weno",
        }[self.scheme]


_KEY_TABLE = {
    "benchmark": ("benchmark", str),
    "scheme": ("scheme", str),
    "degree": ("degree", int),
    "elements": ("elements", "elements"),
    "theta": ("theta", float),
    "q": ("q", float),
    "q_beta": ("q_beta", float),
    "r": ("r", int),
    "cfl": ("cfl", float),
    "t_final": ("t_final", float),
    "levels": ("levels", int),
    "eta": ("eta", float),
    "omega_mode": ("omega_mode", str),
    "residual_source": ("residual_source", str),
    "seed": ("seed", int),
    "weno.eps": ("eps_w", float),
    "weno.delta": ("delta", float),
    "weno.neighbor_weight": ("neighbor_weight", float),
    "weno.uniform_weights": ("uniform_weights", bool),
    "weno.r": ("r", int),
    "weno.q": ("q", float),
    "weno.q_beta": ("q_beta", float),
    "weno.theta": ("theta", float),
    "output.dir": ("output_dir", str),
    "output.profile": ("profile_csv", str),
    "output.vtk": ("vtk_file", str),
    "output.diagnostics": ("diagnostics_csv", str),
}


def _parse_scalar(text: str, lineno: int):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    if text.startswith("[") and text.endswith("]"):
        body = text[1:-1].strip()
        if not body:
            return ()
        return tuple(_parse_scalar(part, lineno) for part in body.split(","))
    try:
        if any(ch in text for ch in ".eE") and not text.lstrip("+-").isdigit():
            return float(text)
        return int(text)
    except ValueError:
        raise ConfigError(f"cannot parse value {text!r}", lineno) from None


def parse_config(text: str) -> RunConfig:
    """Parse the TOML-subset run file into a validated RunConfig."""
    values: dict = {}
    lines_of: dict = {}
    table = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            table = line[1:-1].strip()
            if not table:
                raise ConfigError("empty table name", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", lineno)
        key, _, rhs = line.partition("=")
        key = key.strip()
        full = f"{table}.{key}" if table else key
        if full not in _KEY_TABLE:
            raise ConfigError(f"unknown key {full!r}", lineno)
        attr, kind = _KEY_TABLE[full]
        value = _parse_scalar(rhs, lineno)
        if kind == "elements":
            if isinstance(value, (int, float)):
                value = (int(value),)
            elif isinstance(value, tuple):
                value = tuple(int(v) for v in value)
            else:
                raise ConfigError(f"elements must be an integer or array, got {value!r}", lineno)
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{full} expects an integer, got {value!r}", lineno)
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{full} expects a number, got {value!r}", lineno)
            value = float(value)
        elif kind is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{full} expects true/false, got {value!r}", lineno)
        elif kind is str:
            if not isinstance(value, str):
                raise ConfigError(f"{full} expects a string, got {value!r}", lineno)
        values[attr] = value
        lines_of[attr] = lineno

    if "benchmark" not in values:
        raise ConfigError("missing benchmark key")
    from .benchmarks import benchmark_defaults

    cfg = RunConfig(**{**benchmark_defaults(values["benchmark"]), **values})
    cfg.validate(lines_of)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Emit the TOML-subset form; parse(serialize(cfg)) round-trips."""

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return f'"{v}"'
        if isinstance(v, tuple):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        if isinstance(v, float):
            return f"{v:.17g}"
        return str(v)

    top, weno, output = [], [], []
    for full, (attr, _) in _KEY_TABLE.items():
        val = getattr(cfg, attr)
        if val is None:
            continue
        line = f"{full.split('.', 1)[-1]} = {fmt(val)}"
        if full.startswith("weno."):
            if full in ("weno.r", "weno.q", "weno.q_beta", "weno.theta"):
                continue  # duplicated top-level spellings
            weno.append(line)
        elif full.startswith("output."):
            output.append(line)
        else:
            top.append(line)
    parts = top
    if weno:
        parts += ["", "[weno]"] + weno
    if output:
        parts += ["", "[output]"] + output
    return "\n".join(parts) + "\n"
