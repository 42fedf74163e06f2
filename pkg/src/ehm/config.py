"""Plain-text run configuration: key=value lines, strict keys, round-trip stable."""

from __future__ import annotations

from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    pass


def parse_labels(text: str):
    """Label ranges like '1..12' or comma lists; 0 is never a valid label."""
    labels = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo_s, hi_s = part.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ConfigError(f"empty label range {part!r}")
            labels.extend(range(lo, hi + 1))
        else:
            labels.append(int(part))
    if any(m == 0 for m in labels):
        raise ConfigError("label 0 is not allowed")
    if not labels:
        raise ConfigError("empty label list")
    return tuple(labels)


def format_labels(labels) -> str:
    labels = list(labels)
    if len(labels) > 2 and labels == list(range(labels[0], labels[-1] + 1)):
        return f"{labels[0]}..{labels[-1]}"
    return ",".join(str(m) for m in labels)


@dataclass
class RunConfig:
    l1: float = 0.2
    l2: float = 3.0
    l3: float = 0.3
    alpha_cf: tuple = ()
    alpha_real: str = ""
    alpha_depth: int = 40
    alpha_beta: float = 0.0
    labels: tuple = tuple(range(1, 13))
    tol_e: float = 1e-10
    rho_margin: float = 1e-4
    label_max: int = 64
    iterations: int = 100_000
    phases: int = 32
    grid: int = 4096
    ids_box: int = 2000
    k_policy: str = "auto"
    out: str = ""
    format: str = "csv"
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("tol_e", "rho_margin"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if any(m == 0 for m in self.labels):
            raise ConfigError("label 0 is not allowed")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def alpha(self):
        from .arith import alpha_from_spec

        spec = {}
        if self.alpha_cf:
            spec["cf"] = self.alpha_cf
        elif self.alpha_real:
            spec["real"] = self.alpha_real
            spec["depth"] = self.alpha_depth
        elif self.alpha_beta > 0:
            spec["liouville"] = {"beta": self.alpha_beta, "depth": self.alpha_depth}
        else:
            raise ConfigError("frequency required (alpha_cf, alpha_real or alpha_beta)")
        return alpha_from_spec(spec)

    def coupling(self):
        from .operator import Coupling

        return Coupling(self.l1, self.l2, self.l3)


_PARSERS = {
    "l1": float, "l2": float, "l3": float,
    "alpha_cf": lambda s: tuple(int(a) for a in s.split(",") if a.strip()),
    "alpha_real": str,
    "alpha_depth": int,
    "alpha_beta": float,
    "labels": parse_labels,
    "tol_e": float,
    "rho_margin": float,
    "label_max": int,
    "iterations": int,
    "phases": int,
    "grid": int,
    "ids_box": int,
    "k_policy": str,
    "out": str,
    "format": str,
    "threads": int,
    "seed": int,
}


def parse_config(text: str) -> RunConfig:
    """Strict key=value parser; unknown keys and malformed lines are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ConfigError:
            raise
        except Exception as e:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {e}") from e
    return RunConfig(**values)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "labels":
            lines.append(f"labels={format_labels(v)}")
        elif f.name == "alpha_cf":
            if v:
                lines.append("alpha_cf=" + ",".join(str(a) for a in v))
        elif isinstance(v, float):
            lines.append(f"{f.name}={v!r}")
        else:
            lines.append(f"{f.name}={v}")
    return "\n".join(lines) + "\n"
