"""Flat key=value experiment configuration with strict validation.

All validation failures are collected and reported together; unknown keys are
rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

EXPERIMENTS = ("exp0", "exp1", "exp2", "exp3", "exp4",
               "channel-grid", "packing", "crossover")


class ConfigError(ValueError):
    """Raised with every detected problem listed, one per line."""


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    n: int = 0  # 0 selects the experiment default
    alpha: float = np.pi / 3
    alpha_list: tuple[float, ...] = ()
    theta: float = -1.0  # negative selects the variational optimum
    phi: float = np.pi / 4
    beta_min: float = 0.0
    beta_max: float = np.pi
    beta_points: int = 12
    m_list: tuple[int, ...] = (1, 2, 3)
    shots: int = 10000
    trials: int = 240
    noise_p: float = 0.0
    noise_seed: int = 0
    compile_mode: str = "direct"
    fast: bool = False
    output_dir: str = "results"

    def config_hash(self) -> str:
        """Digest of every result-affecting field; output_dir is excluded so
        the same run lands in the same-named folder anywhere."""
        parts = []
        for f in fields(self):
            if f.name == "output_dir":
                continue
            parts.append(f"{f.name}={getattr(self, f.name)!r}")
        return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]

    def effective_shots(self) -> int:
        return max(1, self.shots // 10) if self.fast else self.shots

    def effective_trials(self) -> int:
        return max(1, self.trials // 10) if self.fast else self.trials


_PARSERS = {
    "experiment": str,
    "seed": int,
    "n": int,
    "alpha": float,
    "alpha_list": _float_list,
    "theta": float,
    "phi": float,
    "beta_min": float,
    "beta_max": float,
    "beta_points": int,
    "m_list": _int_list,
    "shots": int,
    "trials": int,
    "noise_p": float,
    "noise_seed": int,
    "compile_mode": str,
    "fast": lambda s: s.lower() in ("1", "true", "yes"),
    "output_dir": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse key=value lines ('#' comments allowed) into a validated config."""
    errors: list[str] = []
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {line!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            values[key] = _PARSERS[key](val)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse {key}={val!r}")
    if "experiment" not in values:
        errors.append("missing required key 'experiment'")
    elif values["experiment"] not in EXPERIMENTS:
        errors.append(f"unknown experiment {values['experiment']!r}; "
                      f"choose one of {', '.join(EXPERIMENTS)}")
    if "seed" not in values:
        errors.append("missing required key 'seed' (runs must be reproducible)")
    if not errors:
        cfg = ExperimentConfig(**values)
        errors.extend(validate_config(cfg))
        if not errors:
            return cfg
    raise ConfigError("\n".join(errors))


def validate_config(cfg: ExperimentConfig) -> list[str]:
    errors = []
    if cfg.n and cfg.n % 2 == 0:
        errors.append("n must be odd for symmetry-dependent resource states")
    if not 0.0 <= cfg.noise_p <= 1.0:
        errors.append(f"noise_p {cfg.noise_p} outside [0, 1]")
    if cfg.beta_points < 2:
        errors.append("beta_points must be >= 2")
    if cfg.beta_min >= cfg.beta_max:
        errors.append("beta_min must be below beta_max")
    if cfg.shots < 1 or cfg.trials < 1:
        errors.append("shots and trials must be positive")
    if cfg.compile_mode not in ("direct", "swap_compiled"):
        errors.append(f"unknown compile_mode {cfg.compile_mode!r}")
    if cfg.experiment in ("exp0", "exp2") and not cfg.alpha_list and cfg.alpha < 0:
        errors.append("exp0/exp2 need alpha or alpha_list")
    if any(m < 1 for m in cfg.m_list):
        errors.append("m_list entries must be >= 1")
    return errors


def default_n(cfg: ExperimentConfig) -> int:
    if cfg.n:
        return cfg.n
    return {"exp0": 5, "exp1": 5, "exp2": 5, "exp3": 9, "exp4": 11,
            "channel-grid": 5, "packing": 11, "crossover": 11}[cfg.experiment]
