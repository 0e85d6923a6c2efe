"""Run configuration, optionally loaded from a JSON file."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .combinatorics import GcdHypothesis
from .errors import DomainError, InputError

DEFAULTS = {
    "c": "229/1000",
    "A": 283,
    "eta": "1/17000",
    "precision": 50,
    "shards": 1,
    "curves": {},
}


@dataclass(frozen=True)
class Config:
    c: Fraction = Fraction(229, 1000)
    A: int = 283
    eta: Fraction = Fraction(1, 17000)
    precision: int = 50  # decimal digits for mpmath work
    shards: int = 1
    # gamma -> {"L": float, "gap": float} overrides for Mordell curves
    curves: dict = field(default_factory=dict)

    @property
    def hypothesis(self) -> GcdHypothesis:
        return GcdHypothesis(self.c, self.eta, self.A)

    def curve_override(self, gamma: int, key: str):
        return self.curves.get(str(gamma), {}).get(key)

    def as_dict(self) -> dict:
        return {
            "c": str(self.c),
            "A": self.A,
            "eta": str(self.eta),
            "precision": self.precision,
            "curves": {g: dict(sorted(v.items())) for g, v in sorted(self.curves.items())},
        }


def _fraction(raw, name) -> Fraction:
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {raw!r}", name) from None


def config_from_dict(raw: dict) -> Config:
    if not isinstance(raw, dict):
        raise InputError("config must be a JSON object")
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise InputError(f"unknown key(s) {', '.join(unknown)}")
    merged = {**DEFAULTS, **raw}
    for key in ("A", "precision", "shards"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool) or merged[key] < 1:
            raise InputError("must be a positive integer", key)
    curves = merged["curves"]
    if not isinstance(curves, dict):
        raise InputError("must be an object keyed by gamma", "curves")
    clean = {}
    for g, spec in curves.items():
        try:
            int(g)
        except ValueError:
            raise InputError(f"curve key {g!r} is not an integer", "curves") from None
        if not isinstance(spec, dict) or set(spec) - {"L", "gap"}:
            raise InputError(f"curve {g} takes only L and gap", "curves")
        clean[str(int(g))] = {k: float(v) for k, v in spec.items()}
    cfg = Config(
        _fraction(merged["c"], "c"),
        merged["A"],
        _fraction(merged["eta"], "eta"),
        merged["precision"],
        merged["shards"],
        clean,
    )
    try:
        cfg.hypothesis
    except DomainError as exc:
        raise InputError(str(exc), "c/eta/A") from None
    return cfg


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    return config_from_dict(raw)
