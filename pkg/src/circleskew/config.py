"""Run configuration: a YAML file of nested sections, validated on load."""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .circle import CircleMap, _num
from .errors import ConfigError, InvalidMap
from .skew import IfsFamily
from .symbolic import Word

_BAD_VALUE = (InvalidMap, KeyError, TypeError, ValueError, SyntaxError, ZeroDivisionError,
              OverflowError)

DEFAULTS = {
    "seed_word": None,
    "stages": 2,
    "gamma": {"gamma0": "0.3", "ratio": "0.5"},
    "eta": {"eta0": "1", "schedule": "harmonic", "ratio": "0.5"},
    "tolerances": {"fixpoint_tol": "1e-12", "cert_slack": "1e-9"},
    "caps": {"max_n": 1_000_000, "max_word_len": 60, "max_period": 5_000_000,
             "max_bootstrap": 4, "cover_word_len": 40, "seed_word_len": 8,
             "minimality_word_len": 200},
    "grids": {"circle_grid": 10_000, "contraction_grid": 256, "cylinder_depth": 3,
              "fourier_modes": 4},
    "hypotheses": {"nu": "1.1", "minimality_eps": "0.02", "minimality_samples": 8},
    "sampling": {"seed": 0, "c1_samples": 256},
    "conjugacy": None,
    "output_dir": "out",
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _positive(name, v, integer=False):
    if integer:
        if isinstance(v, bool) or not isinstance(v, (int, str)):
            raise ConfigError(f"{name} must be an integer, got {v!r}")
        try:
            x = int(v)
        except ValueError as e:
            raise ConfigError(f"{name} must be an integer, got {v!r}") from e
    else:
        try:
            x = _num(v)
        except _BAD_VALUE as e:
            raise ConfigError(f"{name}: cannot read {v!r}") from e
    if not x > 0 or not math.isfinite(x):
        raise ConfigError(f"{name} must be positive, got {v!r}")
    return x


@dataclass
class RunConfig:
    raw: dict
    generators: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a mapping")
        unknown = set(d) - set(DEFAULTS) - {"family"}
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        raw = _merge(DEFAULTS, d)
        fam = raw.get("family")
        if not isinstance(fam, list) or len(fam) < 2:
            raise ConfigError("family must list at least two generators")
        if len(fam) > 9:
            raise ConfigError("at most nine generators are supported")
        try:
            gens = [CircleMap.from_dict(g) for g in fam]
        except _BAD_VALUE as e:
            raise ConfigError(f"family: {e}") from e
        cfg = cls(raw, gens)
        cfg._validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e}") from e
        try:
            d = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML: {e}") from e
        return cls.from_dict(d or {})

    def _validate(self):
        r = self.raw
        _positive("stages", r["stages"], integer=True)
        _positive("gamma.gamma0", r["gamma"]["gamma0"])
        q = _positive("gamma.ratio", r["gamma"]["ratio"])
        if not q < 1:
            raise ConfigError("gamma.ratio must be < 1 so that the gamma series converges")
        _positive("eta.eta0", r["eta"]["eta0"])
        if r["eta"]["schedule"] not in ("harmonic", "geometric"):
            raise ConfigError("eta.schedule must be harmonic or geometric")
        if r["eta"]["schedule"] == "geometric" and not _positive("eta.ratio", r["eta"]["ratio"]) < 1:
            raise ConfigError("eta.ratio must be < 1 so that eta tends to 0")
        for k, v in r["tolerances"].items():
            _positive(f"tolerances.{k}", v)
        for k, v in r["caps"].items():
            _positive(f"caps.{k}", v, integer=True)
        for k, v in r["grids"].items():
            _positive(f"grids.{k}", v, integer=True)
        if not _positive("hypotheses.nu", r["hypotheses"]["nu"]) > 1:
            raise ConfigError("hypotheses.nu must exceed 1")
        _positive("hypotheses.minimality_eps", r["hypotheses"]["minimality_eps"])
        _positive("hypotheses.minimality_samples", r["hypotheses"]["minimality_samples"], integer=True)
        _positive("sampling.c1_samples", r["sampling"]["c1_samples"], integer=True)
        if r["seed_word"] is not None:
            try:
                w = Word.from_string(str(r["seed_word"]))
                Word(w.array, k=len(self.generators))
            except ValueError as e:
                raise ConfigError(f"seed_word: {e}") from e
            if len(w) == 0:
                raise ConfigError("seed_word must be nonempty")
        if r["conjugacy"] is not None:
            try:
                CircleMap.from_dict(r["conjugacy"]["phi"])
            except _BAD_VALUE as e:
                raise ConfigError(f"conjugacy.phi: {e}") from e

    # accessors ---------------------------------------------------------------------
    def family(self) -> IfsFamily:
        return IfsFamily(self.generators, min_size=2)

    @property
    def stages(self) -> int:
        return int(self.raw["stages"])

    @property
    def seed_word(self) -> Word | None:
        w = self.raw["seed_word"]
        return None if w is None else Word.from_string(str(w))

    @property
    def gamma0(self) -> float:
        return _num(self.raw["gamma"]["gamma0"])

    @property
    def gamma_ratio(self) -> float:
        return _num(self.raw["gamma"]["ratio"])

    def gamma(self, n: int) -> float:
        """gamma_n = gamma0 q^n for n >= 1."""
        return self.gamma0 * self.gamma_ratio ** n

    def eta(self, n: int) -> float:
        e = self.raw["eta"]
        if e["schedule"] == "harmonic":
            return _num(e["eta0"]) / n
        return _num(e["eta0"]) * _num(e["ratio"]) ** (n - 1)

    @property
    def caps(self) -> dict:
        return {k: int(v) for k, v in self.raw["caps"].items()}

    @property
    def fixpoint_tol(self) -> float:
        return _num(self.raw["tolerances"]["fixpoint_tol"])

    @property
    def cert_slack(self) -> float:
        return _num(self.raw["tolerances"]["cert_slack"])

    @property
    def circle_grid(self) -> int:
        return int(self.raw["grids"]["circle_grid"])

    @property
    def contraction_grid(self) -> int:
        return int(self.raw["grids"]["contraction_grid"])

    @property
    def cylinder_depth(self) -> int:
        return int(self.raw["grids"]["cylinder_depth"])

    @property
    def fourier_modes(self) -> int:
        return int(self.raw["grids"]["fourier_modes"])

    @property
    def nu(self) -> float:
        return _num(self.raw["hypotheses"]["nu"])

    @property
    def minimality_eps(self) -> float:
        return _num(self.raw["hypotheses"]["minimality_eps"])

    @property
    def minimality_samples(self) -> int:
        return int(self.raw["hypotheses"]["minimality_samples"])

    @property
    def rng_seed(self) -> int:
        return int(self.raw["sampling"]["seed"])

    @property
    def c1_samples(self) -> int:
        return int(self.raw["sampling"]["c1_samples"])

    @property
    def conjugacy_map(self) -> CircleMap | None:
        c = self.raw["conjugacy"]
        return None if c is None else CircleMap.from_dict(c["phi"])

    @property
    def output_dir(self) -> Path:
        return Path(str(self.raw["output_dir"]))

    def to_dict(self) -> dict:
        """The merged configuration with the generators in canonical form."""
        d = copy.deepcopy(self.raw)
        d["family"] = [g.to_dict() for g in self.generators]
        return d
