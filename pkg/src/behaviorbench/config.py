"""Flat key=value run configuration with validation.

The file format is one `key = value` per line, `#` comments, nothing nested;
the canonical rendering is diff-able and embeds verbatim into run manifests.
Learner settings here drive the experiment grid and are deliberately lighter
than the library defaults so a full 144-cell reproduction stays within a
desktop time budget; standalone training uses the library defaults instead.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

from .errors import ConfigError
from .grid import GridConfig
from .synth import SynthConfig

_BOOL_TRUE = {"true", "1", "yes", "on"}
_BOOL_FALSE = {"false", "0", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    # synthetic data
    n_records: int = 292
    n_children: int = 20
    env_signal: float = 0.8
    behavior_signal: float = 0.4
    seed: int = 0
    # imputation
    impute_k: int = 14
    # grid
    folds: int = 10
    encoding: str = "both"
    keep_tentative: bool = False
    select_on_full: bool = False
    workers: int = 1
    # feature selection
    boruta_alpha: float = 0.01
    boruta_max_runs: int = 100
    boruta_trees: int = 20
    boruta_depth: int = 5
    # grid learners
    rf_trees: int = 30
    rf_depth: int = 12
    rf_min_leaf: int = 1
    xgb_rounds: int = 20
    xgb_depth: int = 3
    xgb_learning_rate: float = 0.3
    svm_c: float = 1.0
    svm_gamma: str = "scale"
    nn_hidden: int = 32
    nn_epochs: int = 80
    nn_learning_rate: float = 0.05
    nn_batch: int = 32

    def __post_init__(self):
        if self.impute_k < 1:
            raise ConfigError("impute_k must be >= 1")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not 0.0 < self.boruta_alpha < 1.0:
            raise ConfigError("boruta_alpha must lie strictly between 0 and 1")
        if self.boruta_max_runs < 1:
            raise ConfigError("boruta_max_runs must be >= 1")
        if self.encoding not in ("both", "onehot", "integer"):
            raise ConfigError("encoding must be both, onehot or integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in ("boruta_trees", "boruta_depth", "rf_trees", "rf_depth",
                     "rf_min_leaf", "xgb_rounds", "xgb_depth", "nn_hidden",
                     "nn_epochs", "nn_batch"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.xgb_learning_rate < 0:
            raise ConfigError("xgb_learning_rate must be >= 0")
        if self.nn_learning_rate <= 0 or self.svm_c <= 0:
            raise ConfigError("nn_learning_rate and svm_c must be > 0")
        if self.svm_gamma != "scale":
            try:
                if float(self.svm_gamma) <= 0:
                    raise ValueError
            except ValueError:
                raise ConfigError("svm_gamma must be 'scale' or a positive number") \
                    from None
        # synth-side validation happens in SynthConfig
        self.synth_config()

    def synth_config(self) -> SynthConfig:
        return SynthConfig(n_records=self.n_records, n_children=self.n_children,
                           env_signal=self.env_signal,
                           behavior_signal=self.behavior_signal, seed=self.seed)

    def grid_config(self) -> GridConfig:
        gamma = self.svm_gamma if self.svm_gamma == "scale" else float(self.svm_gamma)
        return GridConfig(
            master_seed=self.seed,
            folds=self.folds,
            encoding=self.encoding,
            keep_tentative=self.keep_tentative,
            select_on_full=self.select_on_full,
            boruta_alpha=self.boruta_alpha,
            boruta_max_runs=self.boruta_max_runs,
            boruta_forest={"n_trees": self.boruta_trees,
                           "max_depth": self.boruta_depth},
            learner_params={
                "rf": {"n_trees": self.rf_trees, "max_depth": self.rf_depth,
                       "min_leaf": self.rf_min_leaf},
                "xgb": {"n_rounds": self.xgb_rounds, "max_depth": self.xgb_depth,
                        "learning_rate": self.xgb_learning_rate},
                "svm": {"C": self.svm_c, "gamma": gamma},
                "nn": {"hidden": self.nn_hidden, "epochs": self.nn_epochs,
                       "learning_rate": self.nn_learning_rate,
                       "batch_size": self.nn_batch},
            },
            workers=self.workers)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"


def _parse_value(name: str, text: str, target_type):
    text = text.strip()
    if target_type is bool:
        low = text.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if target_type is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {text!r}") from None
    if target_type is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {text!r}") from None
    return text


def parse_config_text(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse the flat key=value format, then apply CLI overrides."""
    known = {f.name: f.type for f in fields(RunConfig)}
    type_of = {"int": int, "float": float, "bool": bool, "str": str}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, val, type_of.get(known[key], str))
    for key, val in (overrides or {}).items():
        if key not in known:
            raise ConfigError(f"override: unknown key {key!r}")
        values[key] = _parse_value(key, str(val), type_of.get(known[key], str))
    return RunConfig(**values)


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)
