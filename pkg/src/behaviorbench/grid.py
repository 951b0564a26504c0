"""The full experiment grid: 6 dataset combinations x 2 feature-selection
settings x 4 classifiers x 3 class levels = 144 cross-validated cells.

Feature selection runs strictly inside each training fold by default (the
held-out fold never influences it); a compatibility switch selects once on
the full matrix instead. Every cell draws its own seed by hashing the master
seed with the cell key, so cells are independent but reproducible.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import datamodel as dm
from .boruta import (BorutaConfig, BorutaReport, CONFIRMED, TENTATIVE,
                     apply_selection, boruta_select)
from .datamodel import FeatureMatrix, build_combination, combo_includes_env
from .errors import EmptySelection, MissingDataError, PartialGrid
from .evaluation import RunResult, cross_validate, kfold_plan
from .learners import KINDS, LEARNER_CODES, LearnerSpec
from .stats import FactorialDesign, FactorialObservation

FEATURE_SELECTIONS = ("boruta", "none")
CLASS_LEVELS = (2, 3, 7)

_CLASS_CODES = {2: 1, 3: 2, 7: 3}
_REPLICATE_OF_COMBO = {"a": 1, "c": 2, "e": 3, "b": 1, "d": 2, "f": 3}

GROUPING_FIELDS = ("env", "feature_selection", "learner", "class_level", "combo")


@dataclass(frozen=True)
class CellKey:
    combo: str
    feature_selection: str
    learner: str
    class_level: int

    def __post_init__(self):
        if self.combo not in dm.COMBO_IDS:
            raise ValueError(f"unknown combo {self.combo!r}")
        if self.feature_selection not in FEATURE_SELECTIONS:
            raise ValueError(f"unknown feature selection {self.feature_selection!r}")
        if self.learner not in KINDS:
            raise ValueError(f"unknown learner {self.learner!r}")
        if self.class_level not in CLASS_LEVELS:
            raise ValueError(f"class_level must be one of {CLASS_LEVELS}")

    @property
    def env(self) -> int:
        return int(combo_includes_env(self.combo))

    @property
    def slug(self) -> str:
        return f"{self.combo}_{self.feature_selection}_{self.learner}_c{self.class_level}"


def all_cell_keys():
    """The 144 keys in canonical (combo, selection, learner, class) order."""
    return [CellKey(combo, fs, learner, level)
            for combo in dm.COMBO_IDS
            for fs in FEATURE_SELECTIONS
            for learner in KINDS
            for level in CLASS_LEVELS]


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from hashing the parts (never Python's hash())."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63 - 1)


@dataclass(frozen=True)
class GridConfig:
    master_seed: int = 0
    folds: int = 10
    encoding: str = "both"
    keep_tentative: bool = False
    select_on_full: bool = False
    boruta_alpha: float = 0.01
    boruta_max_runs: int = 100
    boruta_forest: Mapping = field(default_factory=dict)
    learner_params: Mapping = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "boruta_forest", dict(self.boruta_forest))
        object.__setattr__(self, "learner_params",
                           {k: dict(v) for k, v in self.learner_params.items()})

    def learner_spec(self, key: CellKey) -> LearnerSpec:
        return LearnerSpec(kind=key.learner,
                           seed=derive_seed(self.master_seed, key.slug, "fit"),
                           params=self.learner_params.get(key.learner, {}))


@dataclass(frozen=True)
class ResultsTable:
    cells: dict
    errors: dict
    provenance: dict

    @property
    def complete(self) -> bool:
        return not self.errors and len(self.cells) == len(all_cell_keys())


def _selection_indices(matrix: FeatureMatrix, report: BorutaReport,
                       keep_tentative: bool):
    """Column indices kept by a report, with documented fallbacks.

    Weak folds can confirm nothing; rather than fail the cell, fall back to
    Confirmed+Tentative and finally to all columns, recording a note.
    """
    for attempt, keep_t in (("primary", keep_tentative), ("tentative", True)):
        try:
            wanted = {CONFIRMED} | ({TENTATIVE} if keep_t else set())
            keep = [j for j, d in enumerate(report.decisions)
                    if d.decision in wanted]
            if keep:
                note = None if attempt == "primary" else "fallback:kept-tentative"
                return keep, note
        except EmptySelection:  # pragma: no cover - loop handles empties
            pass
    return list(range(len(matrix.column_names))), "fallback:kept-all"


def run_cell(records_matrix: FeatureMatrix, key: CellKey,
             config: GridConfig):
    """Cross-validate one cell; returns (RunResult, selection summaries)."""
    cell_seed = derive_seed(config.master_seed, key.slug)
    matrix = records_matrix
    selection_log: list = []
    notes: list = []

    fold_selector = None
    if key.feature_selection == "boruta":
        if config.select_on_full:
            cfg = BorutaConfig(alpha=config.boruta_alpha,
                               max_runs=config.boruta_max_runs,
                               seed=derive_seed(cell_seed, "boruta", "full"),
                               forest=config.boruta_forest)
            report = boruta_select(matrix, cfg)
            keep, note = _selection_indices(matrix, report, config.keep_tentative)
            if note:
                notes.append(f"full:{note}")
            selection_log.append(_selection_summary("full", report))
            matrix = matrix.select_columns(keep)
        else:
            def fold_selector(train_matrix, fold_idx):
                cfg = BorutaConfig(alpha=config.boruta_alpha,
                                   max_runs=config.boruta_max_runs,
                                   seed=derive_seed(cell_seed, "boruta", fold_idx),
                                   forest=config.boruta_forest)
                report = boruta_select(train_matrix, cfg)
                keep, note = _selection_indices(train_matrix, report,
                                                config.keep_tentative)
                if note:
                    notes.append(f"fold{fold_idx}:{note}")
                selection_log.append(_selection_summary(f"fold{fold_idx}", report))
                return keep

    plan = kfold_plan(matrix, k=config.folds, seed=derive_seed(cell_seed, "folds"))
    result = cross_validate(config.learner_spec(key), matrix, plan, fold_selector)
    if notes:
        result = dataclasses.replace(result, notes=tuple(notes))
    return result, selection_log


def _selection_summary(scope: str, report: BorutaReport) -> dict:
    return {
        "scope": scope,
        "n_runs": report.n_runs,
        "confirmed": list(report.names_with(CONFIRMED)),
        "tentative": list(report.names_with(TENTATIVE)),
        "n_rejected": len(report.names_with("Rejected")),
    }


def _cell_task(args):
    matrix, key, config = args
    try:
        result, selection = run_cell(matrix, key, config)
        return key, result, selection, None
    except Exception as exc:  # recorded, grid marked partial
        return key, None, None, f"{type(exc).__name__}: {exc}"


def run_matrix(records: Sequence[dm.BehaviorRecord], config: GridConfig,
               progress=None) -> ResultsTable:
    """Run all 144 cells over imputed records."""
    incomplete = [r.record_id for r in records if not dm.record_is_complete(r)]
    if incomplete:
        raise MissingDataError(
            f"{len(incomplete)} records still have missing environment values "
            f"(first: {incomplete[0]}); impute before running the grid")

    matrices = {}
    for combo in dm.COMBO_IDS:
        for level in CLASS_LEVELS:
            matrices[(combo, level)] = build_combination(
                records, combo, level, encoding=config.encoding)

    keys = all_cell_keys()
    tasks = [(matrices[(k.combo, k.class_level)], k, config) for k in keys]
    cells: dict = {}
    errors: dict = {}
    selections: dict = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_cell_task, tasks, chunksize=4))
    else:
        outcomes = []
        for i, task in enumerate(tasks):
            outcomes.append(_cell_task(task))
            if progress is not None:
                progress(i + 1, len(tasks))
    for key, result, selection, error in outcomes:
        if error is None:
            cells[key] = result
            if selection:
                selections[key] = selection
        else:
            errors[key] = error

    table = ResultsTable(
        cells=cells, errors=errors,
        provenance={"master_seed": config.master_seed,
                    "config": _config_snapshot(config),
                    "selections": selections})
    return table


def _config_snapshot(config: GridConfig) -> dict:
    return {
        "master_seed": config.master_seed,
        "folds": config.folds,
        "encoding": config.encoding,
        "keep_tentative": config.keep_tentative,
        "select_on_full": config.select_on_full,
        "boruta_alpha": config.boruta_alpha,
        "boruta_max_runs": config.boruta_max_runs,
        "boruta_forest": dict(config.boruta_forest),
        "learner_params": {k: dict(v) for k, v in config.learner_params.items()},
    }


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def summarize(table: ResultsTable, grouping: Sequence[str]):
    """Group cells and report mean/SD of their mean accuracies, in percent."""
    from .stats import aggregate_mean_sd

    for g in grouping:
        if g not in GROUPING_FIELDS:
            raise ValueError(f"unknown grouping field {g!r}")
    groups: dict = {}
    for key, result in table.cells.items():
        gkey = tuple(getattr(key, g) for g in grouping)
        groups.setdefault(gkey, []).append(result.mean.accuracy * 100.0)
    rows = []
    for gkey in sorted(groups):
        mean, sd = aggregate_mean_sd(groups[gkey])
        row = dict(zip(grouping, gkey))
        row.update(n=len(groups[gkey]), accuracy_mean=mean, accuracy_sd=sd)
        rows.append(row)
    return rows


def design_from_results(table: ResultsTable) -> FactorialDesign:
    """Pool the 144 cell accuracies into the balanced 2x2x4x3 design."""
    if not table.complete:
        raise PartialGrid("cannot analyze a partial results table")
    obs = []
    for key, result in sorted(table.cells.items(), key=lambda kv: kv[0].slug):
        obs.append(FactorialObservation(
            env=key.env,
            fs=1 if key.feature_selection == "boruta" else 0,
            learner=LEARNER_CODES[key.learner],
            class_code=_CLASS_CODES[key.class_level],
            replicate=_REPLICATE_OF_COMBO[key.combo],
            response=result.mean.accuracy * 100.0))
    return FactorialDesign(observations=tuple(obs))


def accuracy_groups_by_class(table: ResultsTable) -> dict:
    """Per class level: accuracy values grouped by combo (stage-1 input)."""
    out: dict = {}
    for level in CLASS_LEVELS:
        groups = {}
        for combo in dm.COMBO_IDS:
            vals = [result.mean.accuracy * 100.0
                    for key, result in table.cells.items()
                    if key.class_level == level and key.combo == combo]
            groups[combo] = vals
        out[level] = groups
    return out


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

INDEX_COLUMNS = (
    "combo", "feature_selection", "learner", "class_level", "env",
    "accuracy_mean", "accuracy_sd", "precision_mean", "recall_mean",
    "specificity_mean", "f1_mean", "auc_mean")


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def save_results(table: ResultsTable, out_dir) -> Path:
    """Write one JSON per cell, confusion CSVs, selection reports, and the
    index CSV. Output is byte-stable for a given table."""
    out = Path(out_dir)
    (out / "cells").mkdir(parents=True, exist_ok=True)
    (out / "confusion").mkdir(exist_ok=True)
    selections = table.provenance.get("selections", {})
    if selections:
        (out / "boruta").mkdir(exist_ok=True)

    for key in sorted(table.cells, key=lambda k: k.slug):
        result = table.cells[key]
        doc = {"combo": key.combo, "feature_selection": key.feature_selection,
               "learner": key.learner, "class_level": key.class_level,
               "env": key.env}
        doc.update(result.as_dict())
        with open(out / "cells" / f"{key.slug}.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
        with open(out / "confusion" / f"{key.slug}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            for row in result.confusion.tolist():
                writer.writerow(row)
        if key in selections:
            with open(out / "boruta" / f"{key.slug}.json", "w",
                      encoding="utf-8") as fh:
                json.dump(selections[key], fh, sort_keys=True, indent=1)

    index_path = out / "index.csv"
    with open(index_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(INDEX_COLUMNS)
        for key in sorted(table.cells, key=lambda k: k.slug):
            m = table.cells[key].mean
            sd = table.cells[key].sd
            writer.writerow([
                key.combo, key.feature_selection, key.learner,
                key.class_level, key.env,
                _fmt(m.accuracy), _fmt(sd.accuracy), _fmt(m.precision),
                _fmt(m.recall_sensitivity), _fmt(m.specificity),
                _fmt(m.f1), _fmt(m.auc)])
    if table.errors:
        with open(out / "errors.json", "w", encoding="utf-8") as fh:
            json.dump({k.slug: v for k, v in sorted(table.errors.items(),
                                                    key=lambda kv: kv[0].slug)},
                      fh, sort_keys=True, indent=1)
    return index_path


def load_index(path) -> list:
    """Rows of index.csv with numeric fields parsed."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != INDEX_COLUMNS:
            raise ValueError(f"{path}: unexpected index header")
        for raw in reader:
            row = dict(raw)
            row["class_level"] = int(raw["class_level"])
            row["env"] = int(raw["env"])
            for name in INDEX_COLUMNS[5:]:
                row[name] = float(raw[name])
            rows.append(row)
    return rows


def design_from_index(rows) -> FactorialDesign:
    obs = []
    for row in rows:
        obs.append(FactorialObservation(
            env=row["env"],
            fs=1 if row["feature_selection"] == "boruta" else 0,
            learner=LEARNER_CODES[row["learner"]],
            class_code=_CLASS_CODES[row["class_level"]],
            replicate=_REPLICATE_OF_COMBO[row["combo"]],
            response=row["accuracy_mean"] * 100.0))
    return FactorialDesign(observations=tuple(obs))


def groups_by_class_from_index(rows) -> dict:
    out: dict = {}
    for level in CLASS_LEVELS:
        groups = {}
        for combo in dm.COMBO_IDS:
            groups[combo] = [row["accuracy_mean"] * 100.0 for row in rows
                             if row["class_level"] == level
                             and row["combo"] == combo]
        out[level] = groups
    return out


def analyze_index_rows(rows) -> dict:
    """Both analysis stages over a complete index.

    Stage 1: per class level, a one-way ANOVA across the six combinations
    with Bonferroni post-hoc. Stage 2: the pooled balanced factorial with
    partial eta squared, rendered as an aligned table as well.
    """
    from .errors import DegenerateAnova
    from .stats import (bonferroni_posthoc, factorial_anova, one_way_anova,
                        render_anova_table)

    if len(rows) != len(all_cell_keys()):
        raise PartialGrid(f"index has {len(rows)} rows, expected "
                          f"{len(all_cell_keys())}")

    stage1 = {}
    for level, groups in groups_by_class_from_index(rows).items():
        ordered = [groups[c] for c in dm.COMBO_IDS]
        entry: dict = {"combos": list(dm.COMBO_IDS),
                       "means": {c: sum(g) / len(g) for c, g in groups.items()}}
        try:
            res = one_way_anova(ordered)
            entry["anova"] = {"f_value": res.f_value, "df_between": res.df_between,
                              "df_within": res.df_within, "p_value": res.p_value}
            entry["posthoc"] = [
                {"pair": [dm.COMBO_IDS[c.group_i], dm.COMBO_IDS[c.group_j]],
                 "mean_i": c.mean_i, "mean_j": c.mean_j, "t": c.t_value,
                 "p_raw": c.p_raw, "p_adjusted": c.p_adjusted,
                 "significant": c.significant}
                for c in bonferroni_posthoc(ordered)]
        except DegenerateAnova:
            entry["anova"] = {"degenerate": True}
            entry["posthoc"] = []
        stage1[f"class{level}"] = entry

    design = design_from_index(rows)
    anova_rows = factorial_anova(design)
    stage2 = {
        "n_observations": design.n,
        "rows": [{"effect": r.effect, "df": r.df, "ss": r.ss,
                  "f_value": r.f_value, "p_value": r.p_value,
                  "partial_eta_sq": r.partial_eta_sq} for r in anova_rows],
        "table": render_anova_table(anova_rows),
    }
    return {"stage1": stage1, "stage2": stage2}
