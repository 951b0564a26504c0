"""Four classifiers behind one training/prediction contract.

Kinds and their factor codes: xgb=1, svm=2, rf=3, nn=4. All fits are
deterministic given (spec, seed, data); TrainedModel is immutable and safe
for concurrent prediction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..datamodel import FeatureMatrix
from ..errors import InvalidLabels, NumericError, SchemaError
from . import boosting, forest, net, svm

KINDS = ("xgb", "svm", "rf", "nn")
LEARNER_CODES = {"xgb": 1, "svm": 2, "rf": 3, "nn": 4}

# Paper-silent hyperparameters; these defaults are assumptions and are
# echoed into every run report.
DEFAULTS = {
    "rf": {"n_trees": 500, "mtry": "sqrt", "max_depth": None, "min_leaf": 1},
    "xgb": {"n_rounds": 200, "max_depth": 4, "learning_rate": 0.1,
            "reg_lambda": 1.0, "min_gain": 0.0},
    "svm": {"kernel": "rbf", "gamma": "scale", "C": 1.0, "tol": 1e-3,
            "max_iter": 100_000},
    "nn": {"hidden": 32, "learning_rate": 0.01, "epochs": 200,
           "batch_size": 32},
}


def _validate_params(kind: str, p: dict) -> None:
    if kind == "rf":
        if int(p["n_trees"]) < 1:
            raise ValueError("rf: n_trees must be >= 1")
        if p["max_depth"] is not None and int(p["max_depth"]) < 1:
            raise ValueError("rf: max_depth must be >= 1 or None")
        if int(p["min_leaf"]) < 1:
            raise ValueError("rf: min_leaf must be >= 1")
        if p["mtry"] != "sqrt" and int(p["mtry"]) < 1:
            raise ValueError("rf: mtry must be 'sqrt' or >= 1")
    elif kind == "xgb":
        if int(p["n_rounds"]) < 1:
            raise ValueError("xgb: n_rounds must be >= 1")
        if int(p["max_depth"]) < 1:
            raise ValueError("xgb: max_depth must be >= 1")
        # learning_rate 0 is the documented degenerate case (prior argmax)
        if float(p["learning_rate"]) < 0:
            raise ValueError("xgb: learning_rate must be >= 0")
        if float(p["reg_lambda"]) < 0 or float(p["min_gain"]) < 0:
            raise ValueError("xgb: reg_lambda and min_gain must be >= 0")
    elif kind == "svm":
        if float(p["C"]) <= 0:
            raise ValueError("svm: C must be > 0")
        if p["kernel"] not in ("rbf", "linear"):
            raise ValueError("svm: kernel must be rbf or linear")
        if p["gamma"] != "scale" and float(p["gamma"]) <= 0:
            raise ValueError("svm: gamma must be 'scale' or > 0")
        if float(p["tol"]) <= 0 or int(p["max_iter"]) < 1:
            raise ValueError("svm: tol must be > 0 and max_iter >= 1")
    elif kind == "nn":
        if int(p["hidden"]) < 1:
            raise ValueError("nn: hidden must be >= 1")
        if float(p["learning_rate"]) <= 0:
            raise ValueError("nn: learning_rate must be > 0")
        if int(p["epochs"]) < 1 or int(p["batch_size"]) < 1:
            raise ValueError("nn: epochs and batch_size must be >= 1")
    else:
        raise ValueError(f"unknown learner kind {kind!r}")


@dataclass(frozen=True)
class LearnerSpec:
    """A learner kind, its hyperparameters, and the fit seed."""

    kind: str
    seed: int = 0
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        merged = dict(DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"{self.kind}: unknown parameters {sorted(unknown)}")
        merged.update(self.params)
        _validate_params(self.kind, merged)
        object.__setattr__(self, "params", merged)


@dataclass(frozen=True)
class TrainedModel:
    """A fitted learner bound to the column signature it was trained on."""

    kind: str
    column_names: tuple
    n_classes: int
    spec: LearnerSpec
    payload: object


def fit(spec: LearnerSpec, train: FeatureMatrix) -> TrainedModel:
    X = np.asarray(train.values, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.int64)
    if np.unique(y).size < 2:
        raise InvalidLabels("training labels are constant")
    if not np.all(np.isfinite(X)):
        raise NumericError("training features contain non-finite values")
    p = spec.params
    n_classes = train.class_level
    if spec.kind == "rf":
        payload = forest.fit_forest(
            X, y, n_classes, int(p["n_trees"]), p["mtry"], p["max_depth"],
            int(p["min_leaf"]), spec.seed)
    elif spec.kind == "xgb":
        payload = boosting.fit_boost(
            X, y, n_classes, int(p["n_rounds"]), int(p["max_depth"]),
            float(p["learning_rate"]), float(p["reg_lambda"]),
            float(p["min_gain"]), spec.seed)
    elif spec.kind == "svm":
        payload = svm.fit_svm(
            X, y, n_classes, p["kernel"], p["gamma"], float(p["C"]),
            float(p["tol"]), int(p["max_iter"]))
    else:
        payload = net.fit_net(
            X, y, n_classes, int(p["hidden"]), float(p["learning_rate"]),
            int(p["epochs"]), int(p["batch_size"]), spec.seed)
    return TrainedModel(kind=spec.kind, column_names=train.column_names,
                        n_classes=n_classes, spec=spec, payload=payload)


def _check_rows(model: TrainedModel, rows) -> np.ndarray:
    if isinstance(rows, FeatureMatrix):
        if rows.column_names != model.column_names:
            raise SchemaError("rows do not match the model's column signature")
        X = rows.values
    else:
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(model.column_names):
            raise SchemaError(
                f"expected {len(model.column_names)} columns, got "
                f"{X.shape[1] if X.ndim == 2 else 'non-2D'}")
    if not np.all(np.isfinite(X)):
        raise NumericError("prediction rows contain non-finite values")
    return np.ascontiguousarray(X, dtype=np.float64)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def predict_scores(model: TrainedModel, rows) -> np.ndarray:
    """Per-row class scores; each row is a probability vector."""
    X = _check_rows(model, rows)
    if model.kind == "rf":
        return forest.forest_scores(model.payload, X)
    if model.kind == "xgb":
        return boosting.boost_scores(model.payload, X)
    if model.kind == "nn":
        return net.net_scores(model.payload, X)
    decisions = svm.svm_decision_values(model.payload, X)
    votes = np.zeros((X.shape[0], model.n_classes))
    for j, pair in enumerate(model.payload.pairs):
        soft = _sigmoid(decisions[:, j])
        votes[:, pair.pos_class] += soft
        votes[:, pair.neg_class] += 1.0 - soft
    return votes / max(len(model.payload.pairs), 1)


def predict_labels(model: TrainedModel, rows) -> np.ndarray:
    """Argmax of the scores; equal scores resolve to the lowest class index."""
    return np.argmax(predict_scores(model, rows), axis=1)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

_FORMAT = 1


def _arr(a) -> list:
    return np.asarray(a).tolist()


def model_to_doc(model: TrainedModel) -> dict:
    doc = {"format": _FORMAT, "kind": model.kind,
           "column_names": list(model.column_names),
           "n_classes": model.n_classes,
           "seed": model.spec.seed,
           "params": {k: v for k, v in model.spec.params.items()}}
    pl = model.payload
    if model.kind == "rf":
        f, t, l, r, c, o = pl.nodes
        doc["payload"] = {
            "n_trees": pl.n_trees,
            "nodes": {"feature": _arr(f), "threshold": _arr(t), "left": _arr(l),
                      "right": _arr(r), "leaf_class": _arr(c), "offsets": _arr(o)},
            "importances": _arr(pl.importances),
            "oob_masks": _arr(pl.oob_masks.astype(int)),
            "inbag_unique_fraction": _arr(pl.inbag_unique_fraction),
        }
    elif model.kind == "xgb":
        doc["payload"] = {
            "n_rounds": pl.n_rounds,
            "learning_rate": pl.learning_rate,
            "init_scores": _arr(pl.init_scores),
            "class_nodes": [
                {"feature": _arr(f), "threshold": _arr(t), "left": _arr(l),
                 "right": _arr(r), "value": _arr(v), "offsets": _arr(o)}
                for f, t, l, r, v, o in pl.class_nodes],
        }
    elif model.kind == "svm":
        doc["payload"] = {
            "kernel": pl.kernel, "gamma": pl.gamma,
            "mean": _arr(pl.mean), "scale": _arr(pl.scale),
            "pairs": [{"pos": q.pos_class, "neg": q.neg_class,
                       "support_vectors": _arr(q.support_vectors),
                       "dual_coef": _arr(q.dual_coef),
                       "intercept": q.intercept,
                       "iterations": q.iterations} for q in pl.pairs],
        }
    else:
        doc["payload"] = {
            "mean": _arr(pl.mean), "scale": _arr(pl.scale),
            "W1": _arr(pl.params.W1), "b1": _arr(pl.params.b1),
            "W2": _arr(pl.params.W2), "b2": _arr(pl.params.b2),
        }
    return doc


def model_from_doc(doc: dict) -> TrainedModel:
    if doc.get("format") != _FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    kind = doc["kind"]
    spec = LearnerSpec(kind=kind, seed=doc["seed"], params=doc["params"])
    n_classes = doc["n_classes"]
    pl = doc["payload"]
    if kind == "rf":
        nd = pl["nodes"]
        payload = forest.ForestModel(
            n_trees=pl["n_trees"], n_classes=n_classes,
            nodes=(np.array(nd["feature"], dtype=np.int64),
                   np.array(nd["threshold"], dtype=np.float64),
                   np.array(nd["left"], dtype=np.int64),
                   np.array(nd["right"], dtype=np.int64),
                   np.array(nd["leaf_class"], dtype=np.int64),
                   np.array(nd["offsets"], dtype=np.int64)),
            importances=np.array(pl["importances"], dtype=np.float64),
            oob_masks=np.array(pl["oob_masks"], dtype=bool),
            inbag_unique_fraction=np.array(pl["inbag_unique_fraction"]))
    elif kind == "xgb":
        payload = boosting.BoostModel(
            n_classes=n_classes, n_rounds=pl["n_rounds"],
            learning_rate=pl["learning_rate"],
            init_scores=np.array(pl["init_scores"], dtype=np.float64),
            class_nodes=[(np.array(nd["feature"], dtype=np.int64),
                          np.array(nd["threshold"], dtype=np.float64),
                          np.array(nd["left"], dtype=np.int64),
                          np.array(nd["right"], dtype=np.int64),
                          np.array(nd["value"], dtype=np.float64),
                          np.array(nd["offsets"], dtype=np.int64))
                         for nd in pl["class_nodes"]])
    elif kind == "svm":
        payload = svm.SvmModel(
            n_classes=n_classes, kernel=pl["kernel"], gamma=pl["gamma"],
            mean=np.array(pl["mean"]), scale=np.array(pl["scale"]),
            pairs=[svm.PairMachine(
                pos_class=q["pos"], neg_class=q["neg"],
                support_vectors=np.array(q["support_vectors"],
                                         dtype=np.float64).reshape(
                                             len(q["dual_coef"]) or 0, -1)
                if q["dual_coef"] else np.zeros((0, len(pl["mean"]))),
                dual_coef=np.array(q["dual_coef"], dtype=np.float64),
                intercept=q["intercept"], iterations=q["iterations"])
                for q in pl["pairs"]])
    else:
        payload = net.NetModel(
            n_classes=n_classes,
            mean=np.array(pl["mean"]), scale=np.array(pl["scale"]),
            params=net.NetParams(
                W1=np.array(pl["W1"], dtype=np.float64),
                b1=np.array(pl["b1"], dtype=np.float64),
                W2=np.array(pl["W2"], dtype=np.float64),
                b2=np.array(pl["b2"], dtype=np.float64)))
    return TrainedModel(kind=kind, column_names=tuple(doc["column_names"]),
                        n_classes=n_classes, spec=spec, payload=payload)


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_doc(model), fh, sort_keys=True)


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_doc(json.load(fh))
