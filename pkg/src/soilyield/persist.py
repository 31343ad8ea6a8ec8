"""Versioned JSON persistence for fitted models.

A model file bundles everything prediction needs: the model payload, the
feature order, the min-max parameters for features and target, and the
categorical encoding map.  Serialization is canonical (sorted keys,
shortest round-trip floats), so saving a loaded model reproduces the file
byte for byte and reloaded models predict bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaViolationError, UnsupportedVersionError
from .forest import ForestModel, ForestParams, Internal, Leaf, TreeNode
from .linear import FitDiagnostics, LinearModel
from .preprocess import NormalizationParams

FORMAT_VERSION = 1
MODEL_KINDS = ("mlr", "ridge", "forest")


@dataclass(frozen=True)
class ModelBundle:
    kind: str
    feature_names: tuple[str, ...]
    target_name: str
    feature_scaler: NormalizationParams
    target_scaler: NormalizationParams
    encodings: dict[str, dict[str, int]]
    model: "LinearModel | ForestModel"

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")


def _encode_tree(root: TreeNode) -> list[dict]:
    """Flatten a tree to its preorder node list."""
    nodes: list[dict] = []
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            nodes.append({"f": node.feature_index, "t": node.threshold})
            stack.append(node.right)
            stack.append(node.left)
        else:
            nodes.append({"v": node.value, "n": node.count})
    return nodes


def _decode_tree(nodes: list) -> TreeNode:
    if not isinstance(nodes, list) or not nodes:
        raise SchemaViolationError("tree payload must be a non-empty node list")
    pos = 0

    def build() -> TreeNode:
        nonlocal pos
        if pos >= len(nodes):
            raise SchemaViolationError("tree payload ended before all children were read")
        entry = nodes[pos]
        pos += 1
        if not isinstance(entry, dict):
            raise SchemaViolationError(f"tree node {pos - 1} is not an object")
        if "f" in entry:
            feature = _expect(entry, "f", int, f"tree node {pos - 1}")
            threshold = _number(entry, "t", f"tree node {pos - 1}")
            left = build()
            right = build()
            return Internal(feature, threshold, left, right)
        value = _number(entry, "v", f"tree node {pos - 1}")
        count = _expect(entry, "n", int, f"tree node {pos - 1}")
        return Leaf(value, count)

    root = build()
    if pos != len(nodes):
        raise SchemaViolationError(f"tree payload has {len(nodes) - pos} trailing nodes")
    return root


def _expect(obj: dict, key: str, typ, where: str):
    if key not in obj:
        raise SchemaViolationError(f"{where}: missing key {key!r}")
    value = obj[key]
    name = typ.__name__ if isinstance(typ, type) else "number"
    if isinstance(value, bool) and typ is not bool:
        raise SchemaViolationError(f"{where}: key {key!r} must be {name}")
    if not isinstance(value, typ):
        raise SchemaViolationError(f"{where}: key {key!r} must be {name}")
    return value


def _number(obj: dict, key: str, where: str) -> float:
    value = _expect(obj, key, (int, float), where)
    return float(value)


def _scaler_to_obj(p: NormalizationParams) -> dict:
    return {
        "columns": list(p.columns),
        "min": [float(v) for v in p.mins],
        "max": [float(v) for v in p.maxs],
    }


def _scaler_from_obj(obj, where: str) -> NormalizationParams:
    if not isinstance(obj, dict):
        raise SchemaViolationError(f"{where}: scaler must be an object")
    cols = _expect(obj, "columns", list, where)
    mins = _expect(obj, "min", list, where)
    maxs = _expect(obj, "max", list, where)
    if not (len(cols) == len(mins) == len(maxs)):
        raise SchemaViolationError(f"{where}: scaler arrays must have equal length")
    try:
        return NormalizationParams(
            columns=tuple(str(c) for c in cols),
            mins=np.asarray([float(v) for v in mins]),
            maxs=np.asarray([float(v) for v in maxs]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaViolationError(f"{where}: {exc}") from None


def _payload(bundle: ModelBundle) -> dict:
    model = bundle.model
    if isinstance(model, LinearModel):
        return {
            "intercept": model.intercept,
            "coefficients": [float(v) for v in model.coefficients],
            "lambda": model.regularization_lambda,
            "diagnostics": {
                "condition_estimate": model.diagnostics.condition_estimate,
                "training_r2": model.diagnostics.training_r2,
                "solver": model.diagnostics.solver,
            },
        }
    return {
        "params": {
            "n_trees": model.params.n_trees,
            "max_depth": model.params.max_depth,
            "min_samples_split": model.params.min_samples_split,
            "min_samples_leaf": model.params.min_samples_leaf,
            "max_features": model.params.max_features,
            "seed": model.params.seed,
            "bootstrap": model.params.bootstrap,
        },
        "oob_r2": model.oob_r2,
        "trees": [_encode_tree(t) for t in model.trees],
    }


def save_model(bundle: ModelBundle, path: str | Path) -> None:
    obj = {
        "format_version": FORMAT_VERSION,
        "model_kind": bundle.kind,
        "feature_names": list(bundle.feature_names),
        "target_name": bundle.target_name,
        "feature_scaler": _scaler_to_obj(bundle.feature_scaler),
        "target_scaler": _scaler_to_obj(bundle.target_scaler),
        "encodings": bundle.encodings,
        "payload": _payload(bundle),
    }
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_model(path: str | Path) -> ModelBundle:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolationError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise SchemaViolationError(f"{path}: top level must be an object")
    if "format_version" not in obj:
        raise SchemaViolationError(f"{path}: missing format_version")
    if obj["format_version"] != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: format_version {obj['format_version']!r} not supported"
        )
    kind = _expect(obj, "model_kind", str, str(path))
    if kind not in MODEL_KINDS:
        raise SchemaViolationError(f"{path}: unknown model_kind {kind!r}")
    feature_names = tuple(
        str(n) for n in _expect(obj, "feature_names", list, str(path))
    )
    target_name = _expect(obj, "target_name", str, str(path))
    feature_scaler = _scaler_from_obj(obj.get("feature_scaler"), f"{path}: feature_scaler")
    target_scaler = _scaler_from_obj(obj.get("target_scaler"), f"{path}: target_scaler")
    encodings_obj = _expect(obj, "encodings", dict, str(path))
    encodings = {
        str(col): {str(tok): int(code) for tok, code in mapping.items()}
        for col, mapping in encodings_obj.items()
    }
    payload = _expect(obj, "payload", dict, str(path))
    if kind == "forest":
        model = _forest_from_payload(payload, feature_names, str(path))
    else:
        model = _linear_from_payload(payload, feature_names, str(path))
    return ModelBundle(
        kind=kind,
        feature_names=feature_names,
        target_name=target_name,
        feature_scaler=feature_scaler,
        target_scaler=target_scaler,
        encodings=encodings,
        model=model,
    )


def _linear_from_payload(payload: dict, feature_names: tuple[str, ...], where: str) -> LinearModel:
    coefficients = _expect(payload, "coefficients", list, where)
    if len(coefficients) != len(feature_names):
        raise SchemaViolationError(
            f"{where}: {len(coefficients)} coefficients for {len(feature_names)} features"
        )
    diag_obj = _expect(payload, "diagnostics", dict, where)
    training_r2 = diag_obj.get("training_r2")
    if training_r2 is not None and not isinstance(training_r2, (int, float)):
        raise SchemaViolationError(f"{where}: training_r2 must be a number or null")
    diagnostics = FitDiagnostics(
        condition_estimate=_number(diag_obj, "condition_estimate", where),
        training_r2=None if training_r2 is None else float(training_r2),
        solver=_expect(diag_obj, "solver", str, where),
    )
    return LinearModel(
        intercept=_number(payload, "intercept", where),
        coefficients=np.asarray([float(v) for v in coefficients]),
        feature_names=feature_names,
        regularization_lambda=_number(payload, "lambda", where),
        diagnostics=diagnostics,
    )


def _forest_from_payload(payload: dict, feature_names: tuple[str, ...], where: str) -> ForestModel:
    params_obj = _expect(payload, "params", dict, where)
    max_depth = params_obj.get("max_depth")
    if max_depth is not None and not isinstance(max_depth, int):
        raise SchemaViolationError(f"{where}: max_depth must be an integer or null")
    try:
        params = ForestParams(
            n_trees=_expect(params_obj, "n_trees", int, where),
            max_depth=max_depth,
            min_samples_split=_expect(params_obj, "min_samples_split", int, where),
            min_samples_leaf=_expect(params_obj, "min_samples_leaf", int, where),
            max_features=_expect(params_obj, "max_features", int, where),
            seed=_expect(params_obj, "seed", int, where),
            bootstrap=_expect(params_obj, "bootstrap", bool, where),
        )
    except ValueError as exc:
        raise SchemaViolationError(f"{where}: {exc}") from None
    trees_obj = _expect(payload, "trees", list, where)
    if len(trees_obj) != params.n_trees:
        raise SchemaViolationError(
            f"{where}: payload has {len(trees_obj)} trees, params say {params.n_trees}"
        )
    oob_r2 = payload.get("oob_r2")
    if oob_r2 is not None and not isinstance(oob_r2, (int, float)):
        raise SchemaViolationError(f"{where}: oob_r2 must be a number or null")
    trees = tuple(_decode_tree(t) for t in trees_obj)
    return ForestModel(
        trees=trees,
        params=params,
        feature_names=feature_names,
        oob_r2=None if oob_r2 is None else float(oob_r2),
    )
