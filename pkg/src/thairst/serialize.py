"""Serialization of trained models and RS trees.

Models (HMM, decision tree, Vtt probability table) and trees serialize to
UTF-8 JSON documents with a ``format``/``version`` envelope. Probabilities
round-trip at full double precision; stochastic rows are re-checked on load
with a 1e-6 tolerance.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataError, ModelError
from .hmm import HmmModel
from .types import RSTree

FORMAT_VERSION = 1
_LOAD_ROW_TOL = 1e-6


def serialize_model(model) -> str:
    """Render an HmmModel, DecisionTree, or VttTable as a JSON document."""
    from .relation import DecisionTree
    from .segmentation import VttTable

    if isinstance(model, HmmModel):
        payload = {
            "format": "hmm",
            "version": FORMAT_VERSION,
            "states": list(model.states),
            "symbols": list(model.symbols),
            "trans": model.trans.tolist(),
            "emit": model.emit.tolist(),
        }
    elif isinstance(model, DecisionTree):
        payload = {
            "format": "decision-tree",
            "version": FORMAT_VERSION,
            **model.to_dict(),
        }
    elif isinstance(model, VttTable):
        payload = {
            "format": "vtt-table",
            "version": FORMAT_VERSION,
            **model.to_dict(),
        }
    else:
        raise ModelError(f"cannot serialize object of type {type(model).__name__}")
    return json.dumps(payload, ensure_ascii=False, indent=1) + "\n"


def load_model(text: str):
    """Inverse of serialize_model; validates the envelope and stochastic rows."""
    from .relation import DecisionTree
    from .segmentation import VttTable

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model document is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "format" not in payload:
        raise ModelError("model document lacks a format field")
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise ModelError(
            f"unsupported model document version {version!r} "
            f"(expected {FORMAT_VERSION})"
        )
    fmt = payload["format"]
    if fmt == "hmm":
        return _load_hmm(payload)
    if fmt == "decision-tree":
        return DecisionTree.from_dict(payload)
    if fmt == "vtt-table":
        return VttTable.from_dict(payload)
    raise ModelError(f"unknown model format: {fmt!r}")


def _load_hmm(payload: dict) -> HmmModel:
    try:
        states = tuple(payload["states"])
        symbols = tuple(payload["symbols"])
        trans = np.array(payload["trans"], dtype=float)
        emit = np.array(payload["emit"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed HMM document: {exc}") from exc
    if trans.ndim != 2 or trans.shape != (len(states), len(states)):
        raise ModelError("HMM transition matrix shape mismatch")
    row_sums = trans.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > _LOAD_ROW_TOL):
        bad = int(np.argmax(np.abs(row_sums - 1.0)))
        raise ModelError(
            f"stochastic-row violation on load: transition row {bad} sums to "
            f"{row_sums[bad]:.12g}"
        )
    emit_sums = emit.sum(axis=1)[1:-1]
    if np.any(np.abs(emit_sums - 1.0) > _LOAD_ROW_TOL):
        bad = int(np.argmax(np.abs(emit_sums - 1.0)))
        raise ModelError(
            f"stochastic-row violation on load: emission row {bad + 1} sums to "
            f"{emit_sums[bad]:.12g}"
        )
    return HmmModel(states=states, symbols=symbols, trans=trans, emit=emit)


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(model))


def load_model_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


# -- RS trees ---------------------------------------------------------------


def _tree_to_dict(tree: RSTree) -> dict:
    node: dict = {
        "status": sorted(tree.status),
        "relation": tree.relation,
        "promotion": sorted(tree.promotion),
    }
    if tree.left is not None:
        node["left"] = _tree_to_dict(tree.left)
    if tree.right is not None:
        node["right"] = _tree_to_dict(tree.right)
    return node


def _tree_from_dict(node) -> RSTree:
    if not isinstance(node, dict) or "status" not in node:
        raise DataError("tree node lacks a status field")
    try:
        status = frozenset(int(p) for p in node["status"])
        promotion = frozenset(int(p) for p in node.get("promotion", node["status"]))
    except (TypeError, ValueError) as exc:
        raise DataError(f"malformed tree node: {exc}") from exc
    left = _tree_from_dict(node["left"]) if "left" in node else None
    right = _tree_from_dict(node["right"]) if "right" in node else None
    return RSTree(
        status=status,
        promotion=promotion,
        relation=node.get("relation"),
        left=left,
        right=right,
    )


def serialize_tree(tree: RSTree) -> str:
    """Render an RS tree as a nested JSON document (canonical key order)."""
    tree.validate()
    payload = {
        "format": "rs-tree",
        "version": FORMAT_VERSION,
        "root": _tree_to_dict(tree),
    }
    return json.dumps(payload, ensure_ascii=False, indent=1) + "\n"


def load_tree(text: str) -> RSTree:
    """Inverse of serialize_tree; re-validates structural invariants."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"tree document is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != "rs-tree":
        raise DataError("not an RS tree document")
    if payload.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported tree document version {payload.get('version')!r}")
    tree = _tree_from_dict(payload.get("root"))
    tree.validate()
    return tree


def save_tree(tree: RSTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_tree(tree))


def load_tree_file(path) -> RSTree:
    with open(path, encoding="utf-8") as fh:
        return load_tree(fh.read())
