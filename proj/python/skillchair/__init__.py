"""Python interface to the skillchair library.

Logs are PlayerLog objects whose ``samples`` is an (n, 10) array with
columns SAMPLE_COLUMNS. Reports and configs travel as plain dicts.
"""

import json as _json

from ._skillchair import (
    FEATURE_NAMES,
    SAMPLE_COLUMNS,
    Dataset,
    PlayerLog,
    SkillchairError,
    TrainedModel,
    active_portion,
    build_dataset,
    correlation_matrix,
    lean_back_portion,
    quiescent_dispersion,
    read_dataset_csv,
    read_logs,
    roc_auc,
    roc_curve,
    write_dataset_csv,
    write_logs,
)
from . import _skillchair

__all__ = [
    "FEATURE_NAMES",
    "SAMPLE_COLUMNS",
    "Dataset",
    "PlayerLog",
    "SkillchairError",
    "TrainedModel",
    "active_portion",
    "build_dataset",
    "correlation_matrix",
    "default_population_spec",
    "evaluate",
    "fit_model",
    "format_auc_table",
    "lean_back_portion",
    "load_model",
    "quiescent_dispersion",
    "read_dataset_csv",
    "read_logs",
    "roc_auc",
    "roc_curve",
    "run",
    "simulate",
    "write_dataset_csv",
    "write_logs",
]


def default_population_spec():
    return _json.loads(_skillchair.default_population_spec())


def simulate(spec=None, **overrides):
    """Generate a synthetic population. ``spec`` is a (partial) population
    spec dict; keyword arguments override its top-level keys."""
    doc = dict(spec or {})
    doc.update(overrides)
    return _skillchair.generate_population(_json.dumps(doc))


def fit_model(kind, features, labels, seed=0, **params):
    """Fit one model. ``params`` holds the per-kind hyperparameter section,
    e.g. ``fit_model("knn", X, y, knn={"k": 3})``."""
    spec = {"type": kind}
    spec.update(params)
    return _skillchair.fit_model(_json.dumps(spec), features, list(labels), seed)


def load_model(doc):
    return _skillchair.model_from_json(doc if isinstance(doc, str) else _json.dumps(doc))


def evaluate(dataset, config=None):
    """Repeated group holdout over ``dataset``; ``config`` may carry
    ``models`` and ``evaluation`` sections. Returns the report dict."""
    return _json.loads(_skillchair.evaluate(dataset, _json.dumps(config or {})))


def run(config=None):
    """Full pipeline as in ``skillchair run``. Returns (report, auc_table)."""
    report, table = _skillchair.run(_json.dumps(config or {}))
    return _json.loads(report), table


def format_auc_table(report):
    return _skillchair.format_auc_table(_json.dumps(report))
