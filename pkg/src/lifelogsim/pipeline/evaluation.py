"""Scoring, temporal smoothing and cross-validation."""

from __future__ import annotations

import enum
import warnings
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .models import train

LAB_PLACES = ("lab1", "lab2", "lab3", "lab4", "lab5")
HALL_PLACES = ("hall9f", "hall4f", "hall1f")
STATIC_ACTIVITIES = ("sitting", "standing")
DYNAMIC_ACTIVITIES = ("walking", "upstairs", "downstairs")
TARGETS = ("place8", "place14", "activity2", "activity5")


def map_labels(target: str, place, activity) -> np.ndarray:
    """Ground-truth labels for a classification target."""
    place = np.asarray(place, dtype=object)
    activity = np.asarray(activity, dtype=object)
    if target == "place14":
        return place
    if target == "activity5":
        return activity
    if target == "place8":
        grp = {**{p: "lab" for p in LAB_PLACES}, **{h: "hall" for h in HALL_PLACES}}
        return np.array([grp.get(p, p) for p in place], dtype=object)
    if target == "activity2":
        grp = {**{a: "static" for a in STATIC_ACTIVITIES}, **{a: "dynamic" for a in DYNAMIC_ACTIVITIES}}
        return np.array([grp.get(a, a) for a in activity], dtype=object)
    raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")


def majority_vote(labels, n: int = 20) -> list:
    """Trailing-window mode filter.

    ``out[i]`` is the most frequent label in ``labels[max(0, i-n+1) : i+1]``;
    among tied labels the one seen most recently wins.
    """
    if n < 1:
        raise ValueError("majority window must be >= 1")
    labels = list(labels)
    counts = Counter()
    last = {}
    window = deque()
    out = []
    for i, lab in enumerate(labels):
        window.append(lab)
        counts[lab] += 1
        last[lab] = i
        if len(window) > n:
            old = window.popleft()
            counts[old] -= 1
            if counts[old] == 0:
                del counts[old]
        best = max(counts.values())
        out.append(max((c for c in counts if counts[c] == best), key=last.__getitem__))
    return out


def confusion(y_true, y_pred, classes=None):
    y_true = np.asarray(y_true, dtype=object)
    y_pred = np.asarray(y_pred, dtype=object)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if classes is None:
        classes = sorted(set(y_true.tolist()) | set(y_pred.tolist()))
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(cm, ([index[v] for v in y_true], [index[v] for v in y_pred]), 1)
    return list(classes), cm


def per_class_scores(cm):
    """Precision, recall, F1 and support per class from a confusion matrix
    (rows true, columns predicted).  Undefined ratios are 0."""
    tp = np.diag(cm).astype(float)
    support = cm.sum(axis=1).astype(float)
    predicted = cm.sum(axis=0).astype(float)
    prec = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    rec = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
    denom = prec + rec
    f1 = np.divide(2 * prec * rec, denom, out=np.zeros_like(tp), where=denom > 0)
    return prec, rec, f1, support


def weighted_f_measure(y_true, y_pred) -> float:
    if len(y_true) == 0:
        raise ValueError("empty label sequences")
    _, cm = confusion(y_true, y_pred)
    _, _, f1, support = per_class_scores(cm)
    return float(np.sum(support * f1) / support.sum())


# cross-validation ----------------------------------------------------------


class Scheme(enum.Enum):
    PD = "pd"  # per user, stratified 10-fold
    PI = "pi"  # leave one user out


class VoteMode(enum.Enum):
    SEQUENCE = "sequence"  # smooth each user's full out-of-fold sequence
    FOLD = "fold"  # smooth each test fold's predictions on their own


@dataclass
class EvalReport:
    scheme: Scheme
    model: str
    majority_n: int
    classes: list
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted_f: float
    per_user_f: dict
    warnings: list = field(default_factory=list)

    def summary(self) -> str:
        name = "PD 10-fold" if self.scheme is Scheme.PD else "PI leave-one-user-out"
        lines = [
            f"scheme: {name}   model: {self.model}   majority_n: {self.majority_n}",
            f"weighted F-measure (mean over users): {self.weighted_f:.4f}",
            "",
            f"{'class':<12} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>8}",
        ]
        for i, c in enumerate(self.classes):
            lines.append(f"{c:<12} {self.precision[i]:9.4f} {self.recall[i]:9.4f} {self.f1[i]:9.4f} {int(self.support[i]):8d}")
        lines.append("")
        lines += [f"user {u}: weighted F {f:.4f}" for u, f in self.per_user_f.items()]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)

    def confusion_csv(self) -> str:
        rows = ["true\\pred," + ",".join(self.classes)]
        rows += [f"{c}," + ",".join(str(v) for v in self.confusion[i]) for i, c in enumerate(self.classes)]
        return "\n".join(rows) + "\n"


def stratified_folds(y, n_folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per row; each class is dealt round-robin after shuffling,
    starting at a random fold so small classes do not pile into fold 0."""
    y = np.asarray(y, dtype=object)
    fold = np.empty(len(y), dtype=np.int64)
    for c in sorted(set(y.tolist())):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        fold[idx] = (np.arange(len(idx)) + rng.integers(n_folds)) % n_folds
    return fold


def _draw_folds(y, n_folds, seed, notes, user):
    classes = set(np.asarray(y, dtype=object).tolist())
    for attempt in range(10):
        fold = stratified_folds(y, n_folds, np.random.default_rng([seed, attempt]))
        bad = [f for f in range(n_folds) if set(y[fold != f].tolist()) != classes]
        if not bad:
            return fold
        notes.append(f"user {user}: class missing from a training fold, folds re-drawn (attempt {attempt + 1})")
    notes.append(f"user {user}: could not place every class in every training fold")
    return fold


def cross_validate(
    X,
    labels,
    user_ids,
    scheme="pd",
    model_kind: str = "knn",
    majority_n: int = 20,
    order=None,
    seed: int = 0,
    n_folds: int = 10,
    vote_mode="sequence",
    **hp,
) -> EvalReport:
    """Evaluate ``model_kind`` under the PD or PI scheme.

    ``order`` gives each row's temporal sort key within its user (defaults
    to row order).  Majority voting runs over each user's predictions in
    that order before scoring.  Standardisation is refit inside every fold.
    """
    scheme, vote_mode = Scheme(scheme), VoteMode(vote_mode)
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=object)
    users = np.asarray(user_ids)
    if not (len(X) == len(labels) == len(users)):
        raise ValueError("X, labels and user_ids must have the same length")
    order = np.arange(len(X)) if order is None else np.asarray(order)
    uniq = list(dict.fromkeys(users[np.lexsort((order, users))].tolist()))
    if scheme is Scheme.PI and len(uniq) < 2:
        raise ValueError("leave-one-user-out needs at least two users")
    notes = []
    pred = np.empty(len(X), dtype=object)
    fold_of = np.zeros(len(X), dtype=np.int64)

    if scheme is Scheme.PD:
        for u in uniq:
            rows = np.flatnonzero(users == u)
            if len(rows) < n_folds:
                raise ValueError(f"user {u}: {len(rows)} rows, fewer than {n_folds} folds")
            fold = _draw_folds(labels[rows], n_folds, seed, notes, u)
            fold_of[rows] = fold
            for f in range(n_folds):
                tr, te = rows[fold != f], rows[fold == f]
                if len(set(labels[tr].tolist())) < 2:
                    notes.append(f"user {u} fold {f}: single class in training data")
                pred[te] = train(model_kind, X[tr], labels[tr], **hp).predict(X[te])
    else:
        for i, u in enumerate(uniq):
            te = users == u
            fold_of[te] = i
            pred[te] = train(model_kind, X[~te], labels[~te], **hp).predict(X[te])

    smoothed = np.empty(len(X), dtype=object)
    for u in uniq:
        rows = np.flatnonzero(users == u)
        rows = rows[np.argsort(order[rows], kind="stable")]
        if vote_mode is VoteMode.SEQUENCE:
            smoothed[rows] = majority_vote(pred[rows], majority_n)
        else:
            for f in np.unique(fold_of[rows]):
                r = rows[fold_of[rows] == f]
                smoothed[r] = majority_vote(pred[r], majority_n)

    per_user = {u: weighted_f_measure(labels[users == u], smoothed[users == u]) for u in uniq}
    classes, cm = confusion(labels, smoothed)
    prec, rec, f1, support = per_class_scores(cm)
    for n in notes:
        warnings.warn(n, stacklevel=2)
    return EvalReport(
        scheme, model_kind, majority_n, classes, cm, prec, rec, f1, support,
        float(np.mean(list(per_user.values()))), per_user, notes,
    )  # fmt: skip
