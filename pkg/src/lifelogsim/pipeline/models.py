"""Classifiers: k-nearest neighbours, CART decision tree, multinomial
logistic regression and Gaussian naive Bayes.

All models standardise features with statistics from the training rows
only; columns with zero spread are passed through unscaled.  ``train`` with
a single class returns a model that always predicts it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import minimize
from scipy.special import logsumexp

KINDS = ("knn", "dtree", "logreg", "gnb")


def _check_X(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains NaN or infinite values")
    return X


@dataclass
class Scaler:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        sd = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def __call__(self, X):
        return (X - self.mean) / self.scale


@dataclass
class Model:
    kind: str
    classes: np.ndarray
    scaler: Scaler
    params: dict = field(default_factory=dict)

    def predict(self, X) -> np.ndarray:
        X = _check_X(X)
        if len(self.classes) == 1:
            return np.repeat(self.classes, len(X))
        Z = self.scaler(X)
        return self.classes[_PREDICT[self.kind](self.params, Z)]


# k nearest neighbours -------------------------------------------------------


def _knn_fit(Z, yi, n_classes, k=5):
    if k < 1:
        raise ValueError("k must be >= 1")
    return {"Z": Z, "y": yi, "k": min(k, len(Z)), "n_classes": n_classes}


def _knn_predict(p, Z, chunk=2048):
    train, y, k, C = p["Z"], p["y"], p["k"], p["n_classes"]
    sq = np.einsum("ij,ij->i", train, train)
    out = np.empty(len(Z), dtype=np.int64)
    for s in range(0, len(Z), chunk):
        q = Z[s : s + chunk]
        d = sq[None, :] - 2.0 * q @ train.T + np.einsum("ij,ij->i", q, q)[:, None]
        nn = np.argpartition(d, k - 1, axis=1)[:, :k] if k < len(train) else np.tile(np.arange(len(train)), (len(q), 1))
        votes = np.zeros((len(q), C))
        np.add.at(votes, (np.repeat(np.arange(len(q)), nn.shape[1]), y[nn].ravel()), 1.0)
        out[s : s + chunk] = np.argmax(votes, axis=1)  # ties: lowest class index
    return out


# CART -----------------------------------------------------------------------


@njit(cache=True)
def _best_split(Z, yi, order, n_classes):
    """Best (feature, threshold, impurity) by weighted Gini.

    ``order[:, j]`` lists the node's rows sorted by column j.  Ties keep the
    lowest feature, then the earliest cut.  Returns feature -1 when no
    column has two distinct values.
    """
    n, d = order.shape
    total = np.zeros(n_classes)
    for i in range(n):
        total[yi[order[i, 0]]] += 1.0
    best_j, best_thr, best_imp = -1, 0.0, np.inf
    cnt = np.zeros(n_classes)
    for j in range(d):
        cnt[:] = 0.0
        for i in range(n - 1):
            r = order[i, j]
            cnt[yi[r]] += 1.0
            lo = Z[r, j]
            hi = Z[order[i + 1, j], j]
            if not hi > lo:
                continue
            nl = i + 1.0
            nr = n - nl
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                sl += cnt[c] * cnt[c]
                rc = total[c] - cnt[c]
                sr += rc * rc
            imp = (nl - sl / nl + nr - sr / nr) / n
            if imp < best_imp:
                best_j, best_imp = j, imp
                best_thr = 0.5 * (lo + hi)
                if not lo < best_thr:  # midpoint rounded onto the lower value
                    best_thr = hi
    return best_j, best_thr, best_imp


def _dtree_fit(Z, yi, n_classes, max_depth=None, min_samples_split=2):
    Y1h = np.eye(n_classes)[yi]
    d = Z.shape[1]
    feat, thr, left, right, value = [], [], [], [], []

    def node():
        for lst, v in ((feat, -1), (thr, 0.0), (left, -1), (right, -1), (value, -1)):
            lst.append(v)
        return len(feat) - 1

    goes_left = np.zeros(len(Z), dtype=bool)
    stack = [(node(), np.argsort(Z, axis=0, kind="stable"), 0)]
    while stack:
        nid, order, depth = stack.pop()
        rows = order[:, 0]
        counts = Y1h[rows].sum(axis=0)
        value[nid] = int(np.argmax(counts))
        pure = np.count_nonzero(counts) == 1
        if pure or len(rows) < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        parent = 1.0 - np.sum((counts / len(rows)) ** 2)
        j, t, imp = _best_split(Z, yi, order, n_classes)
        if j < 0 or not imp < parent:
            continue
        goes_left[rows] = Z[rows, j] < t
        sel = goes_left[order]
        n_left = int(goes_left[rows].sum())
        # boolean filtering column by column keeps each column sorted
        order_l = order.T[sel.T].reshape(d, n_left).T
        order_r = order.T[~sel.T].reshape(d, len(rows) - n_left).T
        feat[nid], thr[nid] = j, t
        left[nid], right[nid] = node(), node()
        stack.append((right[nid], order_r, depth + 1))
        stack.append((left[nid], order_l, depth + 1))
    return {k: np.array(v) for k, v in zip(("feat", "thr", "left", "right", "value"), (feat, thr, left, right, value))}


def _dtree_predict(p, Z):
    nid = np.zeros(len(Z), dtype=np.int64)
    rows = np.arange(len(Z))
    while True:
        f = p["feat"][nid]
        inner = f >= 0
        if not inner.any():
            return p["value"][nid]
        r = rows[inner]
        go_left = Z[r, f[inner]] < p["thr"][nid[inner]]
        nid[r] = np.where(go_left, p["left"][nid[r]], p["right"][nid[r]])


# multinomial logistic regression --------------------------------------------


def _logreg_fit(Z, yi, n_classes, C=1.0, max_iter=200, tol=1e-6):
    """Minimise C * sum(log-loss) + ||W||^2 / 2; intercepts unpenalised."""
    n, d = Z.shape
    Y = np.eye(n_classes)[yi]
    Zb = np.hstack([Z, np.ones((n, 1))])

    def obj(w):
        W = w.reshape(d + 1, n_classes)
        S = Zb @ W
        lse = logsumexp(S, axis=1)
        loss = C * np.sum(lse - np.sum(S * Y, axis=1)) + 0.5 * np.sum(W[:-1] ** 2)
        P = np.exp(S - lse[:, None])
        G = C * Zb.T @ (P - Y)
        G[:-1] += W[:-1]
        return loss, G.ravel()

    res = minimize(obj, np.zeros((d + 1) * n_classes), jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "gtol": tol})
    return {"W": res.x.reshape(d + 1, n_classes), "converged": bool(res.success)}


def _logreg_scores(p, Z):
    return Z @ p["W"][:-1] + p["W"][-1]


def _logreg_predict(p, Z):
    return np.argmax(_logreg_scores(p, Z), axis=1)


# Gaussian naive Bayes --------------------------------------------------------


def _gnb_fit(Z, yi, n_classes, var_smoothing=1e-9):
    eps = var_smoothing * np.max(Z.var(axis=0))
    mu = np.zeros((n_classes, Z.shape[1]))
    var = np.zeros_like(mu)
    prior = np.zeros(n_classes)
    for c in range(n_classes):
        Zc = Z[yi == c]
        mu[c], var[c], prior[c] = Zc.mean(axis=0), Zc.var(axis=0) + eps, len(Zc) / len(Z)
    return {"mu": mu, "var": var, "log_prior": np.log(prior)}


def _gnb_joint_log(p, Z):
    ll = -0.5 * np.sum(np.log(2.0 * np.pi * p["var"]), axis=1)[None, :]
    inv = 1.0 / p["var"]
    # expanded square avoids an (n, classes, features) temporary
    quad = (Z * Z) @ inv.T - 2.0 * Z @ (p["mu"] * inv).T + np.sum(p["mu"] ** 2 * inv, axis=1)
    ll = ll - 0.5 * quad
    return ll + p["log_prior"]


def _gnb_predict(p, Z):
    return np.argmax(_gnb_joint_log(p, Z), axis=1)


_FIT = {"knn": _knn_fit, "dtree": _dtree_fit, "logreg": _logreg_fit, "gnb": _gnb_fit}
_PREDICT = {"knn": _knn_predict, "dtree": _dtree_predict, "logreg": _logreg_predict, "gnb": _gnb_predict}


def train(kind: str, X, y, **hp) -> Model:
    """Fit a classifier.  Hyper-parameters: knn ``k``; dtree ``max_depth``,
    ``min_samples_split``; logreg ``C``, ``max_iter``; gnb ``var_smoothing``."""
    if kind not in _FIT:
        raise ValueError(f"unknown model kind {kind!r}; choose from {', '.join(KINDS)}")
    X = _check_X(X)
    y = np.asarray(y)
    if len(y) != len(X) or len(y) == 0:
        raise ValueError("X and y must be non-empty and the same length")
    classes, yi = np.unique(y, return_inverse=True)
    scaler = Scaler.fit(X)
    if len(classes) == 1:
        return Model(kind, classes, scaler)
    return Model(kind, classes, scaler, _FIT[kind](scaler(X), yi, len(classes), **hp))


def predict(model: Model, X) -> np.ndarray:
    return model.predict(X)
