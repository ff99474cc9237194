"""Classifiers emitting calibrated class-membership matrices.

Four algorithms share one surface: k-nearest neighbors (vote fractions),
an extreme learning machine (random sigmoid layer + ridge readout), an
L2-regularized multinomial logistic regression trained by full-batch
gradient descent, and a one-vs-rest linear SVM trained by SGD. Scores of
the non-probabilistic models pass through a softmax, which preserves the
argmax while making every row stochastic.
"""

from dataclasses import dataclass, field

import numpy as np

ALGORITHMS = ("knn", "elm", "mlr", "linsvm")


def _check_training_set(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, L) with one label per row")
    if not np.isfinite(X).all():
        raise ValueError("training features contain NaN or inf")
    if np.unique(y).size < 2:
        raise ValueError("training set contains a single class")
    return X, y


def _softmax(scores):
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _expand_columns(probs, classes, num_classes):
    """Place per-known-class columns into the full 1..num_classes matrix."""
    out = np.zeros((probs.shape[0], num_classes))
    out[:, classes - 1] = probs
    return out


@dataclass
class ClassifierModel:
    """Fitted model handle; prediction is deterministic given the handle."""

    algorithm: str
    num_classes: int
    seed: int
    classes: np.ndarray
    params: dict = field(default_factory=dict)
    state: dict = field(default_factory=dict)

    @property
    def n_features(self):
        return int(self.state["n_features"])


def train(algorithm, X, y, num_classes=None, seed=0, **params):
    """Fit one of the supported algorithms on labeled spectra.

    num_classes fixes the width of every membership matrix the model emits;
    it defaults to the largest label seen. Stochastic pieces (hidden
    weights, initializations, epoch shuffles) derive from seed only.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    X, y = _check_training_set(X, y)
    classes = np.unique(y)
    if num_classes is None:
        num_classes = int(classes.max())
    if classes.max() > num_classes:
        raise ValueError("labels exceed num_classes")

    model = ClassifierModel(
        algorithm=algorithm,
        num_classes=num_classes,
        seed=seed,
        classes=classes,
        params=dict(params),
        state={"n_features": X.shape[1]},
    )
    fit = {"knn": _fit_knn, "elm": _fit_elm, "mlr": _fit_mlr, "linsvm": _fit_linsvm}
    fit[algorithm](model, X, y)
    return model


def predict_memberships(model, X):
    """Row-stochastic m x C membership matrix for the given spectra."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"feature dimension {X.shape[-1]} does not match training ({model.n_features})"
        )
    predict = {
        "knn": _memberships_knn,
        "elm": _memberships_elm,
        "mlr": _memberships_mlr,
        "linsvm": _memberships_linsvm,
    }
    return predict[model.algorithm](model, X)


def predict_labels(model, X):
    """Argmax labels (1-based); ties resolve to the smallest class index."""
    return np.argmax(predict_memberships(model, X), axis=1) + 1


# --- k nearest neighbors ---------------------------------------------------

def _fit_knn(model, X, y):
    k = int(model.params.get("k", 5))
    if model.params.get("scan_k", False):
        k = _scan_knn_k(X, y, model.params.get("scan_range", (2, 20)))
        model.params["k"] = k
    model.state.update(X=X, y=y, k=min(k, X.shape[0]))


def _knn_vote(train_X, train_y, X, k, num_classes, weights="uniform"):
    sq_tr = (train_X * train_X).sum(axis=1)
    sq = (X * X).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq_tr[None, :] - 2.0 * (X @ train_X.T), 0.0)
    # Stable partial sort keeps neighbor ties deterministic by train index.
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = np.zeros((X.shape[0], num_classes))
    rows = np.repeat(np.arange(X.shape[0]), k)
    neigh = order.ravel()
    if weights == "distance":
        w = 1.0 / (np.sqrt(np.take_along_axis(d2, order, axis=1)) + 1e-12)
        np.add.at(votes, (rows, train_y[neigh] - 1), w.ravel())
    else:
        np.add.at(votes, (rows, train_y[neigh] - 1), 1.0)
    return votes / votes.sum(axis=1, keepdims=True)


def _memberships_knn(model, X):
    s = model.state
    return _knn_vote(
        s["X"], s["y"], X, s["k"], model.num_classes,
        weights=model.params.get("weights", "uniform"),
    )


def _scan_knn_k(X, y, k_range):
    """Pick k by leave-one-out accuracy on the training set (ties: smallest k)."""
    lo, hi = k_range
    sq = (X * X).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    best_k, best_acc = lo, -1.0
    for k in range(lo, min(hi, X.shape[0] - 1) + 1):
        neigh_labels = y[order[:, :k]]
        pred = np.zeros(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            counts = np.bincount(neigh_labels[i], minlength=int(y.max()) + 1)
            pred[i] = counts.argmax()
        acc = float((pred == y).mean())
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k


# --- extreme learning machine ----------------------------------------------

def _fit_elm(model, X, y):
    hidden = int(model.params.get("hidden", 500))
    ridge = float(model.params.get("ridge", 1e-6))
    rng = np.random.default_rng(model.seed)
    w_in = rng.uniform(-1.0, 1.0, size=(X.shape[1], hidden))
    bias = rng.uniform(-1.0, 1.0, size=hidden)
    h = _sigmoid(X @ w_in + bias)
    targets = np.zeros((X.shape[0], model.classes.size))
    targets[np.arange(X.shape[0]), np.searchsorted(model.classes, y)] = 1.0
    beta = np.linalg.solve(h.T @ h + ridge * np.eye(hidden), h.T @ targets)
    model.state.update(w_in=w_in, bias=bias, beta=beta)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def _memberships_elm(model, X):
    s = model.state
    scores = _sigmoid(X @ s["w_in"] + s["bias"]) @ s["beta"]
    return _expand_columns(_softmax(scores), model.classes, model.num_classes)


# --- multinomial logistic regression -----------------------------------------

def _fit_mlr(model, X, y):
    """Full-batch gradient descent on the L2-regularized cross-entropy.

    The step halves whenever it would increase the loss (the step is
    retried, so the per-epoch loss sequence is non-increasing).
    """
    reg = float(model.params.get("reg", 1e-3))
    epochs = int(model.params.get("epochs", 500))
    lr = float(model.params.get("lr", 0.1))
    rng = np.random.default_rng(model.seed)

    n, n_feat = X.shape
    c = model.classes.size
    targets = np.zeros((n, c))
    targets[np.arange(n), np.searchsorted(model.classes, y)] = 1.0
    w = 0.01 * rng.standard_normal((n_feat, c))
    b = np.zeros(c)

    def loss_and_grad(w, b):
        probs = _softmax(X @ w + b)
        ce = -np.log(np.clip(probs[targets.astype(bool)], 1e-300, None)).mean()
        loss = ce + 0.5 * reg * float((w * w).sum())
        delta = (probs - targets) / n
        return loss, X.T @ delta + reg * w, delta.sum(axis=0)

    loss, gw, gb = loss_and_grad(w, b)
    losses = [loss]
    for _ in range(epochs):
        while lr > 1e-15:
            w_new, b_new = w - lr * gw, b - lr * gb
            new_loss, new_gw, new_gb = loss_and_grad(w_new, b_new)
            if new_loss <= loss:
                break
            lr *= 0.5
        if lr <= 1e-15:
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        losses.append(loss)
    model.state.update(w=w, b=b, losses=losses)


def _memberships_mlr(model, X):
    s = model.state
    probs = _softmax(X @ s["w"] + s["b"])
    return _expand_columns(probs, model.classes, model.num_classes)


# --- linear one-vs-rest SVM ---------------------------------------------------

def _fit_linsvm(model, X, y):
    epochs = int(model.params.get("epochs", 200))
    lr0 = float(model.params.get("lr", 0.01))
    reg = float(model.params.get("reg", 1e-4))
    rng = np.random.default_rng(model.seed)

    n, n_feat = X.shape
    w = np.zeros((n_feat, model.classes.size))
    b = np.zeros(model.classes.size)
    step = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            step += 1
            lr = lr0 / (1.0 + lr0 * reg * step)
            scores = X[i] @ w + b
            signs = np.where(model.classes == y[i], 1.0, -1.0)
            active = signs * scores < 1.0
            w *= 1.0 - lr * reg
            w[:, active] += lr * signs[active] * X[i][:, None]
            b[active] += lr * signs[active]
    model.state.update(w=w, b=b)


def _memberships_linsvm(model, X):
    s = model.state
    scores = X @ s["w"] + s["b"]
    return _expand_columns(_softmax(scores), model.classes, model.num_classes)
