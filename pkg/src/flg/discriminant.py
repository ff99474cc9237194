"""Global and local class scatter matrices, neighborhood graphs, and the
symmetric / generalized eigensolvers that extract discriminant projections.

Conventions: sample matrices are (n, L) with rows as samples; every scatter
matrix is L x L, built at the identity projection, so callers apply their
own projection afterwards.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular


@dataclass
class LocalGraphs:
    """Intrinsic (same-class, k1-NN) and penalty (different-class, k2-NN)
    adjacency matrices with their diagonal degree matrices."""

    w_lw: np.ndarray
    w_lb: np.ndarray
    d_lw: np.ndarray
    d_lb: np.ndarray
    k1: int
    k2: int


@dataclass
class ScatterSet:
    """The four scatter matrices of one sample set plus the graphs that
    produced the local pair."""

    s_gw: np.ndarray
    s_gb: np.ndarray
    s_lw: np.ndarray
    s_lb: np.ndarray
    graphs: LocalGraphs


@dataclass
class MldaState:
    """Result of the alternating two-sided projection fit."""

    u_row: np.ndarray
    u_col: np.ndarray
    iterations: int
    history: list = field(default_factory=list)
    converged: bool = False


def class_means(X, labels):
    """Overall mean, per-class means, and class counts.

    Returns (overall, class_ids, means, counts) where means[i] is the mean
    of class class_ids[i].
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty (n, L) sample matrix")
    if labels.shape[0] != X.shape[0]:
        raise ValueError("labels length must match sample count")
    class_ids, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    overall = X.mean(axis=0)
    sums = np.zeros((class_ids.size, X.shape[1]))
    np.add.at(sums, inverse, X)
    means = sums / counts[:, None]
    return overall, class_ids, means, counts


def global_scatter(X, labels):
    """Between-class and within-class scatter matrices (s_gb, s_gw).

    s_gb = sum_j N_j (M_j - M)(M_j - M)^T,
    s_gw = sum_j sum_{i in j} (x_ij - M_j)(x_ij - M_j)^T.
    """
    X = np.asarray(X, dtype=np.float64)
    overall, class_ids, means, counts = class_means(X, labels)
    labels = np.asarray(labels)
    if class_ids.size < 2:
        warnings.warn("single-class sample set: between-class scatter is zero")
    diffs = means - overall
    s_gb = (diffs.T * counts) @ diffs
    s_gw = np.zeros((X.shape[1], X.shape[1]))
    for cid, mean in zip(class_ids, means):
        centered = X[labels == cid] - mean
        s_gw += centered.T @ centered
    return _sym(s_gb), _sym(s_gw)


def _sym(a):
    return (a + a.T) / 2.0


def _knn_adjacency(d2, allowed, k):
    """Row-wise k-nearest adjacency over allowed pairs, OR-symmetrized."""
    n = d2.shape[0]
    w = np.zeros((n, n))
    for i in range(n):
        cand = np.flatnonzero(allowed[i])
        if cand.size == 0:
            continue
        if cand.size <= k:
            chosen = cand
        else:
            order = np.argsort(d2[i, cand], kind="stable")
            chosen = cand[order[:k]]
        w[i, chosen] = 1.0
    return np.maximum(w, w.T)


def local_graphs(X, labels, k1, k2):
    """Build the same-class (k1) and different-class (k2) neighbor graphs.

    Neighborhoods are Euclidean; a class smaller than k1+1 links to all of
    its members, and likewise for k2 when few different-class samples exist.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    n = X.shape[0]
    sq = (X * X).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    diff = labels[:, None] != labels[None, :]
    np.fill_diagonal(diff, False)

    w_lw = _knn_adjacency(d2, same, k1)
    w_lb = _knn_adjacency(d2, diff, k2)
    return LocalGraphs(
        w_lw=w_lw,
        w_lb=w_lb,
        d_lw=np.diag(w_lw.sum(axis=0)),
        d_lb=np.diag(w_lb.sum(axis=0)),
        k1=k1,
        k2=k2,
    )


def local_scatter(X, graphs):
    """Laplacian-form local scatters (s_lw, s_lb) = X^T (D - W) X per graph."""
    X = np.asarray(X, dtype=np.float64)
    if graphs.w_lw.shape[0] != X.shape[0]:
        raise ValueError("graph size does not match sample count")
    s_lw = X.T @ (graphs.d_lw - graphs.w_lw) @ X
    s_lb = X.T @ (graphs.d_lb - graphs.w_lb) @ X
    return _sym(s_lw), _sym(s_lb)


def scatter_set(X, labels, k1, k2):
    """All four scatter matrices for one labeled sample set."""
    s_gb, s_gw = global_scatter(X, labels)
    graphs = local_graphs(X, labels, k1, k2)
    s_lw, s_lb = local_scatter(X, graphs)
    return ScatterSet(s_gw=s_gw, s_gb=s_gb, s_lw=s_lw, s_lb=s_lb, graphs=graphs)


def _fix_signs(u):
    """Make each column's largest-magnitude entry positive."""
    for j in range(u.shape[1]):
        lead = np.argmax(np.abs(u[:, j]))
        if u[lead, j] < 0:
            u[:, j] = -u[:, j]
    return u


def symmetric_topk(g, d):
    """Orthonormal eigenvectors of the d largest eigenvalues of symmetric g."""
    g = np.asarray(g, dtype=np.float64)
    if d > g.shape[0]:
        raise ValueError(f"d={d} exceeds matrix size {g.shape[0]}")
    vals, vecs = np.linalg.eigh(_sym(g))
    order = np.argsort(vals, kind="stable")[::-1][:d]
    return _fix_signs(vecs[:, order].copy())


def generalized_eigh(a, b, eps=1e-6):
    """Solve a u = lambda (b + reg I) u by Cholesky reduction.

    reg = eps * trace(b) / L keeps the regularization dimensionless; when
    trace(b) is not positive, eps is used as an absolute floor so that a
    zero within-scatter still yields a usable metric. Returns descending
    eigenvalues and b-orthonormal eigenvectors as columns.
    """
    a = _sym(np.asarray(a, dtype=np.float64))
    b = _sym(np.asarray(b, dtype=np.float64))
    size = b.shape[0]
    if eps > 0:
        tau = np.trace(b) / size
        reg = eps * (tau if tau > 0 else 1.0)
        b = b + reg * np.eye(size)
    chol = np.linalg.cholesky(b)  # raises LinAlgError if not positive definite
    half = solve_triangular(chol, a, lower=True)
    reduced = _sym(solve_triangular(chol, half.T, lower=True).T)
    vals, vecs = np.linalg.eigh(reduced)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = solve_triangular(chol.T, vecs[:, order], lower=False)
    return vals, _fix_signs(vecs)


def generalized_topk(a, b, d, eps=1e-6):
    """Top-d eigenvectors of the generalized problem a u = lambda b u."""
    if d > np.asarray(a).shape[0]:
        raise ValueError(f"d={d} exceeds matrix size {np.asarray(a).shape[0]}")
    _, vecs = generalized_eigh(a, b, eps=eps)
    return vecs[:, :d]


def dmlda_step(s_b, s_w, d):
    """Difference-form projection: U maximizing U^T (s_b - xi s_w) U.

    xi is the largest generalized eigenvalue of (s_b, s_w); the exact
    (unregularized) solve is attempted first so that xi zeroes the top
    ratio direction, with the regularized solve as a singular fallback.
    """
    try:
        vals, _ = generalized_eigh(s_b, s_w, eps=0.0)
    except np.linalg.LinAlgError:
        vals, _ = generalized_eigh(s_b, s_w, eps=1e-6)
    xi = float(vals[0])
    return xi, symmetric_topk(np.asarray(s_b) - xi * np.asarray(s_w), d)


def _stack_patches(patches):
    mats = [p.matrix if hasattr(p, "matrix") else np.asarray(p) for p in patches]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise ValueError("all patches must share one shape")
    return np.stack([np.asarray(m, dtype=np.float64) for m in mats])


def mlda_scatters(patches, labels, proj, side):
    """Projected two-sided scatter pair (S_B, S_W) for one alternation step.

    With side="col", proj projects the row space (bands) and the returned
    matrices act on the column (window) space; side="row" is the analogue
    with the roles swapped.
    """
    stack = _stack_patches(patches)
    labels = np.asarray(labels)
    n = stack.shape[0]
    overall = stack.mean(axis=0)
    class_ids = np.unique(labels)
    p = proj @ proj.T
    dim = stack.shape[2] if side == "col" else stack.shape[1]
    s_b = np.zeros((dim, dim))
    s_w = np.zeros((dim, dim))
    for cid in class_ids:
        members = stack[labels == cid]
        mean_c = members.mean(axis=0)
        dmean = mean_c - overall
        if side == "col":
            s_b += members.shape[0] * (dmean.T @ p @ dmean)
        else:
            s_b += members.shape[0] * (dmean @ p @ dmean.T)
        centered = members - mean_c
        for x in centered:
            if side == "col":
                s_w += x.T @ p @ x
            else:
                s_w += x @ p @ x.T
    return _sym(s_b), _sym(s_w)


def _joint_trace_ratio(patches_stack, labels, u_row, u_col):
    overall = patches_stack.mean(axis=0)
    num = 0.0
    den = 0.0
    for cid in np.unique(labels):
        members = patches_stack[labels == cid]
        mean_c = members.mean(axis=0)
        proj_mean = u_row.T @ (mean_c - overall) @ u_col
        num += members.shape[0] * float((proj_mean * proj_mean).sum())
        for x in members - mean_c:
            z = u_row.T @ x @ u_col
            den += float((z * z).sum())
    return num, den


def _trace_ratio_topk(s_b, s_w, d, iters=100, tol=1e-14):
    """Maximize tr(U^T s_b U) / tr(U^T s_w U) over orthonormal U.

    Iterates U <- top-d eigenvectors of (s_b - rho s_w); the ratio sequence
    is monotone non-decreasing and converges to the global optimum.
    """
    u = symmetric_topk(s_b, d)
    rho = None
    for _ in range(iters):
        den = float(np.trace(u.T @ s_w @ u))
        num = float(np.trace(u.T @ s_b @ u))
        if den <= 0:
            return u  # degenerate within-scatter; keep the current basis
        new_rho = num / den
        if rho is not None and abs(new_rho - rho) <= tol * max(1.0, abs(rho)):
            break
        rho = new_rho
        u = symmetric_topk(s_b - rho * s_w, d)
    return u


def rmlda_alternate(patches, labels, q_row, q_col, max_iter=30, tol=1e-6):
    """Alternating two-sided trace-ratio fit over tensor-shaped samples.

    Starting from an identity row-side projection, each sweep solves one
    side's trace-ratio problem with the other side fixed, so the joint
    ratio never decreases. Stops on relative ratio change below tol; a
    degenerate (zero) within-class scatter sets converged and an infinite
    ratio instead of failing, exercising the regularized solve path.
    """
    stack = _stack_patches(patches)
    labels = np.asarray(labels)
    n_rows, n_cols = stack.shape[1], stack.shape[2]
    if not (1 <= q_row <= n_rows and 1 <= q_col <= n_cols):
        raise ValueError("projection dims must fit the patch shape")

    u_row = np.eye(n_rows)[:, :q_row]
    u_col = np.eye(n_cols)[:, :q_col]
    history = []
    converged = False
    prev = None
    for _ in range(max_iter):
        s_b_col, s_w_col = mlda_scatters(stack, labels, u_row, side="col")
        u_col = _trace_ratio_topk(s_b_col, s_w_col, q_col)
        s_b_row, s_w_row = mlda_scatters(stack, labels, u_col, side="row")
        u_row = _trace_ratio_topk(s_b_row, s_w_row, q_row)

        num, den = _joint_trace_ratio(stack, labels, u_row, u_col)
        if den <= 1e-30 * max(num, 1.0):
            history.append(np.inf)
            converged = True
            break
        ratio = num / den
        history.append(ratio)
        if prev is not None and abs(ratio - prev) <= tol * max(1.0, abs(prev)):
            converged = True
            break
        prev = ratio
    return MldaState(
        u_row=u_row,
        u_col=u_col,
        iterations=len(history),
        history=history,
        converged=converged,
    )
