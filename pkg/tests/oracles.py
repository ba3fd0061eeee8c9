"""Slow, obviously-correct reference implementations used by the tests."""
import itertools
import math

import numpy as np


# -- PMI --------------------------------------------------------------------------


def pmi_table(docs, classes, k, n):
    """Smoothed PMI for every n-gram from a dense joint table.

    Builds the |G| x |C| count matrix, adds k to every cell, normalizes to a
    joint distribution and returns log P(g,c) - log P(g) - log P(c).
    """
    grams = sorted({tuple(toks[i:i + n]) for toks, _ in docs for i in range(len(toks) - n + 1)})
    if not grams:
        return {}, {}
    index = {g: i for i, g in enumerate(grams)}
    table = np.zeros((len(grams), len(classes)))
    for toks, cls in docs:
        for i in range(len(toks) - n + 1):
            table[index[tuple(toks[i:i + n])], classes.index(cls)] += 1
    counts = table.sum(axis=1)
    smoothed = table + k
    joint = smoothed / smoothed.sum()
    pg = joint.sum(axis=1, keepdims=True)
    pc = joint.sum(axis=0, keepdims=True)
    pmi = np.log(joint) - np.log(pg) - np.log(pc)
    return ({g: {c: float(pmi[index[g], j]) for j, c in enumerate(classes)} for g in grams},
            {g: int(counts[index[g]]) for g in grams})


def pmi_oracle(docs, classes, k, min_count):
    out = {}
    for n in (1, 2):
        values, counts = pmi_table(docs, classes, k, n)
        out.update({g: v for g, v in values.items() if counts[g] >= min_count})
    return out


# -- MAP --------------------------------------------------------------------------


def brute_average_precision(ranking, relevant, depth):
    """Precision at every relevant rank within depth, averaged over those ranks."""
    precisions = []
    for cut in range(1, min(depth, len(ranking)) + 1):
        if relevant[ranking[cut - 1]]:
            top = ranking[:cut]
            precisions.append(sum(1 for d in top if relevant[d]) / cut)
    return sum(precisions) / len(precisions) if precisions else 0.0


# -- SVM --------------------------------------------------------------------------


def brute_dual_optimum(K, y, C):
    """Max of the SVM dual by enumerating every active set.

    For each assignment of alphas to {0, C, free} the free block solves a
    linear system with the equality constraint. Feasible candidates are
    scored and the best objective is returned. Exponential, fine for n <= 6.
    """
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    best = 0.0
    for states in itertools.product((0, 1, 2), repeat=n):
        alpha = np.array([C if s == 1 else 0.0 for s in states])
        free = [i for i, s in enumerate(states) if s == 2]
        if free:
            f = np.array(free)
            fixed = np.array([i for i in range(n) if states[i] != 2], dtype=int)
            rhs = np.ones(len(f))
            if len(fixed):
                rhs = rhs - Q[np.ix_(f, fixed)] @ alpha[fixed]
            # KKT system for the free block with the multiplier of y.alpha = 0
            m = len(f)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(f, f)]
            A[:m, m] = y[f]
            A[m, :m] = y[f]
            b = np.concatenate([rhs, [-(y[fixed] @ alpha[fixed]) if len(fixed) else 0.0]])
            sol, *_ = np.linalg.lstsq(A, b, rcond=None)
            if not np.allclose(A @ sol, b, atol=1e-9):
                continue
            alpha[f] = sol[:m]
        if np.any(alpha < -1e-9) or np.any(alpha > C + 1e-9) or abs(y @ alpha) > 1e-7:
            continue
        alpha = np.clip(alpha, 0, C)
        best = max(best, alpha.sum() - 0.5 * alpha @ Q @ alpha)
    return best


def best_linear_hinge_accuracy(X, y):
    """Training accuracy of the exact soft-margin linear SVM (C=1), solved as an LP.

    Uses the L1-regularized hinge loss so the problem is linear; the resulting
    hyperplane is an exact optimum of a convex linear classifier.
    """
    from scipy.optimize import linprog

    n, d = X.shape
    # variables: w+ (d), w- (d), b+ , b-, xi (n)
    c = np.concatenate([np.full(2 * d, 1e-3), [0.0, 0.0], np.ones(n)])
    A = np.zeros((n, 2 * d + 2 + n))
    A[:, :d] = -y[:, None] * X
    A[:, d:2 * d] = y[:, None] * X
    A[:, 2 * d] = -y
    A[:, 2 * d + 1] = y
    A[:, 2 * d + 2:] = -np.eye(n)
    res = linprog(c, A_ub=A, b_ub=-np.ones(n), bounds=[(0, None)] * len(c), method="highs")
    w = res.x[:d] - res.x[d:2 * d]
    b = res.x[2 * d] - res.x[2 * d + 1]
    pred = np.where(X @ w + b >= 0, 1, -1)
    return float(np.mean(pred == y))


def concentric_circles(n=200, factor=0.5, noise=0.05, seed=0):
    """Two noisy concentric rings, half the points on each, labels +1 inner / -1 outer."""
    rng = np.random.default_rng(seed)
    n_out = n // 2
    n_in = n - n_out
    t_out = np.linspace(0, 2 * math.pi, n_out, endpoint=False)
    t_in = np.linspace(0, 2 * math.pi, n_in, endpoint=False)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        factor * np.column_stack([np.cos(t_in), np.sin(t_in)]),
    ])
    X += rng.normal(scale=noise, size=X.shape)
    y = np.concatenate([-np.ones(n_out), np.ones(n_in)])
    return X, y


# -- SimHash ---------------------------------------------------------------------------


def reference_hash64(token, seed):
    """Textbook FNV-1a 64 followed by the murmur3 fmix64 finalizer."""
    mask = (1 << 64) - 1
    h = 0xCBF29CE484222325 ^ seed
    for b in token.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & mask
    for shift, mult in ((33, 0xFF51AFD7ED558CCD), (33, 0xC4CEB9FE1A85EC53)):
        h ^= h >> shift
        h = (h * mult) & mask
    return h ^ (h >> 33)


def reference_simhash(tokens, seed):
    acc = [0] * 64
    for tok in tokens:
        h = reference_hash64(tok, seed)
        for bit in range(64):
            acc[bit] += 1 if (h >> bit) & 1 else -1
    return sum(1 << bit for bit in range(64) if acc[bit] > 0)
