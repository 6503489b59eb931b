"""Shared helpers: random structure generators and independent oracles.

The oracles here deliberately re-derive results by brute force (path
enumeration, residual regressions) so the library's fast paths are checked
against something that cannot share their bugs.
"""

import numpy as np

import causalkit as ck


def random_dag(n_nodes, edge_prob, seed):
    """DAG over a random topological order with iid edge indicators."""
    rng = ck.SplitMix64(seed)
    names = [f"v{i}" for i in range(n_nodes)]
    perm = np.argsort(rng.uniform(n_nodes))
    pairs = []
    flags = rng.uniform(n_nodes * (n_nodes - 1) // 2)
    k = 0
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if flags[k] < edge_prob:
                pairs.append((names[perm[i]], names[perm[j]]))
            k += 1
    return ck.Dag(names, pairs)


def directed_pairs(g):
    """(parent, child) index pairs of a graph's directed edges."""
    out = []
    for i, j, ma, mb in g.edges():
        if (ma, mb) == (ck.TAIL, ck.ARROW):
            out.append((i, j))
        elif (ma, mb) == (ck.ARROW, ck.TAIL):
            out.append((j, i))
    return out


def random_sem(truth, coeff_seed, lo=0.5, hi=1.5):
    """Linear SEM on a DAG with random-signed coefficients in +-[lo, hi]."""
    rng = ck.SplitMix64(coeff_seed)
    coeffs = {}
    for p, c in directed_pairs(truth):
        sign = 1.0 if rng.uniform(1)[0] < 0.5 else -1.0
        coeffs[(truth.names[p], truth.names[c])] = sign * rng.uniform(1, lo, hi)[0]
    return ck.LinearSem(truth, coeffs, {}, {n: 1.0 for n in truth.names})


def d_separated_brute(g, x, y, cond):
    """Enumerate every simple skeleton path and test per-path blocking."""
    xi, yi = g._resolve(x), g._resolve(y)
    zs = {g._resolve(c) for c in cond}
    adj = [sorted(g.adjacent(v)) for v in range(g.n_nodes)]
    desc = [ck.relatives(g, v, "descendants") for v in range(g.n_nodes)]
    paths = []

    def dfs(path):
        v = path[-1]
        if v == yi:
            paths.append(list(path))
            return
        for u in adj[v]:
            if u not in path:
                path.append(u)
                dfs(path)
                path.pop()

    dfs([xi])
    for path in paths:
        blocked = False
        for i in range(1, len(path) - 1):
            prev, z, nxt = path[i - 1], path[i], path[i + 1]
            collider = g.is_directed_edge(prev, z) and g.is_directed_edge(nxt, z)
            if collider:
                if z not in zs and not (desc[z] & zs):
                    blocked = True
                    break
            elif z in zs:
                blocked = True
                break
        if not blocked:
            return False
    return True


def residual_partial_corr(d, x, y, cond):
    """Partial correlation by regressing out cond and correlating residuals."""
    X = np.column_stack([d.col(c) for c in cond] + [np.ones(d.n)])
    rx = d.col(x) - X @ np.linalg.lstsq(X, d.col(x), rcond=None)[0]
    ry = d.col(y) - X @ np.linalg.lstsq(X, d.col(y), rcond=None)[0]
    return float(rx @ ry / np.sqrt((rx @ rx) * (ry @ ry)))


def all_cond_queries(g):
    """Every (x, y, cond) query triple over a graph's nodes."""
    from itertools import combinations

    n = g.n_nodes
    for x in range(n):
        for y in range(x + 1, n):
            rest = [v for v in range(n) if v not in (x, y)]
            for r in range(len(rest) + 1):
                for cond in combinations(rest, r):
                    yield x, y, cond


def continuous_dataset(names, columns):
    return ck.Dataset(names, [ck.CONTINUOUS] * len(names), np.column_stack(columns))


def discrete_dataset(names, columns):
    return ck.Dataset(names, [ck.DISCRETE] * len(names), np.column_stack(columns))
