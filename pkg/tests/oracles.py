"""Slow, list-based reference implementations used only as test oracles.

Nothing here imports the package's kernels; each rule is re-derived from its
definition so a shared bug cannot hide.
"""

from itertools import product


def ham(x, y):
    return sum(1 for a, b in zip(x, y) if a != b)


def exhaustive_min_cost(rows, cards):
    """Smallest sum of distances from ``rows`` to any point of the category product space."""
    return min(sum(ham(r, z) for r in rows) for z in product(*(range(c) for c in cards)))


def column_mode(rows, cards):
    out = []
    for i, c in enumerate(cards):
        counts = [0] * c
        for r in rows:
            counts[r[i]] += 1
        best = 0
        for v in range(c):
            if counts[v] > counts[best]:
                best = v
        out.append(best)
    return out


def pairwise_density(rows):
    """Cao density by direct pairwise matching, O(n^2 m)."""
    m = len(rows[0])
    return [sum(1 for y in rows for a in range(m) if x[a] == y[a]) / m for x in rows]


def cao_select(rows, k):
    """Row indices chosen by the density-distance rule, evaluated from scratch every step."""
    m = len(rows[0])
    dens = [sum(1 for y in rows for a in range(m) if x[a] == y[a]) for x in rows]
    first = max(range(len(rows)), key=lambda i: (dens[i], -i))
    chosen = [first]
    while len(chosen) < k:
        best, best_score = None, None
        for i, x in enumerate(rows):
            if i in chosen:
                continue
            score = min(ham(x, rows[c]) * dens[i] for c in chosen)
            if best is None or score > best_score:
                best, best_score = i, score
        chosen.append(best)
    return chosen


def naive_kmodes(rows, cards, centers, max_iter=300):
    """Plain-loop K-Modes with the package's documented rules.

    Assignment: stay in the previous cluster if it is among the nearest,
    else the lowest nearest index.  Update: column modes, lowest code on
    ties.  Empty cluster: take the row (outside singleton clusters) farthest
    from its current center, lowest row first.  Stop after a pass that moves
    nothing or after an update that leaves every center unchanged.
    """
    n, k = len(rows), len(centers)
    centers = [list(c) for c in centers]
    assign = None
    it = 0
    converged = False
    while it < max_iter:
        new = []
        for idx, r in enumerate(rows):
            d = [ham(r, c) for c in centers]
            lo = min(d)
            if assign is not None and d[assign[idx]] == lo:
                new.append(assign[idx])
            else:
                new.append(d.index(lo))
        it += 1
        if assign is not None and new == assign:
            converged = True
            break
        assign = new
        moved = False
        for j in range(k):
            if j in assign:
                continue
            sizes = [assign.count(c) for c in range(k)]
            best, best_d = None, -1
            for idx, r in enumerate(rows):
                if sizes[assign[idx]] < 2:
                    continue
                dd = ham(r, centers[assign[idx]])
                if dd > best_d:
                    best, best_d = idx, dd
            assign[best] = j
            moved = True
        new_centers = []
        for j in range(k):
            members = [rows[i] for i in range(n) if assign[i] == j]
            new_centers.append(column_mode(members, cards))
        same = new_centers == centers
        centers = new_centers
        if same and not moved:
            converged = True
            break
    total = sum(ham(rows[i], centers[assign[i]]) for i in range(n))
    return assign, centers, total, it, converged
