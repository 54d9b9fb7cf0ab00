"""Pure-Python fairness kernels (fallback for ``_ckernels``).

``tables`` is an ``(n, 2^m)`` integer array; bundles are item masks.
Assignments list the agent of each item, item 0 most significant; in
partial mode the extra value ``n`` means "unassigned".
"""
from itertools import product

import numpy as np

EF1 = 0
EFXPM = 1


def _rows(tables):
    return tables.tolist() if isinstance(tables, np.ndarray) else tables


def _bits(mask):
    k = 0
    while mask:
        if mask & 1:
            yield k
        mask >>= 1
        k += 1


def _ef1_pair(vi, bi, bk):
    own = vi[bi]
    other = vi[bk]
    if own >= other:
        return True
    for x in _bits(bi):
        if vi[bi ^ (1 << x)] >= other:
            return True
    for x in _bits(bk):
        if own >= vi[bk ^ (1 << x)]:
            return True
    return False


def _efxpm_pair(vi, bi, bk):
    """-2 if fine, -1 if the marginal union is empty, else a failing item."""
    own = vi[bi]
    other = vi[bk]
    if own >= other:
        return -2
    seen = False
    for x in _bits(bk):
        rest = vi[bk ^ (1 << x)]
        if other > rest:
            seen = True
            if own < rest:
                return x
    for x in _bits(bi):
        rest = vi[bi ^ (1 << x)]
        if own < rest:
            seen = True
            if rest < other:
                return x
    return -2 if seen else -1


def ef1_violation(tables, bundles):
    rows = _rows(tables)
    n = len(bundles)
    for i in range(n):
        vi = rows[i]
        for k in range(n):
            if k != i and not _ef1_pair(vi, bundles[i], bundles[k]):
                return i, k
    return -1, -1


def efxpm_violation(tables, bundles):
    rows = _rows(tables)
    n = len(bundles)
    for i in range(n):
        vi = rows[i]
        for k in range(n):
            if k == i:
                continue
            res = _efxpm_pair(vi, bundles[i], bundles[k])
            if res != -2:
                return i, k, res
    return -1, -1, -1


def _is_fair(rows, bundles, mode):
    n = len(bundles)
    for i in range(n):
        vi = rows[i]
        for k in range(n):
            if k == i:
                continue
            if mode == EF1:
                if not _ef1_pair(vi, bundles[i], bundles[k]):
                    return False
            elif _efxpm_pair(vi, bundles[i], bundles[k]) != -2:
                return False
    return True


def _bundles_of(assignment, n):
    bundles = [0] * (n + 1)
    for item, agent in enumerate(assignment):
        bundles[agent] |= 1 << item
    return bundles[:n]


def first_fair(tables, m, mode, complete_only):
    """Lexicographically first fair assignment, or ``None``."""
    rows = _rows(tables)
    n = len(rows)
    choices = n if complete_only else n + 1
    for assignment in product(range(choices), repeat=m):
        if _is_fair(rows, _bundles_of(assignment, n), mode):
            return list(assignment)
    return None


def fair_flags(tables, m, mode):
    """Fairness flag of every complete assignment, in lexicographic order."""
    rows = _rows(tables)
    n = len(rows)
    out = np.zeros(n**m, dtype=np.uint8)
    for idx, assignment in enumerate(product(range(n), repeat=m)):
        out[idx] = _is_fair(rows, _bundles_of(assignment, n), mode)
    return out
