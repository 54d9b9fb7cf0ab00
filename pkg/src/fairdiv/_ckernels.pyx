# cython: language_level=3
"""Compiled fairness kernels; same contract as ``_pykernels``."""
import numpy as np

cdef int EF1 = 0
cdef int EFXPM = 1


cdef inline bint _ef1_pair(const long long* vi, long long bi, long long bk) noexcept nogil:
    cdef long long own = vi[bi]
    cdef long long other = vi[bk]
    cdef long long rest, bit
    if own >= other:
        return True
    rest = bi
    while rest:
        bit = rest & -rest
        if vi[bi ^ bit] >= other:
            return True
        rest ^= bit
    rest = bk
    while rest:
        bit = rest & -rest
        if own >= vi[bk ^ bit]:
            return True
        rest ^= bit
    return False


cdef inline int _lowbit_index(long long bit) noexcept nogil:
    cdef int k = 0
    while bit > 1:
        bit >>= 1
        k += 1
    return k


cdef inline int _efxpm_pair(const long long* vi, long long bi, long long bk) noexcept nogil:
    cdef long long own = vi[bi]
    cdef long long other = vi[bk]
    cdef long long rest, bit, val
    cdef bint seen = False
    if own >= other:
        return -2
    rest = bk
    while rest:
        bit = rest & -rest
        val = vi[bk ^ bit]
        if other > val:
            seen = True
            if own < val:
                return _lowbit_index(bit)
        rest ^= bit
    rest = bi
    while rest:
        bit = rest & -rest
        val = vi[bi ^ bit]
        if own < val:
            seen = True
            if val < other:
                return _lowbit_index(bit)
        rest ^= bit
    return -2 if seen else -1


cdef bint _is_fair(const long long[:, ::1] tables, long long* bundles, int n, int mode) noexcept nogil:
    cdef int i, k
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            if mode == EF1:
                if not _ef1_pair(&tables[i, 0], bundles[i], bundles[k]):
                    return False
            elif _efxpm_pair(&tables[i, 0], bundles[i], bundles[k]) != -2:
                return False
    return True


def ef1_violation(const long long[:, ::1] tables, bundles):
    cdef int n = len(bundles)
    cdef int i, k
    cdef long long[::1] b = np.asarray(bundles, dtype=np.int64)
    for i in range(n):
        for k in range(n):
            if k != i and not _ef1_pair(&tables[i, 0], b[i], b[k]):
                return i, k
    return -1, -1


def efxpm_violation(const long long[:, ::1] tables, bundles):
    cdef int n = len(bundles)
    cdef int i, k, res
    cdef long long[::1] b = np.asarray(bundles, dtype=np.int64)
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            res = _efxpm_pair(&tables[i, 0], b[i], b[k])
            if res != -2:
                return i, k, res
    return -1, -1, -1


def first_fair(const long long[:, ::1] tables, int m, int mode, bint complete_only):
    cdef int n = tables.shape[0]
    cdef int choices = n if complete_only else n + 1
    cdef long long[::1] digits = np.zeros(max(m, 1), dtype=np.int64)
    cdef long long[::1] bundles = np.zeros(n + 1, dtype=np.int64)
    cdef int pos
    cdef long long bit
    cdef bint found = False
    # all items start with agent 0
    bundles[0] = (1 << m) - 1
    with nogil:
        while True:
            if _is_fair(tables, &bundles[0], n, mode):
                found = True
                break
            # odometer: last item is least significant
            pos = m - 1
            while pos >= 0:
                bit = 1LL << pos
                bundles[digits[pos]] ^= bit
                digits[pos] += 1
                if digits[pos] < choices:
                    bundles[digits[pos]] |= bit
                    break
                digits[pos] = 0
                bundles[0] |= bit
                pos -= 1
            if pos < 0:
                break
    if not found:
        return None
    return [int(digits[p]) for p in range(m)]


def fair_flags(const long long[:, ::1] tables, int m, int mode):
    cdef int n = tables.shape[0]
    cdef long long total = 1
    cdef int p
    for p in range(m):
        total *= n
    out = np.zeros(total, dtype=np.uint8)
    cdef unsigned char[::1] flags = out
    cdef long long[::1] digits = np.zeros(max(m, 1), dtype=np.int64)
    cdef long long[::1] bundles = np.zeros(n + 1, dtype=np.int64)
    cdef long long idx = 0
    cdef int pos
    cdef long long bit
    bundles[0] = (1 << m) - 1
    with nogil:
        while True:
            flags[idx] = _is_fair(tables, &bundles[0], n, mode)
            idx += 1
            pos = m - 1
            while pos >= 0:
                bit = 1LL << pos
                bundles[digits[pos]] ^= bit
                digits[pos] += 1
                if digits[pos] < n:
                    bundles[digits[pos]] |= bit
                    break
                digits[pos] = 0
                bundles[0] |= bit
                pos -= 1
            if pos < 0:
                break
    return out
