"""Pure-Python versions of the hot loops.  Same signatures as ``_kernels``."""

import numpy as np


def cartesian_links(A):
    """Left/right child arrays (1-based, 0 = none) and the root, leftmost-min rule."""
    n = len(A)
    left = [0] * (n + 1)
    right = [0] * (n + 1)
    stack = []
    for i in range(1, n + 1):
        x = A[i - 1]
        last = 0
        while stack and A[stack[-1] - 1] > x:
            last = stack.pop()
        left[i] = last
        if stack:
            right[stack[-1]] = i
        stack.append(i)
    root = stack[0] if stack else 0
    return np.asarray(left, np.int64), np.asarray(right, np.int64), root


def prev_smaller_eq(A):
    """parent[i] = max{j < i : A[j] <= A[i]} (1-based, 0 if none)."""
    n = len(A)
    par = [0] * (n + 1)
    stack = []
    for i in range(1, n + 1):
        x = A[i - 1]
        while stack and A[stack[-1] - 1] > x:
            stack.pop()
        par[i] = stack[-1] if stack else 0
        stack.append(i)
    return np.asarray(par, np.int64)


def sparse_levels(values):
    """Levels of leftmost-argmin indices (0-based) over windows of length 2^k."""
    vals = list(values)
    n = len(vals)
    levels = [list(range(n))]
    k = 1
    while (1 << k) <= n:
        prev = levels[-1]
        half = 1 << (k - 1)
        cur = []
        for i in range(n - (1 << k) + 1):
            a, b = prev[i], prev[i + half]
            cur.append(a if vals[a] <= vals[b] else b)
        levels.append(cur)
        k += 1
    return [np.asarray(l, np.int64) for l in levels]


def cell_summaries(bits, cell):
    """Per cell of ``cell`` positions: (closes, excess delta, min prefix excess, argmin).

    The min is over prefixes ending inside the cell (relative to the excess
    before the cell) and the argmin is the leftmost 0-based offset attaining it.
    """
    n = len(bits)
    ncell = (n + cell - 1) // cell
    closes = np.zeros(ncell, np.int64)
    delta = np.zeros(ncell, np.int64)
    mins = np.zeros(ncell, np.int64)
    arg = np.zeros(ncell, np.int64)
    for c in range(ncell):
        e = 0
        best = None
        where = 0
        cl = 0
        for off in range(min(cell, n - c * cell)):
            if bits[c * cell + off]:
                e += 1
            else:
                e -= 1
                cl += 1
            if best is None or e < best:
                best = e
                where = off
        closes[c] = cl
        delta[c] = e
        mins[c] = best
        arg[c] = where
    return closes, delta, mins, arg


def match_closes(bits):
    """For each position holding a close, the 0-based position of its open (-1 otherwise)."""
    n = len(bits)
    out = np.full(n, -1, np.int64)
    stack = []
    for i in range(n):
        if bits[i]:
            stack.append(i)
        else:
            if not stack:
                raise ValueError("unbalanced parenthesis string")
            out[i] = stack.pop()
    if stack:
        raise ValueError("unbalanced parenthesis string")
    return out
