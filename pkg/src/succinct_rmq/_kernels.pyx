# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def cartesian_links(A):
    cdef cnp.int64_t[:] a = np.ascontiguousarray(A, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0]
    left_arr = np.zeros(n + 1, np.int64)
    right_arr = np.zeros(n + 1, np.int64)
    stack_arr = np.zeros(n + 1, np.int64)
    cdef cnp.int64_t[:] left = left_arr
    cdef cnp.int64_t[:] right = right_arr
    cdef cnp.int64_t[:] stack = stack_arr
    cdef Py_ssize_t top = 0, i
    cdef cnp.int64_t last, x
    for i in range(1, n + 1):
        x = a[i - 1]
        last = 0
        while top > 0 and a[stack[top - 1] - 1] > x:
            top -= 1
            last = stack[top]
        left[i] = last
        if top > 0:
            right[stack[top - 1]] = i
        stack[top] = i
        top += 1
    root = int(stack[0]) if n > 0 else 0
    return left_arr, right_arr, root


def prev_smaller_eq(A):
    cdef cnp.int64_t[:] a = np.ascontiguousarray(A, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0]
    par_arr = np.zeros(n + 1, np.int64)
    stack_arr = np.zeros(n + 1, np.int64)
    cdef cnp.int64_t[:] par = par_arr
    cdef cnp.int64_t[:] stack = stack_arr
    cdef Py_ssize_t top = 0, i
    cdef cnp.int64_t x
    for i in range(1, n + 1):
        x = a[i - 1]
        while top > 0 and a[stack[top - 1] - 1] > x:
            top -= 1
        par[i] = stack[top - 1] if top > 0 else 0
        stack[top] = i
        top += 1
    return par_arr


def sparse_levels(values):
    cdef cnp.int64_t[:] v = np.ascontiguousarray(values, dtype=np.int64)
    cdef Py_ssize_t n = v.shape[0], i, half, width
    cdef cnp.int64_t x, y
    levels = [np.arange(n, dtype=np.int64)]
    cdef cnp.int64_t[:] prev
    cdef cnp.int64_t[:] cur
    width = 2
    while width <= n:
        half = width // 2
        prev = levels[len(levels) - 1]
        out = np.empty(n - width + 1, np.int64)
        cur = out
        for i in range(n - width + 1):
            x = prev[i]
            y = prev[i + half]
            cur[i] = x if v[x] <= v[y] else y
        levels.append(out)
        width *= 2
    return levels


def cell_summaries(bits, Py_ssize_t cell):
    cdef cnp.uint8_t[:] b = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t ncell = (n + cell - 1) // cell
    closes_arr = np.zeros(ncell, np.int64)
    delta_arr = np.zeros(ncell, np.int64)
    mins_arr = np.zeros(ncell, np.int64)
    arg_arr = np.zeros(ncell, np.int64)
    cdef cnp.int64_t[:] closes = closes_arr
    cdef cnp.int64_t[:] delta = delta_arr
    cdef cnp.int64_t[:] mins = mins_arr
    cdef cnp.int64_t[:] arg = arg_arr
    cdef Py_ssize_t c, off, lim
    cdef cnp.int64_t e, best, where, cl
    for c in range(ncell):
        e = 0
        best = 1 << 62
        where = 0
        cl = 0
        lim = cell
        if n - c * cell < lim:
            lim = n - c * cell
        for off in range(lim):
            if b[c * cell + off]:
                e += 1
            else:
                e -= 1
                cl += 1
            if e < best:
                best = e
                where = off
        closes[c] = cl
        delta[c] = e
        mins[c] = best
        arg[c] = where
    return closes_arr, delta_arr, mins_arr, arg_arr


def match_closes(bits):
    cdef cnp.uint8_t[:] b = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t n = b.shape[0], i, top = 0
    out_arr = np.full(n, -1, np.int64)
    stack_arr = np.zeros(n + 1, np.int64)
    cdef cnp.int64_t[:] out = out_arr
    cdef cnp.int64_t[:] stack = stack_arr
    for i in range(n):
        if b[i]:
            stack[top] = i
            top += 1
        else:
            if top == 0:
                raise ValueError("unbalanced parenthesis string")
            top -= 1
            out[i] = stack[top]
    if top:
        raise ValueError("unbalanced parenthesis string")
    return out_arr
