# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled LCS edit-script kernel.

Byte-identical to ``_kernel_py.diff_ops``: common prefix/suffix aligned
first, core aligned by a forward walk over the suffix-LCS table with
removal preferred over addition on ties.  ``pairwise_distances`` drives the
same walk over every string pair of a small corpus in one C loop; it exists
for the exhaustive oracle-equivalence suite and the benchmark.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

DEF MAX_DP_CELLS = 4_000_000

cdef enum:
    OP_KEEP = 0x3D
    OP_REMOVE = 0x2D
    OP_ADD = 0x2B


cdef Py_ssize_t _core_walk(const long* a, Py_ssize_t n,
                           const long* b, Py_ssize_t m,
                           int* dp, unsigned char* ops) noexcept nogil:
    """Fill ``ops`` with the core edit script, returning its length.

    ``dp`` must hold (n+1)*(m+1) ints.  Caller guarantees the size check.
    """
    cdef Py_ssize_t i, j, k, width = m + 1
    cdef int u, v

    memset(dp + n * width, 0, width * sizeof(int))
    for i in range(n - 1, -1, -1):
        dp[i * width + m] = 0
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                dp[i * width + j] = dp[(i + 1) * width + j + 1] + 1
            else:
                u = dp[(i + 1) * width + j]
                v = dp[i * width + j + 1]
                dp[i * width + j] = u if u >= v else v

    k = 0
    i = 0
    j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            ops[k] = OP_KEEP
            i += 1
            j += 1
        elif dp[(i + 1) * width + j] >= dp[i * width + j + 1]:
            ops[k] = OP_REMOVE
            i += 1
        else:
            ops[k] = OP_ADD
            j += 1
        k += 1
    while i < n:
        ops[k] = OP_REMOVE
        i += 1
        k += 1
    while j < m:
        ops[k] = OP_ADD
        j += 1
        k += 1
    return k


def diff_ops(a, b) -> bytes:
    cdef Py_ssize_t n = len(a), m = len(b)
    cdef Py_ssize_t p = 0, s = 0, limit = n if n < m else m
    cdef Py_ssize_t core_n, core_m, core_len, i
    cdef long* buf_a = NULL
    cdef long* buf_b = NULL
    cdef int* dp = NULL
    cdef unsigned char* ops = NULL

    buf_a = <long*> malloc((n if n else 1) * sizeof(long))
    buf_b = <long*> malloc((m if m else 1) * sizeof(long))
    if buf_a == NULL or buf_b == NULL:
        free(buf_a)
        free(buf_b)
        raise MemoryError()
    try:
        for i in range(n):
            buf_a[i] = a[i]
        for i in range(m):
            buf_b[i] = b[i]

        while p < limit and buf_a[p] == buf_b[p]:
            p += 1
        limit -= p
        while s < limit and buf_a[n - 1 - s] == buf_b[m - 1 - s]:
            s += 1

        core_n = n - s - p
        core_m = m - s - p
        if core_n == 0 or core_m == 0 or \
                (core_n + 1) * (core_m + 1) > MAX_DP_CELLS:
            return (b"=" * p + b"-" * core_n + b"+" * core_m + b"=" * s)

        dp = <int*> malloc((core_n + 1) * (core_m + 1) * sizeof(int))
        ops = <unsigned char*> malloc(core_n + core_m)
        if dp == NULL or ops == NULL:
            raise MemoryError()
        core_len = _core_walk(buf_a + p, core_n, buf_b + p, core_m, dp, ops)
        return b"=" * p + ops[:core_len] + b"=" * s
    finally:
        free(buf_a)
        free(buf_b)
        free(dp)
        free(ops)


def pairwise_distances(symbols, offsets, out) -> None:
    """Edit distance between every pair of corpus strings, via the real walk.

    ``symbols``/``offsets`` encode the corpus (string i is
    ``symbols[offsets[i]:offsets[i+1]]``, values and offsets as int32
    buffers); ``out`` is a preallocated uint8 [count, count] buffer.
    Strings must be short enough for a stack DP table (<= 30 tokens).
    """
    cdef const int[::1] syms = symbols
    cdef const int[::1] offs = offsets
    cdef unsigned char[:, ::1] res = out
    cdef Py_ssize_t count = offs.shape[0] - 1
    cdef Py_ssize_t i, j, k, n, m, d
    cdef long sa[32]
    cdef long sb[32]
    cdef int dp[1024]
    cdef unsigned char ops[64]
    cdef Py_ssize_t oa, ob, core_len, p, s, limit, core_n, core_m

    for i in range(count):
        if offs[i + 1] - offs[i] > 30:
            raise ValueError("pairwise_distances: string too long")
    if res.shape[0] != count or res.shape[1] != count:
        raise ValueError("pairwise_distances: bad output shape")

    with nogil:
        for i in range(count):
            oa = offs[i]
            n = offs[i + 1] - oa
            for k in range(n):
                sa[k] = syms[oa + k]
            for j in range(count):
                ob = offs[j]
                m = offs[j + 1] - ob
                for k in range(m):
                    sb[k] = syms[ob + k]

                p = 0
                limit = n if n < m else m
                while p < limit and sa[p] == sb[p]:
                    p += 1
                limit -= p
                s = 0
                while s < limit and sa[n - 1 - s] == sb[m - 1 - s]:
                    s += 1
                core_n = n - s - p
                core_m = m - s - p
                if core_n == 0 or core_m == 0:
                    res[i, j] = <unsigned char> (core_n + core_m)
                    continue
                core_len = _core_walk(&sa[p], core_n, &sb[p], core_m, dp, ops)
                d = 0
                for k in range(core_len):
                    if ops[k] != OP_KEEP:
                        d += 1
                res[i, j] = <unsigned char> d
