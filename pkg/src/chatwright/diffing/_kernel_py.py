"""Pure-Python LCS edit-script kernel (fallback when the C extension is absent).

Contract shared with the compiled kernel: ``diff_ops(a, b)`` takes two
sequences of token ids and returns the edit script as bytes over
``=`` (keep), ``-`` (remove from old), ``+`` (add from new).

Canonical script, identical in both kernels:

1. the maximal common prefix and suffix are aligned first;
2. the remaining core is aligned by a forward walk over the suffix-LCS
   table that matches whenever the heads are equal and otherwise prefers
   removal over addition (leftmost tie-break).

The script is always LCS-minimal: edit distance equals
``len(a) + len(b) - 2 * LCS(a, b)``.
"""

from __future__ import annotations

# Above this many DP cells the core falls back to a non-minimal
# remove-all/add-all script instead of allocating a huge table.
MAX_DP_CELLS = 4_000_000

OP_KEEP = 0x3D    # '='
OP_REMOVE = 0x2D  # '-'
OP_ADD = 0x2B     # '+'


def diff_ops(a, b) -> bytes:
    n, m = len(a), len(b)
    p = 0
    limit = min(n, m)
    while p < limit and a[p] == b[p]:
        p += 1
    s = 0
    limit -= p
    while s < limit and a[n - 1 - s] == b[m - 1 - s]:
        s += 1
    core = _core_ops(a[p:n - s], b[p:m - s])
    return b"=" * p + core + b"=" * s


def _core_ops(a, b) -> bytes:
    n, m = len(a), len(b)
    if n == 0:
        return b"+" * m
    if m == 0:
        return b"-" * n
    if (n + 1) * (m + 1) > MAX_DP_CELLS:
        return b"-" * n + b"+" * m

    # dp[i][j] = LCS length of a[i:] vs b[j:]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = dp[i]
        nxt = dp[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                u = nxt[j]
                v = row[j + 1]
                row[j] = u if u >= v else v

    ops = bytearray()
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            ops.append(OP_KEEP)
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            ops.append(OP_REMOVE)
            i += 1
        else:
            ops.append(OP_ADD)
            j += 1
    ops += b"-" * (n - i)
    ops += b"+" * (m - j)
    return bytes(ops)
