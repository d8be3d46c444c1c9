"""Small dense solves by Gaussian elimination with partial pivoting."""

from __future__ import annotations

from .errors import RankDeficient


def gauss_solve(A, b, rel_tol: float = 1e-10):
    """Solve A x = b for square A; returns (x, rank).

    A pivot smaller than rel_tol * max|A| counts as zero.  If the rank is
    short, RankDeficient is raised with the null-space dimension.
    """
    n = len(A)
    M = [list(map(float, row)) + [float(bi)] for row, bi in zip(A, b)]
    if any(len(row) != n + 1 for row in M):
        raise ValueError("matrix must be square and match the right-hand side")
    scale = max((abs(v) for row in M for v in row[:n]), default=0.0)
    thresh = rel_tol * scale
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[piv][col]) <= thresh:
            raise RankDeficient(matrix_rank(A, rel_tol), n)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / p
            if f:
                row, prow = M[r], M[col]
                for c in range(col, n + 1):
                    row[c] -= f * prow[c]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n] - sum(M[i][c] * x[c] for c in range(i + 1, n))
        x[i] = s / M[i][i]
    return x, n


def matrix_rank(A, rel_tol: float = 1e-10) -> int:
    """Rank by the same elimination (rectangular allowed)."""
    M = [list(map(float, row)) for row in A]
    if not M:
        return 0
    rows, cols = len(M), len(M[0])
    scale = max((abs(v) for row in M for v in row), default=0.0)
    thresh = rel_tol * scale
    r = 0
    for col in range(cols):
        if r == rows:
            break
        piv = max(range(r, rows), key=lambda i: abs(M[i][col]))
        if abs(M[piv][col]) <= thresh:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, rows):
            f = M[i][col] / M[r][col]
            for c in range(col, cols):
                M[i][c] -= f * M[r][c]
        r += 1
    return r
