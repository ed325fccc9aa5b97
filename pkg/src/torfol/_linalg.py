"""Exact linear algebra over the rationals and over commutative rings.

Rational matrices get reduced row echelon form and a sparse incremental
solver; ring-valued matrices (entries supporting + - *) get determinants and
adjugates by cofactor expansion, which avoids any division in the ring.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")


def rref(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Reduced row echelon form with zero rows dropped."""
    mat = [list(map(Fraction, r)) for r in rows]
    if not mat:
        return []
    ncols = len(mat[0])
    out: list[list[Fraction]] = []
    pivot_cols: list[int] = []
    for row in mat:
        row = list(row)
        for prow, pcol in zip(out, pivot_cols):
            if row[pcol]:
                c = row[pcol]
                for j in range(ncols):
                    row[j] -= c * prow[j]
        lead = next((j for j, v in enumerate(row) if v), None)
        if lead is None:
            continue
        inv = 1 / row[lead]
        row = [v * inv for v in row]
        for prow in out:
            c = prow[lead]
            if c:
                for j in range(ncols):
                    prow[j] -= c * row[j]
        out.append(row)
        pivot_cols.append(lead)
    order = sorted(range(len(out)), key=lambda i: pivot_cols[i])
    return [out[i] for i in order]


def solve_sparse(
    equations: Iterable[tuple[dict[int, Fraction], Fraction]],
) -> dict[int, Fraction] | None:
    """Solve a sparse rational linear system.

    Each equation is (coefficients keyed by variable, right hand side).
    Returns one solution with free variables at zero, sparse (absent
    variables are zero), or None when the system is inconsistent.
    """
    pivots: list[tuple[int, dict[int, Fraction], Fraction]] = []
    pivot_of: dict[int, int] = {}
    for coeffs, rhs in equations:
        row = {v: c for v, c in coeffs.items() if c}
        b = Fraction(rhs)
        while True:
            hit = next((v for v in row if v in pivot_of), None)
            if hit is None:
                break
            _, prow, pb = pivots[pivot_of[hit]]
            c = row.pop(hit)
            for v, pv in prow.items():
                if v == hit:
                    continue
                nv = row.get(v, Fraction(0)) - c * pv
                if nv:
                    row[v] = nv
                else:
                    row.pop(v, None)
            b -= c * pb
        if not row:
            if b:
                return None
            continue
        var = min(row)
        inv = 1 / row[var]
        row = {v: c * inv for v, c in row.items()}
        b *= inv
        pivot_of[var] = len(pivots)
        pivots.append((var, row, b))
    solution: dict[int, Fraction] = {}
    for var, row, b in reversed(pivots):
        val = b
        for v, c in row.items():
            if v != var and v in solution:
                val -= c * solution[v]
        if val:
            solution[var] = val
    return solution


def det(mat: Sequence[Sequence[T]], zero: T, one: T) -> T:
    """Determinant by memoized cofactor expansion along the first rows."""
    n = len(mat)
    if n == 0:
        return one
    if any(len(r) != n for r in mat):
        raise ValueError("matrix is not square")
    cache: dict[tuple[int, ...], T] = {}

    def minor(cols: tuple[int, ...]) -> T:
        if not cols:
            return one
        got = cache.get(cols)
        if got is not None:
            return got
        r = n - len(cols)
        acc = zero
        for m, j in enumerate(cols):
            entry = mat[r][j]
            sub = minor(cols[:m] + cols[m + 1 :])
            term = entry * sub
            acc = acc + term if m % 2 == 0 else acc - term
        cache[cols] = acc
        return acc

    return minor(tuple(range(n)))


def adjugate(mat: Sequence[Sequence[T]], zero: T, one: T) -> list[list[T]]:
    """adj(A), with adj(A) @ A == det(A) * I in any commutative ring."""
    n = len(mat)
    out = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [
                [mat[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            cof = det(sub, zero, one)
            out[j][i] = cof if (i + j) % 2 == 0 else zero - cof
    return out


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows))


def nullspace(
    rows: Sequence[Sequence[Fraction]], ambient: int
) -> list[list[Fraction]]:
    """A basis of {v : A v = 0} for the matrix with the given rows."""
    red = rref(rows)
    pivot_cols = []
    for r in red:
        pivot_cols.append(next(j for j, v in enumerate(r) if v))
    free = [j for j in range(ambient) if j not in pivot_cols]
    basis = []
    for f in free:
        v = [Fraction(0)] * ambient
        v[f] = Fraction(1)
        for r, pc in zip(red, pivot_cols):
            v[pc] = -r[f]
        basis.append(v)
    return basis


def matrix_inverse(
    mat: Sequence[Sequence[Fraction]],
) -> list[list[Fraction]] | None:
    """Inverse of a rational square matrix, or None when singular."""
    n = len(mat)
    aug = [
        list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(mat)
    ]
    red = rref(aug)
    if len(red) < n or any(red[i][i] != 1 for i in range(n)):
        return None
    if any(red[i][j] != 0 for i in range(n) for j in range(n) if i != j):
        return None
    return [row[n:] for row in red]


def mat_mul(
    a: Sequence[Sequence[T]], b: Sequence[Sequence[T]], zero: T
) -> list[list[T]]:
    rows, mid, cols = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = zero
            for k in range(mid):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Sequence[Sequence[T]], v: Sequence[T], zero: T) -> list[T]:
    out = []
    for row in a:
        acc = zero
        for entry, x in zip(row, v):
            acc = acc + entry * x
        out.append(acc)
    return out
