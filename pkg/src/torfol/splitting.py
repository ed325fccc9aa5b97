"""Coordinate splittings of T^n into leaf and transverse directions.

A splitting fixes a set of 2k leaf coordinates and, for every transverse
coordinate a, a frame vector Y_a = d_a + sum_i A[a,i] d_i tilted into the
leaf directions only.  The complement G = span{Y_a} is then a normal bundle
for the foliation by leaf tori, and the adapted coframe

    eps_a = dt_a,    eps_i = dt_i - sum_a A[a,i] dt_a

is dual to (Y_a, d_i): eps_i annihilates G, dt_a annihilates the leaves.

The leafwise symplectic form of a leaf-tangent Poisson bivector inverts the
leaf coefficient matrix with the sign fixed by omega_flat = -(Pi_sharp)^-1;
its denominator is controlled by the Pfaffian, whose square is the
determinant of the leaf block.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from ._linalg import adjugate
from .multivector import Coeff, DifferentialForm, Multivector, _coerce
from .trig import (
    DivisionUncertified,
    Product,
    TorusFunction,
    certify_nonvanishing,
    tf_one,
    tf_zero,
)


class Splitting:
    """Leaf coordinates plus a tilted transverse frame."""

    __slots__ = ("dim", "leaf", "_tilt")

    def __init__(
        self,
        dim: int,
        leaf: Iterable[int],
        tilt: Mapping[tuple[int, int], Coeff] | None = None,
    ):
        leaf = tuple(sorted(set(leaf)))
        if any(not 1 <= i <= dim for i in leaf):
            raise ValueError("leaf coordinates out of range")
        if len(leaf) % 2:
            raise ValueError("leaf coordinate count must be even")
        trans = tuple(a for a in range(1, dim + 1) if a not in leaf)
        clean: dict[tuple[int, int], TorusFunction] = {}
        for (a, i), value in (tilt or {}).items():
            if a not in trans:
                raise ValueError(f"{a} is not a transverse coordinate")
            if i not in leaf:
                raise ValueError(f"{i} is not a leaf coordinate")
            f = _coerce(dim, value)
            if not f.is_zero():
                clean[(a, i)] = f
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "leaf", leaf)
        object.__setattr__(self, "_tilt", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Splitting is immutable")

    @property
    def transverse(self) -> tuple[int, ...]:
        return tuple(a for a in range(1, self.dim + 1) if a not in self.leaf)

    def tilt(self, a: int, i: int) -> TorusFunction:
        return self._tilt.get((a, i), tf_zero(self.dim))

    def frame_vector(self, a: int) -> Multivector:
        """Y_a = d_a + sum over leaf coordinates of A[a,i] d_i."""
        if a in self.leaf or not 1 <= a <= self.dim:
            raise ValueError(f"{a} is not a transverse coordinate")
        terms: dict[tuple[int, ...], TorusFunction] = {(a,): tf_one(self.dim)}
        for i in self.leaf:
            f = self._tilt.get((a, i))
            if f is not None:
                terms[(i,)] = f
        return Multivector(self.dim, 1, terms)

    def coframe(self, c: int) -> DifferentialForm:
        """eps_c: plain dt_a transversally, tilt-corrected on the leaves."""
        if not 1 <= c <= self.dim:
            raise ValueError(f"coordinate {c} out of range")
        if c not in self.leaf:
            return DifferentialForm.basis_covector(self.dim, c)
        terms: dict[tuple[int, ...], TorusFunction] = {(c,): tf_one(self.dim)}
        for a in self.transverse:
            f = self._tilt.get((a, c))
            if f is not None:
                terms[(a,)] = -f
        return DifferentialForm(self.dim, 1, terms)

    # -- projections ---------------------------------------------------------

    def project_normal(self, x: Multivector) -> Multivector:
        """Component of a vector field along G = span{Y_a}."""
        if x.degree != 1 and not x.is_zero():
            raise ValueError("projection expects a vector field")
        acc = Multivector.zero(self.dim, 1)
        for (c,), f in x._terms.items():
            if c not in self.leaf:
                acc = acc + self.frame_vector(c) * f
        return acc

    def project_leafwise(self, x: Multivector) -> Multivector:
        """Component of a vector field tangent to the leaves."""
        return x - self.project_normal(x)

    def project_leaf_coframe(self, alpha: DifferentialForm) -> DifferentialForm:
        """Project a one-form onto span{eps_i} along span{dt_a}."""
        if alpha.degree != 1 and not alpha.is_zero():
            raise ValueError("projection expects a one-form")
        acc = DifferentialForm.zero(self.dim, 1)
        for (c,), f in alpha._terms.items():
            if c in self.leaf:
                acc = acc + self.coframe(c) * f
        return acc

    # -- bigrading -------------------------------------------------------------

    def _adapted_expansion(
        self, c: int
    ) -> list[tuple[tuple[int, int], TorusFunction]]:
        """Write d_c in the adapted basis, labels (0, i) leafwise, (1, a) normal."""
        if c in self.leaf:
            return [((0, c), tf_one(self.dim))]
        out: list[tuple[tuple[int, int], TorusFunction]] = [
            ((1, c), tf_one(self.dim))
        ]
        for i in self.leaf:
            f = self._tilt.get((c, i))
            if f is not None:
                out.append(((0, i), -f))
        return out

    def bigrade(self, p: Multivector) -> dict[tuple[int, int], Multivector]:
        """Split a multivector by (leafwise, normal) factor counts.

        The components are returned in coordinates and sum back to the
        argument; keys are (p, q) with p leaf factors and q frame factors.
        """
        mixed: dict[tuple[tuple[int, int], ...], TorusFunction] = {}
        for idx, f in p._terms.items():
            choices = [self._adapted_expansion(c) for c in idx]
            stack: list[tuple[int, tuple[tuple[int, int], ...], TorusFunction]] = [
                (0, (), f)
            ]
            while stack:
                pos, labels, coeff = stack.pop()
                if pos == len(choices):
                    sign, ordered = _sort_labels(labels)
                    if sign == 0:
                        continue
                    val = coeff if sign > 0 else -coeff
                    prev = mixed.get(ordered)
                    val = val if prev is None else prev + val
                    if val.is_zero():
                        mixed.pop(ordered, None)
                    else:
                        mixed[ordered] = val
                    continue
                for label, g in choices[pos]:
                    if label in labels:
                        continue
                    stack.append((pos + 1, labels + (label,), coeff * g))
        out: dict[tuple[int, int], Multivector] = {}
        for labels, coeff in mixed.items():
            leaf_part = tuple(i for kind, i in labels if kind == 0)
            norm_part = tuple(a for kind, a in labels if kind == 1)
            key = (len(leaf_part), len(norm_part))
            piece = Multivector.monomial(self.dim, leaf_part, coeff)
            for a in norm_part:
                piece = piece.wedge(self.frame_vector(a))
            got = out.get(key)
            out[key] = piece if got is None else got + piece
        return {k: v for k, v in out.items() if not v.is_zero()}

    def is_good(self, p: Multivector) -> bool:
        """No component with two or more normal factors.

        Equivalently, the double contraction with any two transverse
        coordinate covectors vanishes.
        """
        trans = self.transverse
        for x in range(len(trans)):
            da = DifferentialForm.basis_covector(self.dim, trans[x])
            once = p.contract(da)
            for y in range(x + 1, len(trans)):
                db = DifferentialForm.basis_covector(self.dim, trans[y])
                if not once.contract(db).is_zero():
                    return False
        return True

    def is_leafwise(self, p: Multivector) -> bool:
        leaf = set(self.leaf)
        return all(set(idx) <= leaf for idx in p._terms)


def _sort_labels(
    labels: tuple[tuple[int, int], ...]
) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Sort adapted-basis labels, returning the permutation sign (0 on repeat)."""
    if len(set(labels)) != len(labels):
        return 0, ()
    inversions = 0
    for x in range(len(labels)):
        for y in range(x + 1, len(labels)):
            if labels[x] > labels[y]:
                inversions += 1
    return (-1) ** inversions, tuple(sorted(labels))


def _leaf_matrix(pi: Multivector, s: Splitting) -> list[list[TorusFunction]]:
    n = len(s.leaf)
    zero = tf_zero(s.dim)
    mat = [[zero for _ in range(n)] for _ in range(n)]
    for r in range(n):
        for t in range(r + 1, n):
            c = pi.coefficient((s.leaf[r], s.leaf[t]))
            mat[r][t] = c
            mat[t][r] = -c
    return mat


def _pfaffian(mat: list[list[TorusFunction]], dim: int) -> TorusFunction:
    n = len(mat)
    if n == 0:
        return tf_one(dim)
    if n % 2:
        return tf_zero(dim)
    if n == 2:
        return mat[0][1]
    acc = tf_zero(dim)
    for j in range(1, n):
        keep = [r for r in range(n) if r not in (0, j)]
        sub = [[mat[r][c] for c in keep] for r in keep]
        term = mat[0][j] * _pfaffian(sub, dim)
        acc = acc + term if j % 2 == 1 else acc - term
    return acc


def leaf_pfaffian(pi: Multivector, s: Splitting) -> TorusFunction:
    """Pfaffian of the leaf coefficient block; its square is the determinant."""
    return _pfaffian(_leaf_matrix(pi, s), s.dim)


def leafwise_symplectic(pi: Multivector, s: Splitting) -> DifferentialForm:
    """The leafwise symplectic form of a leaf-tangent Poisson bivector.

    Returned in plain leaf-coordinate covectors; the sign convention is
    omega_flat = -(Pi_sharp)^-1 on each leaf.
    """
    w = _symplectic_matrix(pi, s)
    terms: dict[tuple[int, ...], TorusFunction] = {}
    n = len(s.leaf)
    for r in range(n):
        for t in range(r + 1, n):
            if not w[r][t].is_zero():
                terms[(s.leaf[r], s.leaf[t])] = w[r][t]
    return DifferentialForm(s.dim, 2, terms)


def gamma_of(pi: Multivector, s: Splitting) -> DifferentialForm:
    """The symplectic form pushed through the adapted coframe.

    gamma agrees with the leafwise form on leaf vectors and annihilates the
    frame vectors Y_a, so its kernel is exactly G.
    """
    w = _symplectic_matrix(pi, s)
    n = len(s.leaf)
    acc = DifferentialForm.zero(s.dim, 2)
    for r in range(n):
        for t in range(r + 1, n):
            if w[r][t].is_zero():
                continue
            eps_r = s.coframe(s.leaf[r])
            eps_t = s.coframe(s.leaf[t])
            acc = acc + eps_r.wedge(eps_t) * w[r][t]
    return acc


def _symplectic_matrix(pi: Multivector, s: Splitting) -> list[list[TorusFunction]]:
    if pi.degree != 2 and not pi.is_zero():
        raise ValueError("expected a bivector")
    if not s.is_leafwise(pi):
        raise ValueError("bivector is not tangent to the leaves")
    mat = _leaf_matrix(pi, s)
    n = len(s.leaf)
    if n == 0:
        return []
    pf = _pfaffian(mat, s.dim)
    cert = certify_nonvanishing(pf.num)
    if cert is None:
        raise DivisionUncertified(
            "leaf coefficient Pfaffian admits no nonvanishing certificate"
        )
    inv_det = TorusFunction(
        pf.den * pf.den,
        pf.num * pf.num,
        Product(((pf.num, cert), (pf.num, cert))),
    )
    zero, one = tf_zero(s.dim), tf_one(s.dim)
    adj = adjugate(mat, zero, one)
    return [
        [-(adj[r][t] * inv_det) for t in range(n)]
        for r in range(n)
    ]
