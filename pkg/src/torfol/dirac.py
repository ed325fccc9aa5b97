"""Pointwise linear algebra of V + V* over the rationals, plus a seeded
randomized audit of the fiberwise gauge lemmas.

Everything here is fiberwise and exact: subspaces are canonical echelon
bases, bivectors and 2-forms enter through their sharp/flat matrices (both
skew), and the gauge maps act by

    by a 2-form g:   (x, a) -> (x, a + g x)
    by a bivector P: (x, a) -> (x + P a, a)

The split pairing is <<x+a, y+b>> = a(y) + b(x); Lagrangian means middle
dimensional with vanishing pairing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._linalg import matrix_inverse, mat_mul, mat_vec, nullspace, rref

Vec = tuple[Fraction, ...]
Matrix = Sequence[Sequence[Fraction]]


class NotSkew(ValueError):
    """Raised when a matrix argument fails the skewness precondition."""


def _as_vec(v: Iterable[Fraction | int]) -> Vec:
    return tuple(Fraction(c) for c in v)


def _check_skew(mat: Matrix) -> list[list[Fraction]]:
    m = [[Fraction(c) for c in row] for row in mat]
    n = len(m)
    if any(len(r) != n for r in m):
        raise NotSkew("matrix is not square")
    for i in range(n):
        for j in range(n):
            if m[i][j] != -m[j][i]:
                raise NotSkew(f"entry ({i},{j}) breaks skewness")
    return m


def identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


@dataclass(frozen=True, slots=True)
class GeneralizedVector:
    """A tangent + cotangent pair at a point."""

    x: Vec
    a: Vec

    def __post_init__(self):
        if len(self.x) != len(self.a):
            raise ValueError("vector and covector parts differ in length")

    @staticmethod
    def of(x: Iterable[Fraction | int], a: Iterable[Fraction | int]) -> GeneralizedVector:
        return GeneralizedVector(_as_vec(x), _as_vec(a))

    @property
    def m(self) -> int:
        return len(self.x)

    def flat(self) -> Vec:
        return self.x + self.a


def pairing(u: GeneralizedVector, v: GeneralizedVector) -> Fraction:
    """<<x+a, y+b>> = a(y) + b(x)."""
    if u.m != v.m:
        raise ValueError("mixed ambient dimensions")
    return sum(
        (ua * vx for ua, vx in zip(u.a, v.x)), Fraction(0)
    ) + sum((va * ux for va, ux in zip(v.a, u.x)), Fraction(0))


class LinearSubspace:
    """A subspace of Q^d in reduced row echelon canonical form."""

    __slots__ = ("ambient", "rows")

    def __init__(self, ambient: int, vectors: Iterable[Iterable[Fraction | int]]):
        vecs = [list(map(Fraction, v)) for v in vectors]
        for v in vecs:
            if len(v) != ambient:
                raise ValueError("vector has wrong length")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(
            self, "rows", tuple(tuple(r) for r in rref(vecs))
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("LinearSubspace is immutable")

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, v: Iterable[Fraction | int]) -> bool:
        vv = list(map(Fraction, v))
        probe = rref(list(self.rows) + [vv])
        return len(probe) == self.dim

    def sum_with(self, other: LinearSubspace) -> LinearSubspace:
        self._check(other)
        return LinearSubspace(self.ambient, list(self.rows) + list(other.rows))

    def intersect(self, other: LinearSubspace) -> LinearSubspace:
        # intersection = annihilator of the union of the two annihilators
        self._check(other)
        a1 = nullspace(list(self.rows), self.ambient)
        a2 = nullspace(list(other.rows), self.ambient)
        return LinearSubspace(self.ambient, nullspace(a1 + a2, self.ambient))

    def is_transverse_to(self, other: LinearSubspace) -> bool:
        self._check(other)
        return self.sum_with(other).dim == self.ambient

    def _check(self, other: LinearSubspace) -> None:
        if self.ambient != other.ambient:
            raise ValueError("mixed ambient dimensions")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearSubspace):
            return NotImplemented
        return self.ambient == other.ambient and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.ambient, self.rows))

    def __repr__(self) -> str:
        return f"LinearSubspace({self.ambient}, dim={self.dim})"


def span_of_generalized(vectors: Iterable[GeneralizedVector], m: int) -> LinearSubspace:
    return LinearSubspace(2 * m, [v.flat() for v in vectors])


def tangent_space(m: int) -> LinearSubspace:
    """V = {(x, 0)} inside V + V*."""
    basis = []
    for i in range(m):
        row = [Fraction(0)] * (2 * m)
        row[i] = Fraction(1)
        basis.append(row)
    return LinearSubspace(2 * m, basis)


def cotangent_space(m: int) -> LinearSubspace:
    basis = []
    for i in range(m):
        row = [Fraction(0)] * (2 * m)
        row[m + i] = Fraction(1)
        basis.append(row)
    return LinearSubspace(2 * m, basis)


def is_lagrangian(sub: LinearSubspace) -> bool:
    if sub.ambient % 2:
        raise ValueError("ambient dimension is odd")
    m = sub.ambient // 2
    if sub.dim != m:
        return False
    gens = [GeneralizedVector(tuple(r[:m]), tuple(r[m:])) for r in sub.rows]
    return all(
        pairing(u, v) == 0 for i, u in enumerate(gens) for v in gens[i:]
    )


def graph_of_bivector(sharp: Matrix) -> LinearSubspace:
    """{ Z a + a : a in V* } from the sharp matrix of Z."""
    z = _check_skew(sharp)
    m = len(z)
    rows = []
    for i in range(m):
        a = [Fraction(int(j == i)) for j in range(m)]
        rows.append(mat_vec(z, a, Fraction(0)) + a)
    out = LinearSubspace(2 * m, rows)
    assert is_lagrangian(out)
    return out


def graph_of_two_form(flat: Matrix) -> LinearSubspace:
    """{ x + g x : x in V } from the flat matrix of g."""
    g = _check_skew(flat)
    m = len(g)
    rows = []
    for i in range(m):
        x = [Fraction(int(j == i)) for j in range(m)]
        rows.append(x + mat_vec(g, x, Fraction(0)))
    out = LinearSubspace(2 * m, rows)
    assert is_lagrangian(out)
    return out


def graph_of_distribution(dist: LinearSubspace) -> LinearSubspace:
    """D + its annihilator D0 inside V + V*."""
    m = dist.ambient
    rows = [list(r) + [Fraction(0)] * m for r in dist.rows]
    for ann in nullspace(list(dist.rows), m):
        rows.append([Fraction(0)] * m + ann)
    out = LinearSubspace(2 * m, rows)
    assert is_lagrangian(out)
    return out


def gauge_by_two_form(flat: Matrix, sub: LinearSubspace) -> LinearSubspace:
    g = _check_skew(flat)
    m = len(g)
    if sub.ambient != 2 * m:
        raise ValueError("subspace has wrong ambient dimension")
    rows = []
    for r in sub.rows:
        x, a = list(r[:m]), list(r[m:])
        shift = mat_vec(g, x, Fraction(0))
        rows.append(x + [ai + si for ai, si in zip(a, shift)])
    out = LinearSubspace(2 * m, rows)
    if is_lagrangian(sub):
        assert is_lagrangian(out)
    return out


def gauge_by_bivector(sharp: Matrix, sub: LinearSubspace) -> LinearSubspace:
    z = _check_skew(sharp)
    m = len(z)
    if sub.ambient != 2 * m:
        raise ValueError("subspace has wrong ambient dimension")
    rows = []
    for r in sub.rows:
        x, a = list(r[:m]), list(r[m:])
        shift = mat_vec(z, a, Fraction(0))
        rows.append([xi + si for xi, si in zip(x, shift)] + a)
    out = LinearSubspace(2 * m, rows)
    if is_lagrangian(sub):
        assert is_lagrangian(out)
    return out


def pointwise_gauge_bivector(
    sharp: Matrix, flat: Matrix
) -> list[list[Fraction]] | None:
    """Z (id + g Z)^-1, or None when id + g Z is singular."""
    z = _check_skew(sharp)
    g = _check_skew(flat)
    m = len(z)
    if len(g) != m:
        raise ValueError("mixed ambient dimensions")
    gz = mat_mul(g, z, Fraction(0))
    frame = [
        [Fraction(int(i == j)) + gz[i][j] for j in range(m)] for i in range(m)
    ]
    inv = matrix_inverse(frame)
    if inv is None:
        return None
    return mat_mul(z, inv, Fraction(0))


# -- fiberwise splittings ------------------------------------------------------


class FiberSplitting:
    """Leaf coordinates and a tilted rational complement at one point."""

    __slots__ = ("m", "leaf", "tilt")

    def __init__(
        self,
        m: int,
        leaf: Iterable[int],
        tilt: Mapping[tuple[int, int], Fraction | int] | None = None,
    ):
        leaf = tuple(sorted(set(leaf)))
        if any(not 1 <= i <= m for i in leaf):
            raise ValueError("leaf coordinates out of range")
        trans = tuple(a for a in range(1, m + 1) if a not in leaf)
        clean = {}
        for (a, i), v in (tilt or {}).items():
            if a not in trans or i not in leaf:
                raise ValueError(f"tilt ({a},{i}) is not transverse-to-leaf")
            q = Fraction(v)
            if q:
                clean[(a, i)] = q
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "leaf", leaf)
        object.__setattr__(self, "tilt", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("FiberSplitting is immutable")

    @property
    def transverse(self) -> tuple[int, ...]:
        return tuple(a for a in range(1, self.m + 1) if a not in self.leaf)

    def leaf_space(self) -> LinearSubspace:
        rows = []
        for i in self.leaf:
            v = [Fraction(0)] * self.m
            v[i - 1] = Fraction(1)
            rows.append(v)
        return LinearSubspace(self.m, rows)

    def normal_space(self) -> LinearSubspace:
        return LinearSubspace(self.m, [self.frame_vector(a) for a in self.transverse])

    def frame_vector(self, a: int) -> list[Fraction]:
        v = [Fraction(0)] * self.m
        v[a - 1] = Fraction(1)
        for i in self.leaf:
            v[i - 1] = self.tilt.get((a, i), Fraction(0))
        return v

    def leaf_coframe(self, i: int) -> list[Fraction]:
        v = [Fraction(0)] * self.m
        v[i - 1] = Fraction(1)
        for a in self.transverse:
            v[a - 1] = -self.tilt.get((a, i), Fraction(0))
        return v

    def mixed_space(self) -> LinearSubspace:
        """G + T*F: frame vectors plus the annihilator coframe of G."""
        rows = []
        for a in self.transverse:
            rows.append(self.frame_vector(a) + [Fraction(0)] * self.m)
        for i in self.leaf:
            rows.append([Fraction(0)] * self.m + self.leaf_coframe(i))
        return LinearSubspace(2 * self.m, rows)

    def is_good_matrix(self, sharp: Matrix) -> bool:
        """No transverse-to-transverse component in the sharp matrix."""
        z = _check_skew(sharp)
        trans = self.transverse
        return all(
            z[b - 1][a - 1] == 0 for a in trans for b in trans if a < b
        )

    def compatible_gamma(self, pi_sharp: Matrix) -> list[list[Fraction]]:
        """Flat matrix of the 2-form with kernel G inverting the leaf block."""
        p = _check_skew(pi_sharp)
        idx = [i - 1 for i in self.leaf]
        block = [[-p[r][c] for c in idx] for r in idx]
        inv = matrix_inverse(block)
        if inv is None:
            raise ValueError("leaf block is not invertible")
        # w = -block^-1; flat = -(E^T w E) for the leaf coframe rows E
        n, m = len(idx), self.m
        eps = [self.leaf_coframe(i) for i in self.leaf]
        flat = [[Fraction(0)] * m for _ in range(m)]
        for r in range(n):
            for s in range(n):
                w = inv[r][s]
                if not w:
                    continue
                for u in range(m):
                    for v in range(m):
                        flat[u][v] += eps[r][u] * w * eps[s][v]
        return flat


@dataclass(frozen=True, slots=True)
class PointwiseReport:
    in_domain: bool
    good: bool
    rank: int | None
    expected_rank: int
    image_transverse_to_normal: bool | None
    graph_transverse_to_mixed: bool | None


def _matrix_rank(mat: Matrix) -> int:
    return len(rref(mat))


def _image(mat: Matrix) -> LinearSubspace:
    m = len(mat)
    cols = [[Fraction(mat[r][c]) for r in range(m)] for c in range(m)]
    return LinearSubspace(m, cols)


def pointwise_exp_and_rank(
    pi_sharp: Matrix, split: FiberSplitting, z_sharp: Matrix
) -> PointwiseReport:
    """Push a parameter bivector through the fiber exponential and audit it.

    Checks, on this single fiber, that goodness of the parameter is the same
    as the result having the expected rank, and that for results of expected
    rank the graph/image transversality conditions agree.
    """
    p = _check_skew(pi_sharp)
    z = _check_skew(z_sharp)
    if _image(p) != split.leaf_space():
        raise ValueError("bivector image does not match the leaf space")
    expected = len(split.leaf)
    gamma = split.compatible_gamma(p)
    zg = pointwise_gauge_bivector(z, gamma)
    if zg is None:
        return PointwiseReport(
            in_domain=False,
            good=split.is_good_matrix(z),
            rank=None,
            expected_rank=expected,
            image_transverse_to_normal=None,
            graph_transverse_to_mixed=None,
        )
    m = split.m
    w = [[p[i][j] + zg[i][j] for j in range(m)] for i in range(m)]
    rk = _matrix_rank(w)
    good = split.is_good_matrix(z)
    assert good == (rk == expected)
    img_trans = _image(w).is_transverse_to(split.normal_space())
    graph_trans = graph_of_bivector(w).is_transverse_to(split.mixed_space())
    assert graph_trans  # the result stays in the gauge-domain chart
    if rk == expected:
        assert img_trans == graph_trans
    return PointwiseReport(
        in_domain=True,
        good=good,
        rank=rk,
        expected_rank=expected,
        image_transverse_to_normal=img_trans,
        graph_transverse_to_mixed=graph_trans,
    )


# -- randomized fiber audit -----------------------------------------------------


def _random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-3, 3), rng.randint(1, 3))


def random_skew(rng: random.Random, m: int) -> list[list[Fraction]]:
    out = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            q = _random_fraction(rng)
            out[i][j] = q
            out[j][i] = -q
    return out


def _random_lagrangian(rng: random.Random, m: int) -> LinearSubspace:
    kind = rng.randrange(4)
    if kind == 0:
        return graph_of_bivector(random_skew(rng, m))
    if kind == 1:
        return graph_of_two_form(random_skew(rng, m))
    if kind == 2:
        k = rng.randint(0, m)
        rows = [
            [_random_fraction(rng) for _ in range(m)] for _ in range(k)
        ]
        return graph_of_distribution(LinearSubspace(m, rows))
    return gauge_by_two_form(
        random_skew(rng, m), graph_of_bivector(random_skew(rng, m))
    )


def _standard_leaf_block(split: FiberSplitting) -> list[list[Fraction]]:
    """A sharp matrix whose image is exactly the leaf space."""
    m = split.m
    p = [[Fraction(0)] * m for _ in range(m)]
    leaf = split.leaf
    for r in range(0, len(leaf), 2):
        i, j = leaf[r] - 1, leaf[r + 1] - 1
        p[j][i] = Fraction(1)
        p[i][j] = Fraction(-1)
    return p


def _singular_gauge_pair(
    rng: random.Random, m: int
) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """A (Z, gamma) pair with id + gamma Z exactly singular."""
    z = Fraction(rng.randint(1, 3), rng.randint(1, 2))
    zs = [[Fraction(0)] * m for _ in range(m)]
    gs = [[Fraction(0)] * m for _ in range(m)]
    zs[0][1], zs[1][0] = z, -z
    gs[0][1], gs[1][0] = 1 / z, -1 / z
    return zs, gs


def audit_fibers(seed: int, rounds: int) -> dict[str, int]:
    """Run the pointwise lemma checks on randomized rational fibers.

    Raises AssertionError on the first violated equivalence; otherwise
    returns counters describing the sampled coverage.
    """
    rng = random.Random(seed)
    stats = {
        "rounds": 0,
        "lagrangians_preserved": 0,
        "gauge_defined": 0,
        "gauge_outside": 0,
        "exp_good": 0,
        "exp_bad": 0,
        "rank_two_k": 0,
        "mixed_complementary": 0,
    }
    for turn in range(rounds):
        m = 2 + turn % 4
        stats["rounds"] += 1

        # gauge actions preserve the Lagrangian property
        lag = _random_lagrangian(rng, m)
        assert is_lagrangian(lag)
        for moved in (
            gauge_by_two_form(random_skew(rng, m), lag),
            gauge_by_bivector(random_skew(rng, m), lag),
        ):
            assert is_lagrangian(moved)
            stats["lagrangians_preserved"] += 1

        # three-way characterization of the gauge domain
        if turn % 7 == 0:
            z, g = _singular_gauge_pair(rng, m)
        else:
            z, g = random_skew(rng, m), random_skew(rng, m)
        moved_z = pointwise_gauge_bivector(z, g)
        neg_g = [[-v for v in row] for row in g]
        graphs_meet = graph_of_bivector(z).is_transverse_to(
            graph_of_two_form(neg_g)
        )
        shifted = gauge_by_two_form(g, graph_of_bivector(z))
        shifted_meets_v = shifted.is_transverse_to(tangent_space(m))
        defined = moved_z is not None
        assert defined == graphs_meet == shifted_meets_v
        if defined:
            stats["gauge_defined"] += 1
            assert graph_of_bivector(moved_z) == shifted
        else:
            stats["gauge_outside"] += 1

        # rank lemmas through the fiber exponential
        k = rng.choice([kk for kk in (1, 2) if 2 * kk <= m])
        leaf = tuple(sorted(rng.sample(range(1, m + 1), 2 * k)))
        trans = [a for a in range(1, m + 1) if a not in leaf]
        tilt = {
            (a, i): _random_fraction(rng)
            for a in trans
            for i in leaf
            if rng.random() < 0.5
        }
        split = FiberSplitting(m, leaf, tilt)
        pi = _standard_leaf_block(split)
        z = random_skew(rng, m)
        if rng.random() < 0.5:
            for a in trans:
                for b in trans:
                    z[a - 1][b - 1] = Fraction(0)
        report = pointwise_exp_and_rank(pi, split, z)
        if report.in_domain:
            if report.good:
                stats["exp_good"] += 1
            else:
                stats["exp_bad"] += 1
            if report.rank == report.expected_rank:
                stats["rank_two_k"] += 1
                assert (
                    report.image_transverse_to_normal
                    == report.graph_transverse_to_mixed
                )

        # the mixed complement really is complementary to the graph
        mixed = split.mixed_space()
        gr_pi = graph_of_bivector(pi)
        assert mixed.is_transverse_to(gr_pi)
        assert mixed.intersect(gr_pi).dim == 0
        stats["mixed_complementary"] += 1

        # graph-vs-image transversality for an unrelated rank-2k bivector
        b = [
            [_random_fraction(rng) for _ in range(2 * k)] for _ in range(m)
        ]
        j2k = _standard_leaf_block(FiberSplitting(2 * k, range(1, 2 * k + 1)))
        bt = [list(col) for col in zip(*b)]
        w = mat_mul(mat_mul(b, j2k, Fraction(0)), bt, Fraction(0))
        if _matrix_rank(w) == 2 * k:
            img = _image(w).is_transverse_to(split.normal_space())
            grw = graph_of_bivector(w).is_transverse_to(mixed)
            assert img == grw
            stats["rank_two_k_independent"] = (
                stats.get("rank_two_k_independent", 0) + 1
            )
    return stats
