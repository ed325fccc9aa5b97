"""Multivector fields and differential forms on T^n with exact coefficients.

Both are stored sparsely: a map from a strictly increasing index tuple
(1-based coordinate indices) to a :class:`~torfol.trig.TorusFunction`
coefficient.  A degree-0 element is a single coefficient at the empty tuple.

Conventions, fixed once and used everywhere:

* contraction inserts into the first slot: (i_a P)(b1, ..) = P(a, b1, ..),
  so for a bivector Z = d1^d2 one has Z#(dt1) = d2 and Z#(dt2) = -d1,
  and for a 2-form g = dt1^dt2 one has g_flat(d1) = dt2, g_flat(d2) = -dt1;
* the Schouten bracket restricts to the Lie bracket on vector fields and to
  X(f) on a vector field and a function, and satisfies
  [P, Q ^ R] = [P, Q] ^ R + (-1)^((p-1) q) Q ^ [P, R] and
  [P, Q] = -(-1)^((p-1)(q-1)) [Q, P].
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .trig import Rat, TorusFunction, TrigPoly, tf_one, tf_zero

Index = tuple[int, ...]
Coeff = Union[TorusFunction, TrigPoly, Fraction, int]


def _coerce(dim: int, value: Coeff) -> TorusFunction:
    if isinstance(value, TorusFunction):
        if value.dim != dim:
            raise ValueError("coefficient lives on the wrong torus")
        return value
    if isinstance(value, TrigPoly):
        if value.dim != dim:
            raise ValueError("coefficient lives on the wrong torus")
        return TorusFunction.of(value)
    return TorusFunction.constant(dim, value)


def _check_index(dim: int, degree: int, idx: Index) -> Index:
    idx = tuple(idx)
    if len(idx) != degree:
        raise ValueError(f"index {idx} has wrong length for degree {degree}")
    for a, b in zip(idx, idx[1:]):
        if a >= b:
            raise ValueError(f"index {idx} is not strictly increasing")
    if idx and (idx[0] < 1 or idx[-1] > dim):
        raise ValueError(f"index {idx} out of range 1..{dim}")
    return idx


def _merge_sign(left: Index, right: Index) -> tuple[int, Index] | None:
    """Sign and sorted index for concatenating two increasing tuples."""
    if set(left) & set(right):
        return None
    inversions = 0
    for r in right:
        inversions += sum(1 for l in left if l > r)
    merged = tuple(sorted(left + right))
    return (-1) ** inversions, merged


def _remove_sign(idx: Index, i: int) -> tuple[int, Index] | None:
    """Sign and index for deleting one entry, counting its position."""
    if i not in idx:
        return None
    m = idx.index(i)
    return (-1) ** m, idx[:m] + idx[m + 1 :]


class _Graded:
    """Shared sparse-term behaviour of multivectors and forms."""

    __slots__ = ("dim", "degree", "_terms")

    def __init__(self, dim: int, degree: int, terms: Mapping[Index, Coeff]):
        if dim < 1:
            raise ValueError("dimension must be positive")
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        # degrees above dim are allowed; no nonzero term can exist there
        clean: dict[Index, TorusFunction] = {}
        for idx, value in terms.items():
            idx = _check_index(dim, degree, idx)
            f = _coerce(dim, value)
            if f.is_zero():
                continue
            if idx in clean:
                f = clean[idx] + f
            if f.is_zero():
                clean.pop(idx, None)
            else:
                clean[idx] = f
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError(f"{type(self).__name__} is immutable")

    def terms(self) -> Iterator[tuple[Index, TorusFunction]]:
        return iter(sorted(self._terms.items()))

    def coefficient(self, idx: Iterable[int]) -> TorusFunction:
        return self._terms.get(tuple(idx), tf_zero(self.dim))

    def is_zero(self) -> bool:
        return not self._terms

    def _require_like(self, other: _Graded) -> None:
        if type(self) is not type(other):
            raise TypeError("mixed multivector/form arithmetic")
        if self.dim != other.dim:
            raise ValueError("operands live on different tori")
        if self.degree != other.degree and self._terms and other._terms:
            raise ValueError("operands have different degrees")

    def __add__(self, other):
        if not isinstance(other, _Graded):
            return NotImplemented
        self._require_like(other)
        if self.is_zero():
            return other
        out = dict(self._terms)
        for idx, f in other._terms.items():
            g = out.get(idx)
            out[idx] = f if g is None else g + f
        return type(self)(self.dim, self.degree, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return type(self)(
            self.dim, self.degree, {i: -f for i, f in self._terms.items()}
        )

    def __mul__(self, other: Coeff):
        if isinstance(other, _Graded):
            return NotImplemented
        f = _coerce(self.dim, other)
        return type(self)(
            self.dim, self.degree, {i: g * f for i, g in self._terms.items()}
        )

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _Graded):
            return NotImplemented
        if type(self) is not type(other) or self.dim != other.dim:
            return False
        if self._terms.keys() != other._terms.keys():
            return False
        if self._terms and self.degree != other.degree:
            return False
        return all(f == other._terms[i] for i, f in self._terms.items())

    __hash__ = None

    def _wedge_terms(self, other: _Graded) -> dict[Index, TorusFunction]:
        out: dict[Index, TorusFunction] = {}
        for i1, f1 in self._terms.items():
            for i2, f2 in other._terms.items():
                hit = _merge_sign(i1, i2)
                if hit is None:
                    continue
                sign, idx = hit
                f = f1 * f2
                if sign < 0:
                    f = -f
                g = out.get(idx)
                f = f if g is None else g + f
                if f.is_zero():
                    out.pop(idx, None)
                else:
                    out[idx] = f
        return out

    def __repr__(self) -> str:
        name = type(self).__name__
        if self.is_zero():
            return f"{name}.zero({self.dim}, {self.degree})"
        body = ", ".join(f"{i}: {f!r}" for i, f in self.terms())
        return f"{name}({self.dim}, {self.degree}, {{{body}}})"


class Multivector(_Graded):
    """An alternating contravariant tensor field, sum of f * d_{i1}^...^d_{ip}."""

    @staticmethod
    def zero(dim: int, degree: int = 0) -> Multivector:
        return Multivector(dim, degree, {})

    @staticmethod
    def function(f: Coeff, dim: int | None = None) -> Multivector:
        if dim is None:
            if not isinstance(f, (TorusFunction, TrigPoly)):
                raise ValueError("dimension required for scalar coefficients")
            dim = f.dim
        return Multivector(dim, 0, {(): f})

    @staticmethod
    def monomial(dim: int, idx: Iterable[int], f: Coeff = 1) -> Multivector:
        idx = tuple(idx)
        return Multivector(dim, len(idx), {idx: f})

    @staticmethod
    def basis_vector(dim: int, i: int) -> Multivector:
        return Multivector.monomial(dim, (i,))

    def wedge(self, other: Multivector) -> Multivector:
        if not isinstance(other, Multivector):
            raise TypeError("wedge of a multivector with a non-multivector")
        if self.dim != other.dim:
            raise ValueError("operands live on different tori")
        return Multivector(
            self.dim, self.degree + other.degree, self._wedge_terms(other)
        )

    def contract(self, alpha: DifferentialForm) -> Multivector:
        """Insert a one-form into the first slot."""
        if not isinstance(alpha, DifferentialForm) or alpha.degree != 1:
            raise TypeError("contraction expects a one-form")
        if alpha.dim != self.dim:
            raise ValueError("operands live on different tori")
        if self.degree == 0:
            return Multivector.zero(self.dim, 0)
        out: dict[Index, TorusFunction] = {}
        for (j,), a in alpha._terms.items():
            for idx, f in self._terms.items():
                hit = _remove_sign(idx, j)
                if hit is None:
                    continue
                sign, rest = hit
                g = a * f
                if sign < 0:
                    g = -g
                prev = out.get(rest)
                g = g if prev is None else prev + g
                if g.is_zero():
                    out.pop(rest, None)
                else:
                    out[rest] = g
        return Multivector(self.dim, self.degree - 1, out)

    def sharp(self, alpha: DifferentialForm) -> Multivector:
        """For a bivector: the induced map from one-forms to vector fields."""
        if self.degree != 2 and not self.is_zero():
            raise ValueError("sharp is defined for bivectors")
        return self.contract(alpha)

    def evaluate(self, covectors: Sequence[DifferentialForm]) -> TorusFunction:
        if len(covectors) != self.degree:
            raise ValueError("wrong number of arguments")
        acc = self
        for alpha in covectors:
            acc = acc.contract(alpha)
        return acc.coefficient(())

    def apply_function(self, f: TorusFunction) -> TorusFunction:
        """Derivation action of a vector field on a function."""
        if self.degree != 1 and not self.is_zero():
            raise ValueError("only vector fields act on functions")
        acc = tf_zero(self.dim)
        for (i,), g in self._terms.items():
            acc = acc + g * f.partial(i)
        return acc


class DifferentialForm(_Graded):
    """An alternating covariant tensor field, sum of f * dt_{i1}^...^dt_{ip}."""

    @staticmethod
    def zero(dim: int, degree: int = 0) -> DifferentialForm:
        return DifferentialForm(dim, degree, {})

    @staticmethod
    def function(f: Coeff, dim: int | None = None) -> DifferentialForm:
        if dim is None:
            if not isinstance(f, (TorusFunction, TrigPoly)):
                raise ValueError("dimension required for scalar coefficients")
            dim = f.dim
        return DifferentialForm(dim, 0, {(): f})

    @staticmethod
    def monomial(dim: int, idx: Iterable[int], f: Coeff = 1) -> DifferentialForm:
        idx = tuple(idx)
        return DifferentialForm(dim, len(idx), {idx: f})

    @staticmethod
    def basis_covector(dim: int, i: int) -> DifferentialForm:
        return DifferentialForm.monomial(dim, (i,))

    def wedge(self, other: DifferentialForm) -> DifferentialForm:
        if not isinstance(other, DifferentialForm):
            raise TypeError("wedge of a form with a non-form")
        if self.dim != other.dim:
            raise ValueError("operands live on different tori")
        return DifferentialForm(
            self.dim, self.degree + other.degree, self._wedge_terms(other)
        )

    def d(self) -> DifferentialForm:
        """Exterior derivative."""
        out: dict[Index, TorusFunction] = {}
        for idx, f in self._terms.items():
            for i in range(1, self.dim + 1):
                df = f.partial(i)
                if df.is_zero():
                    continue
                hit = _merge_sign((i,), idx)
                if hit is None:
                    continue
                sign, merged = hit
                g = df if sign > 0 else -df
                prev = out.get(merged)
                g = g if prev is None else prev + g
                if g.is_zero():
                    out.pop(merged, None)
                else:
                    out[merged] = g
        return DifferentialForm(self.dim, self.degree + 1, out)

    def interior(self, x: Multivector) -> DifferentialForm:
        """Insert a vector field into the first slot."""
        if not isinstance(x, Multivector) or (x.degree != 1 and not x.is_zero()):
            raise TypeError("interior product expects a vector field")
        if x.dim != self.dim:
            raise ValueError("operands live on different tori")
        if self.degree == 0:
            return DifferentialForm.zero(self.dim, 0)
        out: dict[Index, TorusFunction] = {}
        for (j,), a in x._terms.items():
            for idx, f in self._terms.items():
                hit = _remove_sign(idx, j)
                if hit is None:
                    continue
                sign, rest = hit
                g = a * f
                if sign < 0:
                    g = -g
                prev = out.get(rest)
                g = g if prev is None else prev + g
                if g.is_zero():
                    out.pop(rest, None)
                else:
                    out[rest] = g
        return DifferentialForm(self.dim, self.degree - 1, out)

    def flat(self, x: Multivector) -> DifferentialForm:
        """For a 2-form: the induced map from vector fields to one-forms."""
        if self.degree != 2 and not self.is_zero():
            raise ValueError("flat is defined for 2-forms")
        return self.interior(x)

    def evaluate(self, vectors: Sequence[Multivector]) -> TorusFunction:
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        acc = self
        for x in vectors:
            acc = acc.interior(x)
        return acc.coefficient(())


def lie_derivative(x: Multivector, alpha: DifferentialForm) -> DifferentialForm:
    """L_x alpha = i_x(d alpha) + d(i_x alpha)."""
    return alpha.d().interior(x) + alpha.interior(x).d()


def _lie_vec_vec(
    dim: int, a: int, f: TorusFunction, b: int, g: TorusFunction
) -> Multivector:
    """[f d_a, g d_b] = f (d_a g) d_b - g (d_b f) d_a."""
    out: dict[Index, TorusFunction] = {}
    fa = f * g.partial(a)
    if not fa.is_zero():
        out[(b,)] = fa
    gb = g * f.partial(b)
    if not gb.is_zero():
        prev = out.get((a,))
        val = -gb if prev is None else prev - gb
        if val.is_zero():
            out.pop((a,), None)
        else:
            out[(a,)] = val
    return Multivector(dim, 1, out)


def _lie_vec_fun(
    dim: int, a: int, f: TorusFunction, g: TorusFunction
) -> Multivector:
    return Multivector.function(f * g.partial(a), dim)


def _bracket_mono(
    dim: int,
    i1: Index,
    f: TorusFunction,
    i2: Index,
    g: TorusFunction,
    vec_vec,
    vec_fun,
) -> Multivector:
    """Biderivation bracket of f * d_{i1} and g * d_{i2}.

    The two callbacks fix the action on a pair of monomial vector fields and
    on a vector field against a function; everything else follows from the
    right Leibniz rule and graded antisymmetry.
    """
    p, q = len(i1), len(i2)
    if q >= 2:
        head, rest = i2[:1], i2[1:]
        left = _bracket_mono(dim, i1, f, head, g, vec_vec, vec_fun).wedge(
            Multivector.monomial(dim, rest)
        )
        right = Multivector.monomial(dim, head, g).wedge(
            _bracket_mono(dim, i1, f, rest, tf_one(dim), vec_vec, vec_fun)
        )
        return left + right if (p - 1) % 2 == 0 else left - right
    if q == 1:
        if p == 0:
            # [f, Q] = -(-1)^((p-1)(q-1)) [Q, f] with p = 0, q = 1
            return -_bracket_mono(dim, i2, g, i1, f, vec_vec, vec_fun)
        if p == 1:
            return vec_vec(dim, i1[0], f, i2[0], g)
        # p >= 2, q = 1: [P, Q] = -(-1)^((p-1)(q-1)) [Q, P] = -[Q, P]
        return -_bracket_mono(dim, i2, g, i1, f, vec_vec, vec_fun)
    # q == 0
    if p == 0:
        return Multivector.zero(dim, 0)
    if p == 1:
        return vec_fun(dim, i1[0], f, g)
    # p >= 2, q = 0: sign is -(-1)^(-(p-1)) = -(-1)^(p-1)
    flipped = _bracket_mono(dim, i2, g, i1, f, vec_vec, vec_fun)
    return flipped if p % 2 == 0 else -flipped


def biderivation_bracket(
    p: Multivector, q: Multivector, vec_vec, vec_fun
) -> Multivector:
    """Extend a vector-field bracket and an anchor to all multivectors."""
    if p.dim != q.dim:
        raise ValueError("operands live on different tori")
    degree = max(p.degree + q.degree - 1, 0)
    acc = Multivector.zero(p.dim, degree)
    for i1, f in p._terms.items():
        for i2, g in q._terms.items():
            acc = acc + _bracket_mono(p.dim, i1, f, i2, g, vec_vec, vec_fun)
    return acc


def schouten(p: Multivector, q: Multivector) -> Multivector:
    """The Schouten bracket [P, Q] of multivector fields."""
    return biderivation_bracket(p, q, _lie_vec_vec, _lie_vec_fun)


def sharp_wedge(
    args: Sequence[Multivector], upsilon: DifferentialForm
) -> Multivector:
    """Contract three multivectors through a 3-form, one slot each.

    Every coordinate term of the 3-form is decomposable; its coefficient is
    attached to the first covector factor, and the factors are distributed
    over the arguments by a signed sum over all permutations.
    """
    if len(args) != 3:
        raise ValueError("expected exactly three multivector arguments")
    if upsilon.degree != 3 and not upsilon.is_zero():
        raise ValueError("expected a 3-form")
    p, q, r = args
    dim = upsilon.dim
    degree = max(p.degree + q.degree + r.degree - 3, 0)
    acc = Multivector.zero(dim, degree)
    perms = [
        ((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
        ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1),
    ]
    for idx, f in upsilon._terms.items():
        mu = [
            DifferentialForm.monomial(dim, (idx[0],), f),
            DifferentialForm.basis_covector(dim, idx[1]),
            DifferentialForm.basis_covector(dim, idx[2]),
        ]
        for perm, sign in perms:
            term = (
                p.contract(mu[perm[0]])
                .wedge(q.contract(mu[perm[1]]))
                .wedge(r.contract(mu[perm[2]]))
            )
            acc = acc + term if sign > 0 else acc - term
    return acc


def lichnerowicz(pi: Multivector, p: Multivector) -> Multivector:
    """The complex differential [Pi, -] of a Poisson bivector."""
    return schouten(pi, p)


def is_poisson(pi: Multivector) -> bool:
    return schouten(pi, pi).is_zero()
