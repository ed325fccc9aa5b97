"""Deformation complex of the underlying foliation and the comparison map.

Normal-bundle valued leaf forms are stored in the coframe adapted to the
splitting: a term maps (strictly increasing leaf indices I, transverse index
a) to a coefficient function and stands for eps^I (x) Y_a, where eps^i is the
leaf coframe and Y_a the frame vector.  Identifying the normal bundle with
the chosen complement G, the normal class of any vector field is read off
its transverse coordinate components.

The ternary bracket and the ternary anchor carry the orientation of the
bivector-side brackets in :mod:`torfol.linfty`; together with the unary and
binary operations below this is the unique choice satisfying the homotopy
Jacobi relations and making the comparison map a strict morphism.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Mapping, Sequence

from .linfty import RegularPoissonStructure, _random_function
from .multivector import (
    Coeff,
    DifferentialForm,
    Index,
    Multivector,
    _coerce,
    lie_derivative,
    schouten,
)
from .splitting import Splitting
from .trig import TorusFunction

Key = tuple[Index, int]


class NotGood(ValueError):
    """The argument has components outside C(leaf) ^ (leaf wedge frame)."""


class NotLeafwise(ValueError):
    """The argument has a frame component where a leafwise one is required."""


def _same_splitting(s: Splitting, t: Splitting) -> bool:
    if s is t:
        return True
    if (s.dim, s.leaf) != (t.dim, t.leaf):
        return False
    return all(
        s.tilt(a, i) == t.tilt(a, i) for a in s.transverse for i in s.leaf
    )


class FoliatedFormNF:
    """A leafwise form with values in the normal bundle."""

    __slots__ = ("splitting", "degree", "_terms")

    def __init__(
        self, splitting: Splitting, degree: int, terms: Mapping[Key, Coeff]
    ):
        if degree < 0:
            raise ValueError(f"no leaf forms of degree {degree}")
        leaf = set(splitting.leaf)
        transverse = set(splitting.transverse)
        clean: dict[Key, TorusFunction] = {}
        for (idx, a), raw in terms.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} has wrong length for degree {degree}")
            if any(x >= y for x, y in zip(idx, idx[1:])):
                raise ValueError(f"index {idx} is not strictly increasing")
            if not set(idx) <= leaf:
                raise ValueError(f"index {idx} leaves the leaf coordinates")
            if a not in transverse:
                raise ValueError(f"{a} is not a transverse index")
            f = _coerce(splitting.dim, raw)
            if not f.is_zero():
                prev = clean.get((idx, a))
                f = f if prev is None else prev + f
                if f.is_zero():
                    clean.pop((idx, a), None)
                else:
                    clean[(idx, a)] = f
        object.__setattr__(self, "splitting", splitting)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("FoliatedFormNF is immutable")

    @staticmethod
    def zero(splitting: Splitting, degree: int = 1) -> FoliatedFormNF:
        return FoliatedFormNF(splitting, degree, {})

    @staticmethod
    def monomial(
        splitting: Splitting, idx: Index, a: int, f: Coeff = 1
    ) -> FoliatedFormNF:
        return FoliatedFormNF(splitting, len(tuple(idx)), {(tuple(idx), a): f})

    def terms(self) -> Iterator[tuple[Key, TorusFunction]]:
        return iter(sorted(self._terms.items()))

    def coefficient(self, idx: Index, a: int) -> TorusFunction:
        hit = self._terms.get((tuple(idx), a))
        if hit is not None:
            return hit
        return TorusFunction.constant(self.splitting.dim, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def _require_like(self, other: FoliatedFormNF) -> None:
        if not isinstance(other, FoliatedFormNF):
            raise TypeError("expected a FoliatedFormNF")
        if not _same_splitting(self.splitting, other.splitting):
            raise ValueError("operands use different splittings")
        if self.degree != other.degree:
            raise ValueError("operands have different degrees")

    def __add__(self, other: FoliatedFormNF) -> FoliatedFormNF:
        self._require_like(other)
        merged = dict(self._terms)
        for key, f in other._terms.items():
            g = merged.get(key)
            g = f if g is None else g + f
            if g.is_zero():
                merged.pop(key, None)
            else:
                merged[key] = g
        return FoliatedFormNF(self.splitting, self.degree, merged)

    def __sub__(self, other: FoliatedFormNF) -> FoliatedFormNF:
        return self + (-other)

    def __neg__(self) -> FoliatedFormNF:
        return FoliatedFormNF(
            self.splitting, self.degree, {k: -f for k, f in self._terms.items()}
        )

    def __mul__(self, other: Coeff) -> FoliatedFormNF:
        g = _coerce(self.splitting.dim, other)
        return FoliatedFormNF(
            self.splitting, self.degree, {k: f * g for k, f in self._terms.items()}
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FoliatedFormNF):
            return NotImplemented
        if not _same_splitting(self.splitting, other.splitting):
            return False
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self) -> None:  # type: ignore[override]
        raise TypeError("FoliatedFormNF is not hashable")

    def __repr__(self) -> str:
        if self.is_zero():
            return f"FoliatedFormNF.zero(<splitting>, {self.degree})"
        body = ", ".join(f"{idx} (x) Y{a}: {f!r}" for (idx, a), f in self.terms())
        return f"FoliatedFormNF({self.degree}, {{{body}}})"

    def form_part(self, a: int) -> DifferentialForm:
        """The coefficient of the frame direction a, as a leaf form on M."""
        out = DifferentialForm.zero(self.splitting.dim, self.degree)
        for (idx, b), f in self._terms.items():
            if b == a:
                out = out + _eps(self.splitting, idx) * f
        return out


# -- adapted coframe helpers --------------------------------------------------------


def _eps(s: Splitting, idx: Index) -> DifferentialForm:
    out = DifferentialForm.function(1, s.dim)
    for i in idx:
        out = out.wedge(s.coframe(i))
    return out


def _leaf_tuples(s: Splitting, degree: int) -> Iterator[Index]:
    return combinations(sorted(s.leaf), degree)


def _collect(
    s: Splitting, degree: int, parts: Mapping[int, DifferentialForm]
) -> FoliatedFormNF:
    """Assemble components of leaf forms lying in the span of the coframe."""
    basis = {i: Multivector.basis_vector(s.dim, i) for i in s.leaf}
    terms: dict[Key, Coeff] = {}
    for a, form in parts.items():
        if form.is_zero():
            continue
        for idx in _leaf_tuples(s, degree):
            val = form.evaluate([basis[i] for i in idx])
            if not val.is_zero():
                terms[(idx, a)] = val
    return FoliatedFormNF(s, degree, terms)


def _check_element(s: Splitting, eta: FoliatedFormNF) -> None:
    if not isinstance(eta, FoliatedFormNF):
        raise TypeError("expected a FoliatedFormNF")
    if not _same_splitting(s, eta.splitting):
        raise ValueError("element does not live on the given splitting")


def _leaf_projection(s: Splitting, form: DifferentialForm) -> DifferentialForm:
    """Component of a form in the span of leaf coframe products.

    Transverse coframe covectors vanish on the leaf coordinate fields, so
    evaluating there reads off the pure leaf-coframe coefficients.
    """
    if form.degree == 0:
        return form
    basis = {i: Multivector.basis_vector(s.dim, i) for i in s.leaf}
    out = DifferentialForm.zero(s.dim, form.degree)
    for idx in _leaf_tuples(s, form.degree):
        val = form.evaluate([basis[i] for i in idx])
        if not val.is_zero():
            out = out + _eps(s, idx) * val
    return out


def _leaf_d(s: Splitting, x: DifferentialForm) -> DifferentialForm:
    """Leafwise exterior derivative of a form in the span of the leaf coframe."""
    basis = {i: Multivector.basis_vector(s.dim, i) for i in s.leaf}
    out = DifferentialForm.zero(s.dim, x.degree + 1)
    for idx in _leaf_tuples(s, x.degree):
        c = x.evaluate([basis[i] for i in idx])
        for i in s.leaf:
            dc = c.partial(i)
            if not dc.is_zero():
                out = out + (s.coframe(i) * dc).wedge(_eps(s, idx))
    return out


def _is_leaf_form(s: Splitting, x: DifferentialForm) -> bool:
    return _leaf_projection(s, x) == x


# -- brackets ------------------------------------------------------------------------


def bott_differential(s: Splitting, eta: FoliatedFormNF) -> FoliatedFormNF:
    """Unary bracket: the Bott-connection de Rham differential.

    The frame vectors have constant transverse components, so their Bott
    covariant derivatives along the leaves vanish and only the leafwise
    differential of the coefficients survives.
    """
    _check_element(s, eta)
    terms: dict[Key, Coeff] = {}
    for (idx, a), f in eta.terms():
        for i in s.leaf:
            if i in idx:
                continue
            df = f.partial(i)
            if df.is_zero():
                continue
            sign = -1 if sum(1 for j in idx if j < i) % 2 else 1
            merged = tuple(sorted(idx + (i,)))
            g = df if sign > 0 else -df
            prev = terms.get((merged, a))
            terms[(merged, a)] = g if prev is None else prev + g
    return FoliatedFormNF(s, eta.degree + 1, terms)


def _normal_parts(s: Splitting, w: Multivector) -> dict[int, TorusFunction]:
    out = {}
    for c in s.transverse:
        f = w.coefficient((c,))
        if not f.is_zero():
            out[c] = f
    return out


def v2(s: Splitting, eta: FoliatedFormNF, zeta: FoliatedFormNF) -> FoliatedFormNF:
    """Binary bracket on normal-bundle valued leaf forms."""
    _check_element(s, eta)
    _check_element(s, zeta)
    degree = eta.degree + zeta.degree
    parts: dict[int, DifferentialForm] = {
        c: DifferentialForm.zero(s.dim, degree) for c in s.transverse
    }
    for (idx, a), f in eta.terms():
        al = _eps(s, idx)
        x = s.frame_vector(a) * f
        for (jdx, b), g in zeta.terms():
            be = _eps(s, jdx)
            y = s.frame_vector(b) * g
            t_lx = al.wedge(_leaf_projection(s, lie_derivative(x, be)))
            t_ly = _leaf_projection(s, lie_derivative(y, al)).wedge(be)
            t_br = al.wedge(be)
            flip = len(idx) % 2 == 0
            for c, h in _normal_parts(s, y).items():
                parts[c] = parts[c] + (t_lx * h if not flip else -(t_lx * h))
            for c, h in _normal_parts(s, x).items():
                parts[c] = parts[c] + (t_ly * h if flip else -(t_ly * h))
            for c, h in _normal_parts(s, schouten(x, y)).items():
                parts[c] = parts[c] + (t_br * h if not flip else -(t_br * h))
    return _collect(s, degree, parts)


def v3(
    s: Splitting,
    eta: FoliatedFormNF,
    zeta: FoliatedFormNF,
    kappa: FoliatedFormNF,
) -> FoliatedFormNF:
    """Ternary bracket; nonzero only when the complement is non-involutive."""
    _check_element(s, eta)
    _check_element(s, zeta)
    _check_element(s, kappa)
    degree = max(eta.degree + zeta.degree + kappa.degree - 1, 0)
    parts: dict[int, DifferentialForm] = {
        c: DifferentialForm.zero(s.dim, degree) for c in s.transverse
    }
    for (idx, a), f in eta.terms():
        al = _eps(s, idx)
        x = s.frame_vector(a) * f
        for (jdx, b), g in zeta.terms():
            be = _eps(s, jdx)
            y = s.frame_vector(b) * g
            for (kdx, c0), h in kappa.terms():
                ga = _eps(s, kdx)
                z = s.frame_vector(c0) * h
                p, q, r = len(idx), len(jdx), len(kdx)
                pref = -1 if q % 2 else 1
                t1 = _contract_wedge(al, schouten(y, z), be, ga)
                t2 = _contract_wedge(be, schouten(x, z), al, ga)
                t3 = _contract_wedge(ga, schouten(x, y), al, be)
                s2 = -pref if (p * q) % 2 == 0 else pref
                s3 = pref if (q * r + p * r) % 2 == 0 else -pref
                for c, w in _normal_parts(s, x).items():
                    parts[c] = parts[c] + t1 * w * Fraction(pref)
                for c, w in _normal_parts(s, y).items():
                    parts[c] = parts[c] + t2 * w * Fraction(s2)
                for c, w in _normal_parts(s, z).items():
                    parts[c] = parts[c] + t3 * w * Fraction(s3)
    return _collect(s, degree, parts)


def _contract_wedge(
    target: DifferentialForm, v: Multivector, left: DifferentialForm, right: DifferentialForm
) -> DifferentialForm:
    if target.degree == 0 or v.is_zero():
        degree = max(target.degree - 1 + left.degree + right.degree, 0)
        return DifferentialForm.zero(target.dim, degree)
    return target.interior(v).wedge(left).wedge(right)


# -- comparison with the bivector side ----------------------------------------------


def phi(rp: RegularPoissonStructure, p: Multivector) -> FoliatedFormNF:
    """Project a good multivector to its normal-bundle valued leaf form.

    The leafwise symplectic form converts the leaf slots; the kernel is
    exactly the part without a frame factor.
    """
    s = rp.splitting
    if not s.is_good(p):
        raise NotGood("phi is defined on good multivectors only")
    ell = p.degree
    if ell == 0:
        return FoliatedFormNF.zero(s, 0)
    flats = {i: rp.gamma.flat(Multivector.basis_vector(s.dim, i)) for i in s.leaf}
    terms: dict[Key, Coeff] = {}
    for idx in _leaf_tuples(s, ell - 1):
        slots = [flats[i] for i in idx]
        for a in s.transverse:
            val = p.evaluate([*slots, DifferentialForm.basis_covector(s.dim, a)])
            if not val.is_zero():
                terms[(idx, a)] = val if ell % 2 else -val
    return FoliatedFormNF(s, ell - 1, terms)


def underline_phi(rp: RegularPoissonStructure, p: Multivector) -> DifferentialForm:
    """The graded algebra map under phi: leafwise multivectors to leaf forms."""
    s = rp.splitting
    if not s.is_leafwise(p):
        raise NotLeafwise("underline_phi is defined on leafwise multivectors only")
    ell = p.degree
    if ell == 0:
        return DifferentialForm.function(p.coefficient(()), s.dim)
    flats = {i: rp.gamma.flat(Multivector.basis_vector(s.dim, i)) for i in s.leaf}
    out = DifferentialForm.zero(s.dim, ell)
    for idx in _leaf_tuples(s, ell):
        val = p.evaluate([flats[i] for i in idx])
        if not val.is_zero():
            out = out + _eps(s, idx) * (val if ell % 2 == 0 else -val)
    return out


# -- Maurer-Cartan and graphs --------------------------------------------------------


@dataclass(frozen=True)
class FoliationMCReport:
    parts: tuple[FoliatedFormNF, FoliatedFormNF, FoliatedFormNF]
    residual: FoliatedFormNF
    is_mc: bool


def foliation_mc_residual(s: Splitting, eta: FoliatedFormNF) -> FoliationMCReport:
    """Maurer-Cartan residual of a degree-one element."""
    _check_element(s, eta)
    if eta.degree != 1:
        raise ValueError("foliation deformations are degree-one elements")
    p1 = bott_differential(s, eta)
    p2 = v2(s, eta, eta) * Fraction(1, 2)
    p3 = v3(s, eta, eta, eta) * Fraction(1, 6)
    residual = p1 + p2 + p3
    return FoliationMCReport((p1, p2, p3), residual, residual.is_zero())


def graph_involutive(s: Splitting, eta: FoliatedFormNF) -> bool:
    """Whether the graph distribution of a degree-one element is involutive.

    The graph is framed by the deformed leaf coordinate fields; a bracket of
    two of them lies in the graph iff the deformed annihilator kills it.
    """
    _check_element(s, eta)
    if eta.degree != 1:
        raise ValueError("graphs are taken of degree-one elements")
    frames: dict[int, Multivector] = {}
    for i in s.leaf:
        v = Multivector.basis_vector(s.dim, i)
        for a in s.transverse:
            f = eta.coefficient((i,), a)
            if not f.is_zero():
                v = v + s.frame_vector(a) * f
        frames[i] = v
    annihilator = []
    for b in s.transverse:
        xi = DifferentialForm.basis_covector(s.dim, b)
        for i in s.leaf:
            f = eta.coefficient((i,), b)
            if not f.is_zero():
                xi = xi - s.coframe(i) * f
        annihilator.append(xi)
    for i, j in combinations(sorted(s.leaf), 2):
        w = schouten(frames[i], frames[j])
        for xi in annihilator:
            if not xi.evaluate([w]).is_zero():
                return False
    return True


# -- anchors -------------------------------------------------------------------------


def n_anchor(
    s: Splitting, k: int, args: Sequence[FoliatedFormNF], x: DifferentialForm
) -> DifferentialForm:
    """Anchor of the arity-k bracket on leaf forms."""
    if k not in (1, 2, 3):
        raise ValueError("anchors exist for arities 1, 2 and 3")
    if len(args) != k - 1:
        raise ValueError(f"arity {k} anchor takes {k - 1} leading arguments")
    for u in args:
        _check_element(s, u)
    if not _is_leaf_form(s, x):
        raise ValueError("last argument must be a leaf form")
    if k == 1:
        return _leaf_d(s, x)
    if k == 2:
        (u,) = args
        out = DifferentialForm.zero(s.dim, u.degree + x.degree)
        for (idx, a), f in u.terms():
            moved = _leaf_projection(s, lie_derivative(s.frame_vector(a) * f, x))
            term = _eps(s, idx).wedge(moved)
            out = out + term if len(idx) % 2 else out - term
        return out
    u, w = args
    degree = u.degree + w.degree + x.degree - 1
    out = DifferentialForm.zero(s.dim, max(degree, 0))
    if x.degree == 0:
        return out
    for (idx, a), f in u.terms():
        xv = s.frame_vector(a) * f
        for (jdx, b), g in w.terms():
            yv = s.frame_vector(b) * g
            p, q, r = len(idx), len(jdx), x.degree
            term = x.interior(schouten(xv, yv)).wedge(_eps(s, idx)).wedge(_eps(s, jdx))
            sign = 1 if q % 2 else -1
            if (q * r + p * r) % 2:
                sign = -sign
            out = out - (term * Fraction(sign))
    return out


# -- homotopy relations --------------------------------------------------------------


def v_multibracket(
    s: Splitting, k: int, args: Sequence[FoliatedFormNF]
) -> FoliatedFormNF:
    if len(args) != k:
        raise ValueError(f"arity {k} bracket takes {k} arguments")
    if k == 1:
        return bott_differential(s, args[0])
    if k == 2:
        return v2(s, args[0], args[1])
    if k == 3:
        return v3(s, args[0], args[1], args[2])
    degree = max(sum(u.degree for u in args) + 2 - k, 0)
    return FoliatedFormNF.zero(s, degree)


def _unshuffle_sign(parities: Sequence[int], left: Sequence[int]) -> int:
    sign = 1
    chosen = set(left)
    for a in left:
        for b in range(len(parities)):
            if b in chosen or b >= a:
                continue
            if parities[a] and parities[b]:
                sign = -sign
    return sign


def foliation_jacobi_defect(
    s: Splitting, elements: Sequence[FoliatedFormNF], k: int
) -> FoliatedFormNF:
    """Sum of nested brackets over all unshuffles; zero for a homotopy algebra.

    Degrees are shifted by one, so the Koszul signs use the opposite parity
    of the form degrees.
    """
    parities = [(u.degree + 1) % 2 for u in elements]
    out_degree = max(sum(u.degree for u in elements) + 3 - k, 0)
    acc = FoliatedFormNF.zero(s, out_degree)
    for i in range(1, min(3, k) + 1):
        j = k + 1 - i
        if j < 1 or j > 3:
            continue
        for left in combinations(range(k), i):
            rest = [t for t in range(k) if t not in left]
            inner = v_multibracket(s, i, [elements[t] for t in left])
            term = v_multibracket(s, j, [inner, *(elements[t] for t in rest)])
            if term.is_zero():
                continue
            if _unshuffle_sign(parities, left) > 0:
                acc = acc + term
            else:
                acc = acc - term
    return acc


# -- randomized elements -------------------------------------------------------------


def random_foliated_form(
    rng: random.Random, s: Splitting, degree: int
) -> FoliatedFormNF:
    acc = FoliatedFormNF.zero(s, degree)
    for _ in range(rng.randint(1, 2)):
        idx = tuple(sorted(rng.sample(sorted(s.leaf), degree)))
        a = rng.choice(sorted(s.transverse))
        acc = acc + FoliatedFormNF.monomial(s, idx, a, _random_function(rng, s.dim))
    return acc
