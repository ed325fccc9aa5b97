"""Exactness decisions for cocycles of the deformation differential.

Two complementary mechanisms: a truncated Fourier-mode linear solver that
searches for primitives and re-verifies them symbolically, and leaf-averaging
witnesses that certify non-exactness outright.  The solver can only ever
answer "exact" or "inconclusive"; failure to solve inside a finite mode box
proves nothing.  The witnesses can only ever answer "not exact"; a vanishing
average proves nothing.  Combining both sides gives a decision procedure that
is sound in every branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from ._linalg import solve_sparse
from .foliation import FoliatedFormNF, bott_differential, v2
from .linfty import RegularPoissonStructure, l1
from .multivector import Multivector
from .splitting import Splitting
from .trig import TorusFunction, TrigPoly

Mode = tuple[int, ...]

CASE_CONSTANT_PI = "ConstantPi"
CASE_RANK_TWO = "RankTwoLeafConstantFactor"
CASE_BOTT_FLAT = "BottFlatFrame"


class NotClosed(ValueError):
    """The element is not a cocycle, so exactness is not even posed."""


class NotApplicable(ValueError):
    """No averaging criterion is sound for the structure at hand."""


@dataclass(frozen=True)
class WitnessRecord:
    """A nonzero leaf average that certifies non-exactness.

    The tag names the hypothesis under which the average is an obstruction:
    ConstantPi refutes primitives in the full complex, RankTwoLeafConstantFactor
    refutes primitives with at most one transverse factor per term, and
    BottFlatFrame is the analogue for normal-bundle valued leaf forms.
    """

    case_tag: str
    component: tuple
    average: TorusFunction


@dataclass(frozen=True)
class ExactnessVerdict:
    """Outcome of an exactness decision.

    Exactly one of the three constructors applies.  An exact verdict always
    carries a primitive that was re-verified symbolically against the input;
    an inconclusive verdict records the mode bound that was exhausted.
    """

    primitive: object | None
    witness: WitnessRecord | None
    box: int | None

    @staticmethod
    def exact(primitive: object) -> ExactnessVerdict:
        return ExactnessVerdict(primitive, None, None)

    @staticmethod
    def not_exact(witness: WitnessRecord) -> ExactnessVerdict:
        return ExactnessVerdict(None, witness, None)

    @staticmethod
    def inconclusive(box: int) -> ExactnessVerdict:
        return ExactnessVerdict(None, None, box)

    @property
    def is_exact(self) -> bool:
        return self.primitive is not None

    @property
    def is_not_exact(self) -> bool:
        return self.witness is not None

    @property
    def is_inconclusive(self) -> bool:
        return self.primitive is None and self.witness is None


# -- real Fourier bookkeeping ------------------------------------------------
#
# TrigPoly stores conjugate-symmetric complex coefficients, so a real basis
# indexes each +/- mode pair once: the canonical representative has positive
# first nonzero entry, and carries a cosine part (0) and a sine part (1).


class _Uncleared(Exception):
    """Raised internally when denominators cannot be moved out of the way."""


def _canonical(mode: Mode) -> bool:
    for c in mode:
        if c:
            return c > 0
    return True


def _expand_poly(
    poly: TrigPoly, scale: Fraction
) -> Iterator[tuple[Mode, int, Fraction]]:
    """Real coefficients of a trig polynomial, canonical modes only."""
    for mode, c in poly.modes():
        if not _canonical(mode):
            continue
        if all(k == 0 for k in mode):
            yield mode, 0, c.re * scale
            continue
        if c.re:
            yield mode, 0, 2 * c.re * scale
        if c.im:
            yield mode, 1, -2 * c.im * scale


def _basis_poly(dim: int, mode: Mode, part: int) -> TrigPoly:
    if all(k == 0 for k in mode):
        return TrigPoly.constant(dim, 1)
    return TrigPoly.sin(dim, mode) if part else TrigPoly.cos(dim, mode)


def _clear_denominators(
    terms: Sequence[tuple[object, TorusFunction]], leaf: Iterable[int]
) -> tuple[list[tuple[object, TrigPoly]], TorusFunction | None]:
    """Rewrite quotient coefficients as polynomials times a common factor.

    Returns the polynomial terms of D*W together with 1/D, or (terms, None)
    when every denominator was constant already.  Clearing is only valid when
    no denominator depends on a leaf coordinate: a leafwise bivector kills
    transverse covectors, so brackets commute with such factors.
    """
    leaf = set(leaf)
    dens: dict[TrigPoly, TorusFunction] = {}
    for _, f in terms:
        if f.den.is_constant():
            continue
        if any(f.den.depends_on(i) for i in leaf):
            raise _Uncleared(f"denominator {f.den!r} depends on a leaf coordinate")
        if f.den not in dens:
            dens[f.den] = TorusFunction(
                TrigPoly.constant(f.den.dim, 1), f.den, f.den_cert
            )
    if not dens:
        out = []
        for key, f in terms:
            c = f.den.constant_value()
            out.append((key, f.num.scale(1 / c)))
        return out, None
    reciprocal = None
    for rec in dens.values():
        reciprocal = rec if reciprocal is None else reciprocal * rec
    cleared = []
    for key, f in terms:
        poly = f.num
        if f.den.is_constant():
            poly = poly.scale(1 / f.den.constant_value())
        for den in dens:
            if den != f.den:
                poly = poly * den
        cleared.append((key, poly))
    return cleared, reciprocal


def _mode_closure(start: Iterable[Mode], steps: Iterable[Mode], bound: int) -> set[Mode]:
    """Translation closure of the start modes inside the box |k|_inf <= bound."""
    steps = list(steps)
    seen: set[Mode] = set()
    frontier = [m for m in start if max(map(abs, m), default=0) <= bound]
    seen.update(frontier)
    while frontier:
        nxt = []
        for m in frontier:
            for s in steps:
                t = tuple(a + b for a, b in zip(m, s))
                if t in seen or max(map(abs, t), default=0) > bound:
                    continue
                seen.add(t)
                nxt.append(t)
        frontier = nxt
    return seen


def _solve_truncated(
    rhs_terms: Sequence[tuple[object, TrigPoly]],
    unknown_keys: Sequence[object],
    steps: Sequence[Mode],
    bound: int,
    dim: int,
    apply_fn,
) -> dict[object, TrigPoly] | None:
    """Invert a mode-local linear differential inside a truncation box.

    apply_fn maps (key, basis TrigPoly) to the image's terms as (key', f')
    pairs with constant denominators.  Returns polynomial coefficients of one
    solution keyed like the unknowns, or None when the truncated system is
    inconsistent.
    """
    rhs_modes = {m for _, poly in rhs_terms for m, _ in poly.modes()}
    if not rhs_modes:
        return {}
    modes = sorted(m for m in _mode_closure(rhs_modes, steps, bound) if _canonical(m))
    variables: list[tuple[object, Mode, int]] = []
    for key in unknown_keys:
        for m in modes:
            variables.append((key, m, 0))
            if any(m):
                variables.append((key, m, 1))
    rows: dict[tuple[object, Mode, int], tuple[dict[int, Fraction], Fraction]] = {}

    def row(rk: tuple[object, Mode, int]) -> tuple[dict[int, Fraction], Fraction]:
        got = rows.get(rk)
        if got is None:
            got = ({}, Fraction(0))
            rows[rk] = got
        return got

    for key, poly in rhs_terms:
        for m, part, val in _expand_poly(poly, Fraction(1)):
            cols, b = row((key, m, part))
            rows[(key, m, part)] = (cols, b + val)
    for var, (key, m, part) in enumerate(variables):
        image = apply_fn(key, _basis_poly(dim, m, part))
        for out_key, f in image:
            if not f.den.is_constant():
                raise _Uncleared(f"image denominator {f.den!r} is not constant")
            scale = 1 / f.den.constant_value()
            for om, opart, val in _expand_poly(f.num, scale):
                cols, _ = row((out_key, om, opart))
                cols[var] = cols.get(var, Fraction(0)) + val
    solution = solve_sparse(
        (cols, b) for cols, b in rows.values()
    )
    if solution is None:
        return None
    out: dict[object, TrigPoly] = {}
    for var, x in solution.items():
        key, m, part = variables[var]
        piece = _basis_poly(dim, m, part).scale(x)
        prev = out.get(key)
        out[key] = piece if prev is None else prev + piece
    return out


# -- the Lichnerowicz side ---------------------------------------------------


def _pi_polynomials(rp: RegularPoissonStructure) -> list[tuple[tuple, TrigPoly]] | None:
    out = []
    for idx, f in rp.pi.terms():
        if not f.den.is_constant():
            return None
        out.append((idx, f.num.scale(1 / f.den.constant_value())))
    return out


def _spread(polys: Iterable[tuple[object, TrigPoly]]) -> int:
    return max((poly.support_radius() for _, poly in polys), default=0)


def _unknown_indices(
    s: Splitting, degree: int, full_complex: bool
) -> list[tuple[int, ...]]:
    trans = set(s.transverse)
    out = []
    for idx in combinations(range(1, s.dim + 1), degree):
        if full_complex or sum(1 for i in idx if i in trans) <= 1:
            out.append(idx)
    return out


def solve_exactness(
    rp: RegularPoissonStructure,
    w: Multivector,
    box: int | None = None,
    full_complex: bool = False,
) -> ExactnessVerdict:
    """Search for a primitive of a closed multivector inside a mode box.

    Unknowns range over terms with at most one transverse factor unless
    full_complex relaxes that, with Fourier support within box + spread of
    the structure's own coefficients.  A found primitive is re-verified
    symbolically before being reported; a failed search is inconclusive,
    never negative.  The default box is support(W) + spread + 2 after
    transverse denominators of W have been cleared.
    """
    if w.dim != rp.dim:
        raise ValueError("cocycle lives on a different torus")
    if not l1(rp, w).is_zero():
        raise NotClosed("the candidate is not closed, exactness is not posed")
    if w.is_zero():
        return ExactnessVerdict.exact(Multivector.zero(w.dim, max(w.degree - 1, 0)))
    pi_polys = _pi_polynomials(rp)
    if pi_polys is None or w.degree < 1:
        return ExactnessVerdict.inconclusive(box if box is not None else 0)
    try:
        cleared, reciprocal = _clear_denominators(list(w.terms()), rp.splitting.leaf)
    except _Uncleared:
        return ExactnessVerdict.inconclusive(box if box is not None else 0)
    spread = _spread(pi_polys)
    if box is None:
        box = _spread(cleared) + spread + 2
    steps = [m for _, poly in pi_polys for m, _ in poly.modes()]
    indices = _unknown_indices(rp.splitting, w.degree - 1, full_complex)

    def apply(idx: tuple[int, ...], poly: TrigPoly):
        image = l1(rp, Multivector.monomial(w.dim, idx, poly))
        return list(image.terms())

    try:
        solved = _solve_truncated(
            cleared, indices, steps, box + spread, w.dim, apply
        )
    except _Uncleared:
        return ExactnessVerdict.inconclusive(box)
    if solved is None:
        return ExactnessVerdict.inconclusive(box)
    primitive = Multivector.zero(w.dim, w.degree - 1)
    for idx, poly in solved.items():
        primitive = primitive + Multivector.monomial(w.dim, idx, poly)
    if reciprocal is not None:
        primitive = primitive * reciprocal
    if l1(rp, primitive) == w:
        return ExactnessVerdict.exact(primitive)
    return ExactnessVerdict.inconclusive(box)


def leaf_average_witness(
    rp: RegularPoissonStructure, w: Multivector
) -> WitnessRecord | None:
    """Scan component coefficients for a nonzero mean over the leaf torus.

    With constant structure coefficients, every coefficient of an exact
    element is a sum of leaf derivatives, so any component of W with a
    nonzero leaf average obstructs exactness in the full complex.  With a
    single nonconstant leaf-constant factor on rank-2 leaves, the same holds
    for the components containing both leaf factors, against primitives with
    at most one transverse factor per term, and only in degree 3 and up: in
    degree 2 a transverse vector contracts the factor's differential into the
    scanned component without any leaf derivative, killing the criterion.
    Returns None when every scanned average vanishes.
    """
    if w.dim != rp.dim:
        raise ValueError("cocycle lives on a different torus")
    s = rp.splitting
    leaf = set(s.leaf)
    coeffs = list(rp.pi.terms())
    if all(f.is_constant() for _, f in coeffs):
        for idx, f in sorted(w.terms(), key=lambda t: t[0]):
            avg = f.zero_mode(leaf)
            if avg is None:
                raise NotApplicable(
                    "a denominator depends on a leaf coordinate, the mean "
                    "has no closed form"
                )
            if not avg.is_zero():
                return WitnessRecord(CASE_CONSTANT_PI, idx, avg)
        return None
    if len(coeffs) == 1 and len(s.leaf) == 2:
        (pair, h) = coeffs[0]
        if pair == s.leaf and not any(h.depends_on(i) for i in leaf):
            if w.degree == 2:
                raise NotApplicable(
                    "the rank-two criterion is unsound on bivectors: degree-1 "
                    "primitives feed the scanned component without leaf "
                    "derivatives"
                )
            for idx, f in sorted(w.terms(), key=lambda t: t[0]):
                if not leaf <= set(idx):
                    continue
                avg = f.zero_mode(leaf)
                if avg is None:
                    raise NotApplicable(
                        "a denominator depends on a leaf coordinate, the mean "
                        "has no closed form"
                    )
                if not avg.is_zero():
                    return WitnessRecord(CASE_RANK_TWO, idx, avg)
            return None
    raise NotApplicable(
        "structure coefficients are neither constant nor a single "
        "leaf-constant factor on rank-2 leaves"
    )


def decide_exactness(
    rp: RegularPoissonStructure,
    w: Multivector,
    box: int | None = None,
    full_complex: bool = False,
) -> ExactnessVerdict:
    """Witness first, then the truncated solver.

    A rank-two witness only refutes primitives with at most one transverse
    factor per term, so it is ignored when the caller asks for the full
    complex.
    """
    if not l1(rp, w).is_zero():
        raise NotClosed("the candidate is not closed, exactness is not posed")
    try:
        record = leaf_average_witness(rp, w)
    except NotApplicable:
        record = None
    if record is not None and (not full_complex or record.case_tag == CASE_CONSTANT_PI):
        return ExactnessVerdict.not_exact(record)
    return solve_exactness(rp, w, box, full_complex)


# -- the foliation side ------------------------------------------------------


def foliation_kuranishi_decide(
    s: Splitting, eta: FoliatedFormNF, box: int | None = None
) -> ExactnessVerdict:
    """Decide whether the quadratic obstruction of a cocycle is exact.

    The unary differential takes plain leaf derivatives of the coefficients
    in a frame whose normal components are constant, so every component of
    an exact element has zero mean over the leaf coordinates; a nonzero mean
    is a witness.  When all scanned means vanish, a truncated solver looks
    for an actual primitive and re-verifies it.
    """
    if not bott_differential(s, eta).is_zero():
        raise NotClosed("the deformation is not closed, its class is not posed")
    w = v2(s, eta, eta)
    if w.is_zero():
        return ExactnessVerdict.exact(FoliatedFormNF.zero(s, max(w.degree - 1, 0)))
    leaf = set(s.leaf)
    for (idx, a), f in w.terms():
        avg = f.zero_mode(leaf)
        if avg is None:
            continue
        if not avg.is_zero():
            return ExactnessVerdict.not_exact(
                WitnessRecord(CASE_BOTT_FLAT, (idx, a), avg)
            )
    try:
        cleared, reciprocal = _clear_denominators(list(w.terms()), s.leaf)
    except _Uncleared:
        return ExactnessVerdict.inconclusive(box if box is not None else 0)
    if box is None:
        box = _spread(cleared) + 2
    keys = [
        (idx, a)
        for idx in combinations(s.leaf, w.degree - 1)
        for a in s.transverse
    ]

    def apply(key: tuple, poly: TrigPoly):
        idx, a = key
        image = bott_differential(s, FoliatedFormNF.monomial(s, idx, a, poly))
        return list(image.terms())

    try:
        solved = _solve_truncated(cleared, keys, [(0,) * s.dim], box, s.dim, apply)
    except _Uncleared:
        return ExactnessVerdict.inconclusive(box)
    if solved is None:
        return ExactnessVerdict.inconclusive(box)
    terms = {key: TorusFunction.of(poly) for key, poly in solved.items()}
    primitive = FoliatedFormNF(s, w.degree - 1, terms)
    if reciprocal is not None:
        primitive = primitive * reciprocal
    if bott_differential(s, primitive) == w:
        return ExactnessVerdict.exact(primitive)
    return ExactnessVerdict.inconclusive(box)
