"""Exact trigonometric polynomials on the n-torus, and their localizations.

Functions are represented in the complex exponential basis: a finite map from
integer frequency vectors k to Gaussian-rational coefficients, subject to the
reality constraint coeff(-k) == conj(coeff(k)).  Multiplication is mode
convolution, so the canonical form is just "no zero coefficients stored".

Quotients live in :class:`TorusFunction`: a trig polynomial divided by one
that carries a nowhere-vanishing certificate.  Certificates are conservative
(constant domination, products, positive rational scales); a function may be
nowhere zero and still fail to certify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Rat = Union[Fraction, int]
Freq = tuple[int, ...]

_HALF = Fraction(1, 2)


class DivisionUncertified(ArithmeticError):
    """Raised when a divisor's numerator admits no nonvanishing certificate."""


@dataclass(frozen=True, slots=True)
class QQi:
    """A Gaussian rational re + im*i with exact components."""

    re: Fraction
    im: Fraction

    @staticmethod
    def of(re: Rat, im: Rat = 0) -> QQi:
        return QQi(Fraction(re), Fraction(im))

    def __add__(self, other: QQi) -> QQi:
        return QQi(self.re + other.re, self.im + other.im)

    def __sub__(self, other: QQi) -> QQi:
        return QQi(self.re - other.re, self.im - other.im)

    def __neg__(self) -> QQi:
        return QQi(-self.re, -self.im)

    def __mul__(self, other: QQi) -> QQi:
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conj(self) -> QQi:
        return QQi(self.re, -self.im)

    def scale(self, q: Rat) -> QQi:
        return QQi(self.re * q, self.im * q)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0


_QQI_ZERO = QQi(Fraction(0), Fraction(0))


def _neg_freq(k: Freq) -> Freq:
    return tuple(-c for c in k)


class TrigPoly:
    """A real-valued trigonometric polynomial on T^n.

    >>> p = TrigPoly.sin(1, 1) * TrigPoly.sin(1, 1)
    >>> p == TrigPoly.constant(1, Fraction(1, 2)) - TrigPoly.cos(1, (2,)) * Fraction(1, 2)
    True
    """

    __slots__ = ("dim", "_coeffs")

    def __init__(self, dim: int, coeffs: Mapping[Freq, QQi]):
        if dim < 1:
            raise ValueError("dimension must be positive")
        clean: dict[Freq, QQi] = {}
        for k, c in coeffs.items():
            if len(k) != dim:
                raise ValueError(f"frequency {k} has wrong length for T^{dim}")
            if not c.is_zero():
                clean[tuple(k)] = c
        for k, c in clean.items():
            mirror = clean.get(_neg_freq(k), _QQI_ZERO)
            if mirror != c.conj():
                raise ValueError(f"reality constraint violated at mode {k}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_coeffs", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("TrigPoly is immutable")

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def zero(dim: int) -> TrigPoly:
        return TrigPoly(dim, {})

    @staticmethod
    def constant(dim: int, value: Rat) -> TrigPoly:
        q = Fraction(value)
        if q == 0:
            return TrigPoly.zero(dim)
        return TrigPoly(dim, {(0,) * dim: QQi.of(q)})

    @staticmethod
    def _mode(dim: int, k: Union[int, Iterable[int]]) -> Freq:
        if isinstance(k, int):
            if not 1 <= k <= dim:
                raise ValueError(f"coordinate index {k} out of range 1..{dim}")
            return tuple(1 if j == k - 1 else 0 for j in range(dim))
        kk = tuple(int(c) for c in k)
        if len(kk) != dim:
            raise ValueError(f"mode {kk} has wrong length for T^{dim}")
        return kk

    @staticmethod
    def sin(dim: int, k: Union[int, Iterable[int]]) -> TrigPoly:
        """sin(k . theta); an int k means the k-th coordinate angle."""
        kk = TrigPoly._mode(dim, k)
        if all(c == 0 for c in kk):
            return TrigPoly.zero(dim)
        return TrigPoly(
            dim,
            {kk: QQi.of(0, -_HALF), _neg_freq(kk): QQi.of(0, _HALF)},
        )

    @staticmethod
    def cos(dim: int, k: Union[int, Iterable[int]]) -> TrigPoly:
        """cos(k . theta); an int k means the k-th coordinate angle."""
        kk = TrigPoly._mode(dim, k)
        if all(c == 0 for c in kk):
            return TrigPoly.constant(dim, 1)
        return TrigPoly(dim, {kk: QQi.of(_HALF), _neg_freq(kk): QQi.of(_HALF)})

    # -- inspection ----------------------------------------------------------

    def coeff(self, k: Freq) -> QQi:
        return self._coeffs.get(tuple(k), _QQI_ZERO)

    def modes(self) -> Iterator[tuple[Freq, QQi]]:
        return iter(sorted(self._coeffs.items()))

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_constant(self) -> bool:
        return all(all(c == 0 for c in k) for k in self._coeffs)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.coeff((0,) * self.dim).re

    def depends_on(self, i: int) -> bool:
        return any(k[i - 1] != 0 for k in self._coeffs)

    def support_radius(self) -> int:
        return max((max(abs(c) for c in k) for k in self._coeffs), default=0)

    # -- ring operations -----------------------------------------------------

    def _require_same_torus(self, other: TrigPoly) -> None:
        if self.dim != other.dim:
            raise ValueError("operands live on different tori")

    def __add__(self, other: TrigPoly) -> TrigPoly:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        self._require_same_torus(other)
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out.get(k, _QQI_ZERO) + c
        return TrigPoly(self.dim, out)

    def __sub__(self, other: TrigPoly) -> TrigPoly:
        return self + (-other)

    def __neg__(self) -> TrigPoly:
        return TrigPoly(self.dim, {k: -c for k, c in self._coeffs.items()})

    def __mul__(self, other: Union[TrigPoly, Rat]) -> TrigPoly:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TrigPoly):
            return NotImplemented
        self._require_same_torus(other)
        out: dict[Freq, QQi] = {}
        for k1, c1 in self._coeffs.items():
            for k2, c2 in other._coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, _QQI_ZERO) + c1 * c2
        return TrigPoly(self.dim, out)

    def __rmul__(self, other: Rat) -> TrigPoly:
        return self.scale(other)

    def scale(self, q: Rat) -> TrigPoly:
        if q == 0:
            return TrigPoly.zero(self.dim)
        return TrigPoly(self.dim, {k: c.scale(q) for k, c in self._coeffs.items()})

    def conj(self) -> TrigPoly:
        return self

    def partial(self, i: int) -> TrigPoly:
        """d/dtheta_i, acting mode-wise as coeff(k) -> i*k_i*coeff(k)."""
        if not 1 <= i <= self.dim:
            raise ValueError(f"coordinate index {i} out of range 1..{self.dim}")
        out = {}
        for k, c in self._coeffs.items():
            out[k] = QQi.of(0, k[i - 1]) * c
        return TrigPoly(self.dim, out)

    def zero_mode(self, indices: Iterable[int]) -> TrigPoly:
        """Keep only the modes with k_i = 0 for every i in ``indices``.

        This is the mean value over the corresponding subtorus, normalized so
        that the (2*pi)^|S| volume factor drops.
        """
        s = set(indices)
        for i in s:
            if not 1 <= i <= self.dim:
                raise ValueError(f"coordinate index {i} out of range 1..{self.dim}")
        out = {
            k: c
            for k, c in self._coeffs.items()
            if all(k[i - 1] == 0 for i in s)
        }
        return TrigPoly(self.dim, out)

    def evaluate(self, angles: Iterable[float]) -> float:
        """Numeric value at a point; a float sanity check, never a proof."""
        th = list(angles)
        total = 0.0
        for k, c in self._coeffs.items():
            phase = sum(ki * ti for ki, ti in zip(k, th))
            total += float(c.re) * math.cos(phase) - float(c.im) * math.sin(phase)
        return total

    # -- value semantics -----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.dim == other.dim and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self._coeffs.items())))

    def __repr__(self) -> str:
        if self.is_zero():
            return f"TrigPoly.zero({self.dim})"
        parts = ", ".join(f"{k}: {c.re}+{c.im}i" for k, c in self.modes())
        return f"TrigPoly({self.dim}, {{{parts}}})"


# -- nonvanishing certificates ----------------------------------------------


@dataclass(frozen=True, slots=True)
class ConstantDomination:
    """Valid when coeff(0) is real, positive, and strictly dominates the
    absolute coefficient mass of all other modes."""


@dataclass(frozen=True, slots=True)
class PositiveRationalScale:
    """poly == scale * base with scale > 0 and base certified."""

    scale: Fraction
    base: TrigPoly
    base_cert: "Certificate"


@dataclass(frozen=True, slots=True)
class Product:
    """poly == product of the factors, each certified."""

    factors: tuple[tuple[TrigPoly, "Certificate"], ...]


Certificate = Union[ConstantDomination, PositiveRationalScale, Product]


def _dominates(poly: TrigPoly) -> bool:
    zero = (0,) * poly.dim
    head = poly.coeff(zero)
    if head.im != 0 or head.re <= 0:
        return False
    mass = Fraction(0)
    for k, c in poly._coeffs.items():
        if k != zero:
            mass += abs(c.re) + abs(c.im)
    return head.re > mass


def certificate_valid(poly: TrigPoly, cert: Certificate) -> bool:
    """Check a certificate against the polynomial it is claimed for."""
    if isinstance(cert, ConstantDomination):
        return _dominates(poly)
    if isinstance(cert, PositiveRationalScale):
        return (
            cert.scale > 0
            and certificate_valid(cert.base, cert.base_cert)
            and poly == cert.base.scale(cert.scale)
        )
    if isinstance(cert, Product):
        if not cert.factors:
            return False
        acc = TrigPoly.constant(poly.dim, 1)
        for factor, sub in cert.factors:
            if not certificate_valid(factor, sub):
                return False
            acc = acc * factor
        return acc == poly
    return False


def certify_nonvanishing(poly: TrigPoly) -> Certificate | None:
    """Try to certify that the polynomial vanishes nowhere.

    Conservative: returns None when the constant-domination test fails, with
    no claim either way about the function's actual zero set.

    >>> certify_nonvanishing(TrigPoly.sin(1, 1) + TrigPoly.constant(1, 2))
    ConstantDomination()
    >>> certify_nonvanishing(TrigPoly.sin(1, 1)) is None
    True
    """
    if _dominates(poly):
        return ConstantDomination()
    return None


_ONE_CERT = ConstantDomination()


# -- localized ring ----------------------------------------------------------


class TorusFunction:
    """num / den with a certified nowhere-vanishing denominator.

    Equality is semantic: a/b == c/d iff a*d - c*b == 0.  No gcd reduction is
    attempted beyond absorbing constant denominators.
    """

    __slots__ = ("num", "den", "den_cert")

    def __init__(self, num: TrigPoly, den: TrigPoly, den_cert: Certificate):
        if num.dim != den.dim:
            raise ValueError("numerator and denominator on different tori")
        if not certificate_valid(den, den_cert):
            raise ValueError("invalid denominator certificate")
        if num.is_zero() and not den.is_constant():
            den = TrigPoly.constant(num.dim, 1)
            den_cert = _ONE_CERT
        elif den.is_constant():
            c = den.constant_value()
            if c != 1:
                num = num.scale(Fraction(1, 1) / c)
                den = TrigPoly.constant(num.dim, 1)
                den_cert = _ONE_CERT
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "den_cert", den_cert)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("TorusFunction is immutable")

    @staticmethod
    def of(poly: TrigPoly) -> TorusFunction:
        return TorusFunction(poly, TrigPoly.constant(poly.dim, 1), _ONE_CERT)

    @staticmethod
    def constant(dim: int, value: Rat) -> TorusFunction:
        return TorusFunction.of(TrigPoly.constant(dim, value))

    @staticmethod
    def quotient(num: TrigPoly, den: TrigPoly) -> TorusFunction:
        """num / den, certifying the denominator or failing loudly."""
        cert = certify_nonvanishing(den)
        if cert is None:
            raise DivisionUncertified("denominator admits no certificate")
        return TorusFunction(num, den, cert)

    @property
    def dim(self) -> int:
        return self.num.dim

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        if self.num.is_zero():
            return True
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Fraction(0)
        return self.num.constant_value() / self.den.constant_value()

    def depends_on(self, i: int) -> bool:
        return self.num.depends_on(i) or self.den.depends_on(i)

    def support_radius(self) -> int:
        return max(self.num.support_radius(), self.den.support_radius())

    def _coerce(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        if isinstance(other, TorusFunction):
            return other
        if isinstance(other, TrigPoly):
            return TorusFunction.of(other)
        return TorusFunction.constant(self.dim, other)

    def _compose_den(self, other: TorusFunction) -> tuple[TrigPoly, Certificate]:
        if self.den.is_constant() and self.den.constant_value() == 1:
            return other.den, other.den_cert
        if other.den.is_constant() and other.den.constant_value() == 1:
            return self.den, self.den_cert
        den = self.den * other.den
        cert = Product(((self.den, self.den_cert), (other.den, other.den_cert)))
        return den, cert

    def __add__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        o = self._coerce(other)
        den, cert = self._compose_den(o)
        return TorusFunction(self.num * o.den + o.num * self.den, den, cert)

    __radd__ = __add__

    def __sub__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        return self._coerce(other) - self

    def __neg__(self) -> TorusFunction:
        return TorusFunction(-self.num, self.den, self.den_cert)

    def __mul__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        if isinstance(other, (int, Fraction)):
            return TorusFunction(self.num.scale(other), self.den, self.den_cert)
        o = self._coerce(other)
        den, cert = self._compose_den(o)
        return TorusFunction(self.num * o.num, den, cert)

    __rmul__ = __mul__

    def __truediv__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        o = self._coerce(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other: Union[TorusFunction, TrigPoly, Rat]) -> TorusFunction:
        return self._coerce(other) / self

    def reciprocal(self) -> TorusFunction:
        num_cert = certify_nonvanishing(self.num)
        if num_cert is None:
            raise DivisionUncertified("divisor numerator admits no certificate")
        return TorusFunction(self.den, self.num, num_cert)

    def partial(self, i: int) -> TorusFunction:
        """d/dtheta_i by the quotient rule."""
        if self.den.is_constant():
            return TorusFunction(self.num.partial(i), self.den, self.den_cert)
        num = self.num.partial(i) * self.den - self.num * self.den.partial(i)
        den = self.den * self.den
        cert = Product(((self.den, self.den_cert), (self.den, self.den_cert)))
        return TorusFunction(num, den, cert)

    def zero_mode(self, indices: Iterable[int]) -> TorusFunction | None:
        """Mean value over the subtorus of the listed coordinates.

        Returns None when the denominator depends on one of them: the mean of
        such a quotient has no closed form in this ring.
        """
        s = set(indices)
        if any(self.den.depends_on(i) for i in s):
            return None
        return TorusFunction(self.num.zero_mode(s), self.den, self.den_cert)

    def evaluate(self, angles: Iterable[float]) -> float:
        th = list(angles)
        return self.num.evaluate(th) / self.den.evaluate(th)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, TrigPoly)):
            other = self._coerce(other)
        if not isinstance(other, TorusFunction):
            return NotImplemented
        if self.dim != other.dim:
            return False
        return (self.num * other.den - other.num * self.den).is_zero()

    __hash__ = None  # semantic equality is incompatible with cheap hashing

    def __repr__(self) -> str:
        if self.den.is_constant() and self.den.constant_value() == 1:
            return f"TorusFunction({self.num!r})"
        return f"TorusFunction({self.num!r} / {self.den!r})"


def tf_zero(dim: int) -> TorusFunction:
    return TorusFunction.constant(dim, 0)


def tf_one(dim: int) -> TorusFunction:
    return TorusFunction.constant(dim, 1)
