"""Exact calculus of differential polynomials in one scalar field.

A differential polynomial is a rational-coefficient sum of monomials in the
jet variables u_0, u_1, u_2, ... (u_k the k-th spatial derivative of u). The
central operation is the evolutionary vector-field action

    apply_A(F, G) = sum_k D_x^k(F) * dG/du_k,

the generator induced by the flow du/dt = F: it is linear, satisfies the
Leibniz law, sends u to F, and its powers applied to u are exactly the scaled
time-Taylor coefficients of the flow, n! c_n. All arithmetic here is exact
(``fractions.Fraction``); floats appear only in grid evaluation.

A plain-text syntax (``u_k``, ``+``, ``-``, ``*``, ``^``, rationals ``p/q``)
round-trips through ``parse_diffpoly`` / ``str``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import FieldError

PowersKey = tuple[tuple[int, int], ...]

RationalLike = Fraction | int


def _normalize_powers(powers: Mapping[int, int] | Iterable[tuple[int, int]]) -> PowersKey:
    items = dict(powers)
    for order, exp in items.items():
        if order < 0:
            raise ValueError(f"derivative order must be nonnegative, got {order}")
        if exp <= 0:
            raise ValueError(f"exponents must be positive, got u_{order}^{exp}")
    return tuple(sorted(items.items()))


@dataclass(frozen=True)
class DiffMonomial:
    """One term coeff * prod_k u_k^e_k in canonical form."""

    coeff: Fraction
    powers: PowersKey

    @property
    def total_degree(self) -> int:
        return sum(e for _, e in self.powers)


class DiffPoly:
    """Immutable canonical sum of differential monomials."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[PowersKey, RationalLike] | None = None):
        clean: dict[PowersKey, Fraction] = {}
        for key, coeff in (terms or {}).items():
            frac = Fraction(coeff)
            if frac != 0:
                clean[_normalize_powers(key)] = frac
        object.__setattr__(self, "_terms", clean)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return DiffPoly()

    @staticmethod
    def constant(c: RationalLike) -> "DiffPoly":
        return DiffPoly({(): c})

    @staticmethod
    def u(order: int = 0) -> "DiffPoly":
        return DiffPoly({((order, 1),): 1})

    @staticmethod
    def monomial(coeff: RationalLike, powers: Mapping[int, int]) -> "DiffPoly":
        return DiffPoly({_normalize_powers(powers): coeff})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def monomials(self) -> tuple[DiffMonomial, ...]:
        """Terms sorted by total degree, then lexicographic powers."""
        keys = sorted(self._terms, key=lambda k: (sum(e for _, e in k), k))
        return tuple(DiffMonomial(self._terms[k], k) for k in keys)

    @property
    def max_order(self) -> int:
        """Highest derivative order appearing (0 for constants and zero)."""
        orders = [k for key in self._terms for k, _ in key]
        return max(orders, default=0)

    def derivative_orders(self) -> set[int]:
        return {k for key in self._terms for k, _ in key}

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return NotImplemented
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return DiffPoly(terms)

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return DiffPoly({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        terms: dict[PowersKey, Fraction] = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                merged = dict(ka)
                for order, exp in kb:
                    merged[order] = merged.get(order, 0) + exp
                key = tuple(sorted(merged.items()))
                terms[key] = terms.get(key, Fraction(0)) + ca * cb
        return DiffPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffPoly":
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = DiffPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    # -- calculus ----------------------------------------------------------

    def partial(self, order: int) -> "DiffPoly":
        """Partial derivative with respect to the jet variable u_order."""
        terms: dict[PowersKey, Fraction] = {}
        for key, coeff in self._terms.items():
            powers = dict(key)
            if order not in powers:
                continue
            exp = powers[order]
            new = dict(powers)
            if exp == 1:
                del new[order]
            else:
                new[order] = exp - 1
            nkey = tuple(sorted(new.items()))
            terms[nkey] = terms.get(nkey, Fraction(0)) + coeff * exp
        return DiffPoly(terms)

    def total_derivative(self) -> "DiffPoly":
        """Total x-derivative: D_x(u_k) = u_{k+1}, extended by Leibniz."""
        out = DiffPoly.zero()
        for key, coeff in self._terms.items():
            powers = dict(key)
            for order, exp in key:
                new = dict(powers)
                if exp == 1:
                    del new[order]
                else:
                    new[order] = exp - 1
                new[order + 1] = new.get(order + 1, 0) + 1
                out = out + DiffPoly({tuple(sorted(new.items())): coeff * exp})
        return out

    # -- text form ---------------------------------------------------------

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts: list[str] = []
        for i, mono in enumerate(self.monomials()):
            mag = abs(mono.coeff)
            factors: list[str] = []
            if mag != 1 or not mono.powers:
                factors.append(str(mag))
            for order, exp in mono.powers:
                factors.append(f"u_{order}" + (f"^{exp}" if exp > 1 else ""))
            body = "*".join(factors)
            if i == 0:
                parts.append(f"-{body}" if mono.coeff < 0 else body)
            else:
                parts.append(f" - {body}" if mono.coeff < 0 else f" + {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"DiffPoly({self})"


# ---------------------------------------------------------------------------
# the generator action
# ---------------------------------------------------------------------------


def apply_A(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """Action of the generator of du/dt = f on g: sum_k D_x^k(f) * dg/du_k."""
    out = DiffPoly.zero()
    dxk = f
    for k in range(g.max_order + 1):
        if k > 0:
            dxk = dxk.total_derivative()
        pg = g.partial(k)
        if not pg.is_zero:
            out = out + dxk * pg
    return out


def a_power_u(f: DiffPoly, n: int) -> DiffPoly:
    """n-fold generator action starting from g = u (n = 0 gives u itself)."""
    if n < 0:
        raise ValueError(f"power must be nonnegative, got {n}")
    g = DiffPoly.u()
    for _ in range(n):
        g = apply_A(f, g)
    return g


def derivation_check(
    f: DiffPoly,
    g: DiffPoly,
    h: DiffPoly,
    operator: Callable[[DiffPoly, DiffPoly], DiffPoly] = apply_A,
) -> bool:
    """Exact Leibniz test: operator(f, g*h) == operator(f,g)*h + g*operator(f,h).

    ``operator`` is injectable so deliberately broken maps can be shown to
    fail the law (negative control)."""
    defect = operator(f, g * h) - operator(f, g) * h - g * operator(f, h)
    return defect.is_zero


# ---------------------------------------------------------------------------
# grid evaluation
# ---------------------------------------------------------------------------


def eval_diffpoly(p: DiffPoly, u_samples: np.ndarray) -> np.ndarray:
    """Evaluate ``p`` on 1-D periodic samples of u (spectral derivatives).

    Derivatives use the signed-index wavenumbers with the Nyquist mode
    zeroed, matching the field-level derivative convention.
    """
    u = np.asarray(u_samples, dtype=np.float64)
    if u.ndim != 1:
        raise FieldError(f"expected a 1-D sample array, got shape {u.shape}")
    if not np.isfinite(u).all():
        raise FieldError("sample array contains non-finite values")
    n = u.size
    j = np.fft.fftfreq(n, d=1.0 / n)
    j[n // 2] = 0.0
    derivs: dict[int, np.ndarray] = {0: u}
    u_hat = np.fft.fft(u)
    for k in range(1, p.max_order + 1):
        u_hat = u_hat * (1j * j)
        derivs[k] = np.real(np.fft.ifft(u_hat))
    out = np.zeros(n)
    for mono in p.monomials():
        term = np.full(n, float(mono.coeff))
        for order, exp in mono.powers:
            term *= derivs[order] ** exp
        out += term
    return out


# ---------------------------------------------------------------------------
# plain-text syntax
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+\s*/\s*\d+|\d+)|(u_\d+)|([+\-*^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"unexpected input at {text[pos:]!r}")
        if m.group(1):
            tokens.append(("rational", m.group(1).replace(" ", "")))
        elif m.group(2):
            tokens.append(("name", m.group(2)))
        else:
            tokens.append(("op", m.group(3)))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent over: expr := ['-'] term (('+'|'-') term)*,
    term := factor ('*' factor)*, factor := primary ['^' INT],
    primary := rational | u_k | '(' expr ')'."""

    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.take()
        if tok != ("op", op):
            raise ValueError(f"expected {op!r}, got {tok[1]!r}")

    def parse(self) -> DiffPoly:
        poly = self.expr()
        if self.peek() is not None:
            raise ValueError(f"trailing input at {self.peek()[1]!r}")
        return poly

    def expr(self) -> DiffPoly:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        poly = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            poly = poly + rhs if op == "+" else poly - rhs
        return poly

    def term(self) -> DiffPoly:
        poly = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            poly = poly * self.factor()
        return poly

    def factor(self) -> DiffPoly:
        base = self.primary()
        if self.peek() == ("op", "^"):
            self.take()
            kind, text = self.take()
            if kind != "rational" or "/" in text:
                raise ValueError(f"exponent must be a nonnegative integer, got {text!r}")
            return base ** int(text)
        return base

    def primary(self) -> DiffPoly:
        kind, text = self.take()
        if kind == "rational":
            if "/" in text:
                num, den = text.split("/")
                return DiffPoly.constant(Fraction(int(num), int(den)))
            return DiffPoly.constant(int(text))
        if kind == "name":
            return DiffPoly.u(int(text[2:]))
        if (kind, text) == ("op", "("):
            poly = self.expr()
            self.expect_op(")")
            return poly
        raise ValueError(f"unexpected token {text!r}")


def parse_diffpoly(text: str) -> DiffPoly:
    """Parse the plain-text syntax; inverse of ``str`` on canonical forms."""
    return _Parser(_tokenize(text)).parse()
