"""Sparse exact polynomials in the orbit invariants tau_1..tau_rank.

Coefficients are affine in the coupling nu (c0 + c1*nu) over Fractions.
Products that would raise the nu-degree above one are rejected: every
coefficient of the target operator is at most linear in nu, so such a
product always signals a transcription or derivation mistake.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class NuDegreeError(ValueError):
    """Raised when an operation would produce a nu-degree above one."""


@dataclass(frozen=True)
class NuLinear:
    c0: Fraction = Fraction(0)
    c1: Fraction = Fraction(0)

    @staticmethod
    def of(c0=0, c1=0) -> "NuLinear":
        return NuLinear(Fraction(c0), Fraction(c1))

    def __add__(self, other: "NuLinear") -> "NuLinear":
        return NuLinear(self.c0 + other.c0, self.c1 + other.c1)

    def __sub__(self, other: "NuLinear") -> "NuLinear":
        return NuLinear(self.c0 - other.c0, self.c1 - other.c1)

    def __neg__(self) -> "NuLinear":
        return NuLinear(-self.c0, -self.c1)

    def __mul__(self, other: "NuLinear") -> "NuLinear":
        if self.c1 != 0 and other.c1 != 0:
            raise NuDegreeError("product of two nu-linear coefficients")
        return NuLinear(
            self.c0 * other.c0,
            self.c0 * other.c1 + self.c1 * other.c0,
        )

    def scale(self, c) -> "NuLinear":
        c = Fraction(c)
        return NuLinear(c * self.c0, c * self.c1)

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    def eval(self, nu):
        if isinstance(nu, (int, Fraction)):
            return self.c0 + self.c1 * Fraction(nu)
        return float(self.c0) + float(self.c1) * nu

    def __str__(self) -> str:
        if self.c1 == 0:
            return str(self.c0)
        if self.c0 == 0:
            return f"{self.c1}*nu"
        sign = "+" if self.c1 > 0 else "-"
        return f"({self.c0} {sign} {abs(self.c1)}*nu)"


ZERO = NuLinear()
ONE = NuLinear(Fraction(1))


class MultiPoly:
    """Immutable sparse polynomial: exponent tuple -> NuLinear coefficient."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Mapping[tuple[int, ...], NuLinear] = ()):
        clean = {}
        for exp, coef in dict(terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != rank or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent tuple {exp} for rank {rank}")
            if not coef.is_zero():
                clean[exp] = coef
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(rank: int) -> "MultiPoly":
        return MultiPoly(rank, {})

    @staticmethod
    def constant(rank: int, value) -> "MultiPoly":
        coef = value if isinstance(value, NuLinear) else NuLinear.of(value)
        return MultiPoly(rank, {(0,) * rank: coef})

    @staticmethod
    def variable(rank: int, index: int) -> "MultiPoly":
        """tau_index as a polynomial; index is 1-based."""
        exp = tuple(1 if k == index - 1 else 0 for k in range(rank))
        return MultiPoly(rank, {exp: ONE})

    # -- ring operations ----------------------------------------------

    def _check(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly) or other.rank != self.rank:
            raise ValueError("rank mismatch")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for exp, coef in other.terms.items():
            out[exp] = out.get(exp, ZERO) + coef
        return MultiPoly(self.rank, out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for exp, coef in other.terms.items():
            out[exp] = out.get(exp, ZERO) - coef
        return MultiPoly(self.rank, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.rank, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out: dict[tuple[int, ...], NuLinear] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[exp] = out.get(exp, ZERO) + prod
        return MultiPoly(self.rank, out)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(self.rank, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def scale(self, c) -> "MultiPoly":
        return MultiPoly(self.rank, {e: coef.scale(c) for e, coef in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.rank == other.rank
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def is_nu_free(self) -> bool:
        return all(c.c1 == 0 for c in self.terms.values())

    # -- calculus and degree ------------------------------------------

    def partial_derivative(self, index: int) -> "MultiPoly":
        """Formal derivative with respect to tau_index (1-based)."""
        i = index - 1
        out = {}
        for exp, coef in self.terms.items():
            if exp[i] == 0:
                continue
            new = list(exp)
            new[i] -= 1
            out[tuple(new)] = coef.scale(exp[i])
        return MultiPoly(self.rank, out)

    def weighted_degree(self, cv: Sequence[int]):
        """Max over terms of sum(cv_i * p_i); -inf for the zero polynomial."""
        if not self.terms:
            return float("-inf")
        return max(sum(c * p for c, p in zip(cv, exp)) for exp in self.terms)

    # -- evaluation ----------------------------------------------------

    def evaluate(self, point: Sequence, nu=0):
        """Evaluate at tau = point.

        Fraction/int inputs give an exact Fraction; float inputs are
        accumulated with math.fsum; anything else (mpmath, complex) uses
        plain summation in that arithmetic.
        """
        if len(point) != self.rank:
            raise ValueError("point length does not match rank")
        exact = all(isinstance(v, (int, Fraction)) for v in point) and isinstance(
            nu, (int, Fraction)
        )
        powers = _power_table(point, self.terms)
        if exact:
            total = Fraction(0)
            for exp, coef in self.terms.items():
                mono = Fraction(1)
                for i, p in enumerate(exp):
                    if p:
                        mono *= powers[i][p]
                total += (Fraction(coef.c0) + Fraction(coef.c1) * Fraction(nu)) * mono
            return total
        floats = all(isinstance(v, (int, float)) for v in point)
        vals = []
        for exp, coef in self.terms.items():
            mono = None
            for i, p in enumerate(exp):
                if p:
                    mono = powers[i][p] if mono is None else mono * powers[i][p]
            c = coef.eval(nu)
            vals.append(c if mono is None else c * mono)
        if not vals:
            return 0.0 if floats else 0
        if floats and all(isinstance(v, (int, float)) for v in vals):
            return math.fsum(vals)
        if all(isinstance(v, complex) for v in vals):
            return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
        total = vals[0]
        for v in vals[1:]:
            total = total + v
        return total

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose: replace tau_i by images[i-1] (images must be nu-free)."""
        if len(images) != self.rank:
            raise ValueError("need one image per variable")
        for img in images:
            self._check(img)
            if not img.is_nu_free():
                raise NuDegreeError("substitution images must be nu-free")
        power_cache: dict[tuple[int, int], MultiPoly] = {}

        def image_power(i: int, p: int) -> MultiPoly:
            key = (i, p)
            if key not in power_cache:
                power_cache[key] = images[i] ** p
            return power_cache[key]

        total = MultiPoly.zero(self.rank)
        for exp, coef in self.terms.items():
            mono = MultiPoly.constant(self.rank, coef)
            for i, p in enumerate(exp):
                if p:
                    mono = mono * image_power(i, p)
            total = total + mono
        return total

    # -- serialization --------------------------------------------------

    def canonical_terms(self, cv: Sequence[int]) -> list[dict]:
        rows = []
        for exp, coef in self.terms.items():
            wd = sum(c * p for c, p in zip(cv, exp))
            for nu_pow, val in ((0, coef.c0), (1, coef.c1)):
                if val != 0:
                    rows.append((wd, exp, nu_pow, val))
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        return [
            {
                "num": str(val.numerator),
                "den": str(val.denominator),
                "nu_pow": nu_pow,
                "exp": list(exp),
            }
            for _, exp, nu_pow, val in rows
        ]

    @staticmethod
    def from_terms(rank: int, rows: Iterable[Mapping]) -> "MultiPoly":
        terms: dict[tuple[int, ...], NuLinear] = {}
        for row in rows:
            exp = tuple(int(e) for e in row["exp"])
            val = Fraction(int(row["num"]), int(row["den"]))
            coef = terms.get(exp, ZERO)
            if int(row["nu_pow"]) == 0:
                coef = coef + NuLinear(val)
            else:
                coef = coef + NuLinear(Fraction(0), val)
            terms[exp] = coef
        return MultiPoly(rank, terms)

    def checksum(self, cv: Sequence[int]) -> str:
        blob = json.dumps(self.canonical_terms(cv), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, coef in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            factors = [
                f"t{i+1}" + (f"^{p}" if p > 1 else "")
                for i, p in enumerate(exp)
                if p
            ]
            mono = "*".join(factors)
            parts.append(f"{coef}*{mono}" if mono else str(coef))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"MultiPoly({self})"


def _power_table(point: Sequence, terms) -> list[list]:
    """powers[i][p] = point[i]**p for every power appearing in terms."""
    rank = len(point)
    max_pow = [0] * rank
    for exp in terms:
        for i, p in enumerate(exp):
            if p > max_pow[i]:
                max_pow[i] = p
    table = []
    for i in range(rank):
        row = [1, point[i]] if max_pow[i] >= 1 else [1]
        for p in range(2, max_pow[i] + 1):
            row.append(row[-1] * point[i])
        table.append(row)
    return table
