"""Zassenhaus depth in a free pro-p group through the mod-p Magnus embedding.

Generator ``x_i`` is sent to ``1 + X_i`` in the algebra of noncommutative
power series over F_p, truncated at total degree N.  The depth of a word w is
the lowest degree of a nonzero term of ``embed(w) - 1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from .errors import PreconditionError, ResourceError

DEFAULT_TRUNCATION = 12
DEFAULT_TERM_CAP = 10**7


@dataclass(frozen=True)
class FreeWord:
    """A freely reduced word in generators ``x_0 .. x_{d-1}``.

    ``letters`` is a tuple of ``(generator, exponent)`` pairs with nonzero
    exponents and no two adjacent pairs on the same generator.
    """

    d: int
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        reduced: list[list[int]] = []
        for g, e in self.letters:
            if not 0 <= g < self.d:
                raise ValueError(f"generator x{g} outside the range of {self.d} generators")
            if e == 0:
                continue
            if reduced and reduced[-1][0] == g:
                reduced[-1][1] += e
                if reduced[-1][1] == 0:
                    reduced.pop()
            else:
                reduced.append([g, e])
        object.__setattr__(self, "letters", tuple((g, e) for g, e in reduced))

    @classmethod
    def identity(cls, d: int) -> "FreeWord":
        return cls(d)

    @classmethod
    def generator(cls, i: int, d: int) -> "FreeWord":
        return cls(d, ((i, 1),))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.letters)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        if self.d != other.d:
            raise ValueError("words live in free groups of different rank")
        return FreeWord(self.d, self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(self.d, tuple((g, -e) for g, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "FreeWord":
        base = self if n >= 0 else self.inverse()
        return FreeWord(self.d, base.letters * abs(n))

    def commutator(self, other: "FreeWord") -> "FreeWord":
        """``[a, b] = a b a^-1 b^-1``."""
        return self * other * self.inverse() * other.inverse()

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"x{g}" if e == 1 else f"x{g}^{e}" for g, e in self.letters)

    @classmethod
    def parse(cls, text: str, d: Optional[int] = None) -> "FreeWord":
        """Read ``x0 x1 x0^-1``, brackets ``[x0,x1]``, groups ``(x0 x1)^3``.

        When ``d`` is omitted it is one more than the largest index used.
        """
        parser = _WordParser(text)
        letters = parser.word()
        if parser.peek() is not None:
            raise ValueError(f"unexpected {parser.peek()!r} in word {text!r}")
        top = max((g for g, _ in letters), default=-1) + 1
        if d is None:
            d = max(top, 1)
        return cls(d, tuple(letters))


_TOKEN = re.compile(r"\s*(?:(x\d+)|(\^-?\d+)|([\[\](),*]))")


class _WordParser:
    def __init__(self, text: str):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse word near {text[pos:]!r}")
            self.tokens.append(m.group(m.lastindex))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'a token'}, found {tok!r}")
        self.i += 1
        return tok

    def word(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        while self.peek() not in (None, ",", "]", ")"):
            if self.peek() == "*":
                self.take()
                continue
            out.extend(self.factor())
        return out

    def factor(self) -> list[tuple[int, int]]:
        tok = self.take()
        if tok.startswith("x"):
            atom = [(int(tok[1:]), 1)]
        elif tok == "(":
            atom = self.word()
            self.take(")")
        elif tok == "[":
            a = self.word()
            self.take(",")
            b = self.word()
            self.take("]")
            inv = lambda w: [(g, -e) for g, e in reversed(w)]
            atom = a + b + inv(a) + inv(b)
        else:
            raise ValueError(f"unexpected {tok!r}")
        if self.peek() is not None and self.peek().startswith("^"):
            n = int(self.take()[1:])
            base = atom if n >= 0 else [(g, -e) for g, e in reversed(atom)]
            atom = base * abs(n)
        return atom


class NCSeries:
    """Truncated noncommutative power series over F_p in d variables.

    Monomials are byte strings of variable indices; zero coefficients are never
    stored and no monomial is longer than ``N``.
    """

    __slots__ = ("p", "d", "N", "coeffs")

    def __init__(self, p: int, d: int, N: int, coeffs: Optional[dict[bytes, int]] = None):
        if N < 1:
            raise PreconditionError("truncation N must be >= 1")
        self.p, self.d, self.N = p, d, N
        self.coeffs = {}
        for mono, c in (coeffs or {}).items():
            c %= p
            if c and len(mono) <= N:
                self.coeffs[bytes(mono)] = c

    @classmethod
    def one(cls, p: int, d: int, N: int) -> "NCSeries":
        return cls(p, d, N, {b"": 1})

    def _check(self, other: "NCSeries"):
        if (self.p, self.d, self.N) != (other.p, other.d, other.N):
            raise ValueError("series over different rings")

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCSeries):
            return NotImplemented
        return (self.p, self.d, self.N) == (other.p, other.d, other.N) and self.coeffs == other.coeffs

    def __add__(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return NCSeries(self.p, self.d, self.N, out)

    def __sub__(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) - c
        return NCSeries(self.p, self.d, self.N, out)

    def __mul__(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        p, N = self.p, self.N
        right = sorted(other.coeffs.items(), key=lambda kv: len(kv[0]))
        out: dict[bytes, int] = {}
        for a, ca in self.coeffs.items():
            room = N - len(a)
            for b, cb in right:
                if len(b) > room:
                    break
                m = a + b
                out[m] = (out.get(m, 0) + ca * cb) % p
        return NCSeries(p, self.d, N, out)

    def __pow__(self, k: int) -> "NCSeries":
        """Truncated power via ``(c (1 + U))^k = c^k sum_j binom(k, j) U^j``.

        Only the U^j with a nonzero binomial mod p are kept; intermediate powers
        are carried only up to the degree later products can still use.
        """
        if k < 0:
            raise ValueError("negative powers of a series are not supported")
        p, N = self.p, self.N
        c0 = self.coeffs.get(b"", 0)
        if c0:
            inv = pow(c0, -1, p)
            u = {m: c * inv % p for m, c in self.coeffs.items() if m}
        else:
            u = dict(self.coeffs)
        if k == 0:
            return NCSeries.one(p, self.d, N)
        if not u:
            return NCSeries(p, self.d, N, {b"": pow(c0, k, p)})
        v = min(len(m) for m in u)
        top = min(k, N // v)
        binoms, b = [1], 1
        for j in range(1, top + 1):
            b = b * (k - j + 1) // j
            binoms.append(b % p if c0 else int(j == k))
        if not c0:
            binoms[0] = 0
        needed = [j for j in range(top + 1) if binoms[j]]
        if not needed:
            return NCSeries(p, self.d, N)
        last = needed[-1]
        budget = [0] * (last + 1)
        budget[last] = N
        for j in range(last - 1, -1, -1):
            budget[j] = max(N if binoms[j] else -1, budget[j + 1] - v)
        u_sorted = sorted(u.items(), key=lambda kv: len(kv[0]))
        out: dict[bytes, int] = {b"": binoms[0]} if binoms[0] else {}
        power: dict[bytes, int] = {b"": 1}
        for j in range(1, last + 1):
            cap = budget[j]
            nxt: dict[bytes, int] = {}
            for a, ca in power.items():
                room = cap - len(a)
                for m, cm in u_sorted:
                    if len(m) > room:
                        break
                    key = a + m
                    nxt[key] = (nxt.get(key, 0) + ca * cm) % p
            power = {m: c for m, c in nxt.items() if c}
            if binoms[j]:
                for m, c in power.items():
                    out[m] = out.get(m, 0) + binoms[j] * c
        scale = pow(c0, k, p) if c0 else 1
        return NCSeries(p, self.d, N, {m: c * scale for m, c in out.items()})

    def __len__(self) -> int:
        return len(self.coeffs)

    def coefficient(self, monomial) -> int:
        return self.coeffs.get(bytes(monomial), 0)

    def valuation(self) -> Optional[int]:
        """Least degree of a nonzero term, or None for the zero series."""
        return min((len(m) for m in self.coeffs), default=None)

    def homogeneous(self, degree: int) -> dict[bytes, int]:
        return {m: c for m, c in self.coeffs.items() if len(m) == degree}

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for m, c in sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), kv[0])):
            mono = "*".join(f"X{i}" for i in m)
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(terms)


def _binomial_row(e: int, N: int, p: int) -> list[int]:
    """Coefficients of ``(1 + X)^e`` mod p up to degree N (e may be negative)."""
    row, b = [1], 1
    for k in range(1, N + 1):
        b = b * (e - k + 1) // k
        row.append(b % p)
    return row


def _embed_letters(letters, p: int, d: int, N: int, max_terms: int) -> dict[bytes, int]:
    coeffs: dict[bytes, int] = {b"": 1}
    for g, e in letters:
        row = _binomial_row(e, N, p)
        steps = [(k, bytes([g]) * k, c) for k, c in enumerate(row) if c]
        out: dict[bytes, int] = {}
        for mono, c in coeffs.items():
            room = N - len(mono)
            for k, suffix, bk in steps:
                if k > room:
                    break
                m = mono + suffix
                v = (out.get(m, 0) + c * bk) % p
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        if len(out) > max_terms:
            raise ResourceError(f"Magnus image exceeds {max_terms} terms")
        coeffs = out
    return coeffs


def _power_split(letters):
    """Write a reduced word as ``a * u^k * a^-1`` with u cyclically reduced and k maximal.

    Returns ``(a, u, k)``; ``k == 1`` when no repetition was found.
    """
    n, i = len(letters), 0
    while n - 2 * i >= 2 and letters[i][0] == letters[n - 1 - i][0] and letters[i][1] == -letters[n - 1 - i][1]:
        i += 1
    a, core = letters[:i], letters[i : n - i]
    for period in range(1, len(core) // 2 + 1):
        if len(core) % period == 0 and core == core[:period] * (len(core) // period):
            u = core[:period]
            # a letter split across the junction (e.g. x0 x1 x0^2 = (x0 x1 x0)... ) is not a clean period
            if len(u) > 1 and u[0][0] == u[-1][0]:
                continue
            return a, u, len(core) // period
    return a, core, 1


def embed(w: FreeWord, p: int, N: int = DEFAULT_TRUNCATION, max_terms: int = DEFAULT_TERM_CAP) -> NCSeries:
    if N < 1:
        raise PreconditionError("truncation N must be >= 1")
    a, u, k = _power_split(w.letters)
    if k == 1:
        series = NCSeries(p, w.d, N)
        series.coeffs = _embed_letters(w.letters, p, w.d, N, max_terms)
        return series
    # E(a u^k a^-1) = E(a) E(u)^k E(a^-1); the power is taken in the truncated algebra
    inv_a = tuple((g, -e) for g, e in reversed(a))
    parts = []
    for letters in (a, u, inv_a):
        s = NCSeries(p, w.d, N)
        s.coeffs = _embed_letters(letters, p, w.d, N, max_terms)
        parts.append(s)
    result = parts[0] * (parts[1] ** k) * parts[2]
    if len(result) > max_terms:
        raise ResourceError(f"Magnus image exceeds {max_terms} terms")
    return result


@dataclass(frozen=True)
class DepthResult:
    """``Exact(n)``, ``AtLeast(N+1)`` (nothing nonzero up to the truncation) or ``Infinity``."""

    kind: str
    value: Optional[int] = None

    @classmethod
    def exact(cls, n: int) -> "DepthResult":
        return cls("exact", n)

    @classmethod
    def at_least(cls, n: int) -> "DepthResult":
        return cls("at_least", n)

    @classmethod
    def infinity(cls) -> "DepthResult":
        return cls("infinity")

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    @property
    def lower_bound(self) -> float:
        return math.inf if self.kind == "infinity" else self.value

    def __str__(self) -> str:
        if self.kind == "exact":
            return f"Exact({self.value})"
        if self.kind == "at_least":
            return f"AtLeast({self.value})"
        return "Infinity"


def depth(w: FreeWord, p: int, N: int = DEFAULT_TRUNCATION, max_terms: int = DEFAULT_TERM_CAP) -> DepthResult:
    """Zassenhaus depth of ``w`` read off its Magnus image truncated at degree N."""
    if w.is_identity:
        return DepthResult.infinity()
    if N < 1:
        raise PreconditionError("truncation N must be >= 1")
    # truncation commutes with the embedding, so deepen until a nonzero term shows up;
    # images of deep elements are large at full truncation
    n = 1
    while True:
        s = embed(w, p, n, max_terms)
        low = min((len(m) for m in s.coeffs if m), default=None)
        if low is not None:
            return DepthResult.exact(low)
        if n == N:
            return DepthResult.at_least(N + 1)
        n = min(2 * n, N)


def frattini_depth_bound(n: int) -> int:
    """Depth lower bound 2^(n-1) for any preimage of an element of the n-th Frattini term."""
    if n < 1:
        raise PreconditionError("Frattini index starts at 1")
    return 2 ** (n - 1)


def rank_equality_depth(n: int) -> int:
    """Inertia depth bound 2^n certified by equal p-ranks with and without S at Frattini level n."""
    if n < 1:
        raise PreconditionError("rank equality needs a level n >= 1")
    return 2**n
