"""Words, group presentations, small cancellation and Dehn's algorithm.

A word is a tuple of nonzero ints: ``k`` is the k-th generator (1-based) and
``-k`` its inverse.  Presentations are written ``<a,b | abAB, ...>``; inverses
may be spelled ``a^-1`` or, for single lowercase letter generators, as the
uppercase letter.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .errors import PresentationSyntaxError, SmallCancellationError

Word = Tuple[int, ...]

FAMILIES = ("free", "free_abelian", "small_cancellation", "finite_table")


def free_reduce(w: Iterable[int]) -> Word:
    """Cancel adjacent ``x x^-1`` pairs until none remain."""
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_freely_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return tuple(w[i:j])


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_freely_reduced(w) and not (len(w) >= 2 and w[0] == -w[-1])


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def letter_order(rank: int) -> list[int]:
    """Alphabet in the order used for shortlex tie-breaking: a, A, b, B, ..."""
    out = []
    for k in range(1, rank + 1):
        out.extend((k, -k))
    return out


def _letter_key(x: int) -> tuple[int, int]:
    return (abs(x), 0 if x > 0 else 1)


def shortlex_key(w: Sequence[int]) -> tuple:
    return (len(w), tuple(_letter_key(x) for x in w))


def exponent_vector(w: Sequence[int], rank: int) -> tuple[int, ...]:
    e = [0] * rank
    for x in w:
        e[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(e)


def _is_commutator(r: Word) -> bool:
    return (
        len(r) == 4
        and abs(r[0]) != abs(r[1])
        and r[2] == -r[0]
        and r[3] == -r[1]
    )


@dataclass(frozen=True)
class GroupPresentation:
    generator_names: Tuple[str, ...]
    relators: Tuple[Word, ...] = ()
    family_tag: str = field(default="")

    def __post_init__(self):
        if not self.generator_names:
            raise ValueError("presentation needs at least one generator")
        if len(set(self.generator_names)) != len(self.generator_names):
            raise ValueError("generator names must be distinct")
        n = len(self.generator_names)
        for r in self.relators:
            if not r or any(x == 0 or abs(x) > n for x in r):
                raise ValueError(f"relator {r} has letters out of range")
            if not is_cyclically_reduced(r):
                raise ValueError(f"relator {r} is not cyclically reduced")
        if not self.family_tag:
            object.__setattr__(self, "family_tag", infer_family(self.relators, n))
        if self.family_tag not in FAMILIES:
            raise ValueError(f"unknown family tag {self.family_tag!r}")
        if self.family_tag == "free" and self.relators:
            raise ValueError("free presentations carry no relators")

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def letters(self) -> list[int]:
        return letter_order(self.rank)

    def format_word(self, w: Sequence[int]) -> str:
        if not w:
            return "1"
        uppercase_ok = all(
            len(g) == 1 and g.islower() and g.upper() not in self.generator_names
            for g in self.generator_names
        )
        parts = []
        for x in w:
            name = self.generator_names[abs(x) - 1]
            if x > 0:
                parts.append(name)
            else:
                parts.append(name.upper() if uppercase_ok else f"{name}^-1")
        return "".join(parts)

    def __str__(self) -> str:
        rels = ", ".join(self.format_word(r) for r in self.relators)
        return f"<{', '.join(self.generator_names)} | {rels}>"


def infer_family(relators: Sequence[Word], rank: int) -> str:
    if not relators:
        return "free"
    if all(_is_commutator(r) for r in relators):
        pairs = {frozenset((abs(r[0]), abs(r[1]))) for r in relators}
        if len(pairs) == rank * (rank - 1) // 2:
            return "free_abelian"
    return "small_cancellation"


def free_presentation(rank: int) -> GroupPresentation:
    names = tuple("abcdefghijklmnopqrstuvwxyz"[:rank]) if rank <= 26 else tuple(
        f"x{i}" for i in range(1, rank + 1)
    )
    return GroupPresentation(names, (), "free")


def free_abelian_presentation(rank: int) -> GroupPresentation:
    base = free_presentation(rank)
    rels = tuple(
        (i, j, -i, -j) for i in range(1, rank + 1) for j in range(i + 1, rank + 1)
    )
    return GroupPresentation(base.generator_names, rels, "free_abelian" if rank > 1 else "free")


# -- parsing ---------------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = repr(self.text[self.pos]) if self.pos < len(self.text) else "end of input"
            raise PresentationSyntaxError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def identifier(self) -> str:
        self.skip_ws()
        start = self.pos
        if start >= len(self.text) or not self.text[start].isalpha():
            raise PresentationSyntaxError("expected a generator name", start)
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start:self.pos]


def _letter_tokens(names: Sequence[str]) -> dict[str, int]:
    tokens = {n: i + 1 for i, n in enumerate(names)}
    for i, n in enumerate(names):
        if len(n) == 1 and n.islower() and n.upper() not in tokens:
            tokens[n.upper()] = -(i + 1)
    return tokens


def parse_presentation(text: str) -> GroupPresentation:
    """Parse ``<names | relators>`` into a :class:`GroupPresentation`.

    Relators are freely and cyclically reduced; relators that reduce to the
    empty word are dropped.  The family tag is inferred from the relators.

    >>> parse_presentation("<a,b|aba^-1b^-1>").family_tag
    'free_abelian'
    """
    sc = _Scanner(text)
    sc.expect("<")
    names: list[str] = []
    if sc.peek() in ("|", ">"):
        raise PresentationSyntaxError("empty generator list", sc.pos)
    while True:
        name = sc.identifier()
        if name not in names:
            names.append(name)
        if sc.peek() == ",":
            sc.pos += 1
            continue
        break
    sc.expect("|")

    tokens = _letter_tokens(names)
    by_length = sorted(tokens, key=len, reverse=True)

    relators: list[Word] = []
    if sc.peek() != ">":
        while True:
            relators.append(_parse_word(sc, tokens, by_length))
            if sc.peek() == ",":
                sc.pos += 1
                continue
            break
    sc.expect(">")
    if sc.peek():
        raise PresentationSyntaxError("trailing characters", sc.pos)

    reduced = []
    for r in relators:
        r = cyclic_reduce(r)
        if r and r not in reduced:
            reduced.append(r)
    return GroupPresentation(tuple(names), tuple(reduced))


def _parse_word(sc: _Scanner, tokens: dict[str, int], by_length: list[str]) -> Word:
    sc.skip_ws()
    letters: list[int] = []
    text = sc.text
    if sc.peek() in (",", ">", ""):
        raise PresentationSyntaxError("empty relator", sc.pos)
    while sc.pos < len(text) and text[sc.pos] not in ",>":
        if text[sc.pos].isspace():
            sc.pos += 1
            continue
        if text[sc.pos] == "1" and not letters:
            sc.pos += 1
            continue
        for tok in by_length:
            if text.startswith(tok, sc.pos):
                break
        else:
            if text[sc.pos].isalpha():
                raise PresentationSyntaxError(
                    f"unknown letter {text[sc.pos]!r} in relator", sc.pos
                )
            raise PresentationSyntaxError(f"unexpected {text[sc.pos]!r}", sc.pos)
        sc.pos += len(tok)
        letter = tokens[tok]
        power = 1
        if sc.pos < len(text) and text[sc.pos] == "^":
            sc.pos += 1
            start = sc.pos
            sign = 1
            if sc.pos < len(text) and text[sc.pos] == "-":
                sign = -1
                sc.pos += 1
            digits_at = sc.pos
            while sc.pos < len(text) and text[sc.pos].isdigit():
                sc.pos += 1
            if sc.pos == digits_at:
                raise PresentationSyntaxError("expected an integer exponent", start)
            power = sign * int(text[digits_at:sc.pos])
        x = letter if power > 0 else -letter
        letters.extend([x] * abs(power))
    return tuple(letters)


# -- small cancellation ------------------------------------------------------------


def symmetrized_closure(relators: Sequence[Word]) -> list[Word]:
    """All cyclic permutations of the relators and their inverses.

    Kept as a list (with repetitions) so that proper powers contribute one
    entry per cyclic position.
    """
    out = []
    for r in relators:
        for w in (tuple(r), inverse(r)):
            for k in range(len(w)):
                out.append(w[k:] + w[:k])
    return out


@dataclass(frozen=True)
class Piece:
    word: Word
    first: Word
    second: Word


@dataclass(frozen=True)
class SmallCancellationResult:
    passes: bool
    max_piece_ratio: Fraction
    witness: Piece | None
    lam: Fraction


def _common_prefix(u: Word, v: Word) -> int:
    if u == v:
        # same word at two distinct cyclic positions: the overlap is proper
        return len(u) - 1
    n = 0
    for x, y in zip(u, v):
        if x != y:
            break
        n += 1
    return n


def check_small_cancellation(
    p: GroupPresentation, lam: Fraction | str | float = Fraction(1, 6)
) -> SmallCancellationResult:
    """Check the metric condition C'(lam) on the symmetrized closure of ``p``."""
    lam = Fraction(lam)
    if not p.relators:
        raise ValueError("small cancellation check needs at least one relator")
    for r in p.relators:
        if not is_cyclically_reduced(r):
            raise ValueError(f"relator {p.format_word(r)} is not cyclically reduced")
    closure = symmetrized_closure(p.relators)
    worst = Fraction(0)
    witness = None
    passes = True
    for i in range(len(closure)):
        ri = closure[i]
        for j in range(i + 1, len(closure)):
            rj = closure[j]
            if ri[0] != rj[0]:
                continue
            k = _common_prefix(ri, rj)
            shorter = min(len(ri), len(rj))
            ratio = Fraction(k, shorter)
            if ratio > worst:
                worst = ratio
                witness = Piece(ri[:k], ri, rj)
            if not k < lam * shorter:
                passes = False
    return SmallCancellationResult(passes, worst, witness, lam)


# -- Dehn's algorithm --------------------------------------------------------------


class DehnSolver:
    """Word problem solver for C'(1/6) presentations.

    Any subword longer than half of a symmetrized relator is replaced by the
    inverse of the remaining part; the word shrinks strictly at each step.
    """

    def __init__(self, p: GroupPresentation):
        result = check_small_cancellation(p, Fraction(1, 6))
        if not result.passes:
            raise SmallCancellationError(
                f"{p} fails C'(1/6): piece ratio {result.max_piece_ratio}"
            )
        self.presentation = p
        table: dict[Word, Word] = {}
        for r in symmetrized_closure(p.relators):
            n = len(r)
            for k in range(n // 2 + 1, n + 1):
                rep = inverse(r[k:])
                old = table.get(r[:k])
                if old is None or shortlex_key(rep) < shortlex_key(old):
                    table[r[:k]] = rep
        self._table = table
        self._lengths = sorted({len(k) for k in table}, reverse=True)
        self._lattice = _lattice_basis(
            [exponent_vector(r, p.rank) for r in p.relators], p.rank
        )

    def reduce(self, w: Iterable[int]) -> Word:
        w = free_reduce(w)
        table = self._table
        while True:
            hit = None
            for i in range(len(w)):
                for k in self._lengths:
                    if i + k <= len(w):
                        rep = table.get(w[i:i + k])
                        if rep is not None:
                            hit = (i, k, rep)
                            break
                if hit:
                    break
            if hit is None:
                return w
            i, k, rep = hit
            w = free_reduce(w[:i] + rep + w[i + k:])

    def is_identity(self, w: Iterable[int]) -> bool:
        return not self.reduce(w)

    def equal(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return not self.reduce(tuple(u) + inverse(v))

    def abelian_key(self, w: Sequence[int]) -> tuple[int, ...]:
        """Image of ``w`` in the abelianization; equal elements share it."""
        return _lattice_reduce(
            list(exponent_vector(w, self.presentation.rank)), self._lattice
        )


@functools.lru_cache(maxsize=32)
def dehn_solver(p: GroupPresentation) -> DehnSolver:
    return DehnSolver(p)


def dehn_reduce(w: Iterable[int], p: GroupPresentation) -> Word:
    """Dehn-reduce ``w``; the result is empty iff ``w`` is trivial in ``p``."""
    return dehn_solver(p).reduce(w)


def _lattice_basis(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, list[int]]]:
    """Echelon basis ``[(pivot_column, row), ...]`` of the integer row lattice."""
    todo = [list(r) for r in rows if any(r)]
    basis = []
    for col in range(n):
        live = [r for r in todo if r[col] != 0]
        rest = [r for r in todo if r[col] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            for r in live[1:]:
                q = r[col] // piv[col]
                r[:] = [a - q * b for a, b in zip(r, piv)]
            rest.extend(r for r in live[1:] if r[col] == 0 and any(r))
            live = [piv] + [r for r in live[1:] if r[col] != 0]
        if live:
            piv = live[0]
            if piv[col] < 0:
                piv = [-a for a in piv]
            basis.append((col, piv))
        todo = rest
    return basis


def _lattice_reduce(e: list[int], basis: list[tuple[int, list[int]]]) -> tuple[int, ...]:
    for col, row in basis:
        q = e[col] // row[col]
        if q:
            e = [a - q * b for a, b in zip(e, row)]
    return tuple(e)


def parse_word(text: str, p: GroupPresentation) -> Word:
    """Parse a word in the generators of ``p`` (same syntax as relators); "1" is empty."""
    tokens = _letter_tokens(p.generator_names)
    if text.strip() in ("", "1"):
        return ()
    sc = _Scanner(text)
    w = _parse_word(sc, tokens, sorted(tokens, key=len, reverse=True))
    if sc.peek():
        raise PresentationSyntaxError("trailing characters", sc.pos)
    return free_reduce(w)
