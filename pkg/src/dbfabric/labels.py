"""Base-d label algebra for De Bruijn vertices.

A label is an m-digit string over {0, ..., d-1}, stored most-significant
digit first so that "prefix" and "suffix" read left to right.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import IncompatibleLabelsError, InvalidDigitError

_DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


class GraphDirection(enum.Enum):
    FORWARD = "forward"   # left-shift graph
    REVERSE = "reverse"   # right-shift graph

    @classmethod
    def parse(cls, text: str) -> "GraphDirection":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown direction {text!r}; expected 'forward' or 'reverse'") from None


FORWARD = GraphDirection.FORWARD
REVERSE = GraphDirection.REVERSE


@dataclass(frozen=True, order=True)
class Label:
    digits: tuple[int, ...]
    d: int
    m: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"radix must be >= 2, got {self.d}")
        if self.m < 1:
            raise ValueError(f"label length must be >= 1, got {self.m}")
        if len(self.digits) != self.m:
            raise ValueError(f"expected {self.m} digits, got {len(self.digits)}")
        for x in self.digits:
            if not 0 <= x < self.d:
                raise InvalidDigitError(x, self.d)

    @classmethod
    def parse(cls, text: str, d: int, m: int) -> "Label":
        """Parse the textual digit-string form, e.g. ``"101"`` or ``"3102"``."""
        if len(text) != m:
            raise ValueError(f"label {text!r} must have exactly {m} digits")
        digits = []
        for ch in text.lower():
            pos = _DIGIT_CHARS.find(ch)
            if pos < 0 or pos >= d:
                raise InvalidDigitError(ch, d)
            digits.append(pos)
        return cls(tuple(digits), d, m)

    @classmethod
    def from_int(cls, value: int, d: int, m: int) -> "Label":
        if not 0 <= value < d ** m:
            raise ValueError(f"value {value} out of range for d={d}, m={m}")
        digits = [0] * m
        for i in range(m - 1, -1, -1):
            value, digits[i] = divmod(value, d)
        return cls(tuple(digits), d, m)

    @property
    def value(self) -> int:
        v = 0
        for x in self.digits:
            v = v * self.d + x
        return v

    def __str__(self) -> str:
        return "".join(_DIGIT_CHARS[x] for x in self.digits)

    def suffix(self, k: int) -> tuple[int, ...]:
        return self.digits[self.m - k:] if k else ()

    def prefix(self, k: int) -> tuple[int, ...]:
        return self.digits[:k]


def all_labels(d: int, m: int) -> Iterator[Label]:
    """All d**m labels in increasing numeric order."""
    for v in range(d ** m):
        yield Label.from_int(v, d, m)


def _check_digit(label: Label, digit: int) -> None:
    if not 0 <= digit < label.d:
        raise InvalidDigitError(digit, label.d)


def _check_compatible(a: Label, b: Label) -> None:
    if a.d != b.d or a.m != b.m:
        raise IncompatibleLabelsError(
            f"labels {a} (d={a.d}, m={a.m}) and {b} (d={b.d}, m={b.m}) differ in shape")


def forward_neighbor(label: Label, digit: int) -> Label:
    """Shift ``digit`` in from the right, evicting the left-most digit."""
    _check_digit(label, digit)
    return Label(label.digits[1:] + (digit,), label.d, label.m)


def reverse_neighbor(label: Label, digit: int) -> Label:
    """Shift ``digit`` in from the left, evicting the right-most digit."""
    _check_digit(label, digit)
    return Label((digit,) + label.digits[:-1], label.d, label.m)


def neighbor(label: Label, digit: int, direction: GraphDirection) -> Label:
    if direction is FORWARD:
        return forward_neighbor(label, digit)
    return reverse_neighbor(label, digit)


def overlap_digits(tail_of: Sequence[int], head_of: Sequence[int]) -> int:
    """Longest k such that the last k items of ``tail_of`` equal the first k of ``head_of``."""
    m = len(tail_of)
    for k in range(min(m, len(head_of)), 0, -1):
        if tuple(tail_of[m - k:]) == tuple(head_of[:k]):
            return k
    return 0


def longest_overlap(src: Label, dst: Label) -> int:
    """Length of the longest suffix of ``src`` that is also a prefix of ``dst``."""
    _check_compatible(src, dst)
    return overlap_digits(src.digits, dst.digits)


def debruijn_distance(src: Label, dst: Label, direction: GraphDirection = FORWARD) -> int:
    """Hop count of the shortest directed path in the chosen embedded graph."""
    _check_compatible(src, dst)
    if direction is FORWARD:
        return src.m - overlap_digits(src.digits, dst.digits)
    return src.m - overlap_digits(dst.digits, src.digits)
