"""Canonical bit-level encodings.

Node states and messages in the distributed simulator are bit strings, held
as ``str`` objects over the alphabet ``{'0', '1'}`` so that their length is
exactly the number of bits on the wire.

Two families of encodings live here:

* a self-delimiting, schema-free codec for nested values (non-negative and
  negative integers, fractions, tuples, frozensets, bools, text), used by
  algorithms that ship structured data such as edge sets;
* fixed-width encodings (unsigned ids and signed fixed-point scalars), used
  where bit budgets must be tight and known in advance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Sequence

__all__ = [
    "CodecError",
    "FixedPoint",
    "FixedPointOverflow",
    "ceil_log2",
    "decode",
    "decode_prefix",
    "decode_seq",
    "encode",
    "encode_seq",
    "gamma",
    "read_gamma",
    "uint_bits",
    "read_uint",
    "pack_chunks",
    "unpack_chunks",
]


class CodecError(ValueError):
    """Raised when a bit string is not a valid encoding."""


def ceil_log2(n: int) -> int:
    """Smallest ``k`` with ``2**k >= n`` (0 for ``n <= 1``)."""
    if n <= 1:
        return 0
    return (n - 1).bit_length()


# -- Elias gamma ------------------------------------------------------------

def gamma(m: int) -> str:
    if m < 1:
        raise CodecError(f"gamma code needs a positive integer, got {m}")
    b = bin(m)[2:]
    return "0" * (len(b) - 1) + b


def read_gamma(bits: str, pos: int) -> tuple[int, int]:
    one = bits.find("1", pos)
    if one < 0:
        raise CodecError(f"truncated gamma code at bit {pos}")
    zeros = one - pos
    end = one + zeros + 1
    if end > len(bits):
        raise CodecError(f"truncated gamma code at bit {pos}")
    return int(bits[one:end], 2), end


# -- schema-free codec ------------------------------------------------------

_INT = "00"
_TUPLE = "01"
_SET = "10"
_EXT = "11"
_NEG = "00"
_FRAC = "01"
_BOOL = "10"
_TEXT = "11"


def encode(value: Any) -> str:
    """Encode ``value`` into a canonical self-delimiting bit string.

    Frozensets are written in the order of their members' encodings, so two
    equal sets always produce identical bits.
    """
    out: list[str] = []
    _enc(value, out)
    return "".join(out)


def _enc(value: Any, out: list[str]) -> None:
    if isinstance(value, bool):
        out.append(_EXT + _BOOL + ("1" if value else "0"))
    elif isinstance(value, int):
        if value >= 0:
            out.append(_INT + gamma(value + 1))
        else:
            out.append(_EXT + _NEG + gamma(-value))
    elif isinstance(value, Rational):
        value = Fraction(value)
        if value.denominator == 1:
            _enc(int(value), out)
            return
        out.append(_EXT + _FRAC + ("1" if value < 0 else "0"))
        out.append(gamma(abs(value.numerator)))
        out.append(gamma(value.denominator))
    elif isinstance(value, tuple):
        out.append(_TUPLE + gamma(len(value) + 1))
        for item in value:
            _enc(item, out)
    elif isinstance(value, (frozenset, set)):
        out.append(_SET + gamma(len(value) + 1))
        out.extend(sorted(encode(item) for item in value))
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out.append(_EXT + _TEXT + gamma(len(raw) + 1))
        out.append("".join(format(byte, "08b") for byte in raw))
    else:
        raise CodecError(f"cannot encode value of type {type(value).__name__}")


def decode_prefix(bits: str, pos: int = 0) -> tuple[Any, int]:
    """Decode one value starting at ``pos``; return it with the next position."""
    tag = bits[pos:pos + 2]
    if len(tag) < 2:
        raise CodecError(f"truncated tag at bit {pos}")
    pos += 2
    if tag == _INT:
        m, pos = read_gamma(bits, pos)
        return m - 1, pos
    if tag == _TUPLE or tag == _SET:
        m, pos = read_gamma(bits, pos)
        items = []
        for _ in range(m - 1):
            item, pos = decode_prefix(bits, pos)
            items.append(item)
        return (tuple(items) if tag == _TUPLE else frozenset(items)), pos
    sub = bits[pos:pos + 2]
    if len(sub) < 2:
        raise CodecError(f"truncated extension tag at bit {pos}")
    pos += 2
    if sub == _NEG:
        m, pos = read_gamma(bits, pos)
        return -m, pos
    if sub == _FRAC:
        if pos >= len(bits):
            raise CodecError(f"truncated fraction at bit {pos}")
        negative = bits[pos] == "1"
        num, pos = read_gamma(bits, pos + 1)
        den, pos = read_gamma(bits, pos)
        value = Fraction(num, den)
        return (-value if negative else value), pos
    if sub == _BOOL:
        if pos >= len(bits):
            raise CodecError(f"truncated bool at bit {pos}")
        return bits[pos] == "1", pos + 1
    m, pos = read_gamma(bits, pos)
    end = pos + 8 * (m - 1)
    if end > len(bits):
        raise CodecError(f"truncated text at bit {pos}")
    raw = bytes(int(bits[i:i + 8], 2) for i in range(pos, end, 8))
    return raw.decode("utf-8"), end


def decode(bits: str) -> Any:
    value, pos = decode_prefix(bits, 0)
    if pos != len(bits):
        raise CodecError(f"{len(bits) - pos} trailing bits after value")
    return value


def encode_seq(*values: Any) -> str:
    """Concatenate encodings without an outer length header."""
    return "".join(encode(v) for v in values)


def decode_seq(bits: str, count: int) -> tuple[Any, ...]:
    pos = 0
    out = []
    for _ in range(count):
        value, pos = decode_prefix(bits, pos)
        out.append(value)
    if pos != len(bits):
        raise CodecError(f"{len(bits) - pos} trailing bits after {count} values")
    return tuple(out)


# -- fixed width ------------------------------------------------------------

def uint_bits(x: int, width: int) -> str:
    if x < 0 or x >= (1 << width):
        raise CodecError(f"{x} does not fit in {width} unsigned bits")
    return format(x, f"0{width}b") if width else ""


def read_uint(bits: str, pos: int, width: int) -> tuple[int, int]:
    end = pos + width
    if end > len(bits):
        raise CodecError(f"truncated {width}-bit field at bit {pos}")
    return (int(bits[pos:end], 2) if width else 0), end


def pack_chunks(bits: str, chunk: int) -> list[int]:
    """Split ``bits`` into ``chunk``-bit unsigned integers.

    A single ``1`` is appended before zero padding so the split is injective
    and :func:`unpack_chunks` recovers the exact original length.
    """
    if chunk < 1:
        raise CodecError("chunk width must be positive")
    padded = bits + "1"
    padded += "0" * (-len(padded) % chunk)
    return [int(padded[i:i + chunk], 2) for i in range(0, len(padded), chunk)]


def unpack_chunks(values: Iterable[int], chunk: int) -> str:
    padded = "".join(uint_bits(int(v), chunk) for v in values)
    end = padded.rfind("1")
    if end < 0:
        raise CodecError("chunk sequence carries no terminator")
    return padded[:end]


class FixedPointOverflow(OverflowError):
    """A value left the representable range of a fixed-point format."""


@dataclass(frozen=True)
class FixedPoint:
    """Signed two's-complement fixed point with ``p`` bits per scalar.

    ``frac_bits`` of the ``p`` bits sit after the binary point, so the grid
    spacing is ``2**-frac_bits`` and the range is
    ``[-2**(p-1), 2**(p-1) - 1] * 2**-frac_bits``.
    """

    p: int
    frac_bits: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"precision must be positive, got {self.p}")
        if not 0 <= self.frac_bits < self.p:
            raise ValueError("frac_bits must lie in [0, p)")

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def min_code(self) -> int:
        return -(1 << (self.p - 1))

    @property
    def max_code(self) -> int:
        return (1 << (self.p - 1)) - 1

    def code(self, value) -> int:
        """Integer code of ``value``, rounded to nearest (ties to even)."""
        code = round(Fraction(value) * self.scale)
        if code < self.min_code or code > self.max_code:
            raise FixedPointOverflow(
                f"{value} outside the {self.p}-bit fixed-point range")
        return code

    def quantize(self, value) -> Fraction:
        return Fraction(self.code(value), self.scale)

    def quantize_vec(self, vec: Iterable) -> tuple[Fraction, ...]:
        return tuple(self.quantize(v) for v in vec)

    def to_bits(self, vec: Sequence) -> str:
        mask = (1 << self.p) - 1
        return "".join(format(self.code(v) & mask, f"0{self.p}b") for v in vec)

    def from_bits(self, bits: str) -> tuple[Fraction, ...]:
        if len(bits) % self.p:
            raise CodecError(
                f"{len(bits)} bits is not a multiple of precision {self.p}")
        out = []
        for i in range(0, len(bits), self.p):
            code = int(bits[i:i + self.p], 2)
            if code > self.max_code:
                code -= 1 << self.p
            out.append(Fraction(code, self.scale))
        return tuple(out)
