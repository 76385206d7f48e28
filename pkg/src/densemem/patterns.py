"""Bipolar patterns, seeded generation, corruption sampling and overlaps.

Patterns are length-N vectors over {-1, +1}. Internally each pattern is
bit-packed, most-significant-bit first within a byte, with bit 1 encoding
+1 and bit 0 encoding -1; trailing pad bits of the last byte are zero.
The packed layout makes the inner product a popcount:

    overlap(a, b) = N - 2 * popcount(packed_a XOR packed_b)

All public contracts are stated in +/-1 terms; the packing is an internal
detail. Every generator takes an explicit integer seed and is a pure
function of it.
"""

from __future__ import annotations

import math
import random
import struct
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Pattern",
    "PatternStore",
    "generate_patterns",
    "corrupt_on_sphere",
    "corrupt_in_ball",
    "overlap",
    "hamming_distance",
    "save_store",
    "load_store",
    "store_to_text",
    "store_from_text",
]

_MAGIC = b"DMPS"
_FORMAT_VERSION = 1


def _n_bytes(n_neurons: int) -> int:
    return (n_neurons + 7) // 8


def _pad_mask(n_neurons: int) -> int:
    """Mask selecting the used bits of the final byte (MSB-first layout)."""
    used = n_neurons - 8 * (_n_bytes(n_neurons) - 1)
    return (0xFF << (8 - used)) & 0xFF


def _pack_signs(signs: np.ndarray) -> np.ndarray:
    bits = (signs > 0).astype(np.uint8)
    return np.packbits(bits, axis=-1)


def _unpack_to_signs(packed: np.ndarray, n_neurons: int) -> np.ndarray:
    bits = np.unpackbits(packed, axis=-1, count=n_neurons)
    return (2 * bits.astype(np.int8) - 1)


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


class Pattern:
    """One bipolar vector of length ``n_neurons``.

    Immutable after construction; equality is bitwise.
    """

    __slots__ = ("_packed", "n_neurons")

    def __init__(self, packed: np.ndarray, n_neurons: int):
        if n_neurons < 1:
            raise ValueError("pattern length must be at least 1")
        packed = np.ascontiguousarray(packed, dtype=np.uint8)
        if packed.shape != (_n_bytes(n_neurons),):
            raise ValueError(
                f"packed buffer has {packed.shape} bytes, expected ({_n_bytes(n_neurons)},)"
            )
        if packed[-1] & (0xFF ^ _pad_mask(n_neurons)):
            raise ValueError("pad bits of the final byte must be zero")
        packed.setflags(write=False)
        self._packed = packed
        self.n_neurons = n_neurons

    @classmethod
    def from_signs(cls, signs: Sequence[int] | np.ndarray) -> "Pattern":
        arr = np.asarray(signs)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("signs must be a non-empty 1-d sequence")
        if not np.isin(arr, (-1, 1)).all():
            raise ValueError("every entry must be exactly -1 or +1")
        return cls(_pack_signs(arr.astype(np.int8)), arr.size)

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def signs(self) -> np.ndarray:
        """The pattern as an int8 array of -1/+1 values."""
        return _unpack_to_signs(self._packed, self.n_neurons)

    def flip(self, positions: np.ndarray) -> "Pattern":
        """New pattern with the given (distinct) positions sign-flipped."""
        positions = np.asarray(positions, dtype=np.int64)
        if positions.size and (positions.min() < 0 or positions.max() >= self.n_neurons):
            raise ValueError("flip position out of range")
        mask = np.zeros_like(self._packed)
        np.bitwise_xor.at(mask, positions // 8, (0x80 >> (positions % 8)).astype(np.uint8))
        return Pattern(self._packed ^ mask, self.n_neurons)

    def __len__(self) -> int:
        return self.n_neurons

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.n_neurons == other.n_neurons and bool(
            np.array_equal(self._packed, other._packed)
        )

    def __hash__(self) -> int:
        return hash((self.n_neurons, self._packed.tobytes()))

    def __repr__(self) -> str:
        return f"Pattern(n_neurons={self.n_neurons})"


def overlap(a: Pattern, b: Pattern) -> int:
    """Inner product sum_i a_i * b_i; always has the parity of N."""
    if a.n_neurons != b.n_neurons:
        raise ValueError(f"length mismatch: {a.n_neurons} vs {b.n_neurons}")
    d = int(_popcount_rows(a.packed ^ b.packed))
    return a.n_neurons - 2 * d


def hamming_distance(a: Pattern, b: Pattern) -> int:
    if a.n_neurons != b.n_neurons:
        raise ValueError(f"length mismatch: {a.n_neurons} vs {b.n_neurons}")
    return int(_popcount_rows(a.packed ^ b.packed))


class PatternStore:
    """M patterns of common length N with overlap queries.

    Rows are stored bit-packed; an int8 +/-1 matrix view is materialized
    lazily for the dynamics kernels. Immutable after construction.
    """

    __slots__ = ("_packed", "n_patterns", "n_neurons", "_signs")

    def __init__(self, packed: np.ndarray, n_neurons: int):
        packed = np.ascontiguousarray(packed, dtype=np.uint8)
        if packed.ndim != 2 or packed.shape[0] < 1:
            raise ValueError("store needs at least one pattern")
        if n_neurons < 1 or packed.shape[1] != _n_bytes(n_neurons):
            raise ValueError("packed width does not match n_neurons")
        if (packed[:, -1] & (0xFF ^ _pad_mask(n_neurons))).any():
            raise ValueError("pad bits must be zero in every row")
        packed.setflags(write=False)
        self._packed = packed
        self.n_patterns = packed.shape[0]
        self.n_neurons = n_neurons
        self._signs: np.ndarray | None = None

    @classmethod
    def from_signs(cls, matrix: np.ndarray | Sequence[Sequence[int]]) -> "PatternStore":
        arr = np.asarray(matrix)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array of shape (n_patterns, n_neurons)")
        if not np.isin(arr, (-1, 1)).all():
            raise ValueError("every entry must be exactly -1 or +1")
        return cls(_pack_signs(arr.astype(np.int8)), arr.shape[1])

    @classmethod
    def from_patterns(cls, patterns: Sequence[Pattern]) -> "PatternStore":
        if not patterns:
            raise ValueError("store needs at least one pattern")
        n = patterns[0].n_neurons
        if any(p.n_neurons != n for p in patterns):
            raise ValueError("all patterns must share the same length")
        return cls(np.stack([p.packed for p in patterns]), n)

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def signs(self) -> np.ndarray:
        """(M, N) int8 matrix of -1/+1 entries; cached, read-only."""
        if self._signs is None:
            signs = _unpack_to_signs(self._packed, self.n_neurons)
            signs.setflags(write=False)
            self._signs = signs
        return self._signs

    @property
    def patterns(self) -> list[Pattern]:
        return [self[mu] for mu in range(self.n_patterns)]

    def __len__(self) -> int:
        return self.n_patterns

    def __getitem__(self, mu: int) -> Pattern:
        return Pattern(self._packed[mu], self.n_neurons)

    def __iter__(self) -> Iterator[Pattern]:
        for mu in range(self.n_patterns):
            yield self[mu]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternStore):
            return NotImplemented
        return self.n_neurons == other.n_neurons and bool(
            np.array_equal(self._packed, other._packed)
        )

    def bit_column(self, i: int) -> np.ndarray:
        """Column i of the +/-1 matrix: the value of neuron i in every pattern."""
        if not 0 <= i < self.n_neurons:
            raise IndexError(f"neuron index {i} out of range")
        return self.signs[:, i]

    def overlaps_with(self, pattern: Pattern) -> np.ndarray:
        """Inner products of every stored pattern with ``pattern`` (int64)."""
        if pattern.n_neurons != self.n_neurons:
            raise ValueError("length mismatch")
        d = _popcount_rows(self._packed ^ pattern.packed[None, :])
        return self.n_neurons - 2 * d


def generate_patterns(n_neurons: int, n_patterns: int, seed: int) -> PatternStore:
    """Draw M x N iid fair +/-1 bits, deterministically from ``seed``."""
    if n_neurons < 1:
        raise ValueError("n_neurons must be at least 1")
    if n_patterns < 1:
        raise ValueError("n_patterns must be at least 1")
    rng = np.random.default_rng(seed)
    packed = rng.integers(0, 256, size=(n_patterns, _n_bytes(n_neurons)), dtype=np.uint8)
    packed[:, -1] &= _pad_mask(n_neurons)
    return PatternStore(packed, n_neurons)


def corrupt_on_sphere(pattern: Pattern, n_flips: int, seed: int) -> Pattern:
    """Uniform sample from the Hamming sphere of radius ``n_flips`` around ``pattern``.

    Exactly ``n_flips`` uniformly chosen distinct positions are flipped.
    """
    n = pattern.n_neurons
    if not 0 <= n_flips <= n:
        raise ValueError(f"n_flips must be in [0, {n}], got {n_flips}")
    if n_flips == 0:
        return pattern
    rng = np.random.default_rng(seed)
    positions = rng.choice(n, size=n_flips, replace=False)
    return pattern.flip(positions)


def corrupt_in_ball(pattern: Pattern, max_flips: int, seed: int) -> Pattern:
    """Uniform sample from the Hamming ball of radius ``max_flips`` around ``pattern``.

    The radius k is drawn with probability C(N,k) / sum_j C(N,j), then a
    uniform k-subset of positions is flipped; this is exactly uniform over
    the ball without rejection. Exact big-integer arithmetic keeps the
    radius distribution unbiased for any N.
    """
    n = pattern.n_neurons
    if not 0 <= max_flips <= n:
        raise ValueError(f"max_flips must be in [0, {n}], got {max_flips}")
    if max_flips == 0:
        return pattern
    weights = [math.comb(n, k) for k in range(max_flips + 1)]
    total = sum(weights)
    rnd = random.Random(seed)
    r = rnd.randrange(total)
    acc = 0
    radius = 0
    for k, w in enumerate(weights):
        acc += w
        if r < acc:
            radius = k
            break
    if radius == 0:
        return pattern
    positions = np.array(rnd.sample(range(n), radius), dtype=np.int64)
    return pattern.flip(positions)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------
# Binary container: little-endian header  magic "DMPS" | version u16 | N u32
# | M u32, followed by M rows of ceil(N/8) packed bytes (MSB-first, bit 1 is
# +1). Text form: one pattern per line as '+'/'-' characters.

_HEADER = struct.Struct("<4sHII")


def save_store(store: PatternStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, store.n_neurons, store.n_patterns))
        fh.write(store.packed.tobytes())


def load_store(path) -> PatternStore:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated header")
        magic, version, n_neurons, n_patterns = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported container version {version}")
        body = fh.read()
    expected = n_patterns * _n_bytes(n_neurons)
    if len(body) != expected:
        raise ValueError(f"payload has {len(body)} bytes, expected {expected}")
    packed = np.frombuffer(body, dtype=np.uint8).reshape(n_patterns, _n_bytes(n_neurons)).copy()
    packed[:, -1] &= _pad_mask(n_neurons)
    return PatternStore(packed, n_neurons)


def store_to_text(store: PatternStore) -> str:
    rows = []
    for p in store:
        rows.append("".join("+" if v > 0 else "-" for v in p.signs))
    return "\n".join(rows) + "\n"


def store_from_text(text: str) -> PatternStore:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        signs = []
        for ch in line:
            if ch == "+":
                signs.append(1)
            elif ch in ("-", "−"):
                signs.append(-1)
            else:
                raise ValueError(f"unexpected character {ch!r} in pattern line")
        rows.append(signs)
    if not rows:
        raise ValueError("no patterns in text")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError("pattern lines have differing lengths")
    return PatternStore.from_signs(np.array(rows, dtype=np.int8))
