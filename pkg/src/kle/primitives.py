"""Ideal-model sampling: permutations, ideal ciphers, random functions, injections.

Bitstrings are plain unsigned ints (little-endian bit order) with the width
carried alongside.  All randomness flows through :class:`Rng`, a counter-based
generator keyed by ``(seed, stream)`` so Monte Carlo trials can be farmed out
with one stream per trial and still reproduce bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAX_WIDTH = 20
FULL_TABLE_BITS = 20

_BLOCKS = 4
_UNPACK = struct.Struct("<8Q").unpack
_TWO64 = 1 << 64


class Rng:
    """Counter-based RNG addressed by ``(seed, stream)``.

    Words come from BLAKE2b in counter mode (eight 64-bit words per block),
    so constructing a stream is free and any (seed, stream, counter) is
    reproducible.  ``randbelow`` uses rejection so every value is exactly
    uniform.
    """

    __slots__ = ("seed", "stream", "_prefix", "_counter", "_buf")

    def __init__(self, seed: int = 0, stream: int = 0):
        self.seed = int(seed) % _TWO64
        self.stream = int(stream) % _TWO64
        self._prefix = struct.pack("<QQ", self.seed, self.stream)
        self._counter = 0
        self._buf: list[int] = []

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"

    def child(self, index: int) -> "Rng":
        """Independent sub-stream derived from this one."""
        msg = self._prefix + struct.pack("<Q", int(index) % _TWO64)
        h = hashlib.blake2b(msg, digest_size=8, person=b"kle-child").digest()
        return Rng(self.seed, int.from_bytes(h, "little"))

    def _refill(self) -> None:
        out = []
        for _ in range(_BLOCKS):
            block = hashlib.blake2b(self._prefix + struct.pack("<Q", self._counter), person=b"kle-word").digest()
            self._counter += 1
            out.extend(_UNPACK(block))
        out.reverse()
        self._buf = out

    def word(self) -> int:
        if not self._buf:
            self._refill()
        return self._buf.pop()

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow bound must be positive")
        if n == 1:
            return 0
        if n > _TWO64:
            # wide draws (big key spaces): concatenate words
            nbits = n.bit_length()
            words = (nbits + 63) // 64
            while True:
                v = 0
                for _ in range(words):
                    v = (v << 64) | self.word()
                v >>= words * 64 - nbits
                if v < n:
                    return v
        limit = _TWO64 - (_TWO64 % n)
        while True:
            w = self.word()
            if w < limit:
                return w % n

    def bits(self, width: int) -> int:
        return self.randbelow(1 << width) if width > 0 else 0

    def bit(self) -> int:
        return self.word() & 1

    def random(self) -> float:
        return (self.word() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample(self, population: int, count: int) -> list[int]:
        """``count`` distinct values from ``range(population)``, in draw order."""
        if count > population:
            raise ValueError("sample larger than population")
        pool = _SparsePool(population)
        return [pool.draw(self) for _ in range(count)]


def _check_width(n: int) -> None:
    if not 0 <= n <= MAX_WIDTH:
        raise ValueError(f"width {n} out of range [0, {MAX_WIDTH}]")


@dataclass(frozen=True, eq=False)
class Permutation:
    width: int
    table: np.ndarray
    inv_table: np.ndarray = field(repr=False)

    @classmethod
    def from_table(cls, table, width: int | None = None) -> "Permutation":
        t = np.asarray(table, dtype=np.int64)
        if width is None:
            width = max(int(len(t)).bit_length() - 1, 0)
        _check_width(width)
        if len(t) != 1 << width:
            raise ValueError(f"table length {len(t)} does not match width {width}")
        inv = np.full(len(t), -1, dtype=np.int64)
        if t.min(initial=0) < 0 or t.max(initial=0) >= len(t):
            raise ValueError("table entries out of range")
        inv[t] = np.arange(len(t), dtype=np.int64)
        if (inv < 0).any():
            raise ValueError("table is not a bijection")
        t.setflags(write=False)
        inv.setflags(write=False)
        return cls(width, t, inv)

    @classmethod
    def identity(cls, width: int) -> "Permutation":
        return cls.from_table(np.arange(1 << width), width)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def inverse(self, y: int) -> int:
        return int(self.inv_table[y])

    def __len__(self):
        return len(self.table)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.width == other.width and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.width, self.table.tobytes()))

    def inverted(self) -> "Permutation":
        return Permutation(self.width, self.inv_table, self.table)

    def to_json(self) -> str:
        return json.dumps({"width": self.width, "table": self.table.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Permutation":
        obj = json.loads(text)
        return cls.from_table(obj["table"], obj["width"])


def sample_permutation(n: int, rng: Rng) -> Permutation:
    """Uniform permutation of ``{0,1}^n`` by Fisher-Yates."""
    _check_width(n)
    table = list(range(1 << n))
    rng.shuffle(table)
    return Permutation.from_table(table, n)


class _SparsePool:
    """The unused part of ``range(size)`` as a virtual array.

    Fisher-Yates with swap-remove, kept sparse in two dicts so a pool over
    ``2^n`` values costs nothing until values are drawn.
    """

    __slots__ = ("size", "_at", "_pos")

    def __init__(self, size: int):
        self.size = size
        self._at: dict[int, int] = {}
        self._pos: dict[int, int] = {}

    def __len__(self):
        return self.size

    def _get(self, i: int) -> int:
        return self._at.get(i, i)

    def _take(self, i: int) -> int:
        last = self.size - 1
        v = self._get(i)
        w = self._get(last)
        self._at[i] = w
        self._pos[w] = i
        self._at.pop(last, None)
        self._pos.pop(v, None)
        self.size = last
        return v

    def draw(self, rng: Rng) -> int:
        if self.size == 0:
            raise ValueError("pool exhausted")
        return self._take(rng.randbelow(self.size))

    def remove(self, v: int) -> None:
        i = self._pos.get(v, v)
        if i >= self.size or self._get(i) != v:
            raise ValueError(f"{v} not in pool")
        self._take(i)


class _LazyKey:
    __slots__ = ("fwd", "bwd", "out_pool", "in_pool")

    def __init__(self, n: int):
        self.fwd: dict[int, int] = {}
        self.bwd: dict[int, int] = {}
        self.out_pool = _SparsePool(1 << n)
        self.in_pool = _SparsePool(1 << n)


class IdealCipher:
    """A family of ``2^k`` independent permutations on ``{0,1}^n``.

    Full-table mode stores every permutation (``k + n <= 20``); lazy mode
    samples each point on first use from the still-unused co-domain, which is
    exact lazy sampling of a uniform permutation per key.
    """

    def __init__(self, k: int, n: int, rng: Rng, lazy: bool | None = None):
        if k < 0 or n < 1:
            raise ValueError("need k >= 0 and n >= 1")
        if lazy is None:
            lazy = k + n > FULL_TABLE_BITS
        if not lazy and k + n > FULL_TABLE_BITS:
            raise ValueError(f"full table needs k+n <= {FULL_TABLE_BITS}, got {k + n}")
        self.k, self.n, self.lazy = k, n, lazy
        self._rng = rng
        if lazy:
            self._keys: dict[int, _LazyKey] = {}
        else:
            N = 1 << n
            rows = []
            for _ in range(1 << k):
                row = list(range(N))
                rng.shuffle(row)
                rows.append(row)
            self.table = np.array(rows, dtype=np.int64).reshape(1 << k, N)
            self.inv_table = np.empty_like(self.table)
            cols = np.arange(N, dtype=np.int64)
            for key in range(1 << k):
                self.inv_table[key, self.table[key]] = cols

    @classmethod
    def from_tables(cls, tables, n: int | None = None) -> "IdealCipher":
        """Build a full-table cipher from explicit per-key permutation tables."""
        t = np.asarray(tables, dtype=np.int64)
        if t.ndim == 1:
            t = t[None, :]
        nkeys, N = t.shape
        k = nkeys.bit_length() - 1
        n = N.bit_length() - 1 if n is None else n
        if 1 << k != nkeys or 1 << n != N:
            raise ValueError("table shape must be (2^k, 2^n)")
        obj = cls.__new__(cls)
        obj.k, obj.n, obj.lazy, obj._rng = k, n, False, None
        obj.table = t.copy()
        obj.inv_table = np.empty_like(obj.table)
        cols = np.arange(N, dtype=np.int64)
        for key in range(nkeys):
            if sorted(obj.table[key].tolist()) != list(range(N)):
                raise ValueError(f"row {key} is not a permutation")
            obj.inv_table[key, obj.table[key]] = cols
        return obj

    def _check(self, key: int, x: int) -> None:
        if not 0 <= key < 1 << self.k:
            raise ValueError(f"key {key} out of range for k={self.k}")
        if not 0 <= x < 1 << self.n:
            raise ValueError(f"block {x} out of range for n={self.n}")

    def _state(self, key: int) -> _LazyKey:
        st = self._keys.get(key)
        if st is None:
            st = self._keys[key] = _LazyKey(self.n)
        return st

    def enc(self, key: int, x: int) -> int:
        self._check(key, x)
        if not self.lazy:
            return int(self.table[key, x])
        st = self._state(key)
        y = st.fwd.get(x)
        if y is None:
            y = st.out_pool.draw(self._rng)
            st.in_pool.remove(x)
            assert y not in st.bwd, "lazy cipher lost injectivity"
            st.fwd[x] = y
            st.bwd[y] = x
        return y

    def dec(self, key: int, y: int) -> int:
        self._check(key, y)
        if not self.lazy:
            return int(self.inv_table[key, y])
        st = self._state(key)
        x = st.bwd.get(y)
        if x is None:
            x = st.in_pool.draw(self._rng)
            st.out_pool.remove(y)
            assert x not in st.fwd, "lazy cipher lost injectivity"
            st.bwd[y] = x
            st.fwd[x] = y
        return x

    def permutation(self, key: int) -> Permutation:
        """Materialise one key's permutation (forces sampling in lazy mode)."""
        if self.lazy:
            return Permutation.from_table([self.enc(key, x) for x in range(1 << self.n)], self.n)
        return Permutation(self.n, self.table[key], self.inv_table[key])


def sample_ideal_cipher(k: int, n: int, rng: Rng, lazy: bool | None = None) -> IdealCipher:
    return IdealCipher(k, n, rng, lazy=lazy)


class RandomFunction:
    """Uniform ``H: {0,1}^k x {0,1}^n -> {0,1}^m``, full table or lazy."""

    def __init__(self, k: int, n: int, m: int, rng: Rng, lazy: bool | None = None):
        if lazy is None:
            lazy = k + n > FULL_TABLE_BITS
        if not lazy and k + n > FULL_TABLE_BITS:
            raise ValueError(f"full table needs k+n <= {FULL_TABLE_BITS}")
        self.k, self.n, self.m, self.lazy = k, n, m, lazy
        self._rng = rng
        if lazy:
            self._map: dict[tuple[int, int], int] = {}
        else:
            self.table = np.array(
                [rng.bits(m) for _ in range(1 << (k + n))], dtype=np.int64
            ).reshape(1 << k, 1 << n)

    @classmethod
    def from_table(cls, table, m: int) -> "RandomFunction":
        t = np.asarray(table, dtype=np.int64)
        if t.ndim == 1:
            t = t[None, :]
        obj = cls.__new__(cls)
        obj.k = t.shape[0].bit_length() - 1
        obj.n = t.shape[1].bit_length() - 1
        obj.m, obj.lazy, obj._rng = m, False, None
        obj.table = t.copy()
        return obj

    def __call__(self, key: int, x: int) -> int:
        if not (0 <= key < 1 << self.k and 0 <= x < 1 << self.n):
            raise ValueError("input out of range")
        if not self.lazy:
            return int(self.table[key, x])
        y = self._map.get((key, x))
        if y is None:
            y = self._map[(key, x)] = self._rng.bits(self.m)
        return y

    def to_json(self) -> str:
        if self.lazy:
            raise ValueError("lazy functions have no complete table")
        return json.dumps({"width": self.k + self.n, "out_bits": self.m, "table": self.table.ravel().tolist()})


def sample_random_function(k: int, n: int, m: int, rng: Rng, lazy: bool | None = None) -> RandomFunction:
    return RandomFunction(k, n, m, rng, lazy=lazy)


def sample_injection(D: int, R: int, rng: Rng) -> list[int]:
    """Uniform injection ``[D] -> [R]`` as a list of values in ``1..R``."""
    if D < 0 or R < 0:
        raise ValueError("sizes must be non-negative")
    if D > R:
        raise ValueError(f"no injection from [{D}] into [{R}]")
    return [v + 1 for v in rng.sample(R, D)]


class CountingCipher:
    """Wraps an ideal cipher and counts forward/inverse evaluations."""

    def __init__(self, cipher: IdealCipher):
        self.cipher = cipher
        self.k, self.n = cipher.k, cipher.n
        self.forward_calls = 0
        self.inverse_calls = 0

    @property
    def calls(self) -> int:
        return self.forward_calls + self.inverse_calls

    def enc(self, key: int, x: int) -> int:
        self.forward_calls += 1
        return self.cipher.enc(key, x)

    def dec(self, key: int, y: int) -> int:
        self.inverse_calls += 1
        return self.cipher.dec(key, y)
