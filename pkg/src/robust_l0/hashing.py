"""Limited-independence hashing of grid cells.

A :class:`HashSampler` is a random polynomial of degree ``degree - 1`` over
the Mersenne prime field ``2**61 - 1``, i.e. a ``degree``-wise independent
family. Cell tuples are first folded to a field element with a fixed,
seed-independent mixing step (a splitmix64 fold over the int64
coordinates), so the only randomness lives in the polynomial coefficients.

A cell is *sampled at rate 1/R* when ``eval(cell) % R == 0``. Because
``R`` is always a power of two, being sampled at ``2R`` implies being
sampled at ``R``; equivalently a cell is sampled at ``2**k`` iff the
hash value has at least ``k`` trailing zero bits.
"""

from __future__ import annotations

import math

import numpy as np

from robust_l0.errors import ConfigError, UsageError

MERSENNE_61 = (1 << 61) - 1
_INT64_MIN = -(1 << 63)
_INT64_MAX = (1 << 63) - 1


def default_degree(m_bound: int) -> int:
    """Independence used by the samplers: ``max(16, 2 * ceil(log2 m_bound))``."""
    return max(16, 2 * math.ceil(math.log2(max(m_bound, 2))))


_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB
_MIX_INIT = 0x243F6A8885A308D3


def mix_cell(cell) -> int:
    """Fold a cell coordinate tuple into an element of the field.

    Each coordinate is taken as its 64-bit two's complement word and
    folded in with the splitmix64 finaliser.
    """
    acc = _MIX_INIT
    for w in cell:
        if not _INT64_MIN <= w <= _INT64_MAX:
            raise UsageError(f"cell coordinates out of int64 range: {cell!r}")
        z = ((acc ^ (w & _M64)) + _GOLDEN) & _M64
        z = ((z ^ (z >> 30)) * _MIX_M1) & _M64
        z = ((z ^ (z >> 27)) * _MIX_M2) & _M64
        acc = z ^ (z >> 31)
    return acc % MERSENNE_61


class HashSampler:
    """Seeded polynomial hash over cell ids with output in ``[0, 2**range_bits)``.

    Args:
        seed: Seed for the coefficient generator.
        degree: Number of coefficients (the independence of the family).
        range_bits: Output width; values are reduced modulo ``2**range_bits``.
    """

    __slots__ = ("seed", "degree", "range_bits", "modulus", "_coeffs", "_coeff_array", "_mask")

    def __init__(self, seed: int, degree: int = 16, range_bits: int = 62):
        if not isinstance(degree, (int, np.integer)) or degree < 2:
            raise ConfigError(f"degree must be an integer >= 2, got {degree!r}")
        if not isinstance(range_bits, (int, np.integer)) or not 1 <= range_bits <= 62:
            raise ConfigError(f"range_bits must be in [1, 62], got {range_bits!r}")
        self.seed = int(seed)
        self.degree = int(degree)
        self.range_bits = int(range_bits)
        self.modulus = MERSENNE_61
        rng = np.random.default_rng(self.seed & 0xFFFFFFFFFFFFFFFF)
        raw = rng.integers(0, MERSENNE_61, size=self.degree, dtype=np.int64)
        self._coeffs = tuple(int(c) for c in raw)
        self._coeff_array = raw.astype(np.uint64)
        self._mask = (1 << self.range_bits) - 1

    def eval_mixed(self, x: int) -> int:
        """Hash of an already-mixed field element."""
        p = MERSENNE_61
        acc = 0
        for c in self._coeffs:
            acc = (acc * x + c) % p
        return acc & self._mask

    def eval(self, cell) -> int:
        return self.eval_mixed(mix_cell(cell))

    @property
    def coefficients(self) -> np.ndarray:
        """Polynomial coefficients, highest degree first (Horner order)."""
        return self._coeff_array.copy()

    def trailing_zeros(self, cell) -> int:
        """Largest ``k <= range_bits`` such that the cell is sampled at rate ``1/2**k``."""
        return trailing_zeros(self.eval(cell), self.range_bits)

    def __repr__(self) -> str:
        return f"HashSampler(seed={self.seed}, degree={self.degree}, range_bits={self.range_bits})"


def new_hash(seed: int, degree: int, range_bits: int = 62) -> HashSampler:
    return HashSampler(seed, degree, range_bits)


def trailing_zeros(value: int, cap: int) -> int:
    if value == 0:
        return cap
    return min((value & -value).bit_length() - 1, cap)


def log2_rate(R: int) -> int:
    """Exponent ``k`` of ``R = 2**k``; raises :class:`UsageError` otherwise."""
    if not isinstance(R, (int, np.integer)) or R < 1 or (R & (R - 1)):
        raise UsageError(f"R must be a positive power of two, got {R!r}")
    return int(R).bit_length() - 1


def is_sampled(h: HashSampler, cell, R: int) -> bool:
    """True iff ``h(cell) mod R == 0``."""
    k = log2_rate(R)
    if k > h.range_bits:
        raise UsageError(f"R = 2**{k} exceeds the hash range 2**{h.range_bits}")
    return h.eval(cell) % R == 0
