"""Sobol' low-discrepancy points for message-circuit angles.

Direction numbers are the first 16 dimensions of the Joe-Kuo
"new-joe-kuo-6.21201" table, embedded below.  Points are generated in
Gray-code order (index n uses the binary expansion of n XOR (n >> 1)), the
ordering used by Joe and Kuo's reference code and by scipy's unscrambled
Sobol' engine, which the test suite cross-checks against.  Point 0 is the
all-zero point; point 1 is all 0.5.

Optional scrambling is a seeded random digital shift: each dimension is
XOR-ed with a fixed 32-bit mask drawn from a SplitMix64 stream.
"""

from __future__ import annotations

from .rng import SplitMix64

_NBITS = 32

#: dimension -> (s, a, m_1..m_s) from new-joe-kuo-6.21201; dimension 1 is van der Corput.
_JOE_KUO = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
    5: (3, 2, (1, 1, 1)),
    6: (4, 1, (1, 1, 3, 3)),
    7: (4, 4, (1, 3, 5, 13)),
    8: (5, 2, (1, 1, 5, 5, 17)),
    9: (5, 4, (1, 1, 5, 5, 5)),
    10: (5, 7, (1, 1, 7, 11, 19)),
    11: (5, 11, (1, 1, 5, 1, 1)),
    12: (5, 13, (1, 1, 1, 3, 11)),
    13: (5, 14, (1, 3, 5, 5, 31)),
    14: (6, 1, (1, 3, 3, 9, 7, 49)),
    15: (6, 13, (1, 1, 1, 15, 21, 21)),
    16: (6, 16, (1, 3, 1, 13, 27, 49)),
}

MAX_DIMENSION = 1 + len(_JOE_KUO)

MAX_INDEX = 2**32 - 1


def _direction_integers(dim: int) -> list[int]:
    """V_1..V_32 for one dimension, as 32-bit integers (V_b = m_b * 2^(32-b))."""
    if dim == 1:
        return [1 << (_NBITS - b) for b in range(1, _NBITS + 1)]
    s, a, m_init = _JOE_KUO[dim]
    m = list(m_init)
    for b in range(s, _NBITS):
        new = m[b - s] ^ (m[b - s] << s)
        for t in range(1, s):
            if (a >> (s - 1 - t)) & 1:
                new ^= m[b - t] << t
        m.append(new)
    return [m[b] << (_NBITS - 1 - b) for b in range(_NBITS)]


_DIRECTION_CACHE: dict[int, list[int]] = {}


def _directions(dim: int) -> list[int]:
    if dim not in _DIRECTION_CACHE:
        _DIRECTION_CACHE[dim] = _direction_integers(dim)
    return _DIRECTION_CACHE[dim]


def scramble_masks(dim: int, seed: int) -> list[int]:
    """Digital-shift masks, one 32-bit integer per dimension."""
    rng = SplitMix64(seed)
    return [rng.next_u64() >> (64 - _NBITS) for _ in range(dim)]


def sobol_point(index: int, dim: int, shift: list[int] | None = None) -> list[float]:
    """Coordinates 0..dim-1 of the Sobol' point at `index`.

    `shift`, when given, applies a per-dimension digital shift (see
    scramble_masks); the unshifted sequence is the default.
    """
    if not 0 <= index <= MAX_INDEX:
        raise ValueError(f"index {index} outside [0, {MAX_INDEX}]")
    if not 1 <= dim <= MAX_DIMENSION:
        raise ValueError(f"dimension {dim} unsupported (1..{MAX_DIMENSION})")
    if shift is not None and len(shift) < dim:
        raise ValueError("shift must supply one mask per dimension")
    gray = index ^ (index >> 1)
    point = []
    for d in range(1, dim + 1):
        v = _directions(d)
        x = 0
        n, b = gray, 0
        while n:
            if n & 1:
                x ^= v[b]
            n >>= 1
            b += 1
        if shift is not None:
            x ^= shift[d - 1]
        point.append(x / 2.0**_NBITS)
    return point
