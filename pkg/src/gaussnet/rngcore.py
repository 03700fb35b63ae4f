"""Counter-based Gaussian random stream.

Every draw is addressed by the triple ``(seed, stream, counter)`` and computed
as a pure function of it, so results never depend on call order or on how
work is split across threads.

The generator hashes the counter with a keyed 64-bit mixer (two rounds of the
SplitMix64 finalizer) to obtain uniform bits, then applies Box-Muller. Counter
``c`` consumes the bit words at positions ``2c`` and ``2c + 1``; only the
cosine branch is used so each normal variate depends on exactly one counter.
"""

import hashlib

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 2.0 * np.pi


def _u64(value):
    return np.uint64(int(value) & _MASK64)


def _mix(x):
    # SplitMix64 finalizer; arrays only (uint64 scalars warn on overflow)
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def stream_id(*tags):
    """Derive a 64-bit stream id from a sequence of tags.

    >>> stream_id("layer") == stream_id("layer")
    True
    """
    text = "\x1f".join(str(t) for t in tags).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def _key(seed, stream):
    with np.errstate(over="ignore"):
        s = np.array([_u64(stream)], dtype=np.uint64)
        k = _mix(s + _GOLDEN) ^ np.array([_u64(seed)], dtype=np.uint64)
        k1 = _mix(k)
        k2 = _mix(k1 + _GOLDEN)
    return k1[0], k2[0]


def random_bits(seed, stream, counters):
    """Uniform 64-bit words for each entry of ``counters``."""
    c = np.asarray(counters)
    if c.dtype != np.uint64:
        c = c.astype(np.int64).astype(np.uint64)
    k1, k2 = _key(seed, stream)
    with np.errstate(over="ignore"):
        x = _mix(c * _GOLDEN + k1)
        return _mix(x ^ k2)


def uniform_at(seed, stream, counters):
    """Uniform variates on ``[0, 1)`` addressed by counter."""
    bits = random_bits(seed, stream, counters)
    return (bits >> _S11).astype(np.float64) * _INV53


def gaussian_at(seed, stream, counters):
    """Standard normal variate(s) for ``(seed, stream, counter)``.

    ``counters`` may be an int or an integer array; the output has the same
    shape. Counters must lie in ``[0, 2**63)``.
    """
    scalar = np.ndim(counters) == 0
    c = np.atleast_1d(np.asarray(counters)).astype(np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        c2 = c * np.uint64(2)
        b1 = random_bits(seed, stream, c2)
        b2 = random_bits(seed, stream, c2 + np.uint64(1))
    u1 = ((b1 >> _S11).astype(np.float64) + 1.0) * _INV53  # (0, 1]
    u2 = (b2 >> _S11).astype(np.float64) * _INV53  # [0, 1)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
    return float(z[0]) if scalar else z


def gaussian_block(seed, stream, shape, offset=0):
    """Array of standard normals laid out row-major from counter ``offset``."""
    size = int(np.prod(shape, dtype=np.int64))
    counters = np.arange(offset, offset + size, dtype=np.int64)
    return gaussian_at(seed, stream, counters).reshape(shape)


class GaussianStream:
    """A ``(master_seed, stream_id)`` pair that hands out draws by counter.

    The object holds no cursor: ``stream[i]`` and ``stream.block(...)`` are
    pure lookups.
    """

    def __init__(self, master_seed, stream_id):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64

    def __getitem__(self, counter):
        return gaussian_at(self.master_seed, self.stream_id, counter)

    def block(self, shape, offset=0):
        return gaussian_block(self.master_seed, self.stream_id, shape, offset)

    def uniform(self, counters):
        return uniform_at(self.master_seed, self.stream_id, counters)

    def __repr__(self):
        return f"GaussianStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def derive_seed(master_seed, *tags):
    """Child seed in ``[0, 2**63)`` for a tagged sub-task of ``master_seed``."""
    bits = random_bits(master_seed, stream_id("derive", *tags), np.zeros(1, dtype=np.uint64))
    return int(bits[0] >> np.uint64(1))
