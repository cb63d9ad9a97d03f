"""Counter-based uniform random streams for the path simulator.

The generator is the SplitMix64 sequence (Steele, Lea & Flood's
SplittableRandom finalizer): the k-th uniform of a stream is a pure
function of ``(seed, k)``, which gives cheap, reproducible, independently
seedable per-path streams inside jitted kernels where ``numpy.random``
Generator objects are unavailable.

Bit-exactness across the numba and pure-Python lanes relies on two rules:

* multiplications/additions/xors only ever feed masked right shifts, so
  only the low 64 bits of any intermediate matter (int64 wrap-around in
  numba and unbounded Python ints agree on those bits);
* right shifts go through :func:`_shr`, which masks away the sign
  extension an arithmetic int64 shift would introduce.

Large constants are written as their signed-64-bit representatives so
numba types them as int64.
"""

from ._jit import jit

GOLDEN = -7046029254386353131  # 0x9E3779B97F4A7C15
_MIX1 = -4658895280553007687  # 0xBF58476D1CE4E5B9
_MIX2 = -7723592293110705685  # 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def to_signed64(value: int) -> int:
    """Reduce an arbitrary Python int to its signed 64-bit representative."""
    value &= (1 << 64) - 1
    if value >= 1 << 63:
        value -= 1 << 64
    return value


@jit
def _shr(x, k):
    # Logical right shift of the low 64 bits of x.
    return (x >> k) & ((1 << (64 - k)) - 1)


@jit
def mix64(z):
    """SplitMix64 finalizer; output is only meaningful in its low 64 bits."""
    z = (z ^ _shr(z, 30)) * _MIX1
    z = (z ^ _shr(z, 27)) * _MIX2
    return z ^ _shr(z, 31)


@jit
def uniform_at(seed, index):
    """The index-th uniform of the stream, in [0, 1 - 2**-53]."""
    z = mix64(seed + (index + 1) * GOLDEN)
    return _shr(z, 11) * _INV53


@jit
def path_seed(master_seed, path_index):
    """Derive the sub-stream seed for one simulated path."""
    return mix64(master_seed + (path_index + 1) * GOLDEN)
