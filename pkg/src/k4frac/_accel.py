"""Backend selection.

Set ``K4FRAC_DISABLE_NUMBA=1`` to force the pure-numpy float kernels; the numba
path is used otherwise whenever numba imports cleanly. Likewise
``K4FRAC_DISABLE_GMPY2=1`` makes exact objective evaluation use ``Fraction``
instead of gmpy2's ``mpq``. Both rational types are exact; results leave the
package as ``Fraction`` either way.
"""

from __future__ import annotations

import os

from fractions import Fraction

_FLAG = "K4FRAC_DISABLE_NUMBA"
_RATIONAL_FLAG = "K4FRAC_DISABLE_GMPY2"


def _flag_set(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


def numba_disabled() -> bool:
    return _flag_set(_FLAG)


try:
    if numba_disabled():
        raise ImportError(f"{_FLAG} is set")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # bare decorator or decorator factory, both become no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


try:
    if _flag_set(_RATIONAL_FLAG):
        raise ImportError(f"{_RATIONAL_FLAG} is set")
    from gmpy2 import mpq

    HAS_GMPY2 = True
except ImportError:
    HAS_GMPY2 = False
    mpq = None


def to_exact(v: Fraction):
    """Fraction -> the fastest exact rational type available."""
    return mpq(v.numerator, v.denominator) if HAS_GMPY2 else v


def from_exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if HAS_GMPY2:
        return Fraction(int(v.numerator), int(v.denominator))
    return Fraction(v)
