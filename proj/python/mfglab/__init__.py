"""Python interface to the mfglab C++ core."""

try:
    from mfglab._mfglab import *  # noqa: F401,F403  (installed layout)
    from mfglab import _mfglab as _core
except ImportError:  # build-tree layout: extension next to this package on sys.path
    from _mfglab import *  # noqa: F401,F403
    import _mfglab as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
