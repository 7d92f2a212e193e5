"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension (``_native``, built from Cython) is preferred; when
it is unavailable, or when ``HAZSYNC_PURE=1`` is set, the numpy fallback
is used.  Both expose the same three functions with identical semantics:

    cast_rays(origins, directions, centers, cos_half_angle)
    segment_runs(ids, times, gap_tolerance)
    latest_in_window(press_times, hit_times, window)
"""

import os

from . import _pure

if os.environ.get("HAZSYNC_PURE", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
MIN_HIT_DISTANCE = _pure.MIN_HIT_DISTANCE

cast_rays = _impl.cast_rays
segment_runs = _impl.segment_runs
latest_in_window = _impl.latest_in_window


def available_backends():
    """Names of importable backends ('pure' always, 'native' if built)."""
    names = ["pure"]
    try:
        from . import _native  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("native")
    return names


def get_backend(name):
    """Return a backend module by name ('pure' or 'native')."""
    if name == "pure":
        return _pure
    if name == "native":
        from . import _native
        return _native
    raise ValueError(f"unknown kernel backend: {name!r}")
