"""Distance kernels: compiled extension when available, numpy otherwise.

Set ``LANDSLIDE_RISK_PURE_PYTHON=1`` to force the numpy path.
"""
import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("LANDSLIDE_RISK_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)


def haversine_matrix(lat_a, lon_a, lat_b, lon_b, radius, impl=None):
    """Pairwise great-circle distances, shape ``(len(lat_a), len(lat_b))``."""
    impl = impl or _impl
    return impl.haversine_matrix(_vec(lat_a), _vec(lon_a), _vec(lat_b), _vec(lon_b), float(radius))


def threshold_pairs(lat, lon, threshold, radius, impl=None):
    """Index pairs ``i < j`` with distance ``<= threshold``, sorted by (i, j)."""
    impl = impl or _impl
    return impl.threshold_pairs(_vec(lat), _vec(lon), float(threshold), float(radius))


def available_backends():
    backends = {"python": _fallback}
    try:
        from . import _ckernels

        backends["cython"] = _ckernels
    except ImportError:
        pass
    return backends
