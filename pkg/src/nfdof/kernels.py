"""Hot-loop backend, chosen once at import.

The compiled extension ``nfdof._kernels`` is used when it was built;
otherwise the numpy fallback ``nfdof._kernels_py`` is used.  Setting
``NFDOF_BACKEND=python`` forces the fallback.  ``NFDOF_NUM_THREADS`` sets
the thread count of the compiled loops.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("NFDOF_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"


def num_threads() -> int:
    try:
        return max(int(os.environ.get("NFDOF_NUM_THREADS", "1")), 1)
    except ValueError:
        return 1


def _f64(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def fresnel_matrix(points, u, r, lam, impl=None):
    """``H[k, m] = exp(j 2pi/lam (u.p - (|p|^2 - (u.p)^2) / (2 r_k))) / r_k``."""
    impl = impl or _impl
    return impl.fresnel_matrix(_f64(points, 2), _f64(u, 1), _f64(r, 1), float(lam), num_threads())


def exact_matrix(points, q, lam, impl=None):
    """``H[k, m] = exp(-j 2pi |p_m - q_k| / lam) / |p_m - q_k|``."""
    impl = impl or _impl
    return impl.exact_matrix(_f64(points, 2), _f64(q, 2), float(lam), num_threads())


def kernel_lags(rho2, w, lags, lam, impl=None):
    """``g(dt) = sum_m w_m exp(-j pi rho2_m dt / lam)`` for every lag."""
    impl = impl or _impl
    return impl.kernel_lags(_f64(rho2, 1), _f64(w, 1), _f64(lags, 1), float(lam), num_threads())


def sinc_convolve(g0, dxi, impl=None):
    """Trapezoidal ``sum_j w_j g0_j sinc(2 (xi_i - xi_j))`` on a uniform grid."""
    impl = impl or _impl
    return impl.sinc_convolve(_f64(g0, 1), float(dxi), num_threads())
