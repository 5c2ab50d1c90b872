"""Hot numeric kernels: Gaussian path-sum accumulation over mesh blocks.

Two interchangeable backends with identical signatures:

* numba (default when importable): @njit kernels, parallel over output rows;
* numpy: vectorized fallback, also the reference in backend-equivalence tests.

Selection: environment variable NETHEAT_BACKEND = "numba" | "numpy".  Unset
picks numba when available.  All functions fill ``out`` (nx, ny) with

    scale * sum_k sum_{df,dl} W[k, df, dl] * phi(xoff_df + yoff_dl + k)

where xoff = (1 - xi, xi), yoff = (eta, 1 - eta) and phi is the 1-D heat
kernel, its space derivative, or their exact time integrals over [T1, T2]
against an exp(-alpha*T) damping.  ``same_edge`` adds the direct Gaussian
term at distance |xi - eta|.
"""

import math
import os
import warnings

import numpy as np
from scipy import special as _sp

_SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# scalar helpers (python versions; numba compiles its own copies below)
# ---------------------------------------------------------------------------

def _erfcx_py(x):
    if x < 3.0:
        return math.exp(x * x) * math.erfc(x)
    f = 0.0
    for i in range(60, 0, -1):
        f = 0.5 * i / (x + f)
    return 1.0 / (_SQRT_PI * (x + f))


def _fband_py(T, z, alpha):
    # int_0^T exp(-alpha*s) G(s, z) ds, z >= 0
    if T <= 0.0:
        return 0.0
    rt = math.sqrt(T)
    if alpha == 0.0:
        return rt / _SQRT_PI * math.exp(-z * z / (4.0 * T)) - 0.5 * z * math.erfc(
            z / (2.0 * rt)
        )
    sa = math.sqrt(alpha)
    um = z / (2.0 * rt) - sa * rt
    up = z / (2.0 * rt) + sa * rt
    pref = math.exp(-z * z / (4.0 * T) - alpha * T)
    a = pref * _erfcx_py(um) if um >= 0.0 else math.exp(-z * sa) * math.erfc(um)
    b = pref * _erfcx_py(up)
    return (a - b) / (4.0 * sa)


def _dfband_py(T, z, alpha):
    # d/dz of _fband_py at signed z
    if T <= 0.0 or z == 0.0:
        return 0.0
    s = 1.0 if z > 0.0 else -1.0
    za = abs(z)
    rt = math.sqrt(T)
    if alpha == 0.0:
        return -s * 0.5 * math.erfc(za / (2.0 * rt))
    sa = math.sqrt(alpha)
    um = za / (2.0 * rt) - sa * rt
    up = za / (2.0 * rt) + sa * rt
    pref = math.exp(-za * za / (4.0 * T) - alpha * T)
    a = pref * _erfcx_py(um) if um >= 0.0 else math.exp(-za * sa) * math.erfc(um)
    b = pref * _erfcx_py(up)
    return -s * (a + b) / 4.0


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _offsets(xi, eta):
    xoff = np.stack([1.0 - xi, xi])
    yoff = np.stack([eta, 1.0 - eta])
    return xoff, yoff


def _np_gauss_block(out, xi, eta, W, t, same_edge, scale):
    q = 1.0 / (4.0 * t)
    c = scale / math.sqrt(4.0 * math.pi * t)
    xoff, yoff = _offsets(xi, eta)
    acc = np.zeros((xi.size, eta.size))
    if same_edge:
        z = xi[:, None] - eta[None, :]
        acc += np.exp(-z * z * q)
    for k in range(W.shape[0]):
        for df in range(2):
            for dl in range(2):
                w = W[k, df, dl]
                if w != 0.0:
                    z = xoff[df][:, None] + yoff[dl][None, :] + k
                    acc += w * np.exp(-z * z * q)
    out[:] = c * acc


def _np_dgauss_block(out, xi, eta, W, t, same_edge, scale):
    q = 1.0 / (4.0 * t)
    c = scale / math.sqrt(4.0 * math.pi * t)
    inv2t = 1.0 / (2.0 * t)
    xoff, yoff = _offsets(xi, eta)
    acc = np.zeros((xi.size, eta.size))
    if same_edge:
        z = eta[None, :] - xi[:, None]
        acc += -z * inv2t * np.exp(-z * z * q)
    for k in range(W.shape[0]):
        for df in range(2):
            for dl in range(2):
                w = W[k, df, dl]
                if w != 0.0:
                    sgn = 1.0 if dl == 0 else -1.0
                    z = xoff[df][:, None] + yoff[dl][None, :] + k
                    acc += w * sgn * (-z * inv2t) * np.exp(-z * z * q)
    out[:] = c * acc


def _np_fband(T, z, alpha):
    """Vectorized int_0^T exp(-alpha*s) G(s, z) ds for z >= 0."""
    if T <= 0.0:
        return np.zeros_like(z)
    rt = math.sqrt(T)
    if alpha == 0.0:
        return rt / _SQRT_PI * np.exp(-z * z / (4.0 * T)) - 0.5 * z * _sp.erfc(
            z / (2.0 * rt)
        )
    sa = math.sqrt(alpha)
    um = z / (2.0 * rt) - sa * rt
    up = z / (2.0 * rt) + sa * rt
    pref = np.exp(-z * z / (4.0 * T) - alpha * T)
    a = pref * _sp.erfcx(np.maximum(um, 0.0))
    neg = um < 0.0
    if np.any(neg):
        a[neg] = np.exp(-z[neg] * sa) * _sp.erfc(um[neg])
    b = pref * _sp.erfcx(up)
    return (a - b) / (4.0 * sa)


def _np_dfband(T, z, alpha):
    """Vectorized d/dz of the damped band integral at signed z."""
    if T <= 0.0:
        return np.zeros_like(z)
    s = np.sign(z)
    za = np.abs(z)
    rt = math.sqrt(T)
    if alpha == 0.0:
        return -s * 0.5 * _sp.erfc(za / (2.0 * rt))
    sa = math.sqrt(alpha)
    um = za / (2.0 * rt) - sa * rt
    up = za / (2.0 * rt) + sa * rt
    pref = np.exp(-za * za / (4.0 * T) - alpha * T)
    a = pref * _sp.erfcx(np.maximum(um, 0.0))
    neg = um < 0.0
    if np.any(neg):
        a[neg] = np.exp(-za[neg] * sa) * _sp.erfc(um[neg])
    b = pref * _sp.erfcx(up)
    return -s * (a + b) / 4.0


def _np_band_block(out, xi, eta, W, t1, t2, alpha, same_edge, scale):
    xoff, yoff = _offsets(xi, eta)
    acc = np.zeros((xi.size, eta.size))
    if same_edge:
        z = np.abs(xi[:, None] - eta[None, :])
        acc += _np_fband(t2, z, alpha) - _np_fband(t1, z, alpha)
    for k in range(W.shape[0]):
        for df in range(2):
            for dl in range(2):
                w = W[k, df, dl]
                if w != 0.0:
                    z = xoff[df][:, None] + yoff[dl][None, :] + k
                    acc += w * (_np_fband(t2, z, alpha) - _np_fband(t1, z, alpha))
    out[:] = scale * acc


def _np_dband_block(out, xi, eta, W, t1, t2, alpha, same_edge, scale):
    xoff, yoff = _offsets(xi, eta)
    acc = np.zeros((xi.size, eta.size))
    if same_edge:
        z = eta[None, :] - xi[:, None]
        acc += _np_dfband(t2, z, alpha) - _np_dfband(t1, z, alpha)
    for k in range(W.shape[0]):
        for df in range(2):
            for dl in range(2):
                w = W[k, df, dl]
                if w != 0.0:
                    sgn = 1.0 if dl == 0 else -1.0
                    z = xoff[df][:, None] + yoff[dl][None, :] + k
                    acc += w * sgn * (
                        _np_dfband(t2, z, alpha) - _np_dfband(t1, z, alpha)
                    )
    out[:] = scale * acc


numpy_impl = {
    "gauss_block": _np_gauss_block,
    "dgauss_block": _np_dgauss_block,
    "band_block": _np_band_block,
    "dband_block": _np_dband_block,
}


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via NETHEAT_BACKEND=numpy
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _erfcx_nb(x):
        if x < 3.0:
            return math.exp(x * x) * math.erfc(x)
        f = 0.0
        for i in range(60, 0, -1):
            f = 0.5 * i / (x + f)
        return 1.0 / (_SQRT_PI * (x + f))

    @njit(cache=True, inline="always")
    def _fband_nb(T, z, alpha):
        if T <= 0.0:
            return 0.0
        rt = math.sqrt(T)
        if alpha == 0.0:
            return rt / _SQRT_PI * math.exp(-z * z / (4.0 * T)) - 0.5 * z * math.erfc(
                z / (2.0 * rt)
            )
        sa = math.sqrt(alpha)
        um = z / (2.0 * rt) - sa * rt
        up = z / (2.0 * rt) + sa * rt
        pref = math.exp(-z * z / (4.0 * T) - alpha * T)
        if um >= 0.0:
            a = pref * _erfcx_nb(um)
        else:
            a = math.exp(-z * sa) * math.erfc(um)
        b = pref * _erfcx_nb(up)
        return (a - b) / (4.0 * sa)

    @njit(cache=True, inline="always")
    def _dfband_nb(T, z, alpha):
        if T <= 0.0 or z == 0.0:
            return 0.0
        s = 1.0 if z > 0.0 else -1.0
        za = abs(z)
        rt = math.sqrt(T)
        if alpha == 0.0:
            return -s * 0.5 * math.erfc(za / (2.0 * rt))
        sa = math.sqrt(alpha)
        um = za / (2.0 * rt) - sa * rt
        up = za / (2.0 * rt) + sa * rt
        pref = math.exp(-za * za / (4.0 * T) - alpha * T)
        if um >= 0.0:
            a = pref * _erfcx_nb(um)
        else:
            a = math.exp(-za * sa) * math.erfc(um)
        b = pref * _erfcx_nb(up)
        return -s * (a + b) / 4.0

    @njit(cache=True, parallel=True)
    def _nb_gauss_block(out, xi, eta, W, t, same_edge, scale):
        q = 1.0 / (4.0 * t)
        c = scale / math.sqrt(4.0 * math.pi * t)
        nk = W.shape[0]
        for a in prange(xi.size):
            x0 = 1.0 - xi[a]
            x1 = xi[a]
            for b in range(eta.size):
                y0 = eta[b]
                y1 = 1.0 - eta[b]
                acc = 0.0
                if same_edge:
                    z = x1 - y0
                    acc += math.exp(-z * z * q)
                for k in range(nk):
                    kb = float(k)
                    w = W[k, 0, 0]
                    if w != 0.0:
                        z = x0 + y0 + kb
                        acc += w * math.exp(-z * z * q)
                    w = W[k, 0, 1]
                    if w != 0.0:
                        z = x0 + y1 + kb
                        acc += w * math.exp(-z * z * q)
                    w = W[k, 1, 0]
                    if w != 0.0:
                        z = x1 + y0 + kb
                        acc += w * math.exp(-z * z * q)
                    w = W[k, 1, 1]
                    if w != 0.0:
                        z = x1 + y1 + kb
                        acc += w * math.exp(-z * z * q)
                out[a, b] = c * acc

    @njit(cache=True, parallel=True)
    def _nb_dgauss_block(out, xi, eta, W, t, same_edge, scale):
        q = 1.0 / (4.0 * t)
        c = scale / math.sqrt(4.0 * math.pi * t)
        inv2t = 1.0 / (2.0 * t)
        nk = W.shape[0]
        for a in prange(xi.size):
            x0 = 1.0 - xi[a]
            x1 = xi[a]
            for b in range(eta.size):
                y0 = eta[b]
                y1 = 1.0 - eta[b]
                acc = 0.0
                if same_edge:
                    z = y0 - x1
                    acc += -z * inv2t * math.exp(-z * z * q)
                for k in range(nk):
                    kb = float(k)
                    w = W[k, 0, 0]
                    if w != 0.0:
                        z = x0 + y0 + kb
                        acc += -w * z * inv2t * math.exp(-z * z * q)
                    w = W[k, 0, 1]
                    if w != 0.0:
                        z = x0 + y1 + kb
                        acc += w * z * inv2t * math.exp(-z * z * q)
                    w = W[k, 1, 0]
                    if w != 0.0:
                        z = x1 + y0 + kb
                        acc += -w * z * inv2t * math.exp(-z * z * q)
                    w = W[k, 1, 1]
                    if w != 0.0:
                        z = x1 + y1 + kb
                        acc += w * z * inv2t * math.exp(-z * z * q)
                out[a, b] = c * acc

    @njit(cache=True, parallel=True)
    def _nb_band_block(out, xi, eta, W, t1, t2, alpha, same_edge, scale):
        nk = W.shape[0]
        for a in prange(xi.size):
            x0 = 1.0 - xi[a]
            x1 = xi[a]
            for b in range(eta.size):
                y0 = eta[b]
                y1 = 1.0 - eta[b]
                acc = 0.0
                if same_edge:
                    z = abs(x1 - y0)
                    acc += _fband_nb(t2, z, alpha) - _fband_nb(t1, z, alpha)
                for k in range(nk):
                    kb = float(k)
                    for df in range(2):
                        xo = x0 if df == 0 else x1
                        for dl in range(2):
                            w = W[k, df, dl]
                            if w != 0.0:
                                z = xo + (y0 if dl == 0 else y1) + kb
                                acc += w * (
                                    _fband_nb(t2, z, alpha) - _fband_nb(t1, z, alpha)
                                )
                out[a, b] = scale * acc

    @njit(cache=True, parallel=True)
    def _nb_dband_block(out, xi, eta, W, t1, t2, alpha, same_edge, scale):
        nk = W.shape[0]
        for a in prange(xi.size):
            x0 = 1.0 - xi[a]
            x1 = xi[a]
            for b in range(eta.size):
                y0 = eta[b]
                y1 = 1.0 - eta[b]
                acc = 0.0
                if same_edge:
                    z = y0 - x1
                    acc += _dfband_nb(t2, z, alpha) - _dfband_nb(t1, z, alpha)
                for k in range(nk):
                    kb = float(k)
                    for df in range(2):
                        xo = x0 if df == 0 else x1
                        for dl in range(2):
                            w = W[k, df, dl]
                            if w != 0.0:
                                sgn = 1.0 if dl == 0 else -1.0
                                z = xo + (y0 if dl == 0 else y1) + kb
                                acc += w * sgn * (
                                    _dfband_nb(t2, z, alpha) - _dfband_nb(t1, z, alpha)
                                )
                out[a, b] = scale * acc

    numba_impl = {
        "gauss_block": _nb_gauss_block,
        "dgauss_block": _nb_dgauss_block,
        "band_block": _nb_band_block,
        "dband_block": _nb_dband_block,
    }
else:
    numba_impl = None


def _resolve_backend():
    choice = os.environ.get("NETHEAT_BACKEND", "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            warnings.warn("NETHEAT_BACKEND=numba requested but numba is not "
                          "importable; falling back to numpy")
            return "numpy"
        return "numba"
    if choice:
        warnings.warn(f"unknown NETHEAT_BACKEND={choice!r}; using default")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _resolve_backend()
_active = numba_impl if BACKEND == "numba" else numpy_impl

gauss_block = _active["gauss_block"]
dgauss_block = _active["dgauss_block"]
band_block = _active["band_block"]
dband_block = _active["dband_block"]
