"""Hot numeric kernels, each with a numba ``@njit`` loop version and a pure
numpy fallback. See :mod:`segalign.backend` for how the path is selected.

Every kernel works on contiguous float64 arrays. The jitted versions fuse the
inner loops (no temporaries) which is where they win over numpy at the small
matrix sizes this package runs at; matrix products stay on numpy since BLAS
already owns those. ``numpy_kernels`` / ``numba_kernels`` expose both
implementation sets so the benchmark and the agreement tests can compare them
regardless of which one is active.
"""

from __future__ import annotations

import math

import numpy as np

from . import backend

_SQRT1_2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# pure numpy implementations
# ---------------------------------------------------------------------------


def _softmax_rows_np(x):
    shifted = x - x.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def _softmax_backward_rows_np(dout, out):
    inner = (dout * out).sum(axis=1, keepdims=True)
    return out * (dout - inner)


def _layer_norm_forward_np(x, gain, bias, eps):
    mean = x.mean(axis=1)
    var = x.var(axis=1)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean[:, None]) * rstd[:, None]
    return xhat * gain + bias, mean, rstd


def _layer_norm_backward_np(dout, x, gain, mean, rstd):
    xhat = (x - mean[:, None]) * rstd[:, None]
    dgain = (dout * xhat).sum(axis=0)
    dbias = dout.sum(axis=0)
    dxhat = dout * gain
    a = dxhat.mean(axis=1, keepdims=True)
    b = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = rstd[:, None] * (dxhat - a - xhat * b)
    return dx, dgain, dbias


def _gelu_forward_np(x):
    from scipy.special import erf

    return 0.5 * x * (1.0 + erf(x * _SQRT1_2))


def _gelu_backward_np(dout, x):
    from scipy.special import erf

    cdf = 0.5 * (1.0 + erf(x * _SQRT1_2))
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
    return dout * (cdf + x * pdf)


def _cross_entropy_rows_np(logits, targets):
    m = logits.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(logits - m).sum(axis=1))
    rows = np.arange(logits.shape[0])
    losses = lse - logits[rows, targets]
    dlogits = np.exp(logits - lse[:, None])
    dlogits[rows, targets] -= 1.0
    return losses, dlogits


def _adamw_update_np(p, g, m, v, t, lr, beta1, beta2, eps, weight_decay):
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    if weight_decay != 0.0:
        p *= 1.0 - lr * weight_decay
    p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def _embedding_grad_np(ids, dout, grad):
    np.add.at(grad, ids, dout)


_NUMPY_IMPLS = {
    "softmax_rows": _softmax_rows_np,
    "softmax_backward_rows": _softmax_backward_rows_np,
    "layer_norm_forward": _layer_norm_forward_np,
    "layer_norm_backward": _layer_norm_backward_np,
    "gelu_forward": _gelu_forward_np,
    "gelu_backward": _gelu_backward_np,
    "cross_entropy_rows": _cross_entropy_rows_np,
    "adamw_update": _adamw_update_np,
    "embedding_grad": _embedding_grad_np,
}


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if backend.NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def _softmax_rows_nb(x):
        n, m = x.shape
        out = np.empty((n, m))
        for i in range(n):
            hi = x[i, 0]
            for j in range(1, m):
                if x[i, j] > hi:
                    hi = x[i, j]
            total = 0.0
            for j in range(m):
                e = math.exp(x[i, j] - hi)
                out[i, j] = e
                total += e
            inv = 1.0 / total
            for j in range(m):
                out[i, j] *= inv
        return out

    @njit(cache=True)
    def _softmax_backward_rows_nb(dout, out):
        n, m = out.shape
        dx = np.empty((n, m))
        for i in range(n):
            inner = 0.0
            for j in range(m):
                inner += dout[i, j] * out[i, j]
            for j in range(m):
                dx[i, j] = out[i, j] * (dout[i, j] - inner)
        return dx

    @njit(cache=True)
    def _layer_norm_forward_nb(x, gain, bias, eps):
        n, d = x.shape
        out = np.empty((n, d))
        mean = np.empty(n)
        rstd = np.empty(n)
        for i in range(n):
            mu = 0.0
            for j in range(d):
                mu += x[i, j]
            mu /= d
            var = 0.0
            for j in range(d):
                diff = x[i, j] - mu
                var += diff * diff
            var /= d
            r = 1.0 / math.sqrt(var + eps)
            mean[i] = mu
            rstd[i] = r
            for j in range(d):
                out[i, j] = (x[i, j] - mu) * r * gain[j] + bias[j]
        return out, mean, rstd

    @njit(cache=True)
    def _layer_norm_backward_nb(dout, x, gain, mean, rstd):
        n, d = x.shape
        dx = np.empty((n, d))
        dgain = np.zeros(d)
        dbias = np.zeros(d)
        for i in range(n):
            mu = mean[i]
            r = rstd[i]
            a = 0.0
            b = 0.0
            for j in range(d):
                xhat = (x[i, j] - mu) * r
                dxh = dout[i, j] * gain[j]
                dgain[j] += dout[i, j] * xhat
                dbias[j] += dout[i, j]
                a += dxh
                b += dxh * xhat
            a /= d
            b /= d
            for j in range(d):
                xhat = (x[i, j] - mu) * r
                dx[i, j] = r * (dout[i, j] * gain[j] - a - xhat * b)
        return dx, dgain, dbias

    @njit(cache=True)
    def _gelu_forward_nb(x):
        n = x.shape[0]
        out = np.empty(n)
        for i in range(n):
            out[i] = 0.5 * x[i] * (1.0 + math.erf(x[i] * _SQRT1_2))
        return out

    @njit(cache=True)
    def _gelu_backward_nb(dout, x):
        n = x.shape[0]
        dx = np.empty(n)
        for i in range(n):
            cdf = 0.5 * (1.0 + math.erf(x[i] * _SQRT1_2))
            pdf = math.exp(-0.5 * x[i] * x[i]) * _INV_SQRT_2PI
            dx[i] = dout[i] * (cdf + x[i] * pdf)
        return dx

    @njit(cache=True)
    def _cross_entropy_rows_nb(logits, targets):
        n, c = logits.shape
        losses = np.empty(n)
        dlogits = np.empty((n, c))
        for i in range(n):
            hi = logits[i, 0]
            for j in range(1, c):
                if logits[i, j] > hi:
                    hi = logits[i, j]
            total = 0.0
            for j in range(c):
                total += math.exp(logits[i, j] - hi)
            lse = hi + math.log(total)
            t = targets[i]
            losses[i] = lse - logits[i, t]
            for j in range(c):
                dlogits[i, j] = math.exp(logits[i, j] - lse)
            dlogits[i, t] -= 1.0
        return losses, dlogits

    @njit(cache=True)
    def _adamw_update_nb(p, g, m, v, t, lr, beta1, beta2, eps, weight_decay):
        n = p.shape[0]
        bc1 = 1.0 - beta1**t
        bc2 = 1.0 - beta2**t
        decay = 1.0 - lr * weight_decay
        for i in range(n):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
            p[i] = p[i] * decay - lr * (m[i] / bc1) / (math.sqrt(v[i] / bc2) + eps)

    @njit(cache=True)
    def _embedding_grad_nb(ids, dout, grad):
        n, d = dout.shape
        for i in range(n):
            row = ids[i]
            for j in range(d):
                grad[row, j] += dout[i, j]

    _NUMBA_IMPLS = {
        "softmax_rows": _softmax_rows_nb,
        "softmax_backward_rows": _softmax_backward_rows_nb,
        "layer_norm_forward": _layer_norm_forward_nb,
        "layer_norm_backward": _layer_norm_backward_nb,
        "gelu_forward": _gelu_forward_nb,
        "gelu_backward": _gelu_backward_nb,
        "cross_entropy_rows": _cross_entropy_rows_nb,
        "adamw_update": _adamw_update_nb,
        "embedding_grad": _embedding_grad_nb,
    }
else:
    _NUMBA_IMPLS = {}

numpy_kernels = dict(_NUMPY_IMPLS)
numba_kernels = dict(_NUMBA_IMPLS)

_ACTIVE = _NUMBA_IMPLS if backend.NUMBA_ENABLED else _NUMPY_IMPLS

softmax_rows = _ACTIVE["softmax_rows"]
softmax_backward_rows = _ACTIVE["softmax_backward_rows"]
layer_norm_forward = _ACTIVE["layer_norm_forward"]
layer_norm_backward = _ACTIVE["layer_norm_backward"]
cross_entropy_rows = _ACTIVE["cross_entropy_rows"]
adamw_update = _ACTIVE["adamw_update"]
embedding_grad = _ACTIVE["embedding_grad"]

_gelu_fwd = _ACTIVE["gelu_forward"]
_gelu_bwd = _ACTIVE["gelu_backward"]


def gelu_forward(x: np.ndarray) -> np.ndarray:
    """Exact (erf-based) GELU, any shape."""
    flat = np.ascontiguousarray(x).reshape(-1)
    return _gelu_fwd(flat).reshape(x.shape)


def gelu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    flat_d = np.ascontiguousarray(dout).reshape(-1)
    flat_x = np.ascontiguousarray(x).reshape(-1)
    return _gelu_bwd(flat_d, flat_x).reshape(x.shape)
