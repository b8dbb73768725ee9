"""Numba kernels for the ensemble Langevin and batched classical integrators.

Noise is generated inside the kernels by a counter-based Philox4x32-10
generator keyed per trajectory stream, with the step index as counter, so
results do not depend on execution order, batching or thread count.  Two
Box-Muller normals come out of each 128-bit Philox block.
"""

from __future__ import annotations

import numba
import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint32(0x9E3779B9)
PHILOX_W1 = np.uint32(0xBB67AE85)

STATUS_OK = 0
STATUS_DIVERGED = 1
STATUS_INDEFINITE = 2

_DIVERGENCE_R2 = 1.0e6  # |X| > 1e3
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@numba.njit(numba.types.UniTuple(numba.uint32, 4)(
    numba.uint32, numba.uint32, numba.uint32, numba.uint32,
    numba.uint32, numba.uint32), cache=True, inline="always")
def _philox_block(c0, c1, c2, c3, k0, k1):
    for _ in range(10):
        p0 = PHILOX_M0 * np.uint64(c0)
        p1 = PHILOX_M1 * np.uint64(c2)
        hi0 = np.uint32(p0 >> np.uint64(32))
        lo0 = np.uint32(p0 & np.uint64(0xFFFFFFFF))
        hi1 = np.uint32(p1 >> np.uint64(32))
        lo1 = np.uint32(p1 & np.uint64(0xFFFFFFFF))
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = np.uint32(k0 + PHILOX_W0)
        k1 = np.uint32(k1 + PHILOX_W1)
    return c0, c1, c2, c3


@numba.njit(cache=True, inline="always")
def _uniform53(w_hi, w_lo):
    # 53-bit mantissa from two 32-bit words; result in (0, 1]
    bits = (np.uint64(w_hi) << np.uint64(32)) | np.uint64(w_lo)
    return (np.float64(bits >> np.uint64(11)) + 1.0) * _INV_2_53


@numba.njit(cache=True, inline="always")
def _normal_pair(key_lo, key_hi, step, slot):
    """Two standard normals from stream (key, step, slot) via Box-Muller."""
    w0, w1, w2, w3 = _philox_block(step, slot, np.uint32(0), np.uint32(0),
                                   key_lo, key_hi)
    u1 = _uniform53(w0, w1)
    u2 = _uniform53(w2, w3)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = _TWO_PI * u2
    return r * np.cos(ang), r * np.sin(ang)


@numba.njit(cache=True, inline="always")
def _rotate(x, y, half_angle):
    """Rotate (x, y) by -angle with exact norm preservation.

    Uses tan(half) so the rotation matrix is orthogonal even when the
    tangent comes from a short series; falls back to libm trig for large
    angles where the series would lose accuracy.
    """
    if abs(half_angle) < 0.5:
        h2 = half_angle * half_angle
        t = half_angle * (1.0 + h2 * (1.0 / 3.0 + h2 * (2.0 / 15.0 + h2 * (17.0 / 315.0))))
    else:
        t = np.tan(half_angle)
    den = 1.0 + t * t
    co = (1.0 - t * t) / den
    si = 2.0 * t / den
    return x * co + y * si, -x * si + y * co


@numba.njit(cache=True)
def philox_normals(key, n_steps):
    """Debug/test access to the per-step noise of one trajectory stream."""
    out = np.empty((n_steps, 4))
    key_lo = np.uint32(key & np.uint64(0xFFFFFFFF))
    key_hi = np.uint32(key >> np.uint64(32))
    for s in range(n_steps):
        out[s, 0], out[s, 1] = _normal_pair(key_lo, key_hi, np.uint32(s), np.uint32(0))
        out[s, 2], out[s, 3] = _normal_pair(key_lo, key_hi, np.uint32(s), np.uint32(1))
    return out


@numba.njit(cache=True)
def philox_raw(key, c0, c1):
    """Raw 4x32 Philox words for known-answer tests."""
    key_lo = np.uint32(key & np.uint64(0xFFFFFFFF))
    key_hi = np.uint32(key >> np.uint64(32))
    w = _philox_block(np.uint32(c0), np.uint32(c1), np.uint32(0), np.uint32(0),
                      key_lo, key_hi)
    out = np.empty(4, dtype=np.uint32)
    out[0], out[1], out[2], out[3] = w
    return out


@numba.njit(cache=True)
def initial_states(keys, radius):
    """Limit-cycle-radius initial conditions with Philox-drawn random phases."""
    n = keys.size
    out = np.empty((n, 4))
    for i in range(n):
        key_lo = np.uint32(keys[i] & np.uint64(0xFFFFFFFF))
        key_hi = np.uint32(keys[i] >> np.uint64(32))
        w0, w1, w2, w3 = _philox_block(np.uint32(0), np.uint32(2), np.uint32(0),
                                       np.uint32(0), key_lo, key_hi)
        ph1 = _TWO_PI * _uniform53(w0, w1)
        ph2 = _TWO_PI * _uniform53(w2, w3)
        r = radius[i]
        out[i, 0] = r * np.cos(ph1)
        out[i, 1] = r * np.sin(ph1)
        out[i, 2] = r * np.cos(ph2)
        out[i, 3] = r * np.sin(ph2)
    return out


@numba.njit(cache=True, inline="always")
def _sigma_blocks(r1, r2, gain, kappa, v):
    """Closed-form sqrt of the 2x2 diffusion block shared by x and y pairs.

    Returns (s11, s12, s22, ok); ok is False when an eigenvalue sits below
    the -1e-9 clamping tolerance.
    """
    nu1 = 0.5 * gain + kappa * (2.0 * r1 - 1.0) + 0.5 * v
    nu2 = 0.5 * gain + kappa * (2.0 * r2 - 1.0) + 0.5 * v
    a = 0.5 * nu1
    b = 0.5 * nu2
    c = -0.25 * v
    half_tr = 0.5 * (a + b)
    gap = np.sqrt(0.25 * (a - b) * (a - b) + c * c)
    if half_tr - gap < -1.0e-9:
        return 0.0, 0.0, 0.0, False
    det = a * b - c * c
    if det < 0.0:
        det = 0.0
    s = np.sqrt(det)
    t = np.sqrt(a + b + 2.0 * s)
    return (a + s) / t, c / t, (b + s) / t, True


@numba.njit(cache=True)
def langevin_tail_averages(keys, delta, v, k1, k2, kappa, gain, radius,
                           dt, n_burn, n_steps, rotating, noise_scale):
    """Euler-Maruyama ensemble with per-trajectory Philox streams.

    In the rotating variant the stiff phase rotation at the effective
    frequency is applied exactly after each Euler kick, which keeps the
    scheme stable at dt values the plain variant cannot take at large
    detuning or Kerr strength.

    Returns per-trajectory time averages of |alpha_1|^2 and |alpha_2|^2
    over steps n_burn..n_steps and a per-trajectory status code.
    """
    n = keys.size
    avg1 = np.full(n, np.nan)
    avg2 = np.full(n, np.nan)
    status = np.zeros(n, dtype=np.int8)
    n_avg = n_steps - n_burn
    sqdt = np.sqrt(dt) * noise_scale
    for i in range(n):
        key_lo = np.uint32(keys[i] & np.uint64(0xFFFFFFFF))
        key_hi = np.uint32(keys[i] >> np.uint64(32))
        d = delta[i]
        vv = v[i]
        kk1 = k1[i]
        kk2 = k2[i]
        kap = kappa[i]
        w0, w1, w2, w3 = _philox_block(np.uint32(0), np.uint32(2), np.uint32(0),
                                       np.uint32(0), key_lo, key_hi)
        ph1 = _TWO_PI * _uniform53(w0, w1)
        ph2 = _TWO_PI * _uniform53(w2, w3)
        x1 = radius[i] * np.cos(ph1)
        y1 = radius[i] * np.sin(ph1)
        x2 = radius[i] * np.cos(ph2)
        y2 = radius[i] * np.sin(ph2)
        acc1 = 0.0
        acc2 = 0.0
        for step in range(n_steps):
            r1 = x1 * x1 + y1 * y1
            r2 = x2 * x2 + y2 * y2
            if r1 + r2 > _DIVERGENCE_R2:
                status[i] = STATUS_DIVERGED
                break
            s11, s12, s22, ok = _sigma_blocks(r1, r2, gain, kap, vv)
            if not ok:
                status[i] = STATUS_INDEFINITE
                break
            e0, e1 = _normal_pair(key_lo, key_hi, np.uint32(step), np.uint32(0))
            e2, e3 = _normal_pair(key_lo, key_hi, np.uint32(step), np.uint32(1))
            c1 = 0.5 * gain - kap * (r1 - 1.0) - 0.5 * vv
            c2 = 0.5 * gain - kap * (r2 - 1.0) - 0.5 * vv
            w1 = 2.0 * kk1 * r1
            w2 = d + 2.0 * kk2 * r2
            if rotating:
                # Euler kick for the non-rotational terms plus noise, then an
                # exact rotation at the pre-kick effective frequencies.
                nx1 = x1 + dt * (c1 * x1 + 0.5 * vv * x2) + sqdt * (s11 * e0 + s12 * e2)
                ny1 = y1 + dt * (c1 * y1 + 0.5 * vv * y2) + sqdt * (s11 * e1 + s12 * e3)
                nx2 = x2 + dt * (c2 * x2 + 0.5 * vv * x1) + sqdt * (s12 * e0 + s22 * e2)
                ny2 = y2 + dt * (c2 * y2 + 0.5 * vv * y1) + sqdt * (s12 * e1 + s22 * e3)
                x1, y1 = _rotate(nx1, ny1, w1 * dt * 0.5)
                x2, y2 = _rotate(nx2, ny2, w2 * dt * 0.5)
            else:
                # plain Euler-Maruyama with the full drift at the pre-step state
                nx1 = x1 + dt * (w1 * y1 + c1 * x1 + 0.5 * vv * x2) + sqdt * (s11 * e0 + s12 * e2)
                ny1 = y1 + dt * (-w1 * x1 + c1 * y1 + 0.5 * vv * y2) + sqdt * (s11 * e1 + s12 * e3)
                nx2 = x2 + dt * (w2 * y2 + c2 * x2 + 0.5 * vv * x1) + sqdt * (s12 * e0 + s22 * e2)
                ny2 = y2 + dt * (-w2 * x2 + c2 * y2 + 0.5 * vv * y1) + sqdt * (s12 * e1 + s22 * e3)
                x1, y1, x2, y2 = nx1, ny1, nx2, ny2
            if step >= n_burn:
                acc1 += x1 * x1 + y1 * y1
                acc2 += x2 * x2 + y2 * y2
        else:
            avg1[i] = acc1 / n_avg
            avg2[i] = acc2 / n_avg
    return avg1, avg2, status


@numba.njit(cache=True, inline="always")
def _classical_rhs(x1, y1, x2, y2, d, vv, kk1, kk2, kap, gain):
    r1 = x1 * x1 + y1 * y1
    r2 = x2 * x2 + y2 * y2
    w1 = 2.0 * kk1 * r1
    w2 = d + 2.0 * kk2 * r2
    c1 = 0.5 * gain - kap * r1 - 0.5 * vv
    c2 = 0.5 * gain - kap * r2 - 0.5 * vv
    return (w1 * y1 + c1 * x1 + 0.5 * vv * x2,
            -w1 * x1 + c1 * y1 + 0.5 * vv * y2,
            w2 * y2 + c2 * x2 + 0.5 * vv * x1,
            -w2 * x2 + c2 * y2 + 0.5 * vv * y1)


@numba.njit(cache=True)
def classical_tail_averages(x0, delta, v, k1, k2, kappa, gain,
                            dt, n_steps, n_tail):
    """Fixed-step RK4 on the noiseless model; per-row tail averages of |alpha_m|^2."""
    n = x0.shape[0]
    avg1 = np.empty(n)
    avg2 = np.empty(n)
    for i in range(n):
        x1 = x0[i, 0]
        y1 = x0[i, 1]
        x2 = x0[i, 2]
        y2 = x0[i, 3]
        d = delta[i]
        vv = v[i]
        kk1 = k1[i]
        kk2 = k2[i]
        kap = kappa[i]
        acc1 = 0.0
        acc2 = 0.0
        half = 0.5 * dt
        sixth = dt / 6.0
        for step in range(n_steps):
            a1, b1, c1, d1 = _classical_rhs(x1, y1, x2, y2, d, vv, kk1, kk2, kap, gain)
            a2, b2, c2, d2 = _classical_rhs(x1 + half * a1, y1 + half * b1,
                                            x2 + half * c1, y2 + half * d1,
                                            d, vv, kk1, kk2, kap, gain)
            a3, b3, c3, d3 = _classical_rhs(x1 + half * a2, y1 + half * b2,
                                            x2 + half * c2, y2 + half * d2,
                                            d, vv, kk1, kk2, kap, gain)
            a4, b4, c4, d4 = _classical_rhs(x1 + dt * a3, y1 + dt * b3,
                                            x2 + dt * c3, y2 + dt * d3,
                                            d, vv, kk1, kk2, kap, gain)
            x1 += sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            y1 += sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            x2 += sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
            y2 += sixth * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
            if step >= n_steps - n_tail:
                acc1 += x1 * x1 + y1 * y1
                acc2 += x2 * x2 + y2 * y2
        avg1[i] = acc1 / n_tail
        avg2[i] = acc2 / n_tail
    return avg1, avg2
