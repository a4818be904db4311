"""Pixel-classification kernels.

Two interchangeable backends compute the same per-pixel classification:
a scalar loop compiled with numba (default) and a vectorized numpy
fallback.  Set PARADYN_DISABLE_NUMBA=1 to force the numpy path.  Within a
backend the result is a pure function of the inputs, so renders are
bitwise reproducible regardless of tiling or thread count.

Classification of one pixel's orbit z_0, z_1, ...:
  - basin target k (class 2 + k): first n with z_n inside target k, where a
    target is either a disc around an attracting point or an angular sector
    at a parabolic point (discs are numbered before sectors);
  - escaped (class 1): first n with |z_n| > bailout or the family's escape
    heuristic certain that the orbit diverges from z_n on;
  - undecided (class 0): neither within max_iter steps.

Family codes and escape heuristics (cut = log(2 * bailout)):
  0/1/2 exponentials: Re(scale z) > cut;  3/5 sine types:
  |Im(scale z + shift)| > cut;  4 z e^z: log|scale z| + Re(scale z) > cut.
"""

from __future__ import annotations

import cmath
import math
import os

import numpy as np

NUMBA_ENABLED = os.environ.get("PARADYN_DISABLE_NUMBA", "") in ("", "0")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

_HUGE = 1e150


def _classify_scalar(
    zs,
    fam,
    param,
    scale,
    max_iter,
    bailout,
    disc_t,
    disc_r,
    sec_zeta,
    sec_vec,
    sec_alpha,
    sec_r,
    out_class,
    out_iter,
):
    cut = math.log(2.0 * bailout)
    shift = param if fam == 5 else 0j
    inv_cos = 1.0 / math.cos(param.real) if fam == 5 else 1.0
    sin_a = math.sin(param.real) if fam == 5 else 0.0
    for idx in range(zs.size):
        z = zs[idx]
        cls = 0
        it = max_iter
        for n in range(max_iter):
            done = False
            for k in range(disc_t.size):
                if abs(z - disc_t[k]) < disc_r[k]:
                    cls = 2 + k
                    it = n
                    done = True
                    break
            if not done:
                for m in range(sec_zeta.size):
                    u = z - sec_zeta[m]
                    au = abs(u)
                    if 0.0 < au < sec_r[m]:
                        if abs(cmath.phase(u / sec_vec[m])) < sec_alpha[m] / 2:
                            cls = 2 + disc_t.size + m
                            it = n
                            done = True
                            break
            if done:
                break
            w = scale * z
            if abs(z) > bailout:
                cls = 1
                it = n
                break
            if fam <= 2:
                esc = w.real > cut
            elif fam == 3 or fam == 5:
                esc = abs((w + shift).imag) > cut
            else:
                esc = abs(w) > 1.0 and math.log(abs(w)) + w.real > cut
            if esc or abs(z) > _HUGE:
                cls = 1
                it = n
                break
            if fam == 0:
                z = param * cmath.exp(w)
            elif fam == 1:
                z = cmath.exp(w) + param
            elif fam == 2:
                z = cmath.exp(w - 1)
            elif fam == 3:
                z = cmath.sin(w)
            elif fam == 4:
                z = w * cmath.exp(w)
            else:
                z = (cmath.sin(w + shift) - sin_a) * inv_cos
        out_class[idx] = cls
        out_iter[idx] = it


if NUMBA_ENABLED:
    _classify_scalar_jit = njit(cache=True, nogil=True)(_classify_scalar)


def _classify_numpy(
    zs,
    fam,
    param,
    scale,
    max_iter,
    bailout,
    disc_t,
    disc_r,
    sec_zeta,
    sec_vec,
    sec_alpha,
    sec_r,
    out_class,
    out_iter,
):
    cut = math.log(2.0 * bailout)
    shift = param if fam == 5 else 0j
    inv_cos = 1.0 / math.cos(param.real) if fam == 5 else 1.0
    sin_a = math.sin(param.real) if fam == 5 else 0.0
    z = zs.copy()
    out_class[:] = 0
    out_iter[:] = max_iter
    live = np.ones(z.size, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(max_iter):
            if not live.any():
                break
            zl = z[live]
            idx = np.flatnonzero(live)
            cls_here = np.zeros(zl.size, dtype=np.int16)
            for k in range(disc_t.size):
                hit = (cls_here == 0) & (np.abs(zl - disc_t[k]) < disc_r[k])
                cls_here[hit] = 2 + k
            for m in range(sec_zeta.size):
                u = zl - sec_zeta[m]
                au = np.abs(u)
                hit = (cls_here == 0) & (au > 0.0) & (au < sec_r[m])
                if hit.any():
                    ang = np.abs(np.angle(u[hit] / sec_vec[m]))
                    sub = np.flatnonzero(hit)[ang < sec_alpha[m] / 2]
                    cls_here[sub] = 2 + disc_t.size + m
            w = scale * zl
            esc = np.abs(zl) > bailout
            if fam <= 2:
                esc |= w.real > cut
            elif fam == 3 or fam == 5:
                esc |= np.abs((w + shift).imag) > cut
            else:
                aw = np.abs(w)
                big = aw > 1.0
                esc |= big & (np.log(np.where(big, aw, 1.0)) + w.real > cut)
            esc |= np.abs(zl) > _HUGE
            esc &= cls_here == 0
            done = (cls_here > 0) | esc
            out_class[idx[cls_here > 0]] = cls_here[cls_here > 0]
            out_class[idx[esc]] = 1
            out_iter[idx[done]] = n
            live[idx[done]] = False
            keep = ~done
            zk = zl[keep]
            wk = scale * zk
            if fam == 0:
                zn = param * np.exp(wk)
            elif fam == 1:
                zn = np.exp(wk) + param
            elif fam == 2:
                zn = np.exp(wk - 1)
            elif fam == 3:
                zn = np.sin(wk)
            elif fam == 4:
                zn = wk * np.exp(wk)
            else:
                zn = (np.sin(wk + shift) - sin_a) * inv_cos
            z[idx[keep]] = zn


def classify_block(zs: np.ndarray, fam: int, param: complex, scale: complex,
                   max_iter: int, bailout: float,
                   disc_t: np.ndarray, disc_r: np.ndarray,
                   sec_zeta: np.ndarray, sec_vec: np.ndarray,
                   sec_alpha: np.ndarray, sec_r: np.ndarray,
                   force_numpy: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Classify a flat block of seeds; returns (class, escape_index)."""
    out_class = np.zeros(zs.size, dtype=np.int16)
    out_iter = np.zeros(zs.size, dtype=np.int32)
    impl = (
        _classify_scalar_jit
        if NUMBA_ENABLED and not force_numpy
        else _classify_numpy
    )
    impl(
        np.ascontiguousarray(zs, dtype=np.complex128),
        fam,
        complex(param),
        complex(scale),
        max_iter,
        float(bailout),
        disc_t.astype(np.complex128),
        disc_r.astype(np.float64),
        sec_zeta.astype(np.complex128),
        sec_vec.astype(np.complex128),
        sec_alpha.astype(np.float64),
        sec_r.astype(np.float64),
        out_class,
        out_iter,
    )
    return out_class, out_iter
