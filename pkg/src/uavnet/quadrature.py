"""Deterministic adaptive-Simpson quadrature.

Two pieces live here:

* a JIT-compiled nested (z, then y, then x) adaptive Simpson rule for the
  interference kernel ``coef / (r**delta + coef)`` over an axis-aligned box,
  used by the Laplace-functional evaluation, and
* a pure-Python 1-D adaptive Simpson with a composite seed grid, used for
  the outer integral of the analytic coverage probability.

Both refine until an interval's Richardson error estimate ``|S2 - S1|``
drops below ``15 * tol`` and add the ``/15`` correction on acceptance.
The seed grid in the 1-D rule serves double duty: it estimates the
integral's scale for the relative tolerance and it guards against narrow
features that a single 3-point bootstrap interval would miss entirely
(the coverage integrand concentrates in a small fraction of its domain).

Tolerances are coordinated by the callers: the box rule takes an absolute
tolerance floor because its callers integrate ``exp(-lambda * result)``,
where an absolute error of ``eps / lambda`` on the box integral is a
relative error of ``eps`` on the exponential.  Refining the box integral
beyond that floor buys nothing and blows up the evaluation count near
small separations, where the kernel's peak width shrinks with ``coef``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import DomainError, QuadratureError

_STACK = 2048


@njit(cache=True)
def _kernel(x, y, z, cx, cy, cz, coef, delta):
    dx = x - cx
    dy = y - cy
    dz = z - cz
    r2 = dx * dx + dy * dy + dz * dz
    return coef / (r2 ** (delta * 0.5) + coef)


@njit(cache=True)
def _int_z(x, y, a, b, cx, cy, cz, coef, delta, tol, budget):
    fa = _kernel(x, y, a, cx, cy, cz, coef, delta)
    m = 0.5 * (a + b)
    fm = _kernel(x, y, m, cx, cy, cz, coef, delta)
    fb = _kernel(x, y, b, cx, cy, cz, coef, delta)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = np.empty((_STACK, 7))
    stack[0, 0] = a; stack[0, 1] = b; stack[0, 2] = fa; stack[0, 3] = fm
    stack[0, 4] = fb; stack[0, 5] = whole; stack[0, 6] = tol
    top = 1
    acc = 0.0
    evals = 3
    ok = True
    while top > 0:
        top -= 1
        ia = stack[top, 0]; ib = stack[top, 1]
        ifa = stack[top, 2]; ifm = stack[top, 3]; ifb = stack[top, 4]
        iS = stack[top, 5]; itol = stack[top, 6]
        im = 0.5 * (ia + ib)
        flm = _kernel(x, y, 0.5 * (ia + im), cx, cy, cz, coef, delta)
        frm = _kernel(x, y, 0.5 * (im + ib), cx, cy, cz, coef, delta)
        evals += 2
        Sl = (im - ia) / 6.0 * (ifa + 4.0 * flm + ifm)
        Sr = (ib - im) / 6.0 * (ifm + 4.0 * frm + ifb)
        d2 = Sl + Sr - iS
        if abs(d2) <= 15.0 * itol:
            acc += Sl + Sr + d2 / 15.0
        elif top >= _STACK - 2 or evals > budget:
            acc += Sl + Sr + d2 / 15.0
            ok = False
        else:
            stack[top, 0] = ia; stack[top, 1] = im; stack[top, 2] = ifa
            stack[top, 3] = flm; stack[top, 4] = ifm; stack[top, 5] = Sl
            stack[top, 6] = 0.5 * itol
            top += 1
            stack[top, 0] = im; stack[top, 1] = ib; stack[top, 2] = ifm
            stack[top, 3] = frm; stack[top, 4] = ifb; stack[top, 5] = Sr
            stack[top, 6] = 0.5 * itol
            top += 1
    return acc, evals, ok


@njit(cache=True)
def _int_y(x, a, b, z0, z1, cx, cy, cz, coef, delta, tol, tol_z, budget):
    fa, e1, ok1 = _int_z(x, a, z0, z1, cx, cy, cz, coef, delta, tol_z, budget)
    m = 0.5 * (a + b)
    fm, e2, ok2 = _int_z(x, m, z0, z1, cx, cy, cz, coef, delta, tol_z, budget)
    fb, e3, ok3 = _int_z(x, b, z0, z1, cx, cy, cz, coef, delta, tol_z, budget)
    evals = e1 + e2 + e3
    ok = ok1 and ok2 and ok3
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = np.empty((_STACK, 7))
    stack[0, 0] = a; stack[0, 1] = b; stack[0, 2] = fa; stack[0, 3] = fm
    stack[0, 4] = fb; stack[0, 5] = whole; stack[0, 6] = tol
    top = 1
    acc = 0.0
    while top > 0:
        top -= 1
        ia = stack[top, 0]; ib = stack[top, 1]
        ifa = stack[top, 2]; ifm = stack[top, 3]; ifb = stack[top, 4]
        iS = stack[top, 5]; itol = stack[top, 6]
        im = 0.5 * (ia + ib)
        flm, e4, ok4 = _int_z(x, 0.5 * (ia + im), z0, z1, cx, cy, cz,
                              coef, delta, tol_z, budget)
        frm, e5, ok5 = _int_z(x, 0.5 * (im + ib), z0, z1, cx, cy, cz,
                              coef, delta, tol_z, budget)
        evals += e4 + e5
        ok = ok and ok4 and ok5
        Sl = (im - ia) / 6.0 * (ifa + 4.0 * flm + ifm)
        Sr = (ib - im) / 6.0 * (ifm + 4.0 * frm + ifb)
        d2 = Sl + Sr - iS
        if abs(d2) <= 15.0 * itol:
            acc += Sl + Sr + d2 / 15.0
        elif top >= _STACK - 2 or evals > budget:
            acc += Sl + Sr + d2 / 15.0
            ok = False
        else:
            stack[top, 0] = ia; stack[top, 1] = im; stack[top, 2] = ifa
            stack[top, 3] = flm; stack[top, 4] = ifm; stack[top, 5] = Sl
            stack[top, 6] = 0.5 * itol
            top += 1
            stack[top, 0] = im; stack[top, 1] = ib; stack[top, 2] = ifm
            stack[top, 3] = frm; stack[top, 4] = ifb; stack[top, 5] = Sr
            stack[top, 6] = 0.5 * itol
            top += 1
    return acc, evals, ok


@njit(cache=True)
def _box_core(x0, x1, y0, y1, z0, z1, cx, cy, cz, coef, delta,
              rel_tol, abs_tol, budget):
    # one cheap unrefined pass at the x midplane to estimate the scale
    mx = 0.5 * (x0 + x1)
    rough, e0, _ = _int_y(mx, y0, y1, z0, z1, cx, cy, cz, coef, delta,
                          1e290, 1e290, budget)
    scale = abs(rough) * (x1 - x0)
    tol = max(rel_tol * scale, abs_tol)
    tol_y = tol / (x1 - x0)
    tol_z = 0.2 * tol / ((x1 - x0) * (y1 - y0))
    fa, e1, ok1 = _int_y(x0, y0, y1, z0, z1, cx, cy, cz, coef, delta,
                         tol_y, tol_z, budget)
    fm, e2, ok2 = _int_y(mx, y0, y1, z0, z1, cx, cy, cz, coef, delta,
                         tol_y, tol_z, budget)
    fb, e3, ok3 = _int_y(x1, y0, y1, z0, z1, cx, cy, cz, coef, delta,
                         tol_y, tol_z, budget)
    evals = e0 + e1 + e2 + e3
    ok = ok1 and ok2 and ok3
    whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb)
    stack = np.empty((_STACK, 7))
    stack[0, 0] = x0; stack[0, 1] = x1; stack[0, 2] = fa; stack[0, 3] = fm
    stack[0, 4] = fb; stack[0, 5] = whole; stack[0, 6] = tol
    top = 1
    acc = 0.0
    while top > 0:
        top -= 1
        ia = stack[top, 0]; ib = stack[top, 1]
        ifa = stack[top, 2]; ifm = stack[top, 3]; ifb = stack[top, 4]
        iS = stack[top, 5]; itol = stack[top, 6]
        im = 0.5 * (ia + ib)
        flm, e4, ok4 = _int_y(0.5 * (ia + im), y0, y1, z0, z1, cx, cy, cz,
                              coef, delta, tol_y, tol_z, budget)
        frm, e5, ok5 = _int_y(0.5 * (im + ib), y0, y1, z0, z1, cx, cy, cz,
                              coef, delta, tol_y, tol_z, budget)
        evals += e4 + e5
        ok = ok and ok4 and ok5
        Sl = (im - ia) / 6.0 * (ifa + 4.0 * flm + ifm)
        Sr = (ib - im) / 6.0 * (ifm + 4.0 * frm + ifb)
        d2 = Sl + Sr - iS
        if abs(d2) <= 15.0 * itol:
            acc += Sl + Sr + d2 / 15.0
        elif top >= _STACK - 2 or evals > budget:
            acc += Sl + Sr + d2 / 15.0
            ok = False
        else:
            stack[top, 0] = ia; stack[top, 1] = im; stack[top, 2] = ifa
            stack[top, 3] = flm; stack[top, 4] = ifm; stack[top, 5] = Sl
            stack[top, 6] = 0.5 * itol
            top += 1
            stack[top, 0] = im; stack[top, 1] = ib; stack[top, 2] = ifm
            stack[top, 3] = frm; stack[top, 4] = ifb; stack[top, 5] = Sr
            stack[top, 6] = 0.5 * itol
            top += 1
    return acc, evals, ok


def kernel_box_integral(bounds, center, coef, delta,
                        rel_tol=1e-5, abs_tol=0.0, budget=5_000_000):
    """Integrate ``coef / (|r - center|**delta + coef)`` over a box.

    ``bounds`` is ``(x0, x1, y0, y1, z0, z1)``; ``center`` the kernel
    singular... well, peak location (the kernel is bounded by 1, there is
    no singularity).  Refinement stops when per-axis Richardson estimates
    meet ``max(rel_tol * scale, abs_tol)``.

    Raises QuadratureError if the evaluation budget (or the subdivision
    stack) is exhausted before the tolerance is met.
    """
    if coef < 0.0:
        raise DomainError(f"kernel coefficient must be >= 0, got {coef}")
    x0, x1, y0, y1, z0, z1 = (float(v) for v in bounds)
    cx, cy, cz = (float(v) for v in center)
    if coef == 0.0:
        return 0.0
    value, evals, ok = _box_core(x0, x1, y0, y1, z0, z1, cx, cy, cz,
                                 float(coef), float(delta),
                                 float(rel_tol), float(abs_tol), int(budget))
    if not ok:
        raise QuadratureError(
            f"box integral did not converge within budget={budget} "
            f"(used {evals} evaluations; rel_tol={rel_tol}, abs_tol={abs_tol})")
    return value


def adaptive_simpson(f, a, b, rel_tol=1e-3, n_seed=33, budget=20_000):
    """1-D adaptive Simpson over [a, b] with a composite seed grid.

    The ``n_seed``-point grid (must be odd, >= 5) is split into 3-point
    Simpson panels that seed the refinement stack, so an integrand whose
    mass sits in a narrow sub-interval is still found.  The coarse
    composite value sets the scale for ``rel_tol``.

    Returns (value, n_evals).  Raises QuadratureError when the budget or
    the recursion is exhausted before every interval meets tolerance.
    """
    if n_seed < 5 or n_seed % 2 == 0:
        raise ValueError("n_seed must be odd and >= 5")
    xs = np.linspace(a, b, n_seed)
    fs = [f(x) for x in xs]
    evals = n_seed
    npan = (n_seed - 1) // 2
    panels = []
    coarse = 0.0
    for i in range(npan):
        pa, pm, pb = xs[2 * i], xs[2 * i + 1], xs[2 * i + 2]
        fa, fm, fb = fs[2 * i], fs[2 * i + 1], fs[2 * i + 2]
        S = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb)
        panels.append((pa, pb, fa, fm, fb, S))
        coarse += S
    scale = max(abs(coarse), 1e-300)
    tol0 = rel_tol * scale / npan
    stack = [(pa, pb, fa, fm, fb, S, tol0) for (pa, pb, fa, fm, fb, S) in panels]
    acc = 0.0
    ok = True
    while stack:
        ia, ib, ifa, ifm, ifb, iS, itol = stack.pop()
        im = 0.5 * (ia + ib)
        flm = f(0.5 * (ia + im))
        frm = f(0.5 * (im + ib))
        evals += 2
        Sl = (im - ia) / 6.0 * (ifa + 4.0 * flm + ifm)
        Sr = (ib - im) / 6.0 * (ifm + 4.0 * frm + ifb)
        d2 = Sl + Sr - iS
        if abs(d2) <= 15.0 * itol:
            acc += Sl + Sr + d2 / 15.0
        elif evals > budget:
            acc += Sl + Sr + d2 / 15.0
            ok = False
        else:
            stack.append((ia, im, ifa, flm, ifm, Sl, 0.5 * itol))
            stack.append((im, ib, ifm, frm, ifb, Sr, 0.5 * itol))
    if not ok:
        raise QuadratureError(
            f"1-D integral did not converge within budget={budget} "
            f"(rel_tol={rel_tol})")
    # the seed nodes are numpy scalars; don't let them leak outward
    return float(acc), int(evals)
