"""Discrete Legendre-Fenchel transforms by direct scan.

Every transform is an O(N*M) max/min over the primal nodes.  At desk scale
(<= 1e4 nodes per axis) this is fast enough; a linear-time lower-hull sweep
would be a drop-in replacement for the 1-d scans.

The partial transforms act on the *last* axis of a grid function; leading
axes index sample points and are carried through untouched.
"""
from __future__ import annotations

import numpy as np

from okrwn.convex.bodies import ConvexBody, convex_hull
from okrwn.convex.grids import NEG_INF, POS_INF, Grid1D, GridFunction
from okrwn.errors import GridError

_CHUNK = 1 << 22  # max entries in one scan block


def _require_axes(axes):
    axes = tuple(axes) if not isinstance(axes, Grid1D) else (axes,)
    if not axes:
        raise GridError("empty grid list")
    return axes


def _on_box_boundary(idx: np.ndarray, shape) -> np.ndarray:
    """Flat indices (into ``shape``) that touch the box boundary."""
    multi = np.unravel_index(idx, shape)
    hit = np.zeros(idx.shape, dtype=bool)
    for k, n in enumerate(shape):
        hit |= (multi[k] == 0) | (multi[k] == n - 1)
    return hit


def legendre_conjugate(f: GridFunction, dual_axes) -> GridFunction:
    """``g(a) = max_y (a.y - f(y))`` over the finite nodes of ``f``.

    Nodes whose maximizer sits on the primal box boundary are marked in
    ``extrapolated``: their value would change if the grid were widened.
    """
    dual_axes = _require_axes(dual_axes)
    if len(dual_axes) != f.ndim:
        raise GridError(f"dual has {len(dual_axes)} axes, primal {f.ndim}")
    finite = f.finite.ravel()
    if not finite.any():
        raise GridError("legendre_conjugate needs a grid function finite somewhere")
    y = f.mesh().reshape(-1, f.ndim)[finite]
    fy = f.values.ravel()[finite]
    flat_ids = np.flatnonzero(finite)

    a_grid = np.stack(np.meshgrid(*[ax.nodes for ax in dual_axes], indexing="ij"), -1)
    a = a_grid.reshape(-1, f.ndim)
    out = np.empty(len(a))
    arg = np.empty(len(a), dtype=np.int64)
    rows = max(1, _CHUNK // max(1, len(y)))
    for start in range(0, len(a), rows):
        block = a[start:start + rows] @ y.T - fy[None, :]
        j = np.argmax(block, axis=1)
        arg[start:start + rows] = j
        out[start:start + rows] = block[np.arange(len(j)), j]
    shape = tuple(ax.count for ax in dual_axes)
    extrap = _on_box_boundary(flat_ids[arg], f.shape)
    return GridFunction(dual_axes, out.reshape(shape), extrap.reshape(shape))


def partial_sup_transform(v: GridFunction, t_grid: Grid1D) -> GridFunction:
    """``u(p, t) = max_alpha (v(p, alpha) + alpha t)`` along the last axis."""
    if v.values.size == 0 or not isinstance(t_grid, Grid1D):
        raise GridError("empty grid")
    alpha = v.axes[-1].nodes
    t = t_grid.nodes
    vals = v.values.reshape(-1, len(alpha))
    if np.all(np.isposinf(vals), axis=1).any():
        raise GridError("an alpha-slice is identically +inf")
    out = np.empty((len(vals), len(t)))
    arg = np.empty((len(vals), len(t)), dtype=np.int64)
    shift = t[:, None] * alpha[None, :]
    for p, row in enumerate(vals):
        # -inf + finite stays -inf; no +inf/-inf mixing can occur here
        scan = row[None, :] + shift
        j = np.argmax(scan, axis=1)
        arg[p] = j
        out[p] = scan[np.arange(len(t)), j]
    dead = np.isneginf(out)
    extrap = ((arg == 0) | (arg == len(alpha) - 1)) & ~dead
    shape = v.shape[:-1] + (len(t),)
    return GridFunction(v.axes[:-1] + (t_grid,), out.reshape(shape), extrap.reshape(shape))


def partial_inf_transform(
    u: GridFunction,
    alpha_grid: Grid1D,
    limit_at_zero: float | None = 0.0,
    slope_tol: float = 1e-9,
) -> GridFunction:
    """``v(p, alpha) = inf_{t>0} (u(p, t) - t alpha)`` along the last axis.

    ``limit_at_zero`` is the value of ``u - t alpha`` as ``t -> 0+`` (0 for a
    subgeodesic ray); the infimum over ``t > 0`` includes it.  Pass ``None``
    to restrict to grid nodes.  When the minimum lands on ``t_max`` and the
    terminal slope of ``u`` is below ``alpha - slope_tol*max(1, |alpha|)``
    the infimum runs off the grid linearly and NEG_INF is returned.
    """
    if not isinstance(alpha_grid, Grid1D):
        raise GridError("empty grid")
    t_ax = u.axes[-1]
    if t_ax.lo <= 0:
        raise GridError("t-grid must start strictly above 0")
    t = t_ax.nodes
    alpha = alpha_grid.nodes
    vals = u.values.reshape(-1, len(t))
    if np.isinf(vals).any():
        raise GridError("ray values must be finite")
    out = np.empty((len(vals), len(alpha)))
    extrap = np.zeros_like(out, dtype=bool)
    shift = t[None, :] * alpha[:, None]
    for p, row in enumerate(vals):
        scan = row[None, :] - shift
        j = np.argmin(scan, axis=1)
        best = scan[np.arange(len(alpha)), j]
        terminal = (row[-1] - row[-2]) / t_ax.step
        escape = (j == len(t) - 1) & (terminal < alpha - slope_tol * np.maximum(1.0, np.abs(alpha)))
        at_top = (j == len(t) - 1) & ~escape
        if limit_at_zero is not None:
            best = np.minimum(best, limit_at_zero)
        best[escape] = NEG_INF
        out[p] = best
        extrap[p] = at_top
    shape = u.shape[:-1] + (len(alpha),)
    return GridFunction(u.axes[:-1] + (alpha_grid,), out.reshape(shape), extrap.reshape(shape))


def gradient_image_body(u: GridFunction) -> ConvexBody:
    """Convex hull of central-difference gradients at interior nodes."""
    if any(ax.count < 3 for ax in u.axes):
        raise GridError("need at least 3 nodes per axis")
    if not u.finite.all():
        raise GridError("gradient image needs a finite grid function")
    grads = np.gradient(u.values, *[ax.step for ax in u.axes], edge_order=2)
    if u.ndim == 1:
        grads = [grads]
    inner = tuple(slice(1, -1) for _ in u.axes)
    pts = np.stack([g[inner].ravel() for g in grads], axis=-1)
    return convex_hull(pts.tolist(), exact=False)


__all__ = [
    "legendre_conjugate",
    "partial_sup_transform",
    "partial_inf_transform",
    "gradient_image_body",
    "NEG_INF",
    "POS_INF",
]
