"""Finite differences, cumulative quadrature, RK4 stepping and a constancy statistic.

All kernels assume a uniform grid. Differences use fourth-order central
stencils in the interior and fourth-order one-sided stencils at the two
outermost points of each end.
"""
import numpy as np

from .errors import EmptyInput, GridTooShort, NonFiniteState, NonUniformGrid

MIN_POINTS = 5
UNIFORM_RTOL = 1e-12

_CENTRAL = {
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}
# rows: stencil for point 0 and point 1, reading forward from the boundary
_ONE_SIDED = {
    1: (np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
        np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0),
    2: (np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
        np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0),
}


def grid_step(s, min_points=MIN_POINTS):
    """Return the spacing of a uniform, strictly increasing grid."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or len(s) < min_points:
        raise GridTooShort(f"grid needs at least {min_points} points, got {s.size}")
    d = np.diff(s)
    h = (s[-1] - s[0]) / (len(s) - 1)
    if not h > 0 or np.any(d <= 0):
        raise NonUniformGrid("grid must be strictly increasing")
    # absolute slack for the rounding in s_i = s_0 + i*h when |s| >> h
    slack = UNIFORM_RTOL * h + 8 * np.finfo(float).eps * np.max(np.abs(s))
    if np.max(np.abs(d - h)) > slack:
        raise NonUniformGrid(f"grid spacing deviates from uniform h={h:.17g}")
    return h


def _difference(y, h, order):
    # stencil weights sum to zero, so differencing against a reference sample
    # makes constants differentiate to exactly 0
    n = len(y)
    c = _CENTRAL[order]
    mid = y[2:n - 2]
    out = np.empty_like(y)
    out[2:n - 2] = sum(c[k] * (y[k:n - 4 + k] - mid) for k in (0, 1, 3, 4))
    # mirrored data flips the sign of odd derivatives
    sign = 1.0 if order == 2 else -1.0
    rev = y[::-1]
    for i, w in enumerate(_ONE_SIDED[order]):
        m = len(w)
        out[i] = np.tensordot(w, y[:m] - y[i], axes=1)
        out[n - 1 - i] = sign * np.tensordot(w, rev[:m] - rev[i], axes=1)
    return out / h**order


def central_difference(values, h, order=1, stride=1):
    """Derivative of uniformly sampled ``values`` (axis 0) with respect to the grid parameter.

    With ``stride > 1`` the stencil uses every ``stride``-th sample, i.e. an
    effective spacing ``stride*h``; the interleaved subgrids are differenced
    separately and woven back together. Wider stencils trade truncation error
    for much less amplification of rounding noise in high derivatives.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    y = np.asarray(values, dtype=float)
    stride = int(stride)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n_sub = len(y) // stride
    # the 2nd-order one-sided stencil reaches 6 points
    need = 6 if order == 2 else MIN_POINTS
    if len(y) < MIN_POINTS or n_sub < need:
        raise GridTooShort(
            f"need at least {need} points per subgrid for order {order}, "
            f"got {len(y)} samples with stride {stride}"
        )
    if stride == 1:
        return _difference(y, h, order)
    out = np.empty_like(y)
    for j in range(stride):
        out[j::stride] = _difference(y[j::stride], h * stride, order)
    return out


def differentiate(s, values, order=1, stride=1):
    """Grid-validating front end to :func:`central_difference`."""
    h = grid_step(s)
    return central_difference(values, h, order, stride)


def cumulative_quadrature(values, h):
    """Cumulative integral of uniformly sampled ``values`` starting from 0.

    Each panel integrates the cubic through its four nearest samples (the
    Simpson 3/8 family), which is exact for cubics and fourth-order accurate.
    """
    f = np.asarray(values, dtype=float)
    n = len(f)
    if n < 4:
        raise GridTooShort(f"quadrature needs at least 4 points, got {n}")
    panels = np.empty((n - 1,) + f.shape[1:])
    panels[1:n - 2] = (-f[0:n - 3] + 13.0 * f[1:n - 2] + 13.0 * f[2:n - 1] - f[3:n]) / 24.0
    panels[0] = (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
    panels[n - 2] = (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) / 24.0
    out = np.zeros_like(f)
    out[1:] = np.cumsum(panels * h, axis=0)
    return out


def rk4_integrate(rhs, y0, s, post_step=None):
    """Classic fourth-order Runge-Kutta on the grid ``s``.

    ``rhs(s, y)`` returns dy/ds. ``post_step(i, y)``, if given, may return a
    replacement state after step ``i`` (used for optional re-orthonormalization).
    Returns an array of shape ``(len(s),) + y0.shape`` with ``y0`` first.
    """
    s = np.asarray(s, dtype=float)
    y = np.array(y0, dtype=float)
    out = np.empty((len(s),) + y.shape)
    out[0] = y
    for i in range(len(s) - 1):
        t, h = s[i], s[i + 1] - s[i]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if post_step is not None:
            replaced = post_step(i + 1, y)
            if replaced is not None:
                y = replaced
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(s[i + 1])
        out[i + 1] = y
    return out


def constancy_statistic(values):
    """Scale-aware spread ``(max - min) / max(1, max|v|)``; zero iff all values are equal."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise EmptyInput("constancy statistic needs at least two values")
    return float((v.max() - v.min()) / max(1.0, float(np.max(np.abs(v)))))
