"""Curve representations, CSV ingestion and pseudo-arclength reparameterization.

Two kinds of curve are supported:

* :class:`AnalyticCurve` -- closed-form position with hand-derived exact
  derivatives up to order 4 (the Frenet apparatus consumes all four).
* :class:`SampledCurve` -- positions on a parameter grid; derivatives come
  from strided fourth-order finite differences.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator, make_interp_spline

from .errors import (
    DimensionMismatch,
    GridTooShort,
    InputError,
    NonMonotoneParameter,
    NotSpacelike,
    OrderUnsupported,
    OutOfDomain,
    ParseError,
)
from .minkowski import DEFAULT_NULL_TOL, CausalCharacter, euclid_sq, inner
from .numerics import central_difference, cumulative_quadrature, grid_step

CSV_HEADER = ("s", "x1", "x2", "x3", "x4")
DEFAULT_H = 1e-3
# Sampled curves are differenced with stencil spacing DIFF_SCALE / kappa_max,
# kappa_max = max(k1, k2, |k3|) from a pilot pass at PILOT_STEP. Narrower
# stencils drown 4th derivatives in rounding noise; wider ones in truncation.
DIFF_SCALE = 0.04
PILOT_STEP = 0.02
MIN_FRAME_POINTS = 9
_DOMAIN_SLACK = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class AnalyticCurve:
    """Closed-form curve. ``derivs[k]`` maps s (scalar or array) to the k-th derivative."""

    name: str
    derivs: Sequence[Callable]
    s_min: float
    s_max: float
    params: dict = field(default_factory=dict)
    h: float = DEFAULT_H

    def _check(self, s):
        s = np.asarray(s, dtype=float)
        slack = _DOMAIN_SLACK * max(1.0, abs(self.s_min), abs(self.s_max))
        if np.any(s < self.s_min - slack) or np.any(s > self.s_max + slack):
            raise OutOfDomain(
                f"s outside [{self.s_min:.17g}, {self.s_max:.17g}] for curve {self.name!r}"
            )
        return s

    def evaluate(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order=1):
        if order not in range(5):
            raise OrderUnsupported(f"derivative order {order} not in 0..4")
        s = self._check(s)
        return np.asarray(self.derivs[order](s), dtype=float)

    def grid(self, h=None):
        h = self.h if h is None else h
        n = int(math.floor((self.s_max - self.s_min) / h + 1e-9))
        return self.s_min + h * np.arange(n + 1)


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Positions ``points[i]`` at parameter ``s[i]``.

    ``arclength`` records whether the grid is certified pseudo-arclength.
    ``diff_step`` is the effective stencil spacing used when differentiating
    (stride ``round(diff_step / h)`` samples); ``None`` picks it from the
    curvature scale of the curve.
    """

    s: np.ndarray
    points: np.ndarray
    arclength: bool = False
    name: str = "sampled"
    diff_step: Optional[float] = None
    total_length: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise DimensionMismatch(f"expected points of shape (n, 4), got {pts.shape}")
        if s.ndim != 1 or len(s) != len(pts):
            raise DimensionMismatch("parameter and point counts differ")
        if len(s) > 1 and np.any(np.diff(s) <= 0):
            i = int(np.argmax(np.diff(s) <= 0)) + 1
            raise NonMonotoneParameter(f"parameter not strictly increasing at sample {i}")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(pts))):
            raise InputError("curve samples must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.s)

    @property
    def s_min(self):
        return float(self.s[0])

    @property
    def s_max(self):
        return float(self.s[-1])

    @property
    def h(self):
        return grid_step(self.s)

    @property
    def stride(self):
        if "stride" not in self._cache:
            h = self.h
            step = self.diff_step if self.diff_step is not None else self._auto_step()
            # keep at least 9 points between the trimmed ends
            cap = max(1, (len(self) - 9) // 8)
            self._cache["stride"] = int(min(max(1, round(step / h)), cap))
        return self._cache["stride"]

    def with_stride(self, stride):
        """Copy differenced with a fixed stride (in samples)."""
        return SampledCurve(self.s, self.points, self.arclength, self.name,
                            stride * self.h, self.total_length)

    def _auto_step(self):
        from .frenet import curvature_scale

        pilot = SampledCurve(self.s, self.points, self.arclength, self.name, PILOT_STEP)
        kappa = curvature_scale(pilot)
        if not np.isfinite(kappa) or kappa <= 0:
            return PILOT_STEP
        return DIFF_SCALE / kappa

    def derivative_table(self, order):
        """Derivative of the given order at every grid point (componentwise differences)."""
        if order not in range(5):
            raise OrderUnsupported(f"derivative order {order} not in 0..4")
        if order == 0:
            return self.points
        if order not in self._cache:
            h, m = self.h, self.stride
            if order in (1, 2):
                d = central_difference(self.points, h, order, m)
            else:
                d = central_difference(self.derivative_table(2), h, order - 2, m)
            self._cache[order] = d
        return self._cache[order]

    def evaluate(self, s):
        return self.derivative(s, 0)

    def derivative(self, s, order=1):
        table = self.derivative_table(order)
        s = np.asarray(s, dtype=float)
        slack = _DOMAIN_SLACK * max(1.0, abs(self.s_min), abs(self.s_max))
        if np.any(s < self.s_min - slack) or np.any(s > self.s_max + slack):
            raise OutOfDomain(f"s outside [{self.s_min:.17g}, {self.s_max:.17g}]")
        idx = np.rint((s - self.s_min) / self.h).astype(int)
        on_grid = np.abs(self.s[np.clip(idx, 0, len(self) - 1)] - s) <= 1e-9 * self.h
        if np.all(on_grid):
            return table[np.clip(idx, 0, len(self) - 1)]
        spline = self._cache.setdefault(("spline", order), make_interp_spline(self.s, table, k=3))
        return spline(s)


# -- presets -----------------------------------------------------------------

def hyperbolic_circular(a=1.0, alpha=0.5, b=1.0, beta=math.sqrt(3) / 2, warp=0.0,
                        s_min=0.0, s_max=5.0, h=DEFAULT_H):
    """x(t) = (a cosh(alpha u), a sinh(alpha u), b cos(beta u), b sin(beta u)), u = t + warp*t^2.

    Constant curvatures when ``warp == 0`` (a W-curve); unit speed iff
    a^2 alpha^2 + b^2 beta^2 = 1. The default parameters give k1 = sqrt(1/2)
    with g(x'', x'') = b^2 beta^4 - a^2 alpha^4 > 0.
    """
    def base(u, k):
        ch, sh = np.cosh(alpha * u), np.sinh(alpha * u)
        c, sn = np.cos(beta * u), np.sin(beta * u)
        hyp = (ch, sh) if k % 2 == 0 else (sh, ch)
        cyc = [(c, sn), (-sn, c), (-c, -sn), (sn, -c)][k % 4]
        return np.stack([a * alpha**k * hyp[0], a * alpha**k * hyp[1],
                         b * beta**k * cyc[0], b * beta**k * cyc[1]], axis=-1)

    if warp == 0.0:
        derivs = [lambda t, k=k: base(np.asarray(t, dtype=float), k) for k in range(5)]
    else:
        dphi_min = min(1 + 2 * warp * s_min, 1 + 2 * warp * s_max)
        if dphi_min <= 0:
            raise InputError("warp makes the parameterization non-monotone on the interval")

        def warped(t, k):
            t = np.asarray(t, dtype=float)
            u = t + warp * t * t
            p1 = (1 + 2 * warp * t)[..., None]
            p2 = 2 * warp
            # Faa di Bruno with phi''' = 0
            if k == 0:
                return base(u, 0)
            if k == 1:
                return base(u, 1) * p1
            if k == 2:
                return base(u, 2) * p1**2 + base(u, 1) * p2
            if k == 3:
                return base(u, 3) * p1**3 + 3 * base(u, 2) * p1 * p2
            return base(u, 4) * p1**4 + 6 * base(u, 3) * p1**2 * p2 + 3 * base(u, 2) * p2**2

        derivs = [lambda t, k=k: warped(t, k) for k in range(5)]

    params = dict(a=a, alpha=alpha, b=b, beta=beta, warp=warp)
    return AnalyticCurve("hyperbolic_circular", derivs, s_min, s_max, params, h)


def line(point=(0.0, 0.0, 0.0, 0.0), direction=(0.0, 1.0, 0.0, 0.0),
         s_min=0.0, s_max=1.0, h=DEFAULT_H):
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)

    def pos(t):
        t = np.asarray(t, dtype=float)
        return p + t[..., None] * d

    def vel(t):
        return np.broadcast_to(d, np.shape(t) + (4,)).copy()

    def zero(t):
        return np.zeros(np.shape(t) + (4,))

    params = dict(point=p.tolist(), direction=d.tolist())
    return AnalyticCurve("line", [pos, vel, zero, zero, zero], s_min, s_max, params, h)


ANALYTIC_PRESETS = {
    "hyperbolic_circular": hyperbolic_circular,
    "line": line,
}


def preset_from_spec(spec):
    """Analytic preset from ``{"preset": name, "params": {...}, "s_min": r, "s_max": r, "h": r}``."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise InputError(f"preset spec is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise InputError("preset spec must be a JSON object")
    unknown = set(spec) - {"preset", "params", "s_min", "s_max", "h"}
    if unknown:
        raise InputError(f"unknown preset spec keys: {sorted(unknown)}")
    name = spec.get("preset")
    if name not in ANALYTIC_PRESETS:
        raise InputError(f"unknown analytic preset {name!r}; available: {sorted(ANALYTIC_PRESETS)}")
    kw = dict(spec.get("params", {}))
    for key in ("s_min", "s_max", "h"):
        if key in spec:
            kw[key] = float(spec[key])
    try:
        return ANALYTIC_PRESETS[name](**kw)
    except TypeError as exc:
        raise InputError(f"bad parameters for preset {name!r}: {exc}") from None


# -- causal character along a curve -------------------------------------------

@dataclass(frozen=True)
class CausalReport:
    character: CausalCharacter
    s: Optional[float] = None  # first violating parameter, if any

    @property
    def is_spacelike(self):
        return self.character is CausalCharacter.SPACELIKE


def _velocity_samples(curve, h=None):
    if isinstance(curve, AnalyticCurve):
        s = curve.grid(h)
        return s, curve.derivative(s, 1)
    # first differences barely amplify roundoff, so the finest stencil is best here
    return curve.s, central_difference(curve.points, curve.h, 1, 1)


def classify_velocities(s, vel, null_tol=DEFAULT_NULL_TOL):
    q = inner(vel, vel)
    thresh = null_tol * np.maximum(1.0, euclid_sq(vel))
    bad = q <= thresh
    if not np.any(bad):
        return CausalReport(CausalCharacter.SPACELIKE)
    i = int(np.argmax(bad))
    char = CausalCharacter.NULL if abs(q[i]) <= thresh[i] else CausalCharacter.TIMELIKE
    return CausalReport(char, float(s[i]))


def causal_class_along(curve, null_tol=DEFAULT_NULL_TOL, h=None):
    """Spacelike only if g(x', x') exceeds the null threshold at every check point."""
    s, vel = _velocity_samples(curve, h)
    return classify_velocities(s, vel, null_tol)


# -- reparameterization --------------------------------------------------------

def _motion(curve):
    """(position, velocity) callables of the curve's own parameter."""
    if isinstance(curve, AnalyticCurve):
        return (lambda t: curve.derivative(t, 0)), (lambda t: curve.derivative(t, 1))
    if len(curve) < 6:
        raise GridTooShort("reparameterization needs at least 6 samples")
    spline = make_interp_spline(curve.s, curve.points, k=5)
    dspline = spline.derivative()
    return spline, dspline


def _speed(vel):
    return np.sqrt(np.maximum(inner(vel, vel), 0.0))


def reparameterize_arclength(curve, target_h=None, null_tol=DEFAULT_NULL_TOL):
    """Resample ``curve`` on a uniform pseudo-arclength grid with spacing ``target_h``.

    The cumulative length L(t) is tabulated by quadrature, inverted with a
    monotone (PCHIP) cubic, and the inverse is polished by Newton steps on
    L(t) = s using Gauss-Legendre increments of the exact (or spline) speed.
    The output grid starts at s = 0 and stops at the last multiple of
    ``target_h`` not exceeding the total length.
    """
    if isinstance(curve, AnalyticCurve):
        target_h = curve.h if target_h is None else target_h
        n = max(8, int(math.ceil((curve.s_max - curve.s_min) / target_h)))
        t = np.linspace(curve.s_min, curve.s_max, n + 1)
        name = curve.name
    else:
        if target_h is None:
            target_h = (curve.s_max - curve.s_min) / (len(curve) - 1)
        t = curve.s
        name = curve.name
    pos, vel = _motion(curve)

    v = vel(t)
    report = classify_velocities(t, v, null_tol)
    if not report.is_spacelike:
        raise NotSpacelike(report.character, report.s)
    speed = _speed(v)

    dt = np.diff(t)
    if np.allclose(dt, dt[0], rtol=1e-12, atol=0):
        L = cumulative_quadrature(speed, (t[-1] - t[0]) / (len(t) - 1))
    else:
        L = np.concatenate([[0.0], np.cumsum(_gl_increment(vel, t[:-1], t[1:]))])
    total = float(L[-1])

    n_out = int(math.floor(total / target_h + 1e-9))
    s_out = target_h * np.arange(n_out + 1)
    t_out = PchipInterpolator(L, t)(s_out)
    for _ in range(6):
        k = np.clip(np.searchsorted(t, t_out, side="right") - 1, 0, len(t) - 2)
        length = L[k] + _gl_increment(vel, t[k], t_out)
        step = (length - s_out) / _speed(vel(t_out))
        t_out = np.clip(t_out - step, t[0], t[-1])
        if np.max(np.abs(step)) < 1e-15 * max(1.0, abs(t[-1])):
            break
    points = pos(t_out)
    return SampledCurve(s_out, points, arclength=True, name=name,
                        diff_step=getattr(curve, "diff_step", None),
                        total_length=total)


def _gl_increment(vel, a, b):
    """Integral of the speed from a to b (arrays), 8-point Gauss-Legendre."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * _GL_NODES
    sp = _speed(vel(nodes.ravel())).reshape(nodes.shape)
    return half * (sp @ _GL_WEIGHTS)


def speed_error(curve):
    """max |g(x', x') - 1| over the grid (sampled: interior via differences)."""
    _, v = _velocity_samples(curve)
    return float(np.max(np.abs(inner(v, v) - 1.0)))


# -- CSV I/O ---------------------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def curve_to_csv(curve):
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for si, p in zip(curve.s, curve.points):
        buf.write(",".join([_fmt(si)] + [_fmt(c) for c in p]) + "\n")
    return buf.getvalue()


def save_curve(curve, path, format="csv"):
    if format != "csv":
        raise InputError(f"unsupported curve format {format!r}")
    if isinstance(curve, AnalyticCurve):
        s = curve.grid()
        curve = SampledCurve(s, curve.evaluate(s), name=curve.name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(curve_to_csv(curve))


def parse_curve_csv(text, name="sampled"):
    reader = csv.reader(io.StringIO(text))
    rows = iter(enumerate(reader, start=1))
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        if len(header) != len(CSV_HEADER):
            raise DimensionMismatch(f"line {lineno}: header has {len(header)} columns, expected 5")
        raise ParseError(f"expected header {','.join(CSV_HEADER)!r}", line=lineno)
    s, pts = [], []
    for lineno, row in rows:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise DimensionMismatch(f"line {lineno}: expected s and 4 coordinates, got {len(row)} fields")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"non-numeric field in {row!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", line=lineno)
        if s and vals[0] <= s[-1]:
            raise NonMonotoneParameter(f"line {lineno}: s={vals[0]!r} does not increase")
        s.append(vals[0])
        pts.append(vals[1:])
    if not s:
        raise ParseError("no samples", line=lineno)
    return SampledCurve(np.array(s), np.array(pts), name=name)


def load_curve(path, format="csv"):
    if format != "csv":
        raise InputError(f"unsupported curve format {format!r}")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_curve_csv(text, name=str(path))
