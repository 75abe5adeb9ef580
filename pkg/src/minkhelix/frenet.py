"""Frenet apparatus {T, N, B1, B2; k1, k2, k3; eps1, eps2} of a spacelike curve.

The frame is obtained by indefinite Gram-Schmidt on the derivative vectors
x', x'', x''', x'''' of a unit-speed curve:

    x''   = k1 N
    x'''  = -eps1 k1^2 T + k1' N + k1 k2 B1
    x'''' . B2 = k1 k2 k3 g(B2, B2)

which is the same construction as differentiating T, N, B1 in turn, but
needs only one differencing pass per derivative order on sampled data.
B2 spans the g-orthogonal complement of {T, N, B1}; its sign makes the
frame determinant positive, so k3 is signed.
"""
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curves import AnalyticCurve, SampledCurve
from .errors import (
    CurvatureVanishes,
    GeometryError,
    GridTooShort,
    NotSpacelike,
    NotUnitSpeed,
    SignFlip,
)
from .minkowski import SIGNS, CausalCharacter, euclid_norm, gram_matrix, inner
from .numerics import central_difference, cumulative_quadrature

K_FLOOR = 1e-6
UNIT_SPEED_TOL = 1e-6
# interior trimming per end, in units of the differencing stride: x'''' is
# the second difference of the second difference, reaching 4 stride steps
BOUNDARY_STEPS = 4


def frame_signs(eps1, eps2):
    """Diagonal of the frame Gram matrix: (1, eps1, -eps1*eps2, eps2)."""
    return np.array([1.0, eps1, -eps1 * eps2, eps2])


@dataclass(frozen=True)
class FrenetApparatus:
    s: float
    T: np.ndarray
    N: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    k1: float
    k2: float
    k3: float
    eps1: int
    eps2: int

    @property
    def frame(self):
        return np.stack([self.T, self.N, self.B1, self.B2])

    def gram(self):
        return gram_matrix(self.frame)

    def gram_error(self):
        return float(np.max(np.abs(self.gram() - np.diag(frame_signs(self.eps1, self.eps2)))))


@dataclass(frozen=True, eq=False)
class FrameField:
    """Frenet apparatus on a uniform grid.

    ``theta`` is the integral of k3 from the start of the underlying curve
    (which may lie before ``s[0]`` when boundary points were trimmed).
    ``stride`` is the differencing stride that downstream derivatives of
    field quantities should use; ``source`` is one of ``analytic``,
    ``reconstructed`` or ``carried``.
    """

    s: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    eps1: int
    eps2: int
    h: float
    theta: np.ndarray
    stride: int = 1
    source: str = "analytic"
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.s)

    @property
    def frames(self):
        """Array of shape (n, 4, 4): rows T, N, B1, B2 at each point."""
        return np.stack([self.T, self.N, self.B1, self.B2], axis=1)

    @property
    def ratio(self):
        return self.k1 / self.k2

    def at(self, i):
        return FrenetApparatus(float(self.s[i]), self.T[i], self.N[i], self.B1[i], self.B2[i],
                               float(self.k1[i]), float(self.k2[i]), float(self.k3[i]),
                               self.eps1, self.eps2)

    def gram_error(self):
        """Max deviation of g(F_i, F_j) from diag(1, eps1, -eps1 eps2, eps2) over the field."""
        target = np.diag(frame_signs(self.eps1, self.eps2))
        return float(np.max(np.abs(gram_matrix(self.frames) - target)))

    def determinants(self):
        return np.linalg.det(self.frames)

    def derivative(self, values, order=1):
        return central_difference(values, self.h, order, self.stride)

    def residual(self):
        if "residual" not in self._cache:
            self._cache["residual"] = frenet_residual(self)
        return self._cache["residual"]


def _project_out(v, basis, signs):
    for e, sg in zip(basis, signs):
        v = v - (sg * inner(v, e))[..., None] * e
    return v


def apparatus_arrays(d1, d2, d3, d4, s, k_floor=K_FLOOR, check=None):
    """Vectorized apparatus from derivative arrays of shape (n, 4).

    ``check`` is a boolean mask of points where vanishing-curvature and
    signature checks apply (default: all). Returns a dict of arrays.
    """
    s = np.asarray(s, dtype=float)
    check = np.ones(len(s), dtype=bool) if check is None else check
    T = d1
    with np.errstate(divide="ignore", invalid="ignore"):
        gT = inner(T, T)
        w2 = d2 - (inner(d2, T) / gT)[:, None] * T
        q2 = inner(w2, w2)
        k1 = np.sqrt(np.abs(q2))
        _vanish(1, k1, s, check, k_floor)
        eps1 = np.where(q2 < 0, -1, 1)
        N = w2 / k1[:, None]

        w3 = d3 - (inner(d3, T) / gT)[:, None] * T - (eps1 * inner(d3, N))[:, None] * N
        q3 = inner(w3, w3)
        k12 = np.sqrt(np.abs(q3))
        k2 = k12 / k1
        _vanish(2, k2, s, check, k_floor)
        B1 = w3 / k12[:, None]
        eps2 = np.where(q3 < 0, 1, -1) * eps1

        # g-orthogonal complement of {T, N, B1}: null space of the lowered rows
        A = np.stack([T, N, B1], axis=1) * SIGNS
        finite = np.all(np.isfinite(A), axis=(1, 2))
        v = np.full_like(T, np.nan)
        if np.any(finite):
            v[finite] = np.linalg.svd(A[finite])[2][:, -1, :]
        q4 = inner(v, v)
        B2 = v / np.sqrt(np.abs(q4))[:, None]
        det = np.linalg.det(np.where(finite[:, None, None], np.stack([T, N, B1, B2], axis=1), np.eye(4)))
        B2 = np.where((det < 0)[:, None], -B2, B2)
        k3 = eps2 * inner(d4, B2) / k12
        _vanish(3, np.abs(k3), s, check, k_floor)

    bad = check & ((eps1 == -1) & (eps2 == -1) | (np.where(q4 < 0, -1, 1) != eps2))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise GeometryError(f"frame signature inconsistent at s={s[i]:.17g}")
    return dict(T=T, N=N, B1=B1, B2=B2, k1=k1, k2=k2, k3=k3, eps1=eps1, eps2=eps2)


def _vanish(index, k, s, check, k_floor):
    low = check & ~(k >= k_floor)
    if np.any(low):
        i = int(np.argmax(low))
        raise CurvatureVanishes(index, float(s[i]), float(k[i]))


def _check_spacelike_unit(T, s, check):
    q = inner(T, T)
    if np.any(check & (q <= 0)):
        i = int(np.argmax(check & (q <= 0)))
        char = CausalCharacter.NULL if abs(q[i]) <= 1e-12 else CausalCharacter.TIMELIKE
        raise NotSpacelike(char, float(s[i]))
    off = check & (np.abs(q - 1.0) > UNIT_SPEED_TOL)
    if np.any(off):
        i = int(np.argmax(off))
        raise NotUnitSpeed(f"|g(x',x') - 1| = {abs(q[i] - 1):.3g} at s={s[i]:.17g}; "
                           "reparameterize by pseudo-arclength first")


def compute_apparatus(curve, s, k_floor=K_FLOOR):
    """Frenet apparatus of a pseudo-arclength spacelike curve at parameter ``s``."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    d = [np.atleast_2d(curve.derivative(s_arr, k)) for k in range(1, 5)]
    _check_spacelike_unit(d[0], s_arr, np.ones(1, dtype=bool))
    a = apparatus_arrays(*d, s_arr, k_floor)
    return FrenetApparatus(float(s_arr[0]), a["T"][0], a["N"][0], a["B1"][0], a["B2"][0],
                           float(a["k1"][0]), float(a["k2"][0]), float(a["k3"][0]),
                           int(a["eps1"][0]), int(a["eps2"][0]))


def curvature_scale(curve):
    """Pilot estimate of max(k1, k2, |k3|) over the interior of a sampled curve (no checks)."""
    d = [curve.derivative_table(k) for k in range(1, 5)]
    trim = BOUNDARY_STEPS * curve.stride
    n = len(curve)
    if n - 2 * trim < 5:
        return float("nan")
    a = apparatus_arrays(*d, curve.s, check=np.zeros(n, dtype=bool))
    sl = slice(trim, n - trim)
    k = np.concatenate([a["k1"][sl], a["k2"][sl], np.abs(a["k3"][sl])])
    return float(np.nanmax(k)) if np.any(np.isfinite(k)) else float("nan")


def _extrapolate_ends(values, s, trim):
    """Replace the ``trim`` boundary values at each end by a cubic fitted to the adjacent interior."""
    out = values.copy()
    n = len(values)
    span = min(2 * trim, n - 2 * trim)
    for fit_idx, fill_idx in ((np.arange(trim, trim + span), np.arange(trim)),
                              (np.arange(n - trim - span, n - trim), np.arange(n - trim, n))):
        x0 = s[fit_idx[0]]
        coef = np.polyfit(s[fit_idx] - x0, values[fit_idx], 3)
        out[fill_idx] = np.polyval(coef, s[fill_idx] - x0)
    return out


def compute_frame_field(curve, k_floor=K_FLOOR):
    """Frame field along an analytic or sampled pseudo-arclength curve.

    Sampled curves lose ``BOUNDARY_STEPS * stride`` points at each end, where
    the derivative stencils are one-sided; the integral of k3 still starts at
    the first sample.
    """
    if isinstance(curve, AnalyticCurve):
        s = curve.grid()
        h = curve.h
        d = [curve.derivative(s, k) for k in range(1, 5)]
        stride, trim, source = 1, 0, "analytic"
    elif isinstance(curve, SampledCurve):
        s = curve.s
        h = curve.h
        d = [curve.derivative_table(k) for k in range(1, 5)]
        stride = curve.stride
        trim, source = BOUNDARY_STEPS * stride, "reconstructed"
    else:
        raise TypeError(f"unsupported curve type {type(curve).__name__}")

    n = len(s)
    if n - 2 * trim < 5:
        raise GridTooShort(
            f"curve has {n} samples; frame field needs more than {2 * trim + 4} "
            f"(stride {stride})"
        )
    interior = np.zeros(n, dtype=bool)
    interior[trim:n - trim] = True
    _check_spacelike_unit(d[0], s, interior)
    a = apparatus_arrays(*d, s, k_floor, check=interior)

    for name in ("eps1", "eps2"):
        e = a[name][interior]
        if np.any(e != e[0]):
            i = int(np.argmax(e != e[0]))
            raise SignFlip(name, float(s[interior][i]))

    k3 = a["k3"]
    if trim:
        # one-sided boundary stencils are too rough even for integrating k3
        k3 = _extrapolate_ends(k3, s, trim)
    theta = cumulative_quadrature(k3, h)

    sl = slice(trim, n - trim)
    return FrameField(
        s=s[sl], T=a["T"][sl], N=a["N"][sl], B1=a["B1"][sl], B2=a["B2"][sl],
        k1=a["k1"][sl], k2=a["k2"][sl], k3=a["k3"][sl],
        eps1=int(a["eps1"][trim]), eps2=int(a["eps2"][trim]),
        h=h, theta=theta[sl], stride=stride, source=source,
        name=getattr(curve, "name", ""),
    )


def frenet_residual(field):
    """Per-point Euclidean norm of the four stacked Frenet-equation residual rows."""
    d = field.derivative
    T, N, B1, B2 = field.T, field.N, field.B1, field.B2
    k1, k2, k3 = field.k1[:, None], field.k2[:, None], field.k3[:, None]
    e1, e2 = field.eps1, field.eps2
    rows = [
        d(T) - k1 * N,
        d(N) + e1 * k1 * T - k2 * B1,
        d(B1) - e2 * k2 * N - k3 * B2,
        d(B2) - e1 * k3 * B1,
    ]
    return euclid_norm(np.concatenate(rows, axis=1))


def frame_field_to_csv(field):
    cols = ["s", "k1", "k2", "k3", "eps1", "eps2"]
    cols += [f"{v}_{i}" for v in ("T", "N", "B1", "B2") for i in range(1, 5)]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    data = np.column_stack([
        field.s, field.k1, field.k2, field.k3,
        np.full(len(field), field.eps1), np.full(len(field), field.eps2),
        field.T, field.N, field.B1, field.B2,
    ])
    for row in data:
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()
