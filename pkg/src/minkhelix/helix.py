"""Helix characterizations for spacelike curves in E_1^4.

With r = k1/k2, f = r'/k3 and theta = integral of k3, a curve is tested via

* the invariant H = r^2 - eps1 f^2 (constant along a helix),
* the axis bracket U = T - eps2 r B1 + eps1 eps2 f B2 (constant along a helix;
  dU/ds = eps2 (eps1 f' - r k3) B2),
* the f-function condition f' = eps1 k3 r,
* the gamma equation gamma'' - (k3'/k3) gamma' - eps1 k3^2 gamma = 0 with
  gamma = eps2 g(U, B2),
* the integral form r = C1 eta(theta) + C2 mu(theta) (cosh/sinh for eps1 = +1,
  cos/sin for eps1 = -1) and its conserved pair
  m = r eta - f mu, n = -eps1 r mu + f eta,
* the exponential form r = D exp(theta) when eps1 = +1 and H = 0.

Constant H alone is not sufficient: when r' vanishes identically (constant
curvatures, k3 != 0) H is trivially constant but dU/ds = -eps2 r k3 B2 != 0
and no axis exists. Detection therefore requires both a constant invariant
and a vanishing axis derivative.
"""
import dataclasses
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .curves import AnalyticCurve, SampledCurve, reparameterize_arclength, speed_error
from .errors import (
    CurvatureVanishes,
    IllConditioned,
    NonPositiveRatio,
    WrongEpsilon,
)
from .frenet import K_FLOOR, UNIT_SPEED_TOL, FrameField, compute_frame_field
from .minkowski import (
    DEFAULT_NULL_TOL,
    CausalCharacter,
    causal_character,
    euclid_norm,
    inner,
    normalize,
)
from .numerics import constancy_statistic

TOL_H_SAMPLED = 1e-3
TOL_H_EXACT = 1e-6
TOL_U_SCALE = 1e-3
MAX_GRAM_CONDITION = 1e8
MIN_TRIG_THETA_RANGE = 0.5
MIN_FIT_POINTS = 10
# Reconstructed frames carry roundoff from fourth differences of positions;
# derived scalars (r, f, gamma) are differenced again on a coarser step
# ANALYSIS_SCALE / max curvature.
ANALYSIS_SCALE = 0.3

VERDICT_HELIX = "helix"
VERDICT_NOT_HELIX = "not_helix"
VERDICT_INVARIANT_CONSTANT = "invariant_constant_non_helix"


@dataclass
class Tolerances:
    """Detection tolerances; ``None`` means "derive from the frame field"."""

    tol_H: Optional[float] = None
    tol_U: Optional[float] = None
    null_tol: float = DEFAULT_NULL_TOL
    k_floor: float = K_FLOOR

    def resolve(self, fld):
        exact = fld.source in ("analytic", "carried")
        tol_H = self.tol_H if self.tol_H is not None else (TOL_H_EXACT if exact else TOL_H_SAMPLED)
        kmax = float(max(np.max(np.abs(fld.k1)), np.max(np.abs(fld.k2)), np.max(np.abs(fld.k3))))
        tol_U = self.tol_U if self.tol_U is not None else TOL_U_SCALE * (1.0 + kmax)
        return dict(tol_H=tol_H, tol_U=tol_U, null_tol=self.null_tol, k_floor=self.k_floor)


def basis(eps1):
    """(eta, mu) of the integral characterization."""
    return (np.cosh, np.sinh) if eps1 == 1 else (np.cos, np.sin)


def analysis_field(fld):
    """Field whose ``stride`` suits differentiating derived quantities."""
    if fld.source != "reconstructed":
        return fld
    kmax = float(max(np.max(fld.k1), np.max(fld.k2), np.max(np.abs(fld.k3))))
    stride = int(round(ANALYSIS_SCALE / (kmax * fld.h)))
    stride = max(fld.stride, min(stride, len(fld) // 16))
    if stride == fld.stride:
        return fld
    return dataclasses.replace(fld, stride=stride, _cache={})


def _core(fld, depth):
    """Slice dropping points whose value went through ``depth`` one-sided differences."""
    trim = 2 * fld.stride * depth
    if len(fld) - 2 * trim < 5:
        trim = max(0, (len(fld) - 5) // 2)
    return slice(trim, len(fld) - trim)


def _require_k3(fld, k_floor=K_FLOOR):
    low = np.abs(fld.k3) < k_floor
    if np.any(low):
        i = int(np.argmax(low))
        raise CurvatureVanishes(3, float(fld.s[i]), float(abs(fld.k3[i])))


def ratio_and_derivative(fld):
    r = fld.k1 / fld.k2
    return r, fld.derivative(r)


# -- invariant -----------------------------------------------------------------

def invariant_from_ratio(r, r_prime, k3, eps1):
    """H = r^2 - eps1 (r'/k3)^2."""
    return np.asarray(r) ** 2 - eps1 * (np.asarray(r_prime) / np.asarray(k3)) ** 2


def helix_invariant(fld, k_floor=K_FLOOR):
    _require_k3(fld, k_floor)
    r, rp = ratio_and_derivative(fld)
    return invariant_from_ratio(r, rp, fld.k3, fld.eps1)


# -- axis ----------------------------------------------------------------------

def axis_vector(apparatus, r, r_prime, k_floor=K_FLOOR):
    """Bracket U = T - eps2 r B1 + eps1 eps2 (r'/k3) B2 at one point (not normalized)."""
    if abs(apparatus.k3) < k_floor:
        raise CurvatureVanishes(3, apparatus.s, abs(apparatus.k3))
    e1, e2 = apparatus.eps1, apparatus.eps2
    return apparatus.T - e2 * r * apparatus.B1 + e1 * e2 * (r_prime / apparatus.k3) * apparatus.B2


def axis_samples(fld, k_floor=K_FLOOR):
    _require_k3(fld, k_floor)
    r, rp = ratio_and_derivative(fld)
    f = rp / fld.k3
    e1, e2 = fld.eps1, fld.eps2
    return fld.T - (e2 * r)[:, None] * fld.B1 + (e1 * e2 * f)[:, None] * fld.B2


@dataclass
class AxisCheck:
    residual: float
    tangent_spread: float
    pointwise: np.ndarray


def axis_residual(fld, axis):
    """sup |dU/ds|_E over the interior, plus the spread of g(T, U)."""
    axis = np.asarray(axis, dtype=float)
    if axis.ndim == 1:
        axis = np.broadcast_to(axis, fld.T.shape)
    dU = euclid_norm(fld.derivative(axis))
    core = _core(fld, 2)
    spread = constancy_statistic(inner(fld.T, axis)[_core(fld, 1)])
    return AxisCheck(float(np.max(dU[core])), spread, dU)


# -- f-function ------------------------------------------------------------------

@dataclass
class FCheck:
    f: np.ndarray
    residual: float
    pointwise: np.ndarray


def f_function_check(fld, k_floor=K_FLOOR):
    """f = r'/k3 and sup |f' - eps1 k3 r|."""
    _require_k3(fld, k_floor)
    r, rp = ratio_and_derivative(fld)
    f = rp / fld.k3
    res = np.abs(fld.derivative(f) - fld.eps1 * fld.k3 * r)
    return FCheck(f, float(np.max(res[_core(fld, 2)])), res)


# -- gamma equation ----------------------------------------------------------------

@dataclass
class GammaCheck:
    residual: float
    beta_residual: float
    gamma: np.ndarray


def gamma_ode_check(fld, axis, k_floor=K_FLOOR):
    """Residual of the gamma equation along the field for a fixed or per-point axis.

    gamma = eps2 g(U, B2); also checks beta = -eps2 r alpha with
    alpha = g(U, T), beta = -eps1 eps2 g(U, B1).
    """
    _require_k3(fld, k_floor)
    axis = np.asarray(axis, dtype=float)
    if axis.ndim == 1:
        axis = np.broadcast_to(axis, fld.T.shape)
    e1, e2 = fld.eps1, fld.eps2
    k3 = fld.k3
    gamma = e2 * inner(axis, fld.B2)
    g1 = fld.derivative(gamma)
    g2 = fld.derivative(gamma, 2)
    k3p = fld.derivative(k3)
    res = np.abs(g2 - (k3p / k3) * g1 - e1 * k3**2 * gamma)

    r = fld.k1 / fld.k2
    alpha = inner(axis, fld.T)
    beta = -e1 * e2 * inner(axis, fld.B1)
    beta_res = np.abs(beta + e2 * r * alpha)
    return GammaCheck(float(np.max(res[_core(fld, 2)])),
                      float(np.max(beta_res[_core(fld, 1)])), gamma)


# -- integral characterization ---------------------------------------------------------

@dataclass
class IntegralFit:
    C1: float
    C2: float
    residual: float
    condition: float


def fit_integral_form(r, theta, eps1):
    """Least-squares fit r ~ C1 eta(theta) + C2 mu(theta).

    The residual is the RMS misfit divided by max(1, max|r|).
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if len(r) < MIN_FIT_POINTS:
        raise IllConditioned(f"need at least {MIN_FIT_POINTS} points, got {len(r)}")
    span = float(np.ptp(theta))
    if eps1 == -1 and span < MIN_TRIG_THETA_RANGE:
        raise IllConditioned(f"theta range {span:.3g} rad is below {MIN_TRIG_THETA_RANGE}")
    eta, mu = basis(eps1)
    A = np.column_stack([eta(theta), mu(theta)])
    cond = float(np.linalg.cond(A.T @ A))
    if not cond <= MAX_GRAM_CONDITION:
        raise IllConditioned(f"basis Gram matrix condition number {cond:.3g} exceeds "
                             f"{MAX_GRAM_CONDITION:.0e}; theta range too small")
    (c1, c2), *_ = np.linalg.lstsq(A, r, rcond=None)
    misfit = math.sqrt(float(np.mean((A @ [c1, c2] - r) ** 2)))
    return IntegralFit(float(c1), float(c2), misfit / max(1.0, float(np.max(np.abs(r)))), cond)


def fit_integral_characterization(fld):
    r = fld.k1 / fld.k2
    return fit_integral_form(r, fld.theta, fld.eps1)


@dataclass
class MNConstants:
    m: np.ndarray
    n: np.ndarray
    spread: float


def mn_from_ratio(r, f, theta, eps1):
    eta, mu = basis(eps1)
    return r * eta(theta) - f * mu(theta), -eps1 * r * mu(theta) + f * eta(theta)


def mn_constants(fld, k_floor=K_FLOOR):
    _require_k3(fld, k_floor)
    r, rp = ratio_and_derivative(fld)
    m, n = mn_from_ratio(r, rp / fld.k3, fld.theta, fld.eps1)
    core = _core(fld, 1)
    spread = max(constancy_statistic(m[core]), constancy_statistic(n[core]))
    return MNConstants(m, n, spread)


@dataclass
class ExpFit:
    D: float
    residual: float


def fit_exp(r, theta):
    """ln r = ln D + theta with unit slope; residual is the RMS of ln r - theta - ln D."""
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise NonPositiveRatio("k1/k2 must be positive for the exponential form")
    dev = np.log(r) - np.asarray(theta, dtype=float)
    lnD = float(np.mean(dev))
    return ExpFit(math.exp(lnD), math.sqrt(float(np.mean((dev - lnD) ** 2))))


def fit_exponential(fld):
    if fld.eps1 != 1:
        raise WrongEpsilon("the exponential form applies to eps1 = +1 only")
    return fit_exp(fld.k1 / fld.k2, fld.theta)


# -- detection ---------------------------------------------------------------------

@dataclass
class HelixReport:
    is_helix: bool
    verdict: str
    eps1: int
    eps2: int
    frame_source: str
    invariant_samples: list
    invariant_spread: float
    m_value: float
    axis: list
    axis_norm_sq: float
    axis_normalized: Optional[list]
    axis_residual: float
    axis_tangent_spread: float
    axis_class: str
    degenerate: bool
    f_residual: float
    gamma_ode_residual: float
    beta_residual: float
    fit_C1: Optional[float]
    fit_C2: Optional[float]
    fit_residual: Optional[float]
    fit_D: Optional[float]
    fit_D_residual: Optional[float]
    mn_spread: float
    m_mean: float
    n_mean: float
    tolerances: dict
    n_points: int
    s_range: list
    stride: int
    notes: list = field(default_factory=list)
    plot: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("plot")
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def plot_csv(self):
        cols = ["s", "r", "theta", "H", "f", "m", "n", "axis_residual_pointwise"]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        data = np.column_stack([self.plot[c] for c in cols])
        for row in data:
            buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        return buf.getvalue()


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def analyze_field(fld, tolerances=None):
    """Run every characterization on a frame field and combine them into a report."""
    tolerances = tolerances or Tolerances()
    fld = analysis_field(fld)
    tol = tolerances.resolve(fld)
    k_floor = tol["k_floor"]
    notes = []

    H = helix_invariant(fld, k_floor)
    c1 = _core(fld, 1)
    spread = constancy_statistic(H[c1])
    m_value = float(np.mean(H[c1]))

    U = axis_samples(fld, k_floor)
    ax = axis_residual(fld, U)
    U_mean = np.mean(U[c1], axis=0)
    norm_sq = float(inner(U_mean, U_mean))
    # g(U,U) = 1 - eps1 eps2 H is only as well known as H itself
    axis_null_tol = max(tol["null_tol"], tol["tol_H"])
    axis_char = causal_character(U_mean, axis_null_tol)
    normalized = None
    if axis_char is not CausalCharacter.NULL:
        normalized = normalize(U_mean, axis_null_tol).tolist()

    fc = f_function_check(fld, k_floor)
    gc = gamma_ode_check(fld, U_mean, k_floor)
    mn = mn_constants(fld, k_floor)

    fit_C1 = fit_C2 = fit_res = None
    try:
        fit = fit_integral_characterization(fld)
        fit_C1, fit_C2, fit_res = fit.C1, fit.C2, fit.residual
    except IllConditioned as exc:
        notes.append(f"integral fit skipped: {exc}")

    fit_D = fit_D_res = None
    if fld.eps1 == 1:
        try:
            e = fit_exponential(fld)
            fit_D, fit_D_res = e.D, e.residual
        except NonPositiveRatio as exc:
            notes.append(f"exponential fit skipped: {exc}")

    invariant_ok = spread <= tol["tol_H"]
    axis_ok = ax.residual <= tol["tol_U"]
    is_helix = bool(invariant_ok and axis_ok)
    if is_helix:
        verdict = VERDICT_HELIX
    elif invariant_ok:
        verdict = VERDICT_INVARIANT_CONSTANT
        notes.append("invariant-constant non-helix: H is constant but the axis bracket "
                     "is not (k1/k2 constant with k3 != 0 admits no fixed axis)")
    else:
        verdict = VERDICT_NOT_HELIX

    r = fld.k1 / fld.k2
    return HelixReport(
        is_helix=is_helix,
        verdict=verdict,
        eps1=int(fld.eps1),
        eps2=int(fld.eps2),
        frame_source=fld.source,
        invariant_samples=H[c1].tolist(),
        invariant_spread=spread,
        m_value=m_value,
        axis=U_mean.tolist(),
        axis_norm_sq=norm_sq,
        axis_normalized=normalized,
        axis_residual=ax.residual,
        axis_tangent_spread=ax.tangent_spread,
        axis_class=axis_char.value,
        degenerate=bool(is_helix and axis_char is CausalCharacter.NULL),
        f_residual=fc.residual,
        gamma_ode_residual=gc.residual,
        beta_residual=gc.beta_residual,
        fit_C1=_finite(fit_C1),
        fit_C2=_finite(fit_C2),
        fit_residual=_finite(fit_res),
        fit_D=_finite(fit_D),
        fit_D_residual=_finite(fit_D_res),
        mn_spread=mn.spread,
        m_mean=float(np.mean(mn.m[c1])),
        n_mean=float(np.mean(mn.n[c1])),
        tolerances=tol,
        n_points=len(fld),
        s_range=[float(fld.s[0]), float(fld.s[-1])],
        stride=int(fld.stride),
        notes=notes,
        plot=dict(s=fld.s, r=r, theta=fld.theta, H=H, f=fc.f, m=mn.m, n=mn.n,
                  axis_residual_pointwise=ax.pointwise),
    )


def frame_field_for(curve, null_tol=DEFAULT_NULL_TOL, k_floor=K_FLOOR):
    """Frame field of any supported curve, reparameterizing when it is not unit speed."""
    if isinstance(curve, FrameField):
        return curve
    if hasattr(curve, "curve") and hasattr(curve, "profile"):  # SynthesizedCurve
        curve = curve.curve
    if isinstance(curve, AnalyticCurve):
        if speed_error(curve) > UNIT_SPEED_TOL:
            curve = reparameterize_arclength(curve, curve.h, null_tol)
    elif isinstance(curve, SampledCurve):
        if not curve.arclength:
            uniform = _is_uniform(curve.s)
            if not (uniform and speed_error(curve) <= UNIT_SPEED_TOL):
                curve = reparameterize_arclength(curve, None, null_tol)
    else:
        raise TypeError(f"cannot analyze {type(curve).__name__}")
    return compute_frame_field(curve, k_floor)


def _is_uniform(s):
    d = np.diff(s)
    return len(s) >= 5 and np.max(np.abs(d - d.mean())) <= 1e-9 * d.mean()


def detect_helix(curve, tolerances=None):
    """Full pipeline: reparameterize if needed, build the frame field, analyze."""
    tolerances = tolerances or Tolerances()
    fld = frame_field_for(curve, tolerances.null_tol, tolerances.k_floor)
    return analyze_field(fld, tolerances)
