"""Curves with prescribed curvatures, by RK4 integration of the Frenet system.

The 20-component state is (x, T, N, B1, B2) and evolves as

    x' = T,  T' = k1 N,  N' = -eps1 k1 T + k2 B1,
    B1' = eps2 k2 N + k3 B2,  B2' = eps1 k3 B1.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curves import SampledCurve
from .errors import (
    InputError,
    NonPositiveD,
    RatioSignViolation,
    SignatureRuleViolation,
)
from .frenet import K_FLOOR, FrameField, frame_signs
from .minkowski import inner
from .numerics import cumulative_quadrature, rk4_integrate

DEFAULT_S_MAX = 10.0
DEFAULT_H = 1e-3
MAX_H = 1e-2


def check_signature(eps1, eps2):
    if eps1 not in (1, -1) or eps2 not in (1, -1):
        raise InputError(f"eps1, eps2 must be +1 or -1, got ({eps1}, {eps2})")
    if eps1 == -1 and eps2 == -1:
        raise SignatureRuleViolation(eps1, eps2)


def standard_initial_frame(eps1, eps2):
    """Coordinate-axis frame (T, N, B1, B2) with the required Gram matrix and determinant +1."""
    check_signature(eps1, eps2)
    e = np.eye(4)
    if eps1 == 1 and eps2 == 1:
        frame = (e[1], e[2], e[0], e[3])  # B1 timelike
    elif eps1 == 1:
        frame = (e[1], e[3], e[2], e[0])  # B2 timelike
    else:
        frame = (e[1], e[0], e[3], e[2])  # N timelike
    return tuple(v.copy() for v in frame)


def _as_map(k):
    if callable(k):
        return k
    value = float(k)
    return lambda s: np.full(np.shape(s), value) if np.ndim(s) else value


def _branch(eps1):
    """(eta, mu) basis of the integral characterization for the given eps1."""
    return (np.cosh, np.sinh) if eps1 == 1 else (np.cos, np.sin)


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    eps1: int
    eps2: int
    k1: Callable
    k2: Callable
    k3: Callable
    s_max: float = DEFAULT_S_MAX
    h: float = DEFAULT_H
    s_min: float = 0.0
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        check_signature(self.eps1, self.eps2)
        if not 0 < self.h <= MAX_H:
            raise InputError(f"step h must lie in (0, {MAX_H}], got {self.h}")
        if not self.s_max > self.s_min:
            raise InputError("empty parameter interval")

    def grid(self):
        n = int(math.floor((self.s_max - self.s_min) / self.h + 1e-9))
        return self.s_min + self.h * np.arange(n + 1)

    def values(self, s):
        return self.k1(s), self.k2(s), self.k3(s)


def _theta_map(k3, s_min, s_max, h, constant=None):
    """theta(s) = integral of k3 from s_min; exact for constant k3, else tabulated on the half-step grid."""
    if constant is not None:
        return lambda s: constant * (np.asarray(s, dtype=float) - s_min)
    # RK4 stages sit on the half-step grid, so tabulating there avoids interpolation error
    n = int(math.floor((s_max - s_min) / (0.5 * h) + 1e-9))
    grid = s_min + 0.5 * h * np.arange(n + 1)
    table = cumulative_quadrature(k3(grid), 0.5 * h)
    return lambda s: np.interp(s, grid, table)


def _check_profile(profile, positive_k1):
    s = np.concatenate([profile.grid(), profile.grid()[:-1] + 0.5 * profile.h])
    k1, k2, k3 = (np.broadcast_to(np.asarray(v, dtype=float), s.shape) for v in profile.values(s))
    if not np.all(np.abs(k2) >= K_FLOOR):
        raise InputError("k2 must stay away from zero on the interval")
    if not np.all(np.abs(k3) >= K_FLOOR):
        raise InputError("k3 must stay away from zero on the interval")
    if positive_k1 and not np.all(k1 > K_FLOOR):
        i = int(np.argmax(~(k1 > K_FLOOR)))
        raise RatioSignViolation(
            f"k1 = k2*(C1*eta + C2*mu) is not positive at s={s[i]:.6g} (k1={k1[i]:.3g})"
        )


def profile_from_eq21(eps1, eps2, C1, C2, k2=1.0, k3=0.5, s_max=DEFAULT_S_MAX,
                      h=DEFAULT_H, s_min=0.0):
    """k1 = k2 * (C1 eta(theta) + C2 mu(theta)), theta = integral of k3."""
    check_signature(eps1, eps2)
    k3_const = None if callable(k3) else float(k3)
    k2m, k3m = _as_map(k2), _as_map(k3)
    theta = _theta_map(k3m, s_min, s_max, h, k3_const)
    eta, mu = _branch(eps1)

    def k1(s):
        th = theta(s)
        return k2m(s) * (C1 * eta(th) + C2 * mu(th))

    params = dict(C1=C1, C2=C2, k2=k2 if not callable(k2) else "custom",
                  k3=k3 if not callable(k3) else "custom")
    profile = CurvatureProfile(eps1, eps2, k1, k2m, k3m, s_max, h, s_min, "eq21", params)
    _check_profile(profile, positive_k1=True)
    return profile


def profile_exponential(D, k2=1.0, k3=0.3, s_max=5.0, h=DEFAULT_H, eps2=1, s_min=0.0):
    """k1 = D exp(theta) k2 with eps1 = +1; the helix invariant is identically 0."""
    if not D > 0:
        raise NonPositiveD(f"D must be positive, got {D}")
    k3_const = None if callable(k3) else float(k3)
    k2m, k3m = _as_map(k2), _as_map(k3)
    theta = _theta_map(k3m, s_min, s_max, h, k3_const)

    def k1(s):
        return D * np.exp(theta(s)) * k2m(s)

    params = dict(D=D, k2=k2 if not callable(k2) else "custom",
                  k3=k3 if not callable(k3) else "custom")
    profile = CurvatureProfile(1, eps2, k1, k2m, k3m, s_max, h, s_min, "exponential", params)
    _check_profile(profile, positive_k1=True)
    return profile


def profile_constant(k1, k2, k3, eps1=1, eps2=1, s_max=DEFAULT_S_MAX, h=DEFAULT_H, s_min=0.0):
    params = dict(k1=k1, k2=k2, k3=k3)
    profile = CurvatureProfile(eps1, eps2, _as_map(k1), _as_map(k2), _as_map(k3),
                               s_max, h, s_min, "constant", params)
    _check_profile(profile, positive_k1=False)
    return profile


def profile_nonhelix_control(kind, s_max=None, h=DEFAULT_H):
    """Negative controls for the detector.

    ``w_curve``: constant curvatures (0.7, 0.5, 0.3), eps = (+1, +1), s in [0, 10].
    ``linear_theta``: k1/k2 = 1 + theta with k2 = k3 = 1, eps = (-1, +1), s in [0, 2];
    the offset keeps k1 positive at s = 0.
    """
    if kind == "w_curve":
        p = profile_constant(0.7, 0.5, 0.3, 1, 1, DEFAULT_S_MAX if s_max is None else s_max, h)
    elif kind == "linear_theta":
        smax = 2.0 if s_max is None else s_max
        p = CurvatureProfile(-1, 1, lambda s: 1.0 + np.asarray(s, dtype=float),
                             _as_map(1.0), _as_map(1.0), smax, h, 0.0, "control",
                             dict(control="linear_theta"))
        _check_profile(p, positive_k1=True)
        return p
    else:
        raise InputError(f"unknown control kind {kind!r} (expected w_curve or linear_theta)")
    return CurvatureProfile(p.eps1, p.eps2, p.k1, p.k2, p.k3, p.s_max, p.h, p.s_min,
                            "control", dict(control=kind, **p.params))


# -- integration ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SynthesizedCurve:
    curve: SampledCurve
    field: FrameField
    profile: CurvatureProfile
    gram_drift: float

    @property
    def frame_scale(self):
        """Largest Euclidean component of the carried frame (grows like exp(rapidity))."""
        return float(np.max(np.abs(self.field.frames)))

    @property
    def gram_drift_relative(self):
        """Gram drift relative to the squared frame scale; the roundoff floor is ~1e-15."""
        return self.gram_drift / max(1.0, self.frame_scale) ** 2


def reorthonormalize(frame, eps1, eps2):
    """Indefinite Gram-Schmidt on (T, N, B1, B2) with target signs (1, eps1, -eps1 eps2, eps2)."""
    signs = frame_signs(eps1, eps2)
    out = []
    for v, sg in zip(frame, signs):
        for u, su in zip(out, signs):
            v = v - su * inner(v, u) * u
        out.append(v / math.sqrt(abs(inner(v, v))))
    return np.stack(out)


def _frenet_rhs(profile):
    e1, e2 = profile.eps1, profile.eps2
    k1f, k2f, k3f = profile.k1, profile.k2, profile.k3

    def rhs(s, y):
        _, T, N, B1, B2 = y
        a, b, c = float(k1f(s)), float(k2f(s)), float(k3f(s))
        return np.stack([T, a * N, -e1 * a * T + b * B1, e2 * b * N + c * B2, e1 * c * B1])

    return rhs


def synthesize(profile, x0=(0.0, 0.0, 0.0, 0.0), reorthonormalize_every=0,
               diff_step=None):
    """Integrate the Frenet system for ``profile`` from ``x0`` with the standard initial frame.

    Frames are carried from the integrator. ``reorthonormalize_every = N > 0``
    re-applies indefinite Gram-Schmidt to the frame every N steps (off by default).
    """
    s = profile.grid()
    y0 = np.stack([np.asarray(x0, dtype=float), *standard_initial_frame(profile.eps1, profile.eps2)])

    post = None
    if reorthonormalize_every:
        def post(i, y):
            if i % reorthonormalize_every == 0:
                return np.concatenate([y[:1], reorthonormalize(y[1:], profile.eps1, profile.eps2)])
            return None

    ys = rk4_integrate(_frenet_rhs(profile), y0, s, post_step=post)
    x, T, N, B1, B2 = (ys[:, i] for i in range(5))

    k1, k2, k3 = (np.broadcast_to(np.asarray(v, dtype=float), s.shape).copy()
                  for v in profile.values(s))
    field_ = FrameField(
        s=s, T=T, N=N, B1=B1, B2=B2, k1=k1, k2=k2, k3=k3,
        eps1=profile.eps1, eps2=profile.eps2, h=profile.h,
        theta=cumulative_quadrature(k3, profile.h), stride=1, source="carried",
        name=profile.kind,
    )
    curve = SampledCurve(s, x, arclength=True, name=profile.kind, diff_step=diff_step,
                         total_length=float(s[-1] - s[0]))
    return SynthesizedCurve(curve, field_, profile, field_.gram_error())


# -- profile spec JSON ----------------------------------------------------------

PROFILE_KINDS = ("eq21", "exponential", "constant", "control")


def profile_from_spec(spec):
    """Build a profile from the JSON profile spec (a dict or a JSON string)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise InputError(f"profile spec is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise InputError("profile spec must be a JSON object")
    unknown = set(spec) - {"eps1", "eps2", "kind", "params", "s_max", "h"}
    if unknown:
        raise InputError(f"unknown profile spec keys: {sorted(unknown)}")
    kind = spec.get("kind")
    if kind not in PROFILE_KINDS:
        raise InputError(f"profile kind must be one of {PROFILE_KINDS}, got {kind!r}")
    params = dict(spec.get("params", {}))
    eps1 = int(spec.get("eps1", 1))
    eps2 = int(spec.get("eps2", 1))
    check_signature(eps1, eps2)
    s_max = float(spec.get("s_max", DEFAULT_S_MAX))
    h = float(spec.get("h", DEFAULT_H))
    try:
        if kind == "eq21":
            return profile_from_eq21(eps1, eps2, float(params.pop("C1")), float(params.pop("C2")),
                                     s_max=s_max, h=h, **_floats(params, "k2", "k3"))
        if kind == "exponential":
            if eps1 != 1:
                raise InputError("exponential profiles require eps1 = +1")
            return profile_exponential(float(params.pop("D")), s_max=s_max, h=h, eps2=eps2,
                                       **_floats(params, "k2", "k3"))
        if kind == "constant":
            return profile_constant(float(params.pop("k1")), float(params.pop("k2")),
                                    float(params.pop("k3")), eps1, eps2, s_max, h)
        control = params.pop("control", None)
        p = profile_nonhelix_control(control, s_max=spec.get("s_max"), h=h)
        if (p.eps1, p.eps2) != (eps1, eps2) and ("eps1" in spec or "eps2" in spec):
            raise InputError(f"control {control!r} fixes (eps1, eps2) = ({p.eps1}, {p.eps2})")
        return p
    except KeyError as exc:
        raise InputError(f"missing profile parameter {exc.args[0]!r} for kind {kind!r}") from None
    except TypeError as exc:
        raise InputError(f"bad profile parameters: {exc}") from None


def _floats(params, *names):
    out = {}
    for key in list(params):
        if key not in names:
            raise InputError(f"unknown profile parameter {key!r}")
        out[key] = float(params[key])
    return out
