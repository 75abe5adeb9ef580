import math

import numpy as np
import pytest
import sympy as sp

from minkhelix import curves as cv
from minkhelix import frenet
from minkhelix.errors import CurvatureVanishes, NotSpacelike, NotUnitSpeed, SignFlip
from minkhelix.frenet import (
    compute_apparatus,
    compute_frame_field,
    frame_field_to_csv,
    frame_signs,
    frenet_residual,
)
from minkhelix.synthesis import profile_constant, synthesize

G = sp.diag(-1, 1, 1, 1)


def _g(u, v):
    return (u.T * G * v)[0, 0]


def _sympy_apparatus(x, t, t0):
    """Frenet apparatus by differentiating T, N, B1 in turn (independent of the library route)."""
    T = x.diff(t)
    dT = T.diff(t)
    q = _g(dT, dT).subs(t, t0).evalf(30)
    k1 = sp.sqrt(abs(q))
    eps1 = 1 if q > 0 else -1
    N = dT / sp.sqrt(sp.Abs(_g(dT, dT)))
    w = N.diff(t) + eps1 * sp.sqrt(sp.Abs(_g(dT, dT))) * T
    q2 = _g(w, w).subs(t, t0).evalf(30)
    k2 = sp.sqrt(abs(q2))
    eps2 = -eps1 * (1 if q2 > 0 else -1)
    B1 = w / sp.sqrt(sp.Abs(_g(w, w)))
    v = B1.diff(t) - eps2 * sp.sqrt(sp.Abs(_g(w, w))) * N
    vals = [m.subs(t, t0).evalf(30) for m in (T, N, B1, v)]
    k3 = sp.sqrt(abs(_g(vals[3], vals[3])))
    B2 = vals[3] / k3
    if sp.Matrix.hstack(vals[0], vals[1], vals[2], B2).det() < 0:
        B2, k3 = -B2, -k3
    to_np = lambda m: np.array([float(c) for c in m])
    return dict(T=to_np(vals[0]), N=to_np(vals[1]), B1=to_np(vals[2]), B2=to_np(B2),
                k1=float(k1), k2=float(k2), k3=float(k3), eps1=eps1, eps2=eps2)


def _hc_sympy(a, alpha, b, beta):
    t = sp.symbols("t", real=True)
    return t, sp.Matrix([a * sp.cosh(alpha * t), a * sp.sinh(alpha * t),
                         b * sp.cos(beta * t), b * sp.sin(beta * t)])


@pytest.mark.parametrize("s0", [0.3, 2.1, 4.4])
def test_default_apparatus_matches_sympy(s0):
    t, x = _hc_sympy(1, sp.Rational(1, 2), 1, sp.sqrt(3) / 2)
    want = _sympy_apparatus(x, t, sp.nsimplify(s0))
    got = compute_apparatus(cv.hyperbolic_circular(), s0)
    assert (got.eps1, got.eps2) == (want["eps1"], want["eps2"])
    for key in ("k1", "k2", "k3"):
        assert getattr(got, key) == pytest.approx(want[key], abs=1e-12)
    for key in ("T", "N", "B1", "B2"):
        assert np.allclose(getattr(got, key), want[key], atol=1e-12), key


def test_default_closed_form():
    f = compute_frame_field(cv.hyperbolic_circular())
    assert (f.eps1, f.eps2) == (1, -1)
    assert np.allclose(f.k1, math.sqrt(0.5), atol=1e-12)
    assert np.allclose(f.k2, math.sqrt(3 / 8), atol=1e-12)
    assert np.allclose(np.abs(f.k3), math.sqrt(3 / 8), atol=1e-12)
    assert f.gram_error() <= 1e-9
    assert np.allclose(f.determinants(), 1.0, atol=1e-9)


def test_reconstructed_default_matches_analytic():
    c = cv.hyperbolic_circular()
    s = c.grid()
    f = compute_frame_field(cv.SampledCurve(s, c.evaluate(s), arclength=True))
    assert f.source == "reconstructed"
    for k, want in (("k1", math.sqrt(0.5)), ("k2", math.sqrt(3 / 8))):
        assert np.max(np.abs(getattr(f, k) - want)) <= 1e-6
    assert np.max(np.abs(np.abs(f.k3) - math.sqrt(3 / 8))) <= 1e-6
    # T is the differenced velocity, so its norm carries the stencil error
    assert f.gram_error() <= 1e-4


def test_equal_rates_have_vanishing_k1():
    # alpha = beta gives g(x'', x'') = alpha^4 (b^2 - a^2) = 0
    r = 1 / math.sqrt(2)
    with pytest.raises(CurvatureVanishes) as info:
        compute_frame_field(cv.hyperbolic_circular(1.0, r, 1.0, r))
    assert info.value.index == 1


def test_line_has_vanishing_k1():
    with pytest.raises(CurvatureVanishes) as info:
        compute_frame_field(cv.line())
    assert info.value.index == 1
    s = np.linspace(0, 1, 1001)
    pts = np.stack([0 * s, s, 0 * s, 0 * s], axis=1)
    with pytest.raises(CurvatureVanishes):
        compute_frame_field(cv.SampledCurve(s, pts, arclength=True))


def test_not_unit_speed_and_timelike():
    with pytest.raises(NotUnitSpeed):
        compute_frame_field(cv.hyperbolic_circular(alpha=1.0, beta=math.sqrt(3)))
    timelike = cv.AnalyticCurve(
        "timelike",
        [lambda t, k=k: np.stack([np.sinh(t) if k % 2 == 0 else np.cosh(t),
                                  np.cosh(t) if k % 2 == 0 else np.sinh(t),
                                  0 * t, 0 * t], axis=-1) for k in range(5)],
        0.0, 1.0)
    with pytest.raises(NotSpacelike):
        compute_frame_field(timelike)


def test_sign_flip_detected(monkeypatch):
    real = frenet.apparatus_arrays

    def flipped(*args, **kw):
        out = real(*args, **kw)
        e = out["eps1"].copy()
        e[len(e) // 2:] *= -1
        out["eps1"] = e
        return out

    monkeypatch.setattr(frenet, "apparatus_arrays", flipped)
    with pytest.raises(SignFlip) as info:
        compute_frame_field(cv.hyperbolic_circular())
    assert info.value.which == "eps1"


def test_constant_profile_round_trip():
    syn = synthesize(profile_constant(0.7, 0.5, 0.3, 1, 1, s_max=4.0))
    f = compute_frame_field(syn.curve)
    for got, want in ((f.k1, 0.7), (f.k2, 0.5), (f.k3, 0.3)):
        assert np.max(np.abs(got / want - 1)) <= 1e-3
    assert (f.eps1, f.eps2) == (1, 1)


def test_frenet_residual_levels():
    assert np.max(frenet_residual(compute_frame_field(cv.hyperbolic_circular()))) <= 1e-6
    syn = synthesize(profile_constant(0.7, 0.5, 0.3, 1, 1, s_max=4.0))
    assert np.max(frenet_residual(syn.field)) <= 1e-7


def test_frenet_residual_spikes_on_corrupted_frame():
    syn = synthesize(profile_constant(0.7, 0.5, 0.3, 1, 1, s_max=4.0))
    f = syn.field
    T = f.T.copy()
    T[2000] += np.array([0.0, 0.0, 1e-3, 0.0])
    bad = frenet.FrameField(s=f.s, T=T, N=f.N, B1=f.B1, B2=f.B2, k1=f.k1, k2=f.k2, k3=f.k3,
                            eps1=f.eps1, eps2=f.eps2, h=f.h, theta=f.theta, source="carried")
    res = frenet_residual(bad)
    assert np.max(res) > 0.1
    assert np.max(np.delete(res, range(1995, 2006))) <= 1e-7


def test_frame_signs():
    assert frame_signs(1, -1).tolist() == [1, 1, 1, -1]
    assert frame_signs(-1, 1).tolist() == [1, -1, 1, 1]
    assert frame_signs(1, 1).tolist() == [1, 1, -1, 1]


def test_csv_export():
    f = compute_frame_field(cv.hyperbolic_circular(s_max=0.1))
    text = frame_field_to_csv(f)
    lines = text.splitlines()
    assert lines[0].split(",")[:6] == ["s", "k1", "k2", "k3", "eps1", "eps2"]
    assert len(lines[0].split(",")) == 22 and len(lines) == len(f) + 1
    assert frame_field_to_csv(f) == text
