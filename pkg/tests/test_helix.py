import dataclasses
import json

import jsonschema
import numpy as np
import pytest
import sympy as sp

from minkhelix import curves as cv
from minkhelix import helix as hx
from minkhelix import presets
from minkhelix.errors import CurvatureVanishes, IllConditioned, NonPositiveRatio, WrongEpsilon
from minkhelix.frenet import FrenetApparatus, compute_frame_field
from minkhelix.minkowski import inner
from minkhelix.schemas import load_schema
from minkhelix.synthesis import profile_constant, standard_initial_frame, synthesize

THETA = np.linspace(0.0, 2.0, 401)


def _carried(name, **kw):
    return presets.get_preset(name).build(**kw).field


# -- invariant closed forms -------------------------------------------------------

@pytest.mark.parametrize("r, rp, eps1, want", [
    (np.full_like(THETA, 1.4), np.zeros_like(THETA), 1, 1.96),
    (np.full_like(THETA, 1.4), np.zeros_like(THETA), -1, 1.96),
    (np.cosh(THETA), np.sinh(THETA), 1, 1.0),
    (2 * np.cos(THETA) + np.sin(THETA), -2 * np.sin(THETA) + np.cos(THETA), -1, 5.0),
    (3 * np.exp(THETA), 3 * np.exp(THETA), 1, 0.0),
])
def test_invariant_closed_forms(r, rp, eps1, want):
    # k3 = 1 makes r' and f coincide
    H = hx.invariant_from_ratio(r, rp, 1.0, eps1)
    assert np.allclose(H, want, atol=1e-12 * max(1, np.max(r**2)))


def test_invariant_scales_with_k3():
    r, rp = np.cosh(0.5 * THETA), 0.5 * np.sinh(0.5 * THETA)
    assert np.allclose(hx.invariant_from_ratio(r, rp, 0.5, 1), 1.0)


@pytest.mark.parametrize("name, want, tol", [
    ("trig_helix", 5.0, 1e-6), ("cosh_helix", 1.0, 1e-6), ("exponential", 0.0, 1e-6), ("w_curve", 1.96, 1e-9),
])
def test_invariant_on_carried_fields(name, want, tol):
    fld = _carried(name)
    H = hx.helix_invariant(fld)[hx._core(fld, 1)]
    assert np.max(np.abs(H - want)) <= tol * max(1.0, abs(want))


def test_invariant_requires_k3():
    fld = _carried("w_curve", s_max=1.0)
    fld.k3[100] = 0.0
    with pytest.raises(CurvatureVanishes):
        hx.helix_invariant(fld)


# -- axis ---------------------------------------------------------------------------

def test_axis_vector_standard_frame():
    T, N, B1, B2 = standard_initial_frame(1, 1)
    app = FrenetApparatus(0.0, T, N, B1, B2, 0.7, 0.5, 0.3, 1, 1)
    U = hx.axis_vector(app, 1.4, 0.0)
    e = np.eye(4)
    assert np.allclose(U, e[1] - 1.4 * e[0])
    assert inner(T, U) == pytest.approx(1.0)
    with pytest.raises(CurvatureVanishes):
        hx.axis_vector(FrenetApparatus(0.0, T, N, B1, B2, 0.7, 0.5, 0.0, 1, 1), 1.4, 0.0)


def test_axis_norm_identity():
    # g(U, U) = 1 - eps1 eps2 H pointwise
    for name in ("trig_helix", "cosh_helix", "linear_theta", "w_curve"):
        fld = _carried(name)
        U = hx.axis_samples(fld)
        H = hx.helix_invariant(fld)
        assert np.allclose(inner(U, U), 1 - fld.eps1 * fld.eps2 * H, atol=1e-8), name


def test_cosh_helix_axis_constant():
    fld = _carried("cosh_helix")
    chk = hx.axis_residual(fld, hx.axis_samples(fld))
    assert chk.residual <= 1e-4 and chk.tangent_spread <= 1e-6


def test_w_curve_axis_moves():
    fld = compute_frame_field(cv.hyperbolic_circular())
    chk = hx.axis_residual(fld, hx.axis_samples(fld))
    assert chk.residual > 1e-1
    # dU/ds = -eps2 r k3 B2 when r' = 0
    r = fld.k1 / fld.k2
    want = np.linalg.norm(-fld.eps2 * (r * fld.k3)[:, None] * fld.B2, axis=1)
    core = hx._core(fld, 2)
    assert np.allclose(chk.pointwise[core], want[core], rtol=1e-6)


# -- f-function ------------------------------------------------------------------------

def test_f_function_exponential_and_trig():
    fc = hx.f_function_check(_carried("exponential"))
    r = _carried("exponential").ratio
    assert fc.residual <= 1e-6 and np.allclose(fc.f[5:-5], r[5:-5], rtol=1e-8)
    assert hx.f_function_check(_carried("trig_helix")).residual <= 1e-4


def test_f_function_w_curve_gap():
    fc = hx.f_function_check(_carried("w_curve"))
    assert np.allclose(fc.f, 0.0, atol=1e-12)
    assert fc.residual == pytest.approx(0.42, abs=1e-3)


# -- gamma equation ------------------------------------------------------------------------

def test_gamma_ode_on_helix():
    fld = _carried("cosh_helix")
    U = np.mean(hx.axis_samples(fld), axis=0)
    assert hx.gamma_ode_check(fld, U).residual <= 1e-3


def test_gamma_identically_zero():
    fld = _carried("w_curve", s_max=1.0)
    # exact B2 = e4 and an axis in span{e1, e2, e3}, so gamma vanishes without roundoff
    fld = dataclasses.replace(fld, B2=np.broadcast_to(np.eye(4)[3], fld.T.shape), _cache={})
    chk = hx.gamma_ode_check(fld, np.array([0.3, 1.0, -2.0, 0.0]))
    assert np.all(chk.gamma == 0.0) and chk.residual == 0.0


def test_beta_relation_per_point_and_mean():
    fld = _carried("w_curve")
    U = hx.axis_samples(fld)
    assert hx.gamma_ode_check(fld, U).beta_residual <= 1e-10
    mean = hx.gamma_ode_check(fld, np.mean(U, axis=0))
    # a frozen axis on a non-helix breaks both relations
    assert mean.beta_residual > 1e-2 and mean.residual > 1e-3


# -- fits ---------------------------------------------------------------------------------

@pytest.mark.parametrize("eps1, r, C", [
    (1, np.cosh(THETA), (1.0, 0.0)),
    (-1, 2 * np.cos(THETA) + np.sin(THETA), (2.0, 1.0)),
])
def test_fit_exact_members(eps1, r, C):
    fit = hx.fit_integral_form(r, THETA, eps1)
    assert (fit.C1, fit.C2) == pytest.approx(C, abs=1e-10)
    assert fit.residual <= 1e-8


def test_fit_rejects_linear():
    th = np.linspace(0, 2 * np.pi, 629)
    assert hx.fit_integral_form(th, th, -1).residual > 0.05


def test_fit_conditioning_guards():
    with pytest.raises(IllConditioned):
        hx.fit_integral_form(np.ones(5), np.linspace(0, 1, 5), 1)
    th = np.linspace(0, 0.3, 100)
    with pytest.raises(IllConditioned):
        hx.fit_integral_form(np.cos(th), th, -1)
    th = np.linspace(0, 1e-5, 100)
    with pytest.raises(IllConditioned):
        hx.fit_integral_form(np.cosh(th), th, 1)


def test_fit_on_synthesized_trig_helix():
    fit = hx.fit_integral_characterization(_carried("trig_helix"))
    assert (fit.C1, fit.C2) == pytest.approx((2.0, 1.0), abs=1e-6)


@pytest.mark.parametrize("D", [1.0, 3.0])
def test_fit_exp_recovers_D(D):
    e = hx.fit_exp(D * np.exp(THETA), THETA)
    assert e.D == pytest.approx(D, rel=1e-12) and e.residual <= 1e-8


def test_fit_exp_rejects_cosh_and_errors():
    assert hx.fit_exp(np.cosh(THETA), THETA).residual > 0.01
    with pytest.raises(NonPositiveRatio):
        hx.fit_exp(np.cos(2 * THETA), THETA)
    with pytest.raises(WrongEpsilon):
        hx.fit_exponential(_carried("trig_helix"))


# -- m, n ---------------------------------------------------------------------------------

@pytest.mark.parametrize("eps1", [1, -1])
def test_mn_conserved_symbolically(eps1):
    th, C1, C2 = sp.symbols("theta C1 C2", real=True)
    eta, mu = (sp.cosh, sp.sinh) if eps1 == 1 else (sp.cos, sp.sin)
    r = C1 * eta(th) + C2 * mu(th)
    f = r.diff(th)  # f = r'/k3 = dr/dtheta
    m = r * eta(th) - f * mu(th)
    n = -eps1 * r * mu(th) + f * eta(th)
    assert sp.simplify(m.diff(th)) == 0 and sp.simplify(n.diff(th)) == 0
    assert sp.simplify(m - C1) == 0 and sp.simplify(n - C2) == 0
    # library formula agrees with the symbolic one
    lm, ln = hx.mn_from_ratio(sp.lambdify(th, r.subs({C1: 2, C2: 1}))(THETA),
                              sp.lambdify(th, f.subs({C1: 2, C2: 1}))(THETA), THETA, eps1)
    assert np.allclose(lm, 2.0) and np.allclose(ln, 1.0)


def test_mn_on_fields():
    mn = hx.mn_constants(_carried("trig_helix"))
    assert mn.spread <= 1e-6
    assert np.mean(mn.m) == pytest.approx(2.0, abs=1e-6) and np.mean(mn.n) == pytest.approx(1.0, abs=1e-6)
    assert hx.mn_constants(_carried("w_curve")).spread > 0.1


# -- detection --------------------------------------------------------------------------

@pytest.mark.parametrize("name", [n for n, p in presets.PRESETS.items() if p.name != "line"])
def test_detect_matches_expected(name):
    p = presets.get_preset(name)
    assert hx.detect_helix(p.build()).verdict == p.expected


def test_detect_line_raises():
    with pytest.raises(CurvatureVanishes):
        hx.detect_helix(presets.get_preset("line").build())


def test_trig_helix_report():
    rep = hx.detect_helix(_carried("trig_helix"))
    assert rep.is_helix and rep.m_value == pytest.approx(5.0, abs=1e-6)
    assert (rep.fit_C1, rep.fit_C2) == pytest.approx((2.0, 1.0), abs=1e-3)
    # g(U, U) = 1 - eps1 eps2 H = 6
    assert rep.axis_norm_sq == pytest.approx(6.0, abs=1e-6) and rep.axis_class == "spacelike"


def test_degenerate_axis_classes():
    cosh = hx.detect_helix(_carried("cosh_helix"))
    assert cosh.axis_class == "null" and cosh.degenerate and cosh.axis_normalized is None
    exp = hx.detect_helix(_carried("exponential"))
    assert exp.is_helix and exp.m_value == pytest.approx(0.0, abs=1e-6)
    assert exp.axis_norm_sq == pytest.approx(1.0, abs=1e-6)


def test_constant_profile_gap():
    rep = hx.detect_helix(synthesize(profile_constant(0.7, 0.5, 0.3, 1, 1)))
    assert rep.verdict == hx.VERDICT_INVARIANT_CONSTANT and not rep.is_helix
    assert rep.invariant_spread <= 1e-6 and rep.axis_residual > 1e-1
    assert any("invariant-constant" in n for n in rep.notes)


def test_explicit_tolerances():
    fld = _carried("trig_helix")
    assert hx.detect_helix(fld, hx.Tolerances(tol_U=1e-14)).verdict == hx.VERDICT_INVARIANT_CONSTANT
    assert hx.detect_helix(fld, hx.Tolerances(tol_H=1e-18)).verdict == hx.VERDICT_NOT_HELIX


def test_report_schema_and_plot():
    rep = hx.detect_helix(presets.get_preset("trig_helix").build())
    data = json.loads(rep.to_json())
    jsonschema.validate(data, load_schema("report"))
    assert "plot" not in data
    text = rep.plot_csv()
    assert text.splitlines()[0] == "s,r,theta,H,f,m,n,axis_residual_pointwise"
    assert len(text.splitlines()) == rep.n_points + 1
