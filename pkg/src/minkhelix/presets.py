"""Single registry of named curves shared by the library, the CLI and the verification suite."""
from dataclasses import dataclass
from typing import Callable

from . import curves, synthesis
from .errors import InputError


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str  # "analytic" or "synthesized"
    provenance: str
    expected: str  # verdict or error class the detector should produce
    builder: Callable

    def build(self, h=None, s_max=None):
        kw = {}
        if h is not None:
            kw["h"] = h
        if s_max is not None:
            kw["s_max"] = s_max
        return self.builder(**kw)

    def profile(self, h=None, s_max=None):
        if self.kind != "synthesized":
            raise InputError(f"preset {self.name!r} is analytic and has no curvature profile")
        return _PROFILES[self.name](h, s_max)


def _pick(value, default):
    return default if value is None else value


_PROFILES = {
    "trig_helix": lambda h, s_max: synthesis.profile_from_eq21(
        -1, 1, 2.0, 1.0, k2=1.0, k3=0.5, s_max=_pick(s_max, 2.0), h=_pick(h, synthesis.DEFAULT_H)),
    "cosh_helix": lambda h, s_max: synthesis.profile_from_eq21(
        1, 1, 1.0, 0.0, k2=1.0, k3=0.5, s_max=_pick(s_max, 4.0), h=_pick(h, synthesis.DEFAULT_H)),
    "exponential": lambda h, s_max: synthesis.profile_exponential(
        1.0, k2=1.0, k3=0.3, s_max=_pick(s_max, 5.0), h=_pick(h, synthesis.DEFAULT_H)),
    "w_curve": lambda h, s_max: synthesis.profile_nonhelix_control(
        "w_curve", s_max=s_max, h=_pick(h, synthesis.DEFAULT_H)),
    "linear_theta": lambda h, s_max: synthesis.profile_nonhelix_control(
        "linear_theta", s_max=s_max, h=_pick(h, synthesis.DEFAULT_H)),
}


def _synth_builder(name):
    def build(h=None, s_max=None):
        return synthesis.synthesize(_PROFILES[name](h, s_max))
    return build


PRESETS = {
    p.name: p for p in [
        Preset("hyperbolic_circular", "analytic",
               "constant-curvature curve (a cosh, a sinh, b cos, b sin); constant invariant but no fixed axis",
               "invariant_constant_non_helix", curves.hyperbolic_circular),
        Preset("hyperbolic_circular_warped", "analytic",
               "the same curve under the non-unit-speed parameter u = t + 0.1 t^2 (exercises reparameterization)",
               "invariant_constant_non_helix",
               lambda h=curves.DEFAULT_H, s_max=5.0: curves.hyperbolic_circular(warp=0.1, h=h, s_max=s_max)),
        Preset("line", "analytic", "straight spacelike line; first curvature vanishes",
               "CurvatureVanishes", curves.line),
        Preset("trig_helix", "synthesized",
               "integral characterization, eps1 = -1: k1/k2 = 2 cos(theta) + sin(theta), k2 = 1, k3 = 0.5, s in [0, 2]",
               "helix", _synth_builder("trig_helix")),
        Preset("cosh_helix", "synthesized",
               "integral characterization, eps1 = +1: k1/k2 = cosh(theta), k2 = 1, k3 = 0.5, s in [0, 4]; null axis",
               "helix", _synth_builder("cosh_helix")),
        Preset("exponential", "synthesized",
               "exponential form with eps1 = +1: k1/k2 = exp(theta), D = 1, k3 = 0.3, s in [0, 5]; invariant 0",
               "helix", _synth_builder("exponential")),
        Preset("w_curve", "synthesized",
               "constant curvatures (0.7, 0.5, 0.3), eps = (+1, +1), s in [0, 10]; negative control",
               "invariant_constant_non_helix", _synth_builder("w_curve")),
        Preset("linear_theta", "synthesized",
               "k1/k2 = 1 + theta, k2 = k3 = 1, eps = (-1, +1), s in [0, 2]; negative control",
               "not_helix", _synth_builder("linear_theta")),
    ]
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise InputError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def listing():
    return [dict(name=p.name, kind=p.kind, expected=p.expected, provenance=p.provenance)
            for p in PRESETS.values()]
