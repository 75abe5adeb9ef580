"""Spacelike curves in Minkowski 4-space: Frenet frames, helix detection and synthesis."""
from .curves import AnalyticCurve, SampledCurve, load_curve, reparameterize_arclength, save_curve
from .errors import GeometryError, HelixToolkitError, InputError, NumericalError
from .frenet import FrameField, compute_frame_field
from .helix import HelixReport, Tolerances, analyze_field, detect_helix
from .minkowski import CausalCharacter, causal_character, inner
from .synthesis import CurvatureProfile, synthesize

__version__ = "0.1.0"

__all__ = [
    "AnalyticCurve", "SampledCurve", "load_curve", "save_curve", "reparameterize_arclength",
    "HelixToolkitError", "InputError", "GeometryError", "NumericalError",
    "FrameField", "compute_frame_field",
    "HelixReport", "Tolerances", "analyze_field", "detect_helix",
    "CausalCharacter", "causal_character", "inner",
    "CurvatureProfile", "synthesize",
]
