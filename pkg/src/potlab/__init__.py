"""Riesz potentials, fractional maximal functions and Morrey-Lorentz trace
inequalities over discrete (possibly non-doubling) measures."""

__version__ = "0.1.0"

from .lorentz import (SampledFunction, StepFunction, decreasing_rearrangement, distribution_function,
                      lorentz_norm_natural, lorentz_quasinorm, maximal_rearrangement)
from .measure import (DiscreteMeasure, RadiiGrid, ball_mass, build_measure, cantor_measure,
                      growth_constant, growth_exponent, lebesgue_on_box, point_mass, riesz_energy,
                      surface_measure)
from .operators import (GridFunction, fractional_maximal, riesz_potential, sharp_maximal_centered,
                        sharp_maximal_uncentered)
from .spaces import ExponentTuple, morrey_lorentz_norm, morrey_norm

__all__ = [
    "DiscreteMeasure", "RadiiGrid", "SampledFunction", "StepFunction", "GridFunction", "ExponentTuple",
    "ball_mass", "build_measure", "cantor_measure", "decreasing_rearrangement", "distribution_function",
    "fractional_maximal", "growth_constant", "growth_exponent", "lebesgue_on_box", "lorentz_norm_natural",
    "lorentz_quasinorm", "maximal_rearrangement", "morrey_lorentz_norm", "morrey_norm", "point_mass",
    "riesz_energy", "riesz_potential", "sharp_maximal_centered", "sharp_maximal_uncentered",
    "surface_measure",
]
