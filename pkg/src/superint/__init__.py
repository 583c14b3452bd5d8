"""Symbolic-numeric integration over superspace.

Superfunctions over a Grassmann algebra are represented exactly; domain and
surface integrals are defined through Heaviside and Dirac distributions of an
even phase function, reduced by the Berezin integral to finitely many real
integrals of delta derivatives, and evaluated numerically.
"""

from .expr import Expr, parse
from .grassmann import GrassmannAlgebra, GrassmannElement
from .superfun import SuperContext, SuperFunction, parse_superfunction
from .clifford import (MixedCliffordElement, dirac_left, dirac_right,
                       laplacian_mce, supervector, vector_modulus)
from .distrib import (DistributionExpansion, expand_delta, expand_heaviside)
from .integrate import (IntegralResult, Options, domain_integral,
                        integrate_expansion, supersphere_integral,
                        surface_integral)
from .special import (appell_f1, catalog, gamma_half, hyp2f1,
                      hyperboloid_area, hyperboloid_volume, paraboloid_area,
                      paraboloid_volume, pizzetti_sphere_integral,
                      superball_volume, supersphere_area)
from .greenkernel import (cauchy_pompeiu, fundamental_solution,
                          reproduction_target, stokes_sides)

__version__ = "0.1.0"

__all__ = [
    "Expr", "parse",
    "GrassmannAlgebra", "GrassmannElement",
    "SuperContext", "SuperFunction", "parse_superfunction",
    "MixedCliffordElement", "dirac_left", "dirac_right", "laplacian_mce",
    "supervector", "vector_modulus",
    "DistributionExpansion", "expand_delta", "expand_heaviside",
    "IntegralResult", "Options", "domain_integral", "integrate_expansion",
    "supersphere_integral", "surface_integral",
    "appell_f1", "catalog", "gamma_half", "hyp2f1", "hyperboloid_area",
    "hyperboloid_volume", "paraboloid_area", "paraboloid_volume",
    "pizzetti_sphere_integral", "superball_volume", "supersphere_area",
    "cauchy_pompeiu", "fundamental_solution", "reproduction_target",
    "stokes_sides",
    "__version__",
]
