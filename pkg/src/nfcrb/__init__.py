"""Near-field 3-D positioning Cramer-Rao bounds for large intelligent surfaces."""

from .core import (ConfigError, DomainError, FieldModel, PhysicalConfig, Regime,
                   RegimeDistances, SurfaceGeometry, TerminalPosition, from_db,
                   regime_classify, to_db, to_local_spherical)
from .cpl import (CplScenario, crb_asymptotic, crb_cpl, crb_cpl_large_zt, rho_bounds,
                  rho_closed_form, rho_numeric)
from .engine import (CrbResult, FimMatrix, Numerics, RankDeficiencyWarning, crb_from_fim,
                     crb_point, fim_osef, fim_sef, fim_vef)
from .fields import osef, sef, sef_gradient, vef, vef_gradient
from .quadrature import QuadratureError, QuadratureSpec, RectDomain, integrate_2d, riemann_grid
from .simo import SimoLayout, build_layout, crb_simo, crb_simo_large_zt, lemma1_check

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "FieldModel", "PhysicalConfig", "Regime", "RegimeDistances",
    "SurfaceGeometry", "TerminalPosition", "from_db", "regime_classify", "to_db",
    "to_local_spherical", "CplScenario", "crb_asymptotic", "crb_cpl", "crb_cpl_large_zt",
    "rho_bounds", "rho_closed_form", "rho_numeric", "CrbResult", "FimMatrix", "Numerics",
    "RankDeficiencyWarning", "crb_from_fim", "crb_point", "fim_osef", "fim_sef", "fim_vef",
    "osef", "sef", "sef_gradient", "vef", "vef_gradient", "QuadratureError", "QuadratureSpec",
    "RectDomain", "integrate_2d", "riemann_grid", "SimoLayout", "build_layout", "crb_simo",
    "crb_simo_large_zt", "lemma1_check",
]
