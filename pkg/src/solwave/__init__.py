"""Steady solitary water waves and audits of their integral identities."""

__version__ = "0.1.0"

from .audit import (IdentityReport, TermReport, Verdict, corollary_verdict,  # noqa: E402
                    identity_residual, proof_terms, scale_solution)
from .config import SolverConfig  # noqa: E402
from .conformal import SurfaceState  # noqa: E402
from .continuation import Branch, continue_branch  # noqa: E402
from .energy import EnergyReport, energy_report, kinetic_crosscheck  # noqa: E402
from .oracle import (GreenAuditReport, ManufacturedField, bulk_dirichlet_energy,  # noqa: E402
                     eval_field, green_identity_audit)
from .params import WaveParameters, linear_speed, minimum_speed  # noqa: E402
from .residual import ResidualReport, ResidualSampling, physical_residual  # noqa: E402
from .solver import WaveSolution, initial_guess, refine, solve_steady  # noqa: E402
from .spectral import (MultiplierSymbol, PeriodicGrid, apply_multiplier,  # noqa: E402
                       make_grid, quad_periodic)
