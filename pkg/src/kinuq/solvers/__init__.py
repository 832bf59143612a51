"""Deterministic forward models: BGK, Boltzmann, Euler, and boundaries."""

from .boundaries import BoundarySpec, EulerGhostFiller, KineticGhostFiller, diffusive_wall_bc
from .bgk import (BgkConfig, NuLaw, bgk_homogeneous_exact, bgk_step,
                  conservative_maxwellian, max_dt, parse_nu_law)
from .boltzmann import (BoltzmannConfig, CollisionTables, boltzmann_collision,
                        boltzmann_rk4_step, boltzmann_step_rk2, build_tables,
                        from_modes, homogeneous_solve, to_modes)
from .euler import (GAMMA, check_euler_state, euler_equilibrium, euler_from_moments,
                    euler_max_dt, euler_primitives, euler_step, moments_from_euler)

__all__ = [
    "BoundarySpec", "EulerGhostFiller", "KineticGhostFiller", "diffusive_wall_bc",
    "BgkConfig", "NuLaw", "bgk_homogeneous_exact", "bgk_step",
    "conservative_maxwellian", "max_dt", "parse_nu_law",
    "BoltzmannConfig", "CollisionTables", "boltzmann_collision",
    "boltzmann_rk4_step", "boltzmann_step_rk2", "build_tables", "from_modes",
    "homogeneous_solve", "to_modes",
    "GAMMA", "check_euler_state", "euler_equilibrium", "euler_from_moments",
    "euler_max_dt", "euler_primitives", "euler_step", "moments_from_euler",
]
