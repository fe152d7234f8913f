"""Central numeric tolerances and enumeration caps.

All modules read their defaults from one frozen record so that every
validation error can state which bound was violated, and so CLI overrides
land in a single place.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # operator validation
    hermitian: float = 1e-12          # max |m - m†| entry
    psd_floor: float = 1e-10          # eigenvalues below -psd_floor are errors
    trace_one: float = 1e-10          # |tr(m) - 1| bound for density operators
    prob_sum: float = 1e-12           # |sum(p) - 1| bound for distributions
    # typicality: float boundary guard when testing |freq - p| <= window
    typicality_boundary: float = 1e-12
    # separation decision bands (squared-norm distances are compared after sqrt)
    separable_above: float = 1e-6     # distance > this => certificate
    not_separable_below: float = 1e-7 # distance <= this => NotSeparable
    # solvers
    solver_objective: float = 1e-9    # convergence: objective change over a window
    quadratic_solver: float = 1e-10   # accelerated projected gradient tolerance
    cr_constraint_slack: float = 1e-9 # feasibility slack in the auxiliary-channel search
    case_tie_band: float = 1e-6       # small/large correlation tie band


@dataclass(frozen=True)
class Caps:
    product_dim: int = 4096           # max d**n for explicit product states
    enumeration: int = 1 << 20        # max sequences enumerated per typical set
    jammer_states: int = 1 << 16      # max |S|**n per codeword in error maxima
    projector_matrix_dim: int = 1024  # max dimension for materialized projectors


DEFAULT_TOL = Tolerances()
DEFAULT_CAPS = Caps()


def with_overrides(base, **kwargs):
    """Return a copy of a Tolerances/Caps record with fields replaced."""
    return replace(base, **kwargs)
