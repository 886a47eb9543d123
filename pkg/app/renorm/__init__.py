from .bond import (
    BondOutcome,
    BondReport,
    LocalityReport,
    bond_explore,
    locality_mask,
    replay_outcome_locality,
    select_initial_set,
    verify_bond,
)
from .driver import LatticeTrace, coupling_check, lattice_run
from .lattice import Bond, bond_order, bond_rectangle, lattice_box, middle_square, target_square
from .oriented import OrientedEstimate, oriented_bond_percolation
from .params import (
    RenormParams,
    cap_from_horizon,
    derive_params,
    minimal_n,
    minimal_ratio,
    n_bound,
    separation_radius,
)

__all__ = [
    "BondOutcome",
    "BondReport",
    "LocalityReport",
    "bond_explore",
    "locality_mask",
    "replay_outcome_locality",
    "select_initial_set",
    "verify_bond",
    "LatticeTrace",
    "coupling_check",
    "lattice_run",
    "Bond",
    "bond_order",
    "bond_rectangle",
    "lattice_box",
    "middle_square",
    "target_square",
    "OrientedEstimate",
    "oriented_bond_percolation",
    "RenormParams",
    "cap_from_horizon",
    "derive_params",
    "minimal_n",
    "minimal_ratio",
    "n_bound",
    "separation_radius",
]
