"""Exact decalage stages over a PID, their filtration identities, and the
two-lattice flag comparison, verified on finite models."""

from .rings import IntegerRing, PolynomialRing, PrimeField, RationalField, make_ring
from .rmatrix import Matrix, snf, kernel_basis, image_basis, solve_exact
from .complexes import (
    ChainMap,
    FGModule,
    FPComplex,
    FPModule,
    FreeComplex,
    cohomology,
    cone,
    hodge_filtration,
    induced_map,
    truncate_leq,
)
from .eta import eta, eta_m, eta_filtration, graded_piece, mod_xi_subquotient
from .bockstein import bockstein_complex, connecting_factorization, split_mod_xi
from .sites import PosetSite, SheafComplex, global_sections_complex
from .spectral import (
    FilteredComplex,
    SSPage,
    compare_degeneration,
    degeneration_check_HT,
    degeneration_check_HdR,
    hdr_spectral_sequence,
    ht_spectral_sequence,
    ss_pages,
)
from .theorem import (
    Flag,
    Lattice,
    bb_filtration,
    check_torsionfree_eta_m,
    lattice_pair_from_complex,
    relative_position,
    verify_main_theorem,
)
from .instances import generate_instance

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
