"""Exact classical W-algebras and generalized Drinfeld-Sokolov hierarchies.

All computations are over exact rationals: Lie algebra data, lambda-bracket
tables on Poisson vertex algebras, finite and affine W-algebra brackets via
both the explicit chain formulas and Hamiltonian reduction, and the
bi-Hamiltonian hierarchies they generate (KdV for sl2).
"""

from .rationals import Rat, rat
from .diff_poly import DiffPoly, LocalFunctional, is_total_derivative
from .lie_core import (LieAlgebraData, Sl2Triple, SlodowyFrame, Polarization,
                       GradedDecomposition, build_sl_n, load_algebra,
                       triple_from_partition, ad_grading, centralizer,
                       build_slodowy_frame, sharp, lagrangian_subspace)
from .pva_engine import (LambdaPoly, PVAStructure, affine_bracket_table,
                         verify_axioms, functional_bracket, hamiltonian_flow,
                         skew_transform)
from .w_algebra import (FiniteWBracketTable, AffineWBracketTable,
                        FiniteReduction, AffineReduction,
                        finite_bracket, finite_bracket_table,
                        affine_generator_bracket, monster_table,
                        MonsterConventions, DEFAULT_CONVENTIONS)
from .ds_hierarchy import (check_cyclic_element, hk_decompose, dressing_solve,
                           conserved_densities, lenard_magri_verify,
                           flow_equations, DressingResult, HierarchyFlow)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
