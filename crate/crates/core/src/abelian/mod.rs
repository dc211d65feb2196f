//! Exact integer-lattice machinery: linear systems over ℤᵏ, Smith normal
//! form, Hilbert bases, semilinear sets, and the compilation of twisted
//! abelian equation systems into EDT0L solution systems.

pub mod builder;
pub mod hilbert;
pub mod linalg;
pub mod semilinear;
pub mod system;

pub use builder::{
    abelian_solution_edt0l, abelian_solution_edt0l_regular_route, emit_semilinear,
    fold_trailing_hashes, SegmentLayout, SignRoute, SolvedAbelian,
};
pub use hilbert::{hilbert_basis, in_nonneg_span, minimal_solutions};
pub use linalg::{smith_normal_form, solve_linear_system, IntMatrix, IntVector, LatticeCoset};
pub use semilinear::{
    coset_to_semilinear, nfa_to_semilinear, semilinear_to_constraints, ConstraintBlock,
    LinearSet, SemilinearSet, Sign,
};
pub use system::{
    abelian_equation_length, twisted_to_linear, va_equation_length, AbelianEquation,
    AbelianEquationSystem,
};
