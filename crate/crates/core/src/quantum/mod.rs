//! Truncated Fock-space algebra: operators, states, reduced states,
//! fidelities and Wigner functions.

pub mod operator;
pub mod space;
pub mod state;
pub mod wigner;

pub use operator::{annihilation, creation, embed, number, rotation, Operator, C64};
pub use space::HilbertSpace;
pub use state::{
    cat_state, cat_state_family, cat_tail_mass, coherent_state, coherent_tail_mass, fidelity_pure,
    fock_state, partial_trace, CatFamily, DensityDiagnostics, DensityMatrix, Ket,
};
pub use wigner::{covering_half_width, linspace, wigner};
