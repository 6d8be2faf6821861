//! From a lumped-element netlist to dressed modes and the effective
//! storage/leakage Hamiltonian.

pub mod dressed;
pub mod effective;
pub mod matrices;
pub mod netlist;
pub mod squid;

pub use dressed::{dressed_modes, DressedModes};
pub use effective::{effective_params, purcell_rate, resonance_detuning, EffectiveParams};
pub use matrices::{dynamical_matrix, kinetic_matrix, potential_matrix};
pub use netlist::{CircuitNetlist, NETLIST_KEYS};
pub use squid::{capacitive_weights, squid_reduce};
