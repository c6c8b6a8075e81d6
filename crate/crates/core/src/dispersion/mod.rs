//! Dispersion statistics: near-pair counts `N_β`, profiles over a `β` grid, the
//! graph-shrinking packing construction, and doubling-dimension estimation.

mod doubling;
mod packing;
mod pairs;
mod profile;

pub use doubling::{estimate_doubling_dim, exact_doubling_dim, DoublingEstimate, DoublingMethod};
pub use packing::{pack_graph, read_edges, verify_packing, write_edges, Edge, PackedGraph, PackingViolation};
pub use pairs::{count_near_pairs, count_near_pairs_bruteforce, count_near_pairs_grid, near_graph};
pub use profile::{c_epsilon, c_epsilon_from_counts, profile, CEpsilon, DispersionProfile};
