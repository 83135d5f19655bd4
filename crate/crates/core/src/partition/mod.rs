//! Layer partitions with the block cyclic shift property.
//!
//! A scheme `(S, T0)` splits the `MZ` rows into `L` layers
//! `T_l = pi^{lS}(T0)`. Every feasible `T0` is a union of one `LS`-class
//! from each of the `MS` `S`-classes, so a scheme is identified by its
//! `M x S` array of selectors.

mod eval;
mod feasible;
mod scheme;
mod search;

pub use eval::{
    distance_upper_bound, evaluate, evaluate_omega, generalized_layer_distance, layer_distance,
    layer_distance_shifted, min_layers_for_distance, omega_full, omega_lower_bound, shifted_sum,
    SchemeEvaluation, ShiftedSum,
};
pub use feasible::{feasible_schemes, FeasibleSchemes};
pub use scheme::{PartitionScheme, SchemeFile};
pub use search::{
    find_min_layers, solve_enumerative, solve_greedy, solve_with_distance, Budget,
    DistanceOutcome, Method, MinLayersOutcome, SearchOutcome,
};
