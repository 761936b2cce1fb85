//! Permutations and finitely generated permutation groups: cycle-notation
//! I/O, stabilizer chains for exact order and membership, orbits, minimal
//! block systems, standard group constructions, equality up to relabeling,
//! and the recursive width invariant over the subgroup lattice.

mod group;
mod perm;
mod width;

pub use group::{
    alternating, equal_up_to_relabeling, groups_equal, intersect_alternating, symmetric,
    wreath_imprimitive, PermGroup,
};
pub use perm::Permutation;
pub use width::{galois_width, galois_width_capped, gw_monotonicity_check, ORDER_CAP};
