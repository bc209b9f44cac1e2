//! Profile normalization, contingency distances, average-linkage
//! agglomeration and dendrogram handling.

mod distance;
mod linkage;
mod newick;
mod profile;

pub use distance::{
    chi_square_distance, contingency_distance, distance_matrix, phi_square_distance,
    DistanceMatrix, Measure,
};
pub use linkage::{cut, upgma, ClusterAssignment, Dendrogram, Merge};
pub use newick::{export_newick, format_sig9, parse_newick, NewickNode};
pub use profile::{build_profiles, ProfileMatrix};
