//! State-analysis tools: Wigner quasiprobability maps, density-matrix
//! reconstruction from Wigner samples, and fidelity reports against
//! coherent references.

pub mod report;
pub mod tomography;
pub mod wigner;

pub use report::{coherent_fidelity_report, CoherentFidelityReport};
pub use tomography::{
    pure_state_from_populations_and_phases, reconstruct_density_matrix, WignerSample,
};
pub use wigner::{wigner_map, wigner_map_mixed, wigner_point, GridSpec, WignerGrid};
