//! Local structures at a prime: the Bruhat–Tits tree, the truncated local
//! maximal order and the bimodule classifier.

pub mod bimodule;
pub mod order;
pub mod tree;
pub mod zpk;

pub use bimodule::{
    cm_reduction_bimodule, regular, tensor_over_unramified, uniformizer_ideal, BimoduleReport, LocalBimodule,
    RamifiedChoice,
};
pub use order::{LocalQuatOrder, Witt};
pub use tree::{ball, ball_size, bt_distance, bt_neighbors, check_patch, dual_graph_patch, BTVertex, DualGraphPatch};

pub const DEFAULT_PRECISION: u32 = 4;
pub const PRECISION_ENV: &str = "CMLAB_PRECISION";

/// The default precision, overridden by `CMLAB_PRECISION` when it holds an integer ≥ 1.
pub fn precision() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&k: &u32| k >= 1)
        .unwrap_or(DEFAULT_PRECISION)
}

/// Type of the CM-reduction bimodule at precision `k`, checked again at `k + 2`.
pub fn classify_cm(p: u64, k: u32, choice: RamifiedChoice) -> crate::Result<BimoduleReport> {
    let report = cm_reduction_bimodule(&LocalQuatOrder::new(p, k)?, choice)?.report();
    let guard = cm_reduction_bimodule(&LocalQuatOrder::new(p, k + 2)?, choice)?.report();
    if report != guard {
        return Err(crate::Error::InvalidInput(format!("classification unstable between precision {k} and {}", k + 2)));
    }
    Ok(report)
}
