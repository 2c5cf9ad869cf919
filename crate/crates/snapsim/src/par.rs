//! Data-parallel map helper with a sequential fallback.
//!
//! Grid scans (Wigner evaluation, interference sweeps, per-photon-number
//! pulse blocks) are embarrassingly parallel over their index. With the
//! `parallel` feature (default) they run on the rayon pool; without it the
//! same code runs sequentially. Results are collected by index and any
//! reductions are performed sequentially afterwards, so both modes produce
//! bit-identical output.

/// Map `f` over `0..len`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

/// Map `f` over `0..len`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Fallible variant of [`map_indexed`]: collects `Ok` results in index
/// order, or returns the first error (by index, since collection is ordered).
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, E, F>(len: usize, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> std::result::Result<T, E> + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

/// Fallible variant of [`map_indexed`].
#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, E, F>(len: usize, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> std::result::Result<T, E> + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Human-readable execution mode, used in bench labels and manifests.
pub fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
