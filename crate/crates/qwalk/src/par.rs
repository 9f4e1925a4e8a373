//! Single seam for data parallelism. Hot loops (time grids, corpus rows,
//! edge-subset enumeration) call `map_vec`; with the `parallel` feature the
//! work is distributed via rayon, otherwise it runs sequentially. Output order
//! matches input order in both modes, so results are bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
