//! Cell-loop execution: rayon data-parallel kernels with a sequential twin.
//!
//! Each kernel writes every output slot from a pure function of the inputs,
//! so the parallel and sequential paths produce bit-identical results. The
//! `*_seq` variants are always compiled; the dispatching wrappers hand large
//! arrays to rayon when the `parallel` feature is on and fall back to the
//! sequential body otherwise. `benches/kernels.rs` compares the two.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length the dispatchers stay sequential even with the
/// `parallel` feature enabled; pool overhead dominates for short arrays.
pub const PAR_MIN_LEN: usize = 1 << 13;

/// `out[i] = f(i)` for every cell, sequentially.
pub fn fill_indexed_seq<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64,
{
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// `out[i] = f(i)` for every cell, on the rayon pool.
#[cfg(feature = "parallel")]
pub fn fill_indexed_par<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    out.par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| *slot = f(i));
}

/// `out[i] = f(i)`, parallel for large arrays when the feature is on.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    if out.len() >= PAR_MIN_LEN {
        fill_indexed_par(out, f);
        return;
    }
    fill_indexed_seq(out, f);
}

/// In-place pointwise update of a pair of arrays from a third:
/// `(a[i], b[i]) = f(a[i], b[i], c[i])`.
pub fn update_pair_seq<F>(a: &mut [f64], b: &mut [f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> (f64, f64),
{
    for ((x, y), &z) in a.iter_mut().zip(b.iter_mut()).zip(c.iter()) {
        let (nx, ny) = f(*x, *y, z);
        *x = nx;
        *y = ny;
    }
}

#[cfg(feature = "parallel")]
pub fn update_pair_par<F>(a: &mut [f64], b: &mut [f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> (f64, f64) + Sync,
{
    a.par_iter_mut()
        .zip(b.par_iter_mut())
        .zip(c.par_iter())
        .for_each(|((x, y), &z)| {
            let (nx, ny) = f(*x, *y, z);
            *x = nx;
            *y = ny;
        });
}

pub fn update_pair<F>(a: &mut [f64], b: &mut [f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> (f64, f64) + Sync,
{
    #[cfg(feature = "parallel")]
    if a.len() >= PAR_MIN_LEN {
        update_pair_par(a, b, c, f);
        return;
    }
    update_pair_seq(a, b, c, f);
}

/// In-place pointwise update of a pair of arrays from each other:
/// `(a[i], b[i]) = f(a[i], b[i])`.
pub fn update_pair2_seq<F>(a: &mut [f64], b: &mut [f64], f: F)
where
    F: Fn(f64, f64) -> (f64, f64),
{
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (nx, ny) = f(*x, *y);
        *x = nx;
        *y = ny;
    }
}

#[cfg(feature = "parallel")]
pub fn update_pair2_par<F>(a: &mut [f64], b: &mut [f64], f: F)
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    a.par_iter_mut().zip(b.par_iter_mut()).for_each(|(x, y)| {
        let (nx, ny) = f(*x, *y);
        *x = nx;
        *y = ny;
    });
}

pub fn update_pair2<F>(a: &mut [f64], b: &mut [f64], f: F)
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    #[cfg(feature = "parallel")]
    if a.len() >= PAR_MIN_LEN {
        update_pair2_par(a, b, f);
        return;
    }
    update_pair2_seq(a, b, f);
}

/// In-place pointwise update of one array from two read-only companions:
/// `a[i] = f(a[i], b[i], c[i])`.
pub fn update_with2_seq<F>(a: &mut [f64], b: &[f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> f64,
{
    for ((x, &y), &z) in a.iter_mut().zip(b.iter()).zip(c.iter()) {
        *x = f(*x, y, z);
    }
}

#[cfg(feature = "parallel")]
pub fn update_with2_par<F>(a: &mut [f64], b: &[f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    a.par_iter_mut()
        .zip(b.par_iter())
        .zip(c.par_iter())
        .for_each(|((x, &y), &z)| *x = f(*x, y, z));
}

pub fn update_with2<F>(a: &mut [f64], b: &[f64], c: &[f64], f: F)
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    if a.len() >= PAR_MIN_LEN {
        update_with2_par(a, b, c, f);
        return;
    }
    update_with2_seq(a, b, c, f);
}
