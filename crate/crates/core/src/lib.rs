//! Hausdorff dimension upper bounds for self-similar sets generated by weak
//! contractions.
//!
//! A weak contraction `f` satisfies `d(f(x), f(y)) <= alpha(t) d(x, y)`
//! whenever `d(x, y) < t`, with `0 <= alpha(t) < 1`. Replacing each
//! `alpha_j` by its right envelope `inf_{p > t} alpha_j(p)` and solving the
//! Moran equation `sum_j c_j^x = 1` at `c_j = inf alpha_j` gives an upper
//! bound `x0` on the Hausdorff dimension of the attractor.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod boxdim;
pub mod coeff;
pub mod cover;
pub mod format;
pub mod ifs;
pub mod moran;
pub mod report;
pub mod rng;
pub mod scene;
