//! Seeded uniform sampling of admissible points.
//!
//! Point `i` draws from its own ChaCha stream `(seed, i)`, so the accepted
//! point for an index does not depend on which other indices were evaluated
//! or on how many threads evaluated them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{frame_at, Domain, GeometryFrame, ManifoldSpec, PointError};
use crate::tensor::Vec4;

/// Candidate draws per requested point before giving up.
pub const RETRY_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("no admissible point found for sample {index} after {attempts} attempts (last rejection: {last})")]
pub struct SamplingError {
    pub index: usize,
    pub attempts: usize,
    pub last: PointError,
}

pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn uniform_point(rng: &mut impl Rng, domain: &Domain) -> Vec4 {
    let mut v = Vec4::zero();
    for (x, &(lo, hi)) in v.0.iter_mut().zip(domain.0.iter()) {
        *x = if lo == hi { lo } else { rng.random_range(lo..=hi) };
    }
    v
}

/// An accepted sample and the number of candidates rejected before it.
#[derive(Debug, Clone)]
pub struct Accepted<T> {
    pub value: T,
    pub rejected: usize,
}

/// Draws candidates for sample `index` until `accept` succeeds.
pub fn sample_with<T>(
    domain: &Domain,
    seed: u64,
    index: usize,
    accept: impl Fn(&Vec4) -> Result<T, PointError>,
) -> Result<Accepted<T>, SamplingError> {
    let mut rng = point_rng(seed, index);
    let mut last = PointError::OutsideDomain;
    for attempt in 0..RETRY_CAP {
        let p = uniform_point(&mut rng, domain);
        match accept(&p) {
            Ok(value) => return Ok(Accepted { value, rejected: attempt }),
            Err(e) => last = e,
        }
    }
    Err(SamplingError { index, attempts: RETRY_CAP, last })
}

/// `n` accepted geometry frames, in index order.
pub fn sample_frames(spec: &ManifoldSpec, n: usize, seed: u64) -> Result<Vec<GeometryFrame>, SamplingError> {
    (0..n).map(|i| sample_with(spec.domain(), seed, i, |p| frame_at(spec, p)).map(|a| a.value)).collect()
}
