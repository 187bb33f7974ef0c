//! Seeded random substreams.
//!
//! Every random draw in the crate comes from one master seed. A substream is
//! identified by a `(domain, index)` pair: the domain selects a ChaCha8 key
//! derived from the master seed with SplitMix64, and the index selects one of
//! the 2^64 independent ChaCha streams under that key. Substreams do not
//! overlap, so work split across threads by index reproduces the sequential
//! result exactly.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Substream domains. The numeric values are part of the reproducibility
/// contract and must not change between releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Synthetic generation; index = case.
    Generate = 1,
    /// Bootstrap resampling; index = replicate.
    Bootstrap = 2,
    /// Limited-set sampling; index 0 = normals, 1 + f = finding f.
    LimitedSet = 3,
    /// Ensemble group shuffling; index 0.
    GroupShuffle = 4,
    /// Per-cell bootstrap seeds in the coverage audit; index = model * n_findings + finding.
    CoverageCell = 5,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed, e.g. one bootstrap seed per audit cell.
pub fn derive_seed(master: u64, domain: Domain, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain as u64)) ^ index)
}

pub fn substream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(domain as u64)));
    rng.set_stream(index);
    rng
}

/// Uniform on the open interval (0, 1) with 53 bits of resolution.
#[inline]
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal pairs via Box-Muller. Always consumes exactly two `u64`
/// draws per pair so substream positions stay aligned.
#[derive(Debug, Default)]
pub struct NormalPairs {
    spare: Option<f64>,
}

impl NormalPairs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample(&mut self, rng: &mut impl RngCore) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = open_unit(rng);
        let u2 = open_unit(rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Uniform index in `0..n`.
#[inline]
pub fn index(rng: &mut impl Rng, n: usize) -> usize {
    rng.random_range(0..n)
}

/// Samples `k` distinct elements from `pool` (partial Fisher-Yates), in draw order.
pub fn sample_without_replacement<T: Copy>(rng: &mut impl Rng, pool: &[T], k: usize) -> Vec<T> {
    let mut items = pool.to_vec();
    let k = k.min(items.len());
    for i in 0..k {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let draw = |seed, domain, index| {
            let mut r = substream(seed, domain, index);
            (0..4).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        let a = draw(7, Domain::Generate, 3);
        let b = draw(7, Domain::Generate, 3);
        assert_eq!(a, b);
        let mut c = substream(7, Domain::Generate, 4);
        let mut d = substream(7, Domain::Bootstrap, 3);
        let mut e = substream(8, Domain::Generate, 3);
        assert_ne!(a[0], c.next_u64());
        assert_ne!(a[0], d.next_u64());
        assert_ne!(a[0], e.next_u64());
    }

    #[test]
    fn open_unit_never_hits_bounds() {
        struct Fixed(u64);
        impl RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        let lo = open_unit(&mut Fixed(0));
        let hi = open_unit(&mut Fixed(u64::MAX));
        assert!(lo > 0.0 && hi < 1.0);
    }

    #[test]
    fn normal_moments() {
        let mut rng = substream(1, Domain::Generate, 0);
        let mut normals = NormalPairs::new();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| normals.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // 5 standard errors
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn without_replacement_is_distinct() {
        let mut rng = substream(3, Domain::LimitedSet, 0);
        let pool: Vec<usize> = (0..50).collect();
        let mut s = sample_without_replacement(&mut rng, &pool, 20);
        assert_eq!(s.len(), 20);
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 20);
        assert_eq!(sample_without_replacement(&mut rng, &pool, 80).len(), 50);
    }
}
