//! Reproducible random substreams.
//!
//! Every draw is addressed by `(master_seed, stream_index, position)`: the
//! generator is Philox4x32-10 with the 64-bit master seed as key and the
//! 128-bit counter `(position, stream_index)`. Any replicate can be
//! regenerated on its own, in any order and on any thread.

use serde::{Deserialize, Serialize};

use crate::special::fast_normal_quantile;

/// Identifies one independent, reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStreamSpec {
    pub const fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Derives the `k`-th child stream. Children of distinct parents or with
    /// distinct `k` land on unrelated stream indices.
    pub fn child(&self, k: u64) -> Self {
        let mixed = splitmix64(self.stream_index ^ splitmix64(k.wrapping_mul(0xD6E8_FEB8_6659_FD93)));
        Self {
            master_seed: self.master_seed,
            stream_index: mixed,
        }
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng {
            key: [self.master_seed as u32, (self.master_seed >> 32) as u32],
            stream: self.stream_index,
            block: 0,
            spare: None,
        }
    }
}

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// The Philox4x32 bijection with 10 rounds.
#[inline(always)]
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// Generator for one substream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    key: [u32; 2],
    stream: u64,
    block: u64,
    spare: Option<u64>,
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[inline(always)]
fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * TWO_POW_M53
}

impl StreamRng {
    #[inline(always)]
    fn next_block(&mut self) -> (u64, u64) {
        let b = self.block;
        self.block += 1;
        let out = philox4x32_10(
            [b as u32, (b >> 32) as u32, self.stream as u32, (self.stream >> 32) as u32],
            self.key,
        );
        (
            (out[0] as u64) << 32 | out[1] as u64,
            (out[2] as u64) << 32 | out[3] as u64,
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = self.next_block();
        self.spare = Some(b);
        a
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        to_open_unit(self.next_u64())
    }

    /// Standard normal draw by inversion; consumes exactly one uniform.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        fast_normal_quantile(self.uniform_open())
    }

    /// Fills `out` with uniforms on (0, 1); same values as repeated
    /// [`uniform_open`](Self::uniform_open) calls.
    pub fn fill_uniform(&mut self, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let skip = match self.spare.take() {
            Some(v) => {
                out[0] = to_open_unit(v);
                1
            }
            None => 0,
        };
        let rest = &mut out[skip..];
        let mut pairs = rest.chunks_exact_mut(2);
        for pair in &mut pairs {
            let (a, b) = self.next_block();
            pair[0] = to_open_unit(a);
            pair[1] = to_open_unit(b);
        }
        if let [last] = pairs.into_remainder() {
            *last = self.uniform_open();
        }
    }

    /// Fills `out` with standard normals; same values as repeated
    /// [`standard_normal`](Self::standard_normal) calls.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        self.fill_uniform(out);
        for v in out.iter_mut() {
            *v = fast_normal_quantile(*v);
        }
    }

    /// Number of 64-bit words consumed so far.
    pub fn position(&self) -> u64 {
        2 * self.block - self.spare.is_some() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answers() {
        // Random123 known-answer vectors for philox4x32_10.
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn identical_specs_identical_draws() {
        let spec = RngStreamSpec::new(42, 7);
        let mut r = spec.rng();
        let a: Vec<f64> = (0..101).map(|_| r.standard_normal()).collect();
        let mut b = vec![0.0; 101];
        spec.rng().fill_normal(&mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn batch_fill_matches_scalar_after_odd_offset() {
        let spec = RngStreamSpec::new(3, 9);
        let mut r = spec.rng();
        let scalar: Vec<f64> = (0..20).map(|_| r.uniform_open()).collect();
        let mut r = spec.rng();
        let first = r.uniform_open();
        let mut rest = vec![0.0; 19];
        r.fill_uniform(&mut rest);
        assert_eq!(first, scalar[0]);
        assert_eq!(&rest[..], &scalar[1..]);
    }

    #[test]
    fn streams_and_seeds_differ() {
        let mut a = RngStreamSpec::new(42, 0).rng();
        let mut b = RngStreamSpec::new(42, 1).rng();
        let mut c = RngStreamSpec::new(43, 0).rng();
        let (x, y, z) = (a.uniform_open(), b.uniform_open(), c.uniform_open());
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn children_are_distinct() {
        let base = RngStreamSpec::new(1, 0);
        let mut seen = std::collections::HashSet::new();
        for k in 0..10_000 {
            assert!(seen.insert(base.child(k).stream_index));
        }
        assert_ne!(base.child(0).child(1), base.child(1).child(0));
    }

    #[test]
    fn uniform_is_open() {
        let mut r = RngStreamSpec::new(0, 0).rng();
        for _ in 0..100_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn one_word_per_normal() {
        let mut r = RngStreamSpec::new(5, 5).rng();
        for _ in 0..11 {
            r.standard_normal();
        }
        assert_eq!(r.position(), 11);
    }

    #[test]
    fn normal_moments() {
        let mut r = RngStreamSpec::new(42, 3).rng();
        let n = 200_000;
        let mut xs = vec![0.0; n];
        r.fill_normal(&mut xs);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let kurt = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
        assert!((kurt - 3.0).abs() < 3.0 * (96.0 / n as f64).sqrt());
    }

    #[test]
    fn uniform_equidistribution() {
        // Chi-square over 64 bins; 0.1% critical value for 63 dof is ~103.4.
        let mut r = RngStreamSpec::new(11, 0).rng();
        let n = 640_000;
        let mut bins = [0u32; 64];
        for _ in 0..n {
            bins[(r.uniform_open() * 64.0) as usize] += 1;
        }
        let expect = n as f64 / 64.0;
        let chi2: f64 = bins.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        assert!(chi2 < 103.4, "chi2 = {chi2}");
    }
}
