//! Reproducible Monte Carlo estimation of joint distributions, correlators,
//! and CHSH values. The sample index space is cut into fixed-size chunks,
//! each chunk gets its own counter-derived ChaCha stream, and chunk counts
//! are merged by integer summation — so the result is bit-identical across
//! runs and worker counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::UnitVector3;
use crate::pair::outcome_index;
use crate::singlet::{sample_outcome, SingletModelKind};

/// Samples per derivation chunk. Fixed: changing it changes the stream
/// layout and therefore the estimates.
pub const CHUNK_SIZE: u64 = 1 << 16;

/// Addresses one deterministic sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 32-byte ChaCha seed for one (stream, chunk) cell, mixed so that distinct
/// cells get unrelated states.
fn chunk_seed(spec: RngSpec, chunk_index: u64) -> [u8; 32] {
    let mut state = spec.master_seed;
    let mut words = [0u64; 4];
    words[0] = splitmix64(&mut state);
    state ^= spec.stream_index.wrapping_mul(0xA24B_AED4_963E_E407);
    words[1] = splitmix64(&mut state);
    state ^= chunk_index.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    words[2] = splitmix64(&mut state);
    words[3] = splitmix64(&mut state);
    let mut seed = [0u8; 32];
    for (i, w) in words.iter().enumerate() {
        seed[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    seed
}

/// A scalar estimate with its plug-in standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

/// Anything that can draw correlated ±1 outcome pairs.
pub trait PairSampler: Sync {
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> Result<(i8, i8)>;
}

/// A singlet model bound to one setting pair.
pub struct SingletPairSampler {
    kind: SingletModelKind,
    x: UnitVector3,
    y: UnitVector3,
}

impl SingletPairSampler {
    pub fn new(kind: SingletModelKind, x: UnitVector3, y: UnitVector3) -> Self {
        Self { kind, x, y }
    }
}

impl PairSampler for SingletPairSampler {
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> Result<(i8, i8)> {
        sample_outcome(self.kind, &self.x, &self.y, rng)
    }
}

/// Empirical joint outcome counts for one setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointEstimates {
    /// `counts[outcome_index(a)][outcome_index(b)]`; entries sum to `n`.
    pub counts: [[u64; 2]; 2],
    pub n: u64,
}

impl JointEstimates {
    /// Frequency estimate of p(a,b) with the binomial standard error.
    pub fn estimate(&self, a: i8, b: i8) -> Estimate {
        let n = self.n as f64;
        let p = self.counts[outcome_index(a)][outcome_index(b)] as f64 / n;
        Estimate { value: p, std_error: (p * (1.0 - p) / n).sqrt(), n_samples: self.n }
    }

    /// Estimate of E = Σ ab·p(a,b), with SE = sqrt((1 − Ê²)/n) — the exact
    /// standard error of a mean of ±1 variables.
    pub fn correlator_estimate(&self) -> Estimate {
        let n = self.n as f64;
        let e = (self.counts[0][0] as f64 - self.counts[0][1] as f64 - self.counts[1][0] as f64
            + self.counts[1][1] as f64)
            / n;
        let var = (1.0 - e * e).max(0.0);
        Estimate { value: e, std_error: (var / n).sqrt(), n_samples: self.n }
    }
}

/// Draws `n` pairs from the sampler on the given stream and tallies them.
/// Chunked in units of [`CHUNK_SIZE`]; the tally is identical for any
/// worker count.
pub fn estimate_joint_with<S: PairSampler + ?Sized>(
    sampler: &S,
    n: u64,
    spec: RngSpec,
) -> Result<JointEstimates> {
    assert!(n >= 1, "need at least one sample");
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let chunk_counts: Vec<[[u64; 2]; 2]> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::from_seed(chunk_seed(spec, chunk));
            let lo = chunk * CHUNK_SIZE;
            let hi = (lo + CHUNK_SIZE).min(n);
            let mut counts = [[0u64; 2]; 2];
            for _ in lo..hi {
                let (a, b) = sampler.sample_pair(&mut rng)?;
                counts[outcome_index(a)][outcome_index(b)] += 1;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let mut counts = [[0u64; 2]; 2];
    for c in chunk_counts {
        for i in 0..2 {
            for j in 0..2 {
                counts[i][j] += c[i][j];
            }
        }
    }
    Ok(JointEstimates { counts, n })
}

/// Joint estimation for a singlet model at one setting pair.
pub fn estimate_joint(
    kind: SingletModelKind,
    x: &UnitVector3,
    y: &UnitVector3,
    n: u64,
    spec: RngSpec,
) -> Result<JointEstimates> {
    estimate_joint_with(&SingletPairSampler::new(kind, *x, *y), n, spec)
}

/// The four measurement directions of a CHSH experiment.
#[derive(Debug, Clone, Copy)]
pub struct ChshDirections {
    pub x: UnitVector3,
    pub x_prime: UnitVector3,
    pub y: UnitVector3,
    pub y_prime: UnitVector3,
}

impl ChshDirections {
    /// Coplanar directions at the given xz-plane angles (x, x′, y, y′).
    pub fn coplanar(angles: [f64; 4]) -> Self {
        let [x, x_prime, y, y_prime] = angles.map(UnitVector3::in_xz_plane);
        Self { x, x_prime, y, y_prime }
    }

    fn pairs(&self) -> [(UnitVector3, UnitVector3); 4] {
        [
            (self.x, self.y),
            (self.x, self.y_prime),
            (self.x_prime, self.y),
            (self.x_prime, self.y_prime),
        ]
    }
}

/// Estimates the canonical CHSH combination, spending `n_per_pair` samples
/// on each of the four correlators. Pair k draws from substream
/// `4·stream_index + k`, so distinct base streams stay disjoint.
pub fn estimate_chsh_with<S: PairSampler + ?Sized>(
    samplers: [&S; 4],
    n_per_pair: u64,
    spec: RngSpec,
) -> Result<Estimate> {
    let mut value = 0.0;
    let mut var = 0.0;
    for (k, sampler) in samplers.into_iter().enumerate() {
        let sub = RngSpec::new(spec.master_seed, 4 * spec.stream_index + k as u64);
        let est = estimate_joint_with(sampler, n_per_pair, sub)?.correlator_estimate();
        let sign = if k == 3 { -1.0 } else { 1.0 };
        value += sign * est.value;
        var += est.std_error * est.std_error;
    }
    Ok(Estimate { value, std_error: var.sqrt(), n_samples: 4 * n_per_pair })
}

/// CHSH estimation for a singlet model.
pub fn estimate_chsh(
    kind: SingletModelKind,
    dirs: &ChshDirections,
    n_per_pair: u64,
    spec: RngSpec,
) -> Result<Estimate> {
    let samplers: Vec<SingletPairSampler> =
        dirs.pairs().into_iter().map(|(x, y)| SingletPairSampler::new(kind, x, y)).collect();
    estimate_chsh_with([&samplers[0], &samplers[1], &samplers[2], &samplers[3]], n_per_pair, spec)
}
