//! The mid-circuit-measurement discrimination (MCMD) protocol and the
//! independent two-circuit protocol.
//!
//! MCMD measures a qutrit with two back-to-back binary measurements and an
//! interleaved `X01` flip. The binary POVM has elements `M0 = |0><0|` and
//! `M1 = 1 - |0><0|`, so `|2>` always reads as outcome 1. For a diagonal
//! state with populations `(p0, p1, p2)` the ideal two-bit outcome
//! probabilities, written as the string "beta alpha" (second measurement
//! first), are
//!
//! ```text
//! p00 = 0,   p01 = p1,   p10 = p0,   p11 = p2.
//! ```
//!
//! The noisy variant layers a phenomenological error model on top; see
//! [`MeasurementNoise`] for the event ordering.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::Rng;

const SUM_TOL: f64 = 1e-9;

fn check_prob(value: f64, what: &str) -> Result<f64> {
    if !value.is_finite() || value < -SUM_TOL || value > 1.0 + SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} = {value} is not a probability"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Probability distribution over the three qutrit basis states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob3 {
    p: [f64; 3],
}

impl Prob3 {
    /// Outcome labels in storage order.
    pub const LABELS: [&'static str; 3] = ["0", "1", "2"];

    pub fn new(p0: f64, p1: f64, p2: f64) -> Result<Self> {
        let p = [
            check_prob(p0, "p0")?,
            check_prob(p1, "p1")?,
            check_prob(p2, "p2")?,
        ];
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Prob3 { p })
    }

    pub fn from_array(p: [f64; 3]) -> Result<Self> {
        Self::new(p[0], p[1], p[2])
    }

    /// The distribution concentrated on basis state `state`.
    pub fn basis(state: usize) -> Self {
        let mut p = [0.0; 3];
        p[state] = 1.0;
        Prob3 { p }
    }

    pub fn uniform() -> Self {
        Prob3 {
            p: [1.0 / 3.0; 3],
        }
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    pub fn p1(&self) -> f64 {
        self.p[1]
    }

    pub fn p2(&self) -> f64 {
        self.p[2]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.p
    }
}

/// Probability distribution over the four MCMD two-bit outcomes.
///
/// Storage order is `[p00, p01, p10, p11]` where the label "beta alpha"
/// carries the second measurement's bit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob4 {
    p: [f64; 4],
}

impl Prob4 {
    /// Outcome labels in storage order.
    pub const LABELS: [&'static str; 4] = ["00", "01", "10", "11"];

    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        let p = [
            check_prob(p00, "p00")?,
            check_prob(p01, "p01")?,
            check_prob(p10, "p10")?,
            check_prob(p11, "p11")?,
        ];
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Prob4 { p })
    }

    pub fn p00(&self) -> f64 {
        self.p[0]
    }

    pub fn p01(&self) -> f64 {
        self.p[1]
    }

    pub fn p10(&self) -> f64 {
        self.p[2]
    }

    pub fn p11(&self) -> f64 {
        self.p[3]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.p
    }
}

/// Binary outcome distribution `(P(0), P(1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob2 {
    p: [f64; 2],
}

impl Prob2 {
    pub const LABELS: [&'static str; 2] = ["0", "1"];

    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let p = [check_prob(p0, "p0")?, check_prob(p1, "p1")?];
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Prob2 { p })
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    pub fn p1(&self) -> f64 {
        self.p[1]
    }

    pub fn as_array(&self) -> [f64; 2] {
        self.p
    }
}

/// Phenomenological per-shot error model for the MCMD sequence.
///
/// Event ordering (one pass per shot):
///
/// 1. The first readout registers the binary value of the *incoming*
///    state through `binary_confusion`. `|2>` reads as outcome 1.
/// 2. One round of state transitions acts during/after that readout:
///    `t01` (heating 0->1), `t10` (decay 1->0), `t21` and `t20` (decay
///    from 2 into 1 or 0).
/// 3. The interleaved `X01` swaps `|0>` and `|1>`; it fails (acts as
///    identity) with probability `x01_error`.
/// 4. The second readout registers the post-transition, post-flip state
///    through `binary_confusion`. No transitions occur here.
///
/// Registering the first readout before the transition is what lets
/// heating on a `|0>` input produce the "00" outcome, the behaviour the
/// model exists to reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementNoise {
    /// Heating probability 0 -> 1 during the first measurement.
    pub t01: f64,
    /// Decay probability 1 -> 0 during the first measurement.
    pub t10: f64,
    /// Decay probability 2 -> 1 during the first measurement.
    pub t21: f64,
    /// Decay probability 2 -> 0 during the first measurement.
    pub t20: f64,
    /// Probability that the interleaved X01 acts as identity.
    pub x01_error: f64,
    /// Binary readout confusion; `[read][true]`, columns sum to 1.
    pub binary_confusion: [[f64; 2]; 2],
}

impl MeasurementNoise {
    /// Noise-free model: no transitions, perfect flip, identity confusion.
    pub fn none() -> Self {
        MeasurementNoise {
            t01: 0.0,
            t10: 0.0,
            t21: 0.0,
            t20: 0.0,
            x01_error: 0.0,
            binary_confusion: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.t01, "t01"),
            (self.t10, "t10"),
            (self.t21, "t21"),
            (self.t20, "t20"),
            (self.x01_error, "x01_error"),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "noise parameter {name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.t21 + self.t20 > 1.0 + SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "t21 + t20 = {} exceeds 1",
                self.t21 + self.t20
            )));
        }
        for col in 0..2 {
            let sum = self.binary_confusion[0][col] + self.binary_confusion[1][col];
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "confusion column {col} sums to {sum}, expected 1"
                )));
            }
            for row in 0..2 {
                let v = self.binary_confusion[row][col];
                if !v.is_finite() || !(-SUM_TOL..=1.0 + SUM_TOL).contains(&v) {
                    return Err(Error::InvalidDistribution(format!(
                        "confusion entry [{row}][{col}] = {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    fn is_zero(&self) -> bool {
        self.t01 == 0.0
            && self.t10 == 0.0
            && self.t21 == 0.0
            && self.t20 == 0.0
            && self.x01_error == 0.0
            && self.binary_confusion == [[1.0, 0.0], [0.0, 1.0]]
    }
}

impl Default for MeasurementNoise {
    fn default() -> Self {
        Self::none()
    }
}

/// Tallied outcomes of a sampled experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    counts: BTreeMap<String, u64>,
    shots: u64,
}

impl ShotCounts {
    pub fn new(counts: BTreeMap<String, u64>, shots: u64) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total != shots {
            return Err(Error::InvalidDistribution(format!(
                "counts sum to {total}, expected {shots}"
            )));
        }
        Ok(ShotCounts { counts, shots })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn frequency(&self, label: &str) -> f64 {
        self.count(label) as f64 / self.shots as f64
    }

    /// Frequencies in the caller's label order; absent labels count as 0.
    pub fn frequencies_for(&self, labels: &[&str]) -> Vec<f64> {
        labels.iter().map(|l| self.frequency(l)).collect()
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }
}

/// Ideal MCMD outcome probabilities: `(0, p1, p0, p2)`.
pub fn mcmd_probabilities(state: &Prob3) -> Prob4 {
    Prob4 {
        p: [0.0, state.p1(), state.p0(), state.p2()],
    }
}

/// Post-transition distribution over ternary states for one prepared basis
/// state, per the transition step of [`MeasurementNoise`].
fn transition_branches(basis: usize, noise: &MeasurementNoise) -> [(usize, f64); 2] {
    // At most two destinations have nonzero weight besides staying put, and
    // staying put is folded into the first slot when possible.
    match basis {
        0 => [(0, 1.0 - noise.t01), (1, noise.t01)],
        1 => [(1, 1.0 - noise.t10), (0, noise.t10)],
        _ => [(1, noise.t21), (0, noise.t20)],
    }
}

/// Binary readout value of a ternary state: `|2>` reads as 1.
fn binary_of(state: usize) -> usize {
    usize::from(state != 0)
}

fn flip01(state: usize) -> usize {
    match state {
        0 => 1,
        1 => 0,
        other => other,
    }
}

/// Column of the noisy MCMD assignment map for one prepared basis state,
/// in `[p00, p01, p10, p11]` order.
pub fn mcmd_noisy_column(basis: usize, noise: &MeasurementNoise) -> [f64; 4] {
    let alpha_true = binary_of(basis);
    let mut branches: Vec<(usize, f64)> = transition_branches(basis, noise).to_vec();
    if basis == 2 {
        branches.push((2, 1.0 - noise.t21 - noise.t20));
    }

    let mut out = [0.0; 4];
    for &(post, w_trans) in &branches {
        if w_trans == 0.0 {
            continue;
        }
        for (flipped, w_flip) in [
            (flip01(post), 1.0 - noise.x01_error),
            (post, noise.x01_error),
        ] {
            if w_flip == 0.0 {
                continue;
            }
            let beta_true = binary_of(flipped);
            for read_alpha in 0..2 {
                let w_alpha = noise.binary_confusion[read_alpha][alpha_true];
                for read_beta in 0..2 {
                    let w_beta = noise.binary_confusion[read_beta][beta_true];
                    out[2 * read_beta + read_alpha] += w_trans * w_flip * w_alpha * w_beta;
                }
            }
        }
    }
    out
}

/// MCMD outcome probabilities under the phenomenological noise model.
///
/// The map is linear in the input state; with all noise parameters zero it
/// reduces exactly to [`mcmd_probabilities`].
pub fn mcmd_probabilities_noisy(state: &Prob3, noise: &MeasurementNoise) -> Prob4 {
    if noise.is_zero() {
        return mcmd_probabilities(state);
    }
    let mut p = [0.0; 4];
    for basis in 0..3 {
        let w = state.get(basis);
        if w == 0.0 {
            continue;
        }
        let col = mcmd_noisy_column(basis, noise);
        for i in 0..4 {
            p[i] += w * col[i];
        }
    }
    Prob4 { p }
}

/// Outcome distributions of the two statistically independent circuits:
/// `p_alpha = (p0, p1 + p2)` without the flip, `p_beta = (p1, p0 + p2)`
/// with it.
pub fn independent_probabilities(state: &Prob3) -> (Prob2, Prob2) {
    let p_alpha = Prob2 {
        p: [state.p0(), state.p1() + state.p2()],
    };
    let p_beta = Prob2 {
        p: [state.p1(), state.p0() + state.p2()],
    };
    (p_alpha, p_beta)
}

/// `|2>` population estimate from the two independent circuits:
/// `p_alpha1 + p_beta1 - 1`. May be negative under sampling noise; callers
/// clip or mitigate.
pub fn estimate_p2_independent(p_alpha1: f64, p_beta1: f64) -> f64 {
    p_alpha1 + p_beta1 - 1.0
}

/// Anything with a fixed, labelled outcome set that can be shot-sampled.
pub trait Sampleable {
    fn outcome_probabilities(&self) -> &[f64];
    fn outcome_labels(&self) -> &'static [&'static str];
}

impl Sampleable for Prob3 {
    fn outcome_probabilities(&self) -> &[f64] {
        &self.p
    }
    fn outcome_labels(&self) -> &'static [&'static str] {
        &Self::LABELS
    }
}

impl Sampleable for Prob4 {
    fn outcome_probabilities(&self) -> &[f64] {
        &self.p
    }
    fn outcome_labels(&self) -> &'static [&'static str] {
        &Self::LABELS
    }
}

impl Sampleable for Prob2 {
    fn outcome_probabilities(&self) -> &[f64] {
        &self.p
    }
    fn outcome_labels(&self) -> &'static [&'static str] {
        &Self::LABELS
    }
}

/// Multinomial sampling by inverse CDF over half-open bins `[lo, hi)`.
///
/// Draw `u` in `[0, 1)` and assign the first outcome whose cumulative
/// probability exceeds `u`; the final bin absorbs any rounding residue.
pub fn sample<D: Sampleable + ?Sized>(dist: &D, shots: u64, rng: &mut Rng) -> ShotCounts {
    let probs = dist.outcome_probabilities();
    let labels = dist.outcome_labels();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut tallies = vec![0u64; probs.len()];
    let last = tallies.len() - 1;
    for _ in 0..shots {
        let u = rng.uniform();
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(last);
        tallies[k] += 1;
    }
    let counts = labels
        .iter()
        .zip(&tallies)
        .map(|(l, &n)| (l.to_string(), n))
        .collect();
    ShotCounts {
        counts,
        shots,
    }
}

/// Convenience wrapper over [`sample`] that derives the generator from a
/// bare seed (stream 0).
pub fn sample_seeded<D: Sampleable + ?Sized>(dist: &D, shots: u64, seed: u64) -> ShotCounts {
    sample(dist, shots, &mut Rng::from_seed(seed))
}

/// Sampling variance of the MCMD `|2>`-population count at `shots` trials:
/// `N p2 (1 - p2)`.
pub fn variance_mcm(state: &Prob3, shots: u64) -> f64 {
    shots as f64 * state.p2() * (1.0 - state.p2())
}

/// Sampling variance of the independent-circuit `|2>`-population count:
/// `N (p0 (1 - p0) + p1 (1 - p1))`.
pub fn variance_im(state: &Prob3, shots: u64) -> f64 {
    shots as f64 * (state.p0() * (1.0 - state.p0()) + state.p1() * (1.0 - state.p1()))
}

/// Ratio `V_MCM / V_IM = 1 - 2 p0 p1 / (p0(1-p0) + p1(1-p1))`.
///
/// Returns `None` on states where the independent-circuit variance
/// vanishes (simplex vertices), where the ratio is undefined.
pub fn variance_ratio(state: &Prob3) -> Option<f64> {
    let denom = state.p0() * (1.0 - state.p0()) + state.p1() * (1.0 - state.p1());
    if denom == 0.0 {
        return None;
    }
    Some(1.0 - 2.0 * state.p0() * state.p1() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn prob3_rejects_bad_inputs() {
        assert!(Prob3::new(0.5, 0.6, 0.2).is_err());
        assert!(Prob3::new(-0.1, 0.6, 0.5).is_err());
        assert!(Prob3::new(f64::NAN, 0.5, 0.5).is_err());
        assert!(Prob3::new(0.2, 0.3, 0.5).is_ok());
    }

    #[test]
    fn mcmd_ideal_examples() {
        let p = Prob3::new(0.5, 0.3, 0.2).unwrap();
        let out = mcmd_probabilities(&p);
        assert_eq!(out.as_array(), [0.0, 0.3, 0.5, 0.2]);

        let out = mcmd_probabilities(&Prob3::basis(2));
        assert_eq!(out.as_array(), [0.0, 0.0, 0.0, 1.0]);

        let out = mcmd_probabilities(&Prob3::basis(0));
        assert_eq!(out.as_array(), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn noisy_reduces_to_ideal_exactly() {
        let p = Prob3::new(0.5, 0.3, 0.2).unwrap();
        let ideal = mcmd_probabilities(&p);
        let noisy = mcmd_probabilities_noisy(&p, &MeasurementNoise::none());
        assert_eq!(ideal.as_array(), noisy.as_array());
    }

    #[test]
    fn heating_on_ground_state_feeds_p00() {
        // |0>: first readout registers 0, then heating moves the state to 1,
        // X01 flips it back to 0, second readout registers 0 -> "00".
        let noise = MeasurementNoise {
            t01: 0.01,
            ..MeasurementNoise::none()
        };
        let out = mcmd_probabilities_noisy(&Prob3::basis(0), &noise);
        assert_abs_diff_eq!(out.p00(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(out.p10(), 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(out.p01(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn full_decay_from_two_reads_01() {
        // |2>: reads 1, decays to |1>, flips to |0>, reads 0 -> "01".
        let noise = MeasurementNoise {
            t21: 1.0,
            ..MeasurementNoise::none()
        };
        let out = mcmd_probabilities_noisy(&Prob3::basis(2), &noise);
        assert_abs_diff_eq!(out.p01(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn independent_examples() {
        let p = Prob3::new(0.5, 0.3, 0.2).unwrap();
        let (pa, pb) = independent_probabilities(&p);
        assert_abs_diff_eq!(pa.p0(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pa.p1(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pb.p0(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(pb.p1(), 0.7, epsilon = 1e-15);

        let (pa, pb) = independent_probabilities(&Prob3::basis(2));
        assert_eq!((pa.p1(), pb.p1()), (1.0, 1.0));

        let (pa, pb) = independent_probabilities(&Prob3::basis(0));
        assert_eq!((pa.p0(), pb.p1()), (1.0, 1.0));
    }

    #[test]
    fn estimate_p2_examples() {
        assert_abs_diff_eq!(estimate_p2_independent(0.5, 0.7), 0.2, epsilon = 1e-15);
        assert_eq!(estimate_p2_independent(1.0, 1.0), 1.0);
        assert_abs_diff_eq!(estimate_p2_independent(0.4, 0.5), -0.1, epsilon = 1e-15);
    }

    #[test]
    fn sampling_degenerate_and_deterministic() {
        let d = Prob3::basis(0);
        let counts = sample_seeded(&d, 100, 1);
        assert_eq!(counts.count("0"), 100);
        assert_eq!(counts.shots(), 100);

        let p = Prob4::new(0.1, 0.2, 0.3, 0.4).unwrap();
        let a = sample_seeded(&p, 5000, 42);
        let b = sample_seeded(&p, 5000, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_frequencies_within_binomial_bounds() {
        let d = Prob3::new(0.5, 0.5, 0.0).unwrap();
        let n = 1_000_000u64;
        let counts = sample_seeded(&d, n, 9);
        for (label, p) in [("0", 0.5), ("1", 0.5)] {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let f = counts.frequency(label);
            assert!(
                (f - p).abs() < 5.0 * sigma,
                "{label}: {f} vs {p} (sigma {sigma})"
            );
        }
        assert_eq!(counts.count("2"), 0);
    }

    #[test]
    fn variance_formulas() {
        let p = Prob3::new(0.5, 0.3, 0.2).unwrap();
        assert_abs_diff_eq!(variance_mcm(&p, 1000), 160.0, epsilon = 1e-9);
        assert_abs_diff_eq!(variance_im(&p, 1000), 460.0, epsilon = 1e-9);
        assert_eq!(variance_mcm(&Prob3::basis(2), 12345), 0.0);
        let half = Prob3::new(0.5, 0.5, 0.0).unwrap();
        assert_eq!(variance_mcm(&half, 1000), 0.0);
        assert_abs_diff_eq!(variance_im(&half, 1000), 500.0, epsilon = 1e-9);
        assert_eq!(variance_im(&Prob3::basis(0), 77), 0.0);
    }

    #[test]
    fn variance_ratio_examples() {
        let half = Prob3::new(0.5, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(variance_ratio(&half).unwrap(), 0.0, epsilon = 1e-15);

        let nocross = Prob3::new(0.5, 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(variance_ratio(&nocross).unwrap(), 1.0, epsilon = 1e-15);

        // Consistency with the defining variances: 160 / 460.
        let p = Prob3::new(0.5, 0.3, 0.2).unwrap();
        let expected = variance_mcm(&p, 1000) / variance_im(&p, 1000);
        assert_abs_diff_eq!(variance_ratio(&p).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(variance_ratio(&p).unwrap(), 0.34782608695652173, epsilon = 1e-12);

        assert!(variance_ratio(&Prob3::basis(0)).is_none());
        assert!(variance_ratio(&Prob3::basis(2)).is_none());
    }

    #[test]
    fn noise_validation() {
        let mut noise = MeasurementNoise::none();
        noise.t21 = 0.7;
        noise.t20 = 0.6;
        assert!(noise.validate().is_err());

        let mut noise = MeasurementNoise::none();
        noise.binary_confusion = [[0.9, 0.0], [0.0, 1.0]];
        assert!(noise.validate().is_err());

        let mut noise = MeasurementNoise::none();
        noise.t01 = 1.5;
        assert!(noise.validate().is_err());

        assert!(MeasurementNoise::none().validate().is_ok());
    }
}
