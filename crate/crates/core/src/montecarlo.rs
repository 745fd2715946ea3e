//! Poisson point-process sampling of list-mode event lists and a
//! statistical check of the bin means against their expected values.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::binning::{bin_means, BinningScheme};
use crate::error::{Error, Result};
use crate::model::{sample_model, ParametricModel};
use crate::quadrature::NodeRule;
use crate::scalar::{to_f64_vec, Scalar};

/// Headroom of the rejection envelope over the largest node density.
pub const ENVELOPE_HEADROOM: f64 = 1.2;

/// One realization of the list-mode data: `N` attribute vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EventList<T> {
    dim: usize,
    events: Vec<T>,
    pub seed: u64,
    pub theta: Vec<T>,
}

impl<T: Scalar> EventList<T> {
    pub fn new(dim: usize, seed: u64, theta: Vec<T>) -> Self {
        Self {
            dim,
            events: Vec::new(),
            seed,
            theta,
        }
    }

    pub fn push(&mut self, a: &[T]) {
        assert_eq!(a.len(), self.dim, "event dimension");
        self.events.extend_from_slice(a);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of events `N`.
    pub fn len(&self) -> usize {
        self.events.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.events.chunks_exact(self.dim)
    }

    /// One event per line, coordinates separated by single spaces, 17
    /// significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in self.events() {
            let line: Vec<String> = e.iter().map(|x| format!("{:.16e}", x.as_f64())).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Draws `N ~ Poisson(N̄(θ))` events i.i.d. from `ḡ(·|θ)/N̄(θ)` by rejection
/// from a uniform proposal on the box. The envelope is
/// [`ENVELOPE_HEADROOM`] times the largest density on the rule's nodes; a
/// proposal whose density exceeds it aborts the draw.
pub fn sample_list<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    rule: &NodeRule<T>,
    seed: u64,
) -> Result<EventList<T>> {
    let samples = sample_model(model, theta, rule)?;
    let expected = rule.integrate(&samples.mean)?.as_f64();
    let envelope = ENVELOPE_HEADROOM * samples.mean.iter().fold(0.0f64, |m, v| m.max(v.as_f64()));
    let space = model.space();
    let q = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Poisson::new(expected)
        .map_err(|e| Error::InvalidArgument(format!("Poisson mean {expected}: {e}")))?
        .sample(&mut rng) as usize;

    let mut list = EventList::new(q, seed, theta.to_vec());
    let mut u = vec![T::zero(); q];
    let mut a = vec![T::zero(); q];
    while list.len() < n {
        for ui in u.iter_mut() {
            *ui = T::lit(rng.random::<f64>());
        }
        space.from_unit(&u, &mut a);
        let density = model.density(&a, theta).as_f64();
        if density > envelope {
            return Err(Error::EnvelopeExceeded {
                point: to_f64_vec(&a),
                density,
                envelope,
            });
        }
        if rng.random::<f64>() * envelope < density {
            list.push(&a);
        }
    }
    Ok(list)
}

/// `g_m = Σ_n b_m(a_n)`.
pub fn bin_counts<T: Scalar>(list: &EventList<T>, scheme: &BinningScheme<T>) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; scheme.len()];
    for a in list.events() {
        counts[scheme.bin_index(a)?] += 1;
    }
    Ok(counts)
}

/// Per-bin comparison of empirical and expected bin contents.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanCheckReport {
    pub n_trials: usize,
    pub expected: Vec<f64>,
    pub empirical: Vec<f64>,
    /// `(mean g_m − ḡ_m) / sqrt(ḡ_m / n_trials)`.
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    /// `Σ_m g_m = N` held in every trial.
    pub counts_conserved: bool,
    pub total_events: u64,
}

impl MeanCheckReport {
    pub fn passes(&self, z_gate: f64) -> bool {
        self.counts_conserved && self.max_abs_z <= z_gate
    }
}

/// Seed of trial `t` derived from a master seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finaliser of (seed, trial)
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples `n_trials` lists at `theta`, bins them and z-scores the bin
/// averages against `ḡ_m(θ)`.
pub fn empirical_mean_check<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    n_trials: usize,
    seed: u64,
) -> Result<MeanCheckReport> {
    empirical_mean_check_against(model, theta, theta, scheme, rule, n_trials, seed)
}

/// Like [`empirical_mean_check`] but compares lists sampled at
/// `theta_sample` with bin means at `theta_expected`, which makes a
/// negative control possible.
pub fn empirical_mean_check_against<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta_sample: &[T],
    theta_expected: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    n_trials: usize,
    seed: u64,
) -> Result<MeanCheckReport> {
    if n_trials < 30 {
        return Err(Error::InvalidArgument(format!(
            "need at least 30 trials, got {n_trials}"
        )));
    }
    let expected: Vec<f64> = bin_means(model, theta_expected, scheme, rule)?
        .0
        .iter()
        .map(|v| v.as_f64())
        .collect();
    let mut sums = vec![0u64; scheme.len()];
    let mut counts_conserved = true;
    let mut total_events = 0u64;
    for t in 0..n_trials {
        let list = sample_list(model, theta_sample, rule, trial_seed(seed, t))?;
        let counts = bin_counts(&list, scheme)?;
        let n: u64 = counts.iter().sum();
        counts_conserved &= n == list.len() as u64;
        total_events += n;
        for (s, c) in sums.iter_mut().zip(counts) {
            *s += c;
        }
    }
    let nt = n_trials as f64;
    let empirical: Vec<f64> = sums.iter().map(|&s| s as f64 / nt).collect();
    let z: Vec<f64> = empirical
        .iter()
        .zip(&expected)
        .map(|(&e, &g)| (e - g) / (g / nt).sqrt())
        .collect();
    let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(MeanCheckReport {
        n_trials,
        expected,
        empirical,
        z,
        max_abs_z,
        counts_conserved,
        total_events,
    })
}
