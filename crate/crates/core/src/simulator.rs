//! Semi-analytic Monte Carlo estimation of outage probability and DPSK BER.
//!
//! Each trial draws the end-to-end SNR from the channel laws directly, with no
//! closed form involved. Outage is the fraction of trials below the threshold.
//! BER averages the conditional DPSK error `½e^{−γ}`, either over the drawn
//! `γ_eq` itself ([`BerEstimator::Direct`]) or with the exponential first hop
//! integrated out per trial ([`BerEstimator::Conditional`]).
//!
//! Trials are split into fixed-size batches. Batch `b` draws from ChaCha8
//! stream `b` of the run seed, and batch totals are combined in batch order, so
//! results are bit-identical for any number of worker threads.

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Scheme, SystemConfig};
use crate::channels::FsoSampler;
use crate::error::{Error, Result};
use crate::special_fn::log_gamma;
use crate::sum::CompensatedSum;

pub const DEFAULT_BATCH_SIZE: u64 = 1 << 16;

/// How the two AF branches see the first hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FirstHopCoupling {
    /// Each branch gets its own first-hop realization, the independence the
    /// closed-form AF outage assumes.
    #[default]
    Independent,
    /// Both branches share one first-hop SNR, as on the physical link.
    Shared,
}

/// Second-hop model; `Ideal` removes the second hop so `γ_eq = γ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SecondHop {
    #[default]
    Faded,
    Ideal,
}

/// How a trial contributes to the BER estimate.
///
/// At high SNR the BER is carried by trials where every hop fades deeply at
/// once. The direct average rarely sees one, so both its mean and its sample
/// standard error come out far too small. The conditional estimator replaces
/// `½e^{−γ_eq}` by its expectation over the best-of-N first hop given the
/// second-hop draws, which uses only the exponential law of the first hop. It
/// has the same mean and a much smaller variance. The second hop is then drawn
/// from a defensive mixture that sends half of the draws toward the deep fades
/// the BER depends on, each reweighted by its likelihood ratio (at most 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BerEstimator {
    Direct,
    #[default]
    Conditional,
}

/// Quantity recorded by [`empirical_hop_cdf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hop {
    /// Best-of-N first-hop SNR γ₁.
    AccessPoint,
    /// AF FSO-branch SNR `γ₁γ_{2,FSO}/(γ_{2,FSO} + C)`.
    FsoBranch,
    /// AF RF-branch SNR `γ₁γ_{2,RF}/(γ_{2,RF} + C)`.
    RfBranch,
    /// End-to-end SNR of the configured scheme.
    EndToEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    pub config: SystemConfig<f64>,
    /// Trial count, always a multiple of `batch_size`.
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
    pub coupling: FirstHopCoupling,
    pub second_hop: SecondHop,
    pub ber_estimator: BerEstimator,
}

impl RunPlan {
    /// Plan with the default batch size (capped at `trials`); the trial count is
    /// rounded up to whole batches.
    pub fn new(config: SystemConfig<f64>, trials: u64, seed: u64) -> Result<Self> {
        Self::with_batch_size(config, trials, seed, DEFAULT_BATCH_SIZE.min(trials.max(1)))
    }

    pub fn with_batch_size(config: SystemConfig<f64>, trials: u64, seed: u64, batch_size: u64) -> Result<Self> {
        config.validate()?;
        if trials == 0 || batch_size == 0 {
            return Err(Error::domain("run_plan", "trials and batch_size must be positive"));
        }
        let trials = trials.div_ceil(batch_size) * batch_size;
        Ok(RunPlan {
            config,
            trials,
            seed,
            batch_size,
            coupling: FirstHopCoupling::default(),
            second_hop: SecondHop::default(),
            ber_estimator: BerEstimator::default(),
        })
    }

    pub fn batches(&self) -> u64 {
        self.trials / self.batch_size
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl EstimateCI {
    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.value - 1.96 * self.stderr, self.value + 1.96 * self.stderr)
    }

    /// `3/trials` when the estimate sits at 0 or 1, where the normal
    /// approximation gives a zero standard error; the rule-of-three 95% bound on
    /// the distance to the true value.
    pub fn degenerate_bound(&self) -> Option<f64> {
        (self.value == 0.0 || self.value == 1.0).then(|| 3.0 / self.trials as f64)
    }

    /// Largest `|value − reference|` accepted at `mult` standard errors.
    pub fn tolerance(&self, mult: f64) -> f64 {
        let t = mult * self.stderr;
        self.degenerate_bound().map_or(t, |b| t.max(b))
    }

    pub fn agrees_with(&self, reference: f64, mult: f64) -> bool {
        (self.value - reference).abs() <= self.tolerance(mult)
    }
}

/// Pre-built samplers for one configuration.
#[derive(Debug, Clone)]
pub struct SnrSampler {
    cfg: SystemConfig<f64>,
    fso: FsoSampler,
    mean_fso: f64,
    coupling: FirstHopCoupling,
    second_hop: SecondHop,
    /// `∫e^{−γ}F_{γ1}(γ)dγ = N!/Π_j(γ̄_RF + j)`.
    first_hop_laplace: f64,
    /// `ln((γ̄_RF + j − 1)/j)` for `j = 1..=N`.
    ln_rising: Vec<f64>,
    proposal: SecondHopProposal,
}

/// One draw of every SNR in the link.
#[derive(Debug, Clone, Copy)]
struct Draw {
    gamma1: f64,
    /// First-hop SNR seen by the AF RF branch (equal to `gamma1` unless the
    /// coupling is independent).
    gamma1_rf: f64,
    fso: f64,
    rf: f64,
}

impl SnrSampler {
    pub fn new(cfg: &SystemConfig<f64>) -> Self {
        SnrSampler {
            cfg: *cfg,
            fso: FsoSampler::new(&cfg.turbulence),
            mean_fso: cfg.effective_mean_snr_fso(),
            coupling: FirstHopCoupling::default(),
            second_hop: SecondHop::default(),
            first_hop_laplace: max_exp_laplace(cfg.n_users, cfg.mean_snr_rf),
            ln_rising: (1..=cfg.n_users).map(|j| ((cfg.mean_snr_rf + (j - 1) as f64) / j as f64).ln()).collect(),
            proposal: SecondHopProposal::new(cfg),
        }
    }

    pub fn with_modes(mut self, coupling: FirstHopCoupling, second_hop: SecondHop) -> Self {
        self.coupling = coupling;
        self.second_hop = second_hop;
        self
    }

    fn access_point<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        let mut best: f64 = 0.0;
        for _ in 0..self.cfg.n_users {
            let v: f64 = Exp1.sample(rng);
            best = best.max(v);
        }
        best * self.cfg.mean_snr_rf
    }

    fn draw<R: rand::Rng>(&self, rng: &mut R) -> Draw {
        let gamma1 = self.access_point(rng);
        let gamma1_rf = if self.cfg.scheme == Scheme::UnknownCsiAf && self.coupling == FirstHopCoupling::Independent {
            self.access_point(rng)
        } else {
            gamma1
        };
        let i = self.fso.sample(rng);
        let fso = self.mean_fso * i * i;
        let e: f64 = Exp1.sample(rng);
        let rf = self.cfg.mean_snr_rf * e;
        Draw { gamma1, gamma1_rf, fso, rf }
    }

    fn af_fso(&self, d: &Draw) -> f64 {
        d.gamma1 * d.fso / (d.fso + self.cfg.c_const)
    }

    fn af_rf(&self, d: &Draw) -> f64 {
        d.gamma1_rf * d.rf / (d.rf + self.cfg.c_const)
    }

    fn end_to_end(&self, d: &Draw) -> f64 {
        if self.second_hop == SecondHop::Ideal {
            return d.gamma1;
        }
        let g = match self.cfg.scheme {
            Scheme::KnownCsiDf => d.gamma1.min(d.fso.max(d.rf)),
            Scheme::UnknownCsiAf => self.af_fso(d).max(self.af_rf(d)),
        };
        debug_assert!(self.cfg.scheme != Scheme::UnknownCsiAf || g < d.gamma1.max(d.gamma1_rf) || g == 0.0);
        g
    }

    /// One realization of the end-to-end SNR.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        let d = self.draw(rng);
        self.end_to_end(&d)
    }

    /// `E[½e^{−γ_eq} | second hop]` with the first hop integrated out.
    fn conditional_ber(&self, fso: f64, rf: f64) -> f64 {
        if self.second_hop == SecondHop::Ideal {
            return 0.5 * self.first_hop_laplace;
        }
        match self.cfg.scheme {
            Scheme::KnownCsiDf => {
                // ½[e^{−M} + ∫_0^M e^{−γ}F_{γ1}(γ)dγ], M = max(γ_{2,FSO}, γ_{2,RF}).
                let m = fso.max(rf);
                0.5 * ((-m).exp() + self.first_hop_laplace * (1.0 - self.first_hop_tail(m)))
            }
            Scheme::UnknownCsiAf => {
                let a = (fso / (fso + self.cfg.c_const)).max(f64::MIN_POSITIVE);
                let b = (rf / (rf + self.cfg.c_const)).max(f64::MIN_POSITIVE);
                let g = self.cfg.mean_snr_rf;
                match self.coupling {
                    FirstHopCoupling::Independent => {
                        let rate = |s: f64| (1.0 / (g * s)).min(1e300);
                        0.5 * all_before_unit_clock(self.cfg.n_users as usize, rate(a), rate(b))
                    }
                    FirstHopCoupling::Shared => 0.5 * max_exp_laplace(self.cfg.n_users, g * a.max(b)),
                }
            }
        }
    }

    /// `∫_M^∞ e^{−γ}F_{γ1}(γ)dγ / ∫_0^∞ e^{−γ}F_{γ1}(γ)dγ`, which equals
    /// `e^{−M} Σ_{j≤N} (γ̄)_j V^j/j!` with `V = 1 − e^{−M/γ̄}`; summed in logs.
    fn first_hop_tail(&self, m: f64) -> f64 {
        let ln_v = (-(-m / self.cfg.mean_snr_rf).exp_m1()).ln();
        let mut lt = -m;
        let mut acc = lt.exp();
        for l in &self.ln_rising {
            lt += l + ln_v;
            acc += lt.exp();
        }
        acc.min(1.0)
    }

    fn ber_sample<R: rand::Rng>(&self, estimator: BerEstimator, rng: &mut R) -> (f64, f64) {
        let d = self.draw(rng);
        let g = self.end_to_end(&d);
        let p = match estimator {
            BerEstimator::Direct => 0.5 * (-g).exp(),
            BerEstimator::Conditional => {
                let (i, wf) = self.proposal.intensity(rng);
                let (rf, wr) = self.proposal.rf(rng);
                wf * wr * self.conditional_ber(self.mean_fso * i * i, rf)
            }
        };
        (g, p)
    }

    fn sample_hop<R: rand::Rng>(&self, hop: Hop, rng: &mut R) -> f64 {
        let d = self.draw(rng);
        match hop {
            Hop::AccessPoint => d.gamma1,
            Hop::FsoBranch => self.af_fso(&d),
            Hop::RfBranch => self.af_rf(&d),
            Hop::EndToEnd => self.end_to_end(&d),
        }
    }
}

/// Defensive-mixture proposal for the second hop of the conditional BER
/// estimator, used when the deep fades that carry the BER sit far below the
/// typical second-hop SNR (SNR about 1 for DF, `C/γ̄_RF` for AF).
///
/// FSO: with probability ½ the irradiance comes from its own law, otherwise
/// every factor density is multiplied by `h^{−δ}` (gamma shape `k → k − δ`,
/// pointing exponent `ξ² → ξ² − δ`). The likelihood ratio of the tilted product
/// is `Z·I^{−δ}`, so the mixture weight `2/(1 + Z·I^{−δ})` needs only `I`. All
/// factors share the tilt because deep fades of the product are mostly joint
/// fades, and the AF conditional BER grows like `I^{−2N}`.
///
/// RF: half the draws come from an exponential with mean at the target SNR.
#[derive(Debug, Clone, Copy)]
struct SecondHopProposal {
    fso: FsoSampler,
    /// Tilted factor laws and `ln Z`; `None` when no tilt is needed.
    tilted: Option<TiltedFso>,
    rf_mean: f64,
    /// Mean of the shrunk RF component, if any.
    rf_tilt: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct TiltedFso {
    large: Gamma<f64>,
    small: Gamma<f64>,
    inv_pointing: f64,
    delta: f64,
    ln_z: f64,
}

/// Tilt only when the target sits this far below the typical value.
const TILT_RATIO: f64 = 1.0 / 16.0;
/// Smallest factor shape left after tilting.
const TILTED_SHAPE: f64 = 0.25;

impl SecondHopProposal {
    fn new(cfg: &SystemConfig<f64>) -> Self {
        let t = cfg.turbulence;
        let target = match cfg.scheme {
            Scheme::KnownCsiDf => 1.0,
            Scheme::UnknownCsiAf => cfg.c_const / cfg.mean_snr_rf,
        };
        let xi2 = t.xi2();
        let delta = t.alpha.min(t.beta).min(xi2) - TILTED_SHAPE;
        let tilted = (target < TILT_RATIO * TILT_RATIO * cfg.effective_mean_snr_fso() && delta > 0.0).then(|| {
            let (ka, kb) = (t.alpha - delta, t.beta - delta);
            // Z = Π Γ(k)θ^δ/Γ(k − δ) over the gamma factors, times (ξ² − δ)/ξ².
            let lg = |x: f64| log_gamma(x).expect("positive shape");
            let gamma_part = |k: f64, kt: f64| lg(k) - lg(kt) - delta * k.ln();
            TiltedFso {
                large: Gamma::new(ka, 1.0 / t.alpha).expect("positive shape"),
                small: Gamma::new(kb, 1.0 / t.beta).expect("positive shape"),
                inv_pointing: 1.0 / (xi2 - delta),
                delta,
                ln_z: gamma_part(t.alpha, ka) + gamma_part(t.beta, kb) + ((xi2 - delta) / xi2).ln(),
            }
        });
        let rf_tilt = (target < TILT_RATIO * cfg.mean_snr_rf).then_some(target);
        SecondHopProposal { fso: FsoSampler::new(&t), tilted, rf_mean: cfg.mean_snr_rf, rf_tilt }
    }

    /// `2/(1 + q/p)`, the weight of a draw from the ½/½ mixture.
    fn weight(ln_q_over_p: f64) -> f64 {
        2.0 / (1.0 + ln_q_over_p.exp())
    }

    /// FSO irradiance and its likelihood weight.
    fn intensity<R: rand::Rng>(&self, rng: &mut R) -> (f64, f64) {
        let Some(t) = &self.tilted else {
            return (self.fso.sample(rng), 1.0);
        };
        let i = if rng.gen::<bool>() {
            self.fso.sample(rng)
        } else {
            let u = 1.0 - rng.gen::<f64>();
            t.large.sample(rng) * t.small.sample(rng) * u.powf(t.inv_pointing)
        };
        (i, Self::weight(t.ln_z - t.delta * i.ln()))
    }

    /// Second-hop RF SNR and its likelihood weight.
    fn rf<R: rand::Rng>(&self, rng: &mut R) -> (f64, f64) {
        let e: f64 = Exp1.sample(rng);
        match self.rf_tilt {
            None => (self.rf_mean * e, 1.0),
            Some(mu) => {
                let r = if rng.gen::<bool>() { self.rf_mean * e } else { mu * e };
                (r, Self::weight((self.rf_mean / mu).ln() - r * (1.0 / mu - 1.0 / self.rf_mean)))
            }
        }
    }
}

/// One realization of the end-to-end SNR: `min(γ₁, max(γ_{2,FSO}, γ_{2,RF}))` for
/// DF, the larger AF branch ratio for AF.
pub fn draw_equivalent_snr<R: rand::Rng>(cfg: &SystemConfig<f64>, rng: &mut R) -> f64 {
    SnrSampler::new(cfg).sample(rng)
}

/// `∫e^{−γ}(1 − e^{−γ/g})^N dγ = N!/Π_{j=1}^N (g + j)`.
fn max_exp_laplace(n: u32, g: f64) -> f64 {
    (1..=n).map(|j| j as f64 / (g + j as f64)).product()
}

/// Probability that a unit-rate exponential clock outlasts `n` clocks of rate
/// `x` and `n` clocks of rate `y`, i.e. `∫e^{−γ}(1 − e^{−xγ})^n(1 − e^{−yγ})^n dγ`.
/// Walks the competing-clock chain over (x-clocks left, y-clocks left), so every
/// term is a product of probabilities and nothing cancels.
fn all_before_unit_clock(n: usize, x: f64, y: f64) -> f64 {
    // row[j] holds P(reach state (i, j)) for the current i.
    let mut row = vec![0.0; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=n).rev() {
            let mut p = if i == n && j == n { 1.0 } else { 0.0 };
            if i < n {
                let (ri, rj) = ((i + 1) as f64 * x, j as f64 * y);
                p += row[j] * ri / (1.0 + ri + rj);
            }
            if j < n {
                let (ri, rj) = (i as f64 * x, (j + 1) as f64 * y);
                p += row[j + 1] * rj / (1.0 + ri + rj);
            }
            row[j] = p;
        }
    }
    row[0]
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchTotals {
    outages: u64,
    ber: CompensatedSum<f64>,
    ber_sq: CompensatedSum<f64>,
}

fn run_batches(plan: &RunPlan) -> BatchTotals {
    let sampler = SnrSampler::new(&plan.config).with_modes(plan.coupling, plan.second_hop);
    let threshold = plan.config.gamma_th;
    let estimator = plan.ber_estimator;
    let per_batch: Vec<BatchTotals> = (0..plan.batches())
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(plan.seed, b);
            let mut t = BatchTotals::default();
            for _ in 0..plan.batch_size {
                let (g, p) = sampler.ber_sample(estimator, &mut rng);
                if g < threshold {
                    t.outages += 1;
                }
                t.ber.add(p);
                t.ber_sq.add(p * p);
            }
            t
        })
        .collect();
    let mut total = BatchTotals::default();
    for t in per_batch {
        total.outages += t.outages;
        total.ber.add(t.ber.value());
        total.ber_sq.add(t.ber_sq.value());
    }
    total
}

fn outage_estimate(outages: u64, trials: u64) -> EstimateCI {
    let n = trials as f64;
    let p = outages as f64 / n;
    EstimateCI { value: p, stderr: (p * (1.0 - p) / n).sqrt(), trials }
}

fn ber_estimate(sum: f64, sum_sq: f64, trials: u64) -> EstimateCI {
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    EstimateCI { value: mean, stderr: (var / n).sqrt(), trials }
}

/// Outage and BER estimates from one pass over the same trials.
pub fn estimate_both(plan: &RunPlan) -> (EstimateCI, EstimateCI) {
    let t = run_batches(plan);
    (outage_estimate(t.outages, plan.trials), ber_estimate(t.ber.value(), t.ber_sq.value(), plan.trials))
}

/// Fraction of trials with `γ_eq < γ_th`.
pub fn estimate_outage(plan: &RunPlan) -> EstimateCI {
    estimate_both(plan).0
}

/// Mean DPSK error `½e^{−γ_eq}`, by the plan's [`BerEstimator`].
pub fn estimate_ber(plan: &RunPlan) -> EstimateCI {
    estimate_both(plan).1
}

/// Empirical CDF of one link quantity at each grid point, from `trials` draws
/// (rounded up to whole batches).
pub fn empirical_hop_cdf(cfg: &SystemConfig<f64>, hop: Hop, grid: &[f64], trials: u64, seed: u64) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("empirical_hop_cdf", "grid must be sorted ascending"));
    }
    let plan = RunPlan::new(*cfg, trials, seed)?;
    let sampler = SnrSampler::new(cfg);
    let per_batch: Vec<Vec<u64>> = (0..plan.batches())
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            // bucket[j]: draws in (grid[j−1], grid[j]]
            let mut bucket = vec![0u64; grid.len() + 1];
            for _ in 0..plan.batch_size {
                let x = sampler.sample_hop(hop, &mut rng);
                bucket[grid.partition_point(|&g| g < x)] += 1;
            }
            bucket
        })
        .collect();
    let mut counts = vec![0u64; grid.len() + 1];
    for bucket in per_batch {
        for (c, v) in counts.iter_mut().zip(bucket) {
            *c += v;
        }
    }
    let n = plan.trials as f64;
    let mut acc = 0u64;
    Ok(counts[..grid.len()]
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / n
        })
        .collect())
}
