//! Single-mode photocount statistics under Gaussian background noise.
//!
//! An empty slot carries only thermal background and produces a geometric
//! (Bose-Einstein) photocount law with mean n_b. A pulsed slot carries a
//! coherent amplitude on top of the same background; its photocount law is
//! the displaced-thermal (Laguerre) distribution
//!
//! p₁(k) = n_b^k/(1+n_b)^{k+1} · exp(−E_s/(1+n_b)) · L_k(−E_s/(n_b(1+n_b)))
//!
//! which reduces to Poisson(E_s) as n_b → 0. Probabilities are evaluated
//! through a scaled three-term recurrence on the Laguerre values so that
//! pulse energies of hundreds of photons neither overflow nor lose the
//! log-domain magnitudes needed by likelihood ratios.

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::stream::RngStream;
use crate::{Error, Result};

/// Truncation policy: certified tail mass per constructed pmf.
const TAIL_TARGET: f64 = 1e-13;

/// Detector model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Photon-number-resolving: reports the exact photocount k.
    Pnr,
    /// Geiger mode: discriminates only k = 0 from k ≥ 1.
    Geiger,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Pnr => "pnr",
            DetectorKind::Geiger => "geiger",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pnr" => Ok(DetectorKind::Pnr),
            "geiger" => Ok(DetectorKind::Geiger),
            other => Err(Error::InvalidParameter(format!(
                "unknown detector `{other}`"
            ))),
        }
    }
}

/// Truncated photocount probability mass function with tail bookkeeping.
#[derive(Debug, Clone)]
pub struct PhotocountPmf {
    probs: Vec<f64>,
    ln_probs: Vec<f64>,
    tail_mass: f64,
    pulse_energy: f64,
    n_b: f64,
}

impl PhotocountPmf {
    /// p(k), zero beyond the truncation point.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// ln p(k); finite even where `prob` underflows to zero. −∞ beyond
    /// the truncation point or for structurally impossible counts.
    pub fn ln_prob(&self, k: usize) -> f64 {
        self.ln_probs.get(k).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest retained photocount.
    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Analytic bound on the truncated mass Σ_{k > k_max} p(k).
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean photocount of the truncated table.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p)
            .sum()
    }

    /// Pulse energy E_s in mean photons (0 for an empty slot).
    pub fn pulse_energy(&self) -> f64 {
        self.pulse_energy
    }

    pub fn n_b(&self) -> f64 {
        self.n_b
    }

    /// Exact p(0) from the closed form, independent of the table.
    pub fn prob_zero_exact(&self) -> f64 {
        (-self.pulse_energy / (1.0 + self.n_b)).exp() / (1.0 + self.n_b)
    }
}

fn check_strength(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be ≥ 0")));
    }
    Ok(())
}

/// Photocount law of an empty (thermal) slot: geometric with mean n_b.
pub fn empty_slot_pmf(n_b: f64) -> Result<PhotocountPmf> {
    check_strength("n_b", n_b)?;
    if n_b == 0.0 {
        return Ok(PhotocountPmf {
            probs: vec![1.0],
            ln_probs: vec![0.0],
            tail_mass: 0.0,
            pulse_energy: 0.0,
            n_b,
        });
    }
    geometric_pmf(n_b, 1)
}

/// Geometric law with its table forced out to at least `k_min`, so
/// divergences against longer pulse tables never hit the truncation edge.
pub(crate) fn empty_slot_pmf_extended(n_b: f64, k_min: usize) -> Result<PhotocountPmf> {
    check_strength("n_b", n_b)?;
    if n_b == 0.0 {
        return empty_slot_pmf(n_b);
    }
    geometric_pmf(n_b, k_min)
}

fn geometric_pmf(n_b: f64, k_min: usize) -> Result<PhotocountPmf> {
    let c = n_b / (1.0 + n_b);
    let ln_c = c.ln();
    let ln_norm = -(1.0 + n_b).ln();
    // The exact geometric tail beyond k is c^{k+1}.
    let k_max = ((TAIL_TARGET.ln() / ln_c).ceil() as usize).max(k_min);
    let mut probs = Vec::with_capacity(k_max + 1);
    let mut ln_probs = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let lp = k as f64 * ln_c + ln_norm;
        ln_probs.push(lp);
        probs.push(lp.exp());
    }
    Ok(PhotocountPmf {
        probs,
        ln_probs,
        tail_mass: c.powi(k_max as i32 + 1),
        pulse_energy: 0.0,
        n_b,
    })
}

/// Photocount law of a pulsed slot with energy E_s over background n_b.
///
/// The mean is E_s + n_b exactly; the n_b = 0 branch dispatches to Poisson
/// since the Laguerre argument is singular there.
pub fn pulse_slot_pmf(e_s: f64, n_b: f64) -> Result<PhotocountPmf> {
    check_strength("E_s", e_s)?;
    check_strength("n_b", n_b)?;
    if e_s == 0.0 {
        return empty_slot_pmf(n_b);
    }
    if n_b == 0.0 {
        return Ok(poisson_pmf(e_s));
    }

    let mut ln_probs = Vec::<f64>::new();
    let mut lag = LaguerreRecurrence::new(e_s, n_b);
    let mean = e_s + n_b;
    // Hard cap: far beyond any mass the law can carry.
    let cap = (mean + 60.0 * (mean + 1.0).sqrt() + 200.0) as usize;
    let mut decreasing_run = 0usize;
    let mut prev_ratio = f64::INFINITY;
    let tail_mass;
    loop {
        let k = ln_probs.len();
        let lp = lag.ln_prob(k);
        if k > 0 {
            let ratio = (lp - ln_probs[k - 1]).exp();
            if ratio < prev_ratio {
                decreasing_run += 1;
            } else {
                decreasing_run = 0;
            }
            prev_ratio = ratio;
            if k as f64 > mean && ratio < 1.0 && decreasing_run >= 3 {
                let bound = lp.exp() * ratio / (1.0 - ratio);
                if bound < TAIL_TARGET {
                    ln_probs.push(lp);
                    tail_mass = bound;
                    break;
                }
            }
        }
        ln_probs.push(lp);
        if k >= cap {
            return Err(Error::Convergence(format!(
                "photocount tail did not certify below {TAIL_TARGET} by k = {cap} \
                 (E_s = {e_s}, n_b = {n_b})"
            )));
        }
    }
    let probs: Vec<f64> = ln_probs.iter().map(|&lp| lp.exp()).collect();
    Ok(PhotocountPmf {
        probs,
        ln_probs,
        tail_mass,
        pulse_energy: e_s,
        n_b,
    })
}

fn poisson_pmf(e_s: f64) -> PhotocountPmf {
    let ln_es = e_s.ln();
    let mut ln_probs = Vec::new();
    let cap = (e_s + 60.0 * (e_s + 1.0).sqrt() + 200.0) as usize;
    let mut tail_mass = f64::NAN;
    for k in 0..=cap {
        let lp = k as f64 * ln_es - e_s - ln_gamma(k as f64 + 1.0);
        ln_probs.push(lp);
        // Poisson ratios e_s/(k+1) decrease monotonically; geometric bound.
        let ratio = e_s / (k as f64 + 2.0);
        if k as f64 > e_s && ratio < 1.0 {
            let bound = lp.exp() * ratio / (1.0 - ratio);
            if bound < TAIL_TARGET {
                tail_mass = bound;
                break;
            }
        }
    }
    let probs: Vec<f64> = ln_probs.iter().map(|&lp| lp.exp()).collect();
    PhotocountPmf {
        probs,
        ln_probs,
        tail_mass,
        pulse_energy: e_s,
        n_b: 0.0,
    }
}

/// Scaled three-term recurrence for ln p₁(k).
///
/// Tracks L_k(−y) as a mantissa with an accumulated log scale; the
/// mantissa is renormalized whenever it exceeds 1e250 so that pulse
/// energies of ~10³ photons stay representable.
struct LaguerreRecurrence {
    y: f64,
    ln_c: f64,
    ln_base: f64,
    // State: L_{k-1}, L_k mantissas under a common scale.
    l_prev: f64,
    l_cur: f64,
    ln_scale: f64,
    next_k: usize,
}

impl LaguerreRecurrence {
    fn new(e_s: f64, n_b: f64) -> Self {
        let y = e_s / (n_b * (1.0 + n_b));
        Self {
            y,
            ln_c: (n_b / (1.0 + n_b)).ln(),
            ln_base: -(1.0 + n_b).ln() - e_s / (1.0 + n_b),
            l_prev: 1.0,
            l_cur: 1.0 + y,
            ln_scale: 0.0,
            next_k: 2,
        }
    }

    /// ln p₁(k); `k` must be requested in nondecreasing order.
    fn ln_prob(&mut self, k: usize) -> f64 {
        let ln_l = match k {
            0 => 0.0,
            1 => (1.0 + self.y).ln(),
            _ => {
                while self.next_k <= k {
                    let m = (self.next_k - 1) as f64;
                    // (m+1) L_{m+1}(−y) = (2m+1+y) L_m(−y) − m L_{m−1}(−y)
                    let next = ((2.0 * m + 1.0 + self.y) * self.l_cur - m * self.l_prev)
                        / (m + 1.0);
                    self.l_prev = self.l_cur;
                    self.l_cur = next;
                    if self.l_cur > 1e250 {
                        self.l_prev /= 1e250;
                        self.l_cur /= 1e250;
                        self.ln_scale += 1e250f64.ln();
                    }
                    self.next_k += 1;
                }
                self.l_cur.ln() + self.ln_scale
            }
        };
        k as f64 * self.ln_c + self.ln_base + ln_l
    }
}

/// Collapse a photocount law to the Geiger-mode (no-click, click) pair.
///
/// Uses the exact closed form for p(0), not the truncated table.
pub fn geigerize(pmf: &PhotocountPmf) -> (f64, f64) {
    let p0 = pmf.prob_zero_exact();
    (p0, 1.0 - p0)
}

/// ln λ(k) = ln p₁(k)/p₀(k) = −E_s/(1+n_b) + ln L_k(−E_s/(n_b(1+n_b))).
///
/// Returns ±∞ where one of the laws has no support: at n_b = 0 the empty
/// slot is a point mass at k = 0, so any k > 0 gives +∞ for E_s > 0 and
/// −∞ for E_s = 0.
pub fn log_likelihood_ratio(k: usize, e_s: f64, n_b: f64) -> Result<f64> {
    check_strength("E_s", e_s)?;
    check_strength("n_b", n_b)?;
    if n_b == 0.0 {
        return Ok(if k == 0 {
            -e_s
        } else if e_s > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    if e_s == 0.0 {
        return Ok(0.0);
    }
    let mut lag = LaguerreRecurrence::new(e_s, n_b);
    // ln λ(k) = ln p₁(k) − ln p₀(k); the geometric factors cancel.
    let ln_p0_part = k as f64 * (n_b / (1.0 + n_b)).ln() - (1.0 + n_b).ln();
    Ok(lag.ln_prob(k) - ln_p0_part)
}

/// Draw one photocount from a slot with coherent amplitude `alpha` over
/// circular Gaussian background of strength n_b.
///
/// The compound draw (Gaussian field, then Poisson with the realized
/// intensity) has exactly the Laguerre marginal of
/// [`pulse_slot_pmf`]`(|alpha|², n_b)`.
pub fn sample_photocount(alpha: Complex64, n_b: f64, stream: &mut RngStream) -> Result<u64> {
    check_strength("n_b", n_b)?;
    let field = if n_b > 0.0 {
        let sigma = (n_b / 2.0).sqrt();
        alpha
            + Complex64::new(
                sigma * stream.standard_normal(),
                sigma * stream.standard_normal(),
            )
    } else {
        alpha
    };
    let intensity = field.norm_sqr();
    sample_poisson(intensity, stream)
}

/// Poisson draw with the given mean (0 allowed).
pub fn sample_poisson(mean: f64, stream: &mut RngStream) -> Result<u64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean {mean} must be ≥ 0"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(stream) as u64)
}
