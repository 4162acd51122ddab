//! Pulse position modulation under single-mode background noise.
//!
//! A PPM frame places one pulse of energy E_s = M·n_a in one of M slots;
//! the remaining slots carry only background. This module provides the
//! relative-entropy lower bound on the photon information efficiency, the
//! exact mutual information for Geiger-mode detection, a Monte-Carlo
//! mutual-information estimator for photon-number-resolving detection,
//! optimization over the PPM order, and the capacity-per-unit-cost limit
//! sup_E D(p₁(E)‖p₀)/E.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::photodetection::{
    empty_slot_pmf, geigerize, log_likelihood_ratio, pulse_slot_pmf, sample_poisson,
    DetectorKind, PhotocountPmf,
};
use crate::stream::RngStream;
use crate::{Error, Result};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Pulse energies above this are excluded from order optimization; the
/// divergence saturates long before and the optimum cannot lie there for
/// n_a ≤ 1.
pub const MAX_OPTIMIZER_PULSE_ENERGY: f64 = 1e3;

/// Frames per Monte-Carlo shard; part of the reproducibility contract.
const MC_BLOCK: u64 = 4096;

/// Relative entropy with a certified truncation error bar.
#[derive(Debug, Clone, Copy)]
pub struct KlDivergence {
    /// D(p‖q) in bits (may be infinite on support violation).
    pub bits: f64,
    /// Bound on the contribution of the truncated tail, in bits.
    pub error_bound: f64,
}

/// A mutual-information estimate in bits per frame.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MiEstimate {
    pub bits: f64,
    /// Standard error; 0 for exact values.
    pub std_err: f64,
}

/// Result of a PPM order optimization.
#[derive(Debug, Clone, Copy)]
pub struct PpmDesign {
    pub order: u64,
    pub n_a: f64,
    pub n_b: f64,
    pub detector: DetectorKind,
    /// Relative-entropy PIE lower bound, bits per photon.
    pub pie_lower_bound: f64,
    /// E_s = M·n_a.
    pub pulse_energy: f64,
    /// Exact mutual information (Geiger detection only; `None` for PNR,
    /// where only the Monte-Carlo estimator is available).
    pub mi: Option<MiEstimate>,
}

/// D(p‖q) = Σ p(k)·log₂(p(k)/q(k)) over the truncated support.
///
/// A `q`-support violation (q(k) = 0 while p(k) > 0) makes the divergence
/// infinite. The error bar covers the truncated tails of both laws.
pub fn relative_entropy(p: &PhotocountPmf, q: &PhotocountPmf) -> Result<KlDivergence> {
    let k_lim = p.k_max().min(q.k_max());
    let mut bits = 0.0;
    let mut comp = 0.0; // Kahan compensation
    for k in 0..=k_lim {
        let pk = p.prob(k);
        if pk == 0.0 {
            continue;
        }
        let lq = q.ln_prob(k);
        if lq == f64::NEG_INFINITY {
            return Ok(KlDivergence {
                bits: f64::INFINITY,
                error_bound: 0.0,
            });
        }
        let term = pk * (p.ln_prob(k) - lq) * LOG2_E;
        let y = term - comp;
        let t = bits + y;
        comp = (t - bits) - y;
        bits = t;
    }
    // Mass of p beyond the summed range.
    let skipped: f64 = if p.k_max() > k_lim {
        p.probs()[k_lim + 1..].iter().sum::<f64>() + p.tail_mass()
    } else {
        p.tail_mass()
    };
    // Only the n_b = 0 empty law has genuinely finite support (a point
    // mass at zero); every other member of the family merely truncates.
    if skipped > 0.0 && q.k_max() == 0 && q.tail_mass() == 0.0 {
        return Ok(KlDivergence {
            bits: f64::INFINITY,
            error_bound: 0.0,
        });
    }
    // Tail terms p(k)·log₂(p/q) grow at most linearly in k for the
    // displaced-thermal family; bound with the geometric envelope implied
    // by the stored tail mass.
    let p_last = p.prob(p.k_max()).max(1e-300);
    let r = p.tail_mass() / p_last;
    let rho_term = r * (1.0 + r);
    let llr_last = (p.ln_prob(k_lim) - q.ln_prob(k_lim)).abs();
    let slope = (1.0 + p.pulse_energy() / (q.n_b().max(1e-12))).ln();
    let error_bound =
        LOG2_E * (skipped * llr_last + p_last * slope * rho_term) + q.tail_mass() * LOG2_E;
    Ok(KlDivergence { bits, error_bound })
}

/// Binary relative entropy d(a‖b) in bits between click probabilities.
pub fn binary_relative_entropy(a: f64, b: f64) -> f64 {
    let term = |p: f64, q: f64| -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).log2()
        }
    };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

fn frame_divergence(e_s: f64, n_b: f64, detector: DetectorKind) -> Result<f64> {
    match detector {
        DetectorKind::Pnr => {
            let p1 = pulse_slot_pmf(e_s, n_b)?;
            let p0 = empty_slot_pmf_covering(n_b, p1.k_max())?;
            Ok(relative_entropy(&p1, &p0)?.bits)
        }
        DetectorKind::Geiger => {
            let (_, click1) = geigerize(&pulse_slot_pmf(e_s, n_b)?);
            let (_, click0) = geigerize(&empty_slot_pmf(n_b)?);
            Ok(binary_relative_entropy(click1, click0))
        }
    }
}

// Empty-slot pmf whose table extends at least to `k_min` so divergences
// against longer pulse tables never hit an artificial support edge.
fn empty_slot_pmf_covering(n_b: f64, k_min: usize) -> Result<PhotocountPmf> {
    let base = empty_slot_pmf(n_b)?;
    if base.k_max() >= k_min || n_b == 0.0 {
        return Ok(base);
    }
    crate::photodetection::empty_slot_pmf_extended(n_b, k_min)
}

/// Relative-entropy PIE lower bound for one PPM order:
/// min{D(p₁‖p₀), log₂M} / (M·n_a).
pub fn ppm_pie_lower_bound(
    order: u64,
    n_a: f64,
    n_b: f64,
    detector: DetectorKind,
) -> Result<f64> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "PPM order {order} must be ≥ 2"
        )));
    }
    if !(n_a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_a = {n_a} must be > 0"
        )));
    }
    let e_s = order as f64 * n_a;
    let d = frame_divergence(e_s, n_b, detector)?;
    Ok(d.min((order as f64).log2()) / e_s)
}

fn ln_binomial(m: u64, t: u64) -> f64 {
    if m <= 64 {
        // Exact integer binomial; ln_gamma rounding would otherwise
        // dominate the error of small-order entropies.
        let t = t.min(m - t);
        let mut c = 1u128;
        for i in 0..t {
            c = c * (m - i) as u128 / (i + 1) as u128;
        }
        (c as f64).ln()
    } else {
        let (m, t) = (m as f64, t as f64);
        ln_gamma(m + 1.0) - ln_gamma(t + 1.0) - ln_gamma(m - t + 1.0)
    }
}

// 0·(−∞) shows up whenever a click probability is exactly 0 or 1; the
// convention x^0 = 1 makes the product term vanish instead.
fn weighted_ln(coeff: f64, ln_p: f64) -> f64 {
    if coeff == 0.0 {
        0.0
    } else {
        coeff * ln_p
    }
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn binary_entropy_bits(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Exact I(X;B) in bits per frame for Geiger detection of an M-ary PPM
/// frame, in O(M) time.
///
/// Conditioned on the pulse position, clicks are independent Bernoulli
/// draws with probability `a` at the pulse slot and `b` elsewhere, so the
/// output distribution depends only on the total click count; summing the
/// frame entropy over that sufficient statistic with binomial weights
/// reproduces the brute-force 2^M enumeration.
pub fn exact_mi_geiger(order: u64, n_a: f64, n_b: f64) -> Result<f64> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "PPM order {order} must be ≥ 2"
        )));
    }
    if !(n_a >= 0.0) || !(n_b >= 0.0) {
        return Err(Error::InvalidParameter(
            "strengths must be nonnegative".into(),
        ));
    }
    let m = order as f64;
    let e_s = m * n_a;
    let (_, a) = geigerize(&pulse_slot_pmf(e_s, n_b)?);
    let (_, b) = geigerize(&empty_slot_pmf(n_b)?);

    let (ln_a, ln_na) = (ln_or_neg_inf(a), ln_or_neg_inf(1.0 - a));
    let (ln_b, ln_nb) = (ln_or_neg_inf(b), ln_or_neg_inf(1.0 - b));

    // H(B) over patterns grouped by total click count t.
    let mut h_b = 0.0;
    let mut comp = 0.0;
    let mean_clicks = a + (m - 1.0) * b;
    let spread = (m * b * (1.0 - b) + 1.0).sqrt();
    let mut negligible_run = 0usize;
    for t in 0..=order {
        let tf = t as f64;
        // Click at the pulse slot, t−1 clicks among the empty slots...
        let with_pulse = if t == 0 {
            f64::NEG_INFINITY
        } else {
            tf.ln() + ln_a + weighted_ln(tf - 1.0, ln_b) + weighted_ln(m - tf, ln_nb)
        };
        // ...or no click at the pulse slot and t clicks among the rest.
        let without = if t == order {
            f64::NEG_INFINITY
        } else {
            (m - tf).ln() + ln_na + weighted_ln(tf, ln_b) + weighted_ln(m - 1.0 - tf, ln_nb)
        };
        let ln_p = log_sum_exp2(with_pulse, without) - m.ln();
        if ln_p == f64::NEG_INFINITY {
            continue;
        }
        let ln_weight = ln_binomial(order, t) + ln_p;
        let term = -ln_weight.exp() * ln_p * LOG2_E;
        let y = term - comp;
        let s = h_b + y;
        comp = (s - h_b) - y;
        h_b = s;
        if tf > mean_clicks + 10.0 * spread + 10.0 {
            if term.abs() < 1e-18 {
                negligible_run += 1;
                if negligible_run > 4 {
                    break;
                }
            } else {
                negligible_run = 0;
            }
        }
    }
    let h_b_given_x = binary_entropy_bits(a) + (m - 1.0) * binary_entropy_bits(b);
    Ok((h_b - h_b_given_x).clamp(0.0, m.log2()))
}

/// Per-slot log-likelihood-ratio lookup for a PPM frame.
pub(crate) struct LlrTable {
    e_s: f64,
    n_b: f64,
    table: Vec<f64>,
}

impl LlrTable {
    pub(crate) fn new(e_s: f64, n_b: f64) -> Result<Self> {
        let k_hi = if n_b > 0.0 && e_s > 0.0 {
            pulse_slot_pmf(e_s, n_b)?.k_max() + 16
        } else {
            64
        };
        let table = (0..=k_hi)
            .map(|k| log_likelihood_ratio(k, e_s, n_b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { e_s, n_b, table })
    }

    pub(crate) fn get(&self, k: usize) -> f64 {
        match self.table.get(k) {
            Some(&v) => v,
            None => log_likelihood_ratio(k, self.e_s, self.n_b)
                .expect("parameters validated at construction"),
        }
    }
}

/// Monte-Carlo mutual-information estimate for an M-ary PPM frame.
///
/// Uses the likelihood-ratio identity
/// I = E[log₂(M·λ(K_x) / Σ_j λ(K_j))] with the pulse in a uniformly
/// random slot. Frames are sharded into fixed-size blocks with one child
/// stream per block, so the estimate is bit-identical for a given
/// `(seed, stream)` regardless of the number of worker threads.
pub fn mi_monte_carlo(
    order: u64,
    n_a: f64,
    n_b: f64,
    detector: DetectorKind,
    n_samples: u64,
    stream: &RngStream,
) -> Result<MiEstimate> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "PPM order {order} must be ≥ 2"
        )));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 1000 Monte-Carlo frames, got {n_samples}"
        )));
    }
    if !(n_a >= 0.0) || !(n_b >= 0.0) {
        return Err(Error::InvalidParameter(
            "strengths must be nonnegative".into(),
        ));
    }
    let e_s = order as f64 * n_a;
    let llr = LlrTable::new(e_s, n_b)?;
    let (_, click_pulse) = geigerize(&pulse_slot_pmf(e_s, n_b)?);
    let (_, click_empty) = geigerize(&empty_slot_pmf(n_b)?);

    let n_blocks = n_samples.div_ceil(MC_BLOCK);
    let sums: Vec<(f64, f64, u64)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream.split(block);
            let frames = MC_BLOCK.min(n_samples - block * MC_BLOCK);
            let mut sum = 0.0;
            let mut comp = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..frames {
                let z = simulate_frame(order, e_s, n_b, detector, &llr,
                                       click_pulse, click_empty, &mut rng);
                let y = z - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                sum_sq += z * z;
            }
            (sum, sum_sq, frames)
        })
        .collect();

    let mut total = 0.0;
    let mut total_sq = 0.0;
    let mut n = 0u64;
    for (s, sq, c) in sums {
        total += s;
        total_sq += sq;
        n += c;
    }
    let mean = total / n as f64;
    let var = (total_sq / n as f64 - mean * mean).max(0.0);
    Ok(MiEstimate {
        bits: mean,
        std_err: (var / (n as f64 - 1.0)).sqrt(),
    })
}

/// PNR-detection Monte-Carlo mutual information.
pub fn mi_monte_carlo_pnr(
    order: u64,
    n_a: f64,
    n_b: f64,
    n_samples: u64,
    stream: &RngStream,
) -> Result<MiEstimate> {
    mi_monte_carlo(order, n_a, n_b, DetectorKind::Pnr, n_samples, stream)
}

#[allow(clippy::too_many_arguments)]
fn simulate_frame(
    order: u64,
    e_s: f64,
    n_b: f64,
    detector: DetectorKind,
    llr: &LlrTable,
    click_pulse: f64,
    click_empty: f64,
    rng: &mut RngStream,
) -> f64 {
    let x = rng.below(order);
    // Per-slot log likelihood ratios of the realized counts.
    let slot_llr = |pulse: bool, rng: &mut RngStream| -> f64 {
        let amp = if pulse { e_s.sqrt() } else { 0.0 };
        let k = sample_count(amp, n_b, rng);
        match detector {
            DetectorKind::Pnr => llr.get(k as usize),
            DetectorKind::Geiger => {
                if k > 0 {
                    ln_or_neg_inf(click_pulse) - ln_or_neg_inf(click_empty)
                } else {
                    ln_or_neg_inf(1.0 - click_pulse) - ln_or_neg_inf(1.0 - click_empty)
                }
            }
        }
    };
    let mut vals = Vec::with_capacity(order as usize);
    for j in 0..order {
        vals.push(slot_llr(j == x, rng));
    }
    info_density(&vals, x as usize)
}

/// Per-frame information density log₂(M·λ(K_x)/Σ_j λ(K_j)) from the
/// per-slot log likelihood ratios; its expectation is the frame mutual
/// information.
pub(crate) fn info_density(slot_llrs: &[f64], x: usize) -> f64 {
    let m = slot_llrs.len() as f64;
    let l_x = slot_llrs[x];
    if l_x == f64::INFINITY {
        // Only the pulse slot can be infinitely favored (n_b = 0, k > 0).
        return m.log2();
    }
    let hi = slot_llrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for &l in slot_llrs {
        if l > f64::NEG_INFINITY {
            acc += (l - hi).exp();
        }
    }
    let lse = hi + acc.ln();
    m.log2() + (l_x - lse) * LOG2_E
}

fn sample_count(amp: f64, n_b: f64, rng: &mut RngStream) -> u64 {
    let field_re;
    let field_im;
    if n_b > 0.0 {
        let sigma = (n_b / 2.0).sqrt();
        field_re = amp + sigma * rng.standard_normal();
        field_im = sigma * rng.standard_normal();
    } else {
        field_re = amp;
        field_im = 0.0;
    }
    let intensity = field_re * field_re + field_im * field_im;
    sample_poisson(intensity, rng).expect("intensity is finite and nonnegative")
}

/// Default order candidates: powers of two from 2 to 2²⁴.
pub fn default_orders() -> Vec<u64> {
    (1..=24).map(|m| 1u64 << m).collect()
}

/// Pick the order maximizing the relative-entropy PIE lower bound.
///
/// Candidates with pulse energy above [`MAX_OPTIMIZER_PULSE_ENERGY`] are
/// skipped; ties break toward the smaller order. For Geiger detection the
/// returned design carries the exact mutual information of the optimum.
pub fn optimize_order(
    n_a: f64,
    n_b: f64,
    detector: DetectorKind,
    candidates: &[u64],
) -> Result<PpmDesign> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no order candidates".into()));
    }
    if !(n_a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_a = {n_a} must be > 0"
        )));
    }
    let mut orders: Vec<u64> = candidates
        .iter()
        .copied()
        .filter(|&m| m >= 2 && m as f64 * n_a <= MAX_OPTIMIZER_PULSE_ENERGY)
        .collect();
    orders.sort_unstable();
    orders.dedup();
    if orders.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no candidate order ≥ 2 has pulse energy ≤ {MAX_OPTIMIZER_PULSE_ENERGY} \
             at n_a = {n_a}"
        )));
    }
    let mut best: Option<(u64, f64)> = None;
    for &order in &orders {
        let bound = ppm_pie_lower_bound(order, n_a, n_b, detector)?;
        match best {
            Some((_, b)) if bound <= b => {}
            _ => best = Some((order, bound)),
        }
    }
    let (order, pie_lower_bound) = best.unwrap();
    let mi = match detector {
        DetectorKind::Geiger => Some(MiEstimate {
            bits: exact_mi_geiger(order, n_a, n_b)?,
            std_err: 0.0,
        }),
        DetectorKind::Pnr => None,
    };
    Ok(PpmDesign {
        order,
        n_a,
        n_b,
        detector,
        pie_lower_bound,
        pulse_energy: order as f64 * n_a,
        mi,
    })
}

/// Capacity per unit cost: sup over pulse energy of D(p₁(E)‖p₀)/E, in
/// bits per photon.
///
/// For PNR detection this approaches the Holevo asymptote log₂(1+1/n_b);
/// for Geiger detection it is strictly smaller.
pub fn verdu_pie_limit(n_b: f64, detector: DetectorKind) -> Result<f64> {
    if !(n_b > 0.0) {
        return Err(Error::Divergent(
            "capacity per unit cost diverges at n_b = 0".into(),
        ));
    }
    let objective = |e: f64| -> Result<f64> { Ok(frame_divergence(e, n_b, detector)? / e) };

    // Dense log-grid scan, then golden-section refinement around the
    // best cell. The scan guards against spurious local optima.
    let (lo, hi) = (1e-3f64, MAX_OPTIMIZER_PULSE_ENERGY);
    let points = 121usize;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let grid: Vec<f64> = (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect();
    for (i, &e) in grid.iter().enumerate() {
        let v = objective(e)?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = grid[best_i.saturating_sub(1)];
    let b = grid[(best_i + 1).min(points - 1)];
    if a == b {
        return Ok(best_v);
    }
    // Golden-section on [a, b] in log-energy.
    let (mut la, mut lb) = (a.ln(), b.ln());
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = lb - phi * (lb - la);
    let mut x2 = la + phi * (lb - la);
    let mut f1 = objective(x1.exp())?;
    let mut f2 = objective(x2.exp())?;
    for _ in 0..60 {
        if f1 < f2 {
            la = x1;
            x1 = x2;
            f1 = f2;
            x2 = la + phi * (lb - la);
            f2 = objective(x2.exp())?;
        } else {
            lb = x2;
            x2 = x1;
            f2 = f1;
            x1 = lb - phi * (lb - la);
            f1 = objective(x1.exp())?;
        }
        if lb - la < 1e-10 {
            break;
        }
    }
    Ok(best_v.max(f1).max(f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{pie_asymptote, Scheme};
    use approx::assert_relative_eq;

    #[test]
    fn kl_self_is_zero() {
        let p = pulse_slot_pmf(0.5, 1e-3).unwrap();
        let d = relative_entropy(&p, &p).unwrap();
        assert!(d.bits.abs() < 1e-14);
        let poi = pulse_slot_pmf(1.0, 0.0).unwrap();
        assert!(relative_entropy(&poi, &poi).unwrap().bits.abs() < 1e-14);
    }

    #[test]
    fn kl_pinned_value() {
        // Arbitrary-precision term-by-term oracle.
        let p = pulse_slot_pmf(0.5, 1e-3).unwrap();
        let q = empty_slot_pmf_covering(1e-3, p.k_max()).unwrap();
        let d = relative_entropy(&p, &q).unwrap();
        assert_relative_eq!(d.bits, 3.6548639250315922, max_relative = 1e-10);
        assert!(d.error_bound < 1e-8);
    }

    #[test]
    fn kl_support_violation_is_infinite() {
        let p = pulse_slot_pmf(1.0, 0.0).unwrap();
        let q = empty_slot_pmf(0.0).unwrap();
        assert_eq!(relative_entropy(&p, &q).unwrap().bits, f64::INFINITY);
    }

    #[test]
    fn binary_kl_oracle() {
        assert_eq!(binary_relative_entropy(0.3, 0.3), 0.0);
        assert_eq!(binary_relative_entropy(0.3, 0.0), f64::INFINITY);
        // Closed-form check.
        let (a, b) = (0.4, 0.1);
        let expect = 0.4 * (4.0f64).log2() + 0.6 * (0.6f64 / 0.9).log2();
        assert_relative_eq!(binary_relative_entropy(a, b), expect, max_relative = 1e-14);
    }

    #[test]
    fn bound_cap_active() {
        // Strong pulse: D far exceeds log2 M, the alphabet cap binds.
        let bound = ppm_pie_lower_bound(4, 5.0, 1e-3, DetectorKind::Pnr).unwrap();
        assert_relative_eq!(bound, 2.0 / 20.0, max_relative = 1e-12);
        // Noiseless Geiger: infinite divergence, cap binds too.
        let bound = ppm_pie_lower_bound(8, 0.5, 0.0, DetectorKind::Geiger).unwrap();
        assert_relative_eq!(bound, 3.0 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn bound_geiger_matches_binary_oracle() {
        let (order, n_a, n_b) = (16u64, 0.05, 1e-2);
        let e_s = 0.8;
        let a = 1.0 - (-e_s / 1.01f64).exp() / 1.01;
        let b = 1e-2 / 1.01;
        let d = binary_relative_entropy(a, b);
        let expect = d.min(4.0) / e_s;
        let bound = ppm_pie_lower_bound(order, n_a, n_b, DetectorKind::Geiger).unwrap();
        assert_relative_eq!(bound, expect, max_relative = 1e-12);
    }

    #[test]
    fn bound_small_na() {
        let bound = ppm_pie_lower_bound(2, 1e-4, 1e-2, DetectorKind::Geiger).unwrap();
        assert!(bound > 0.0 && bound < 1.0);
    }

    // Brute-force oracle: enumerate all 2^M click patterns.
    fn brute_force_mi_geiger(order: u64, n_a: f64, n_b: f64) -> f64 {
        let m = order as usize;
        let e_s = order as f64 * n_a;
        let (_, a) = geigerize(&pulse_slot_pmf(e_s, n_b).unwrap());
        let (_, b) = geigerize(&empty_slot_pmf(n_b).unwrap());
        let mut mi = 0.0;
        let mut comp = 0.0;
        for pattern in 0u32..(1 << m) {
            let mut p_y = 0.0;
            let mut cond = Vec::with_capacity(m);
            for x in 0..m {
                let mut p = 1.0;
                for slot in 0..m {
                    let click = pattern >> slot & 1 == 1;
                    let q = if slot == x { a } else { b };
                    p *= if click { q } else { 1.0 - q };
                }
                cond.push(p);
                p_y += p / m as f64;
            }
            if p_y == 0.0 {
                continue;
            }
            for &p in &cond {
                if p > 0.0 {
                    let term = p / m as f64 * (p / p_y).log2();
                    let y = term - comp;
                    let t = mi + y;
                    comp = (t - mi) - y;
                    mi = t;
                }
            }
        }
        mi
    }

    #[test]
    fn exact_mi_matches_brute_force() {
        for &(order, n_a, n_b) in &[
            (2u64, 0.3, 1e-2),
            (4, 0.1, 1e-2),
            (8, 0.05, 1e-3),
            (16, 0.2, 0.05),
        ] {
            let fast = exact_mi_geiger(order, n_a, n_b).unwrap();
            let brute = brute_force_mi_geiger(order, n_a, n_b);
            assert!(
                (fast - brute).abs() < 1e-12,
                "M={order}: {fast} vs {brute}"
            );
        }
    }

    #[test]
    fn exact_mi_limits() {
        // Noiseless bright pulse: perfect identification.
        let mi = exact_mi_geiger(8, 10.0, 0.0).unwrap();
        assert_relative_eq!(mi, 3.0, max_relative = 1e-10);
        // No signal: zero information.
        assert_eq!(exact_mi_geiger(8, 0.0, 1e-2).unwrap(), 0.0);
    }

    #[test]
    fn exact_mi_large_order() {
        let mi = exact_mi_geiger(1 << 20, 1e-5, 1e-3).unwrap();
        assert!(mi > 0.0 && mi <= 20.0);
    }

    #[test]
    fn mc_zero_signal() {
        let s = RngStream::new(11, 0);
        let est = mi_monte_carlo_pnr(4, 0.0, 1e-2, 10_000, &s).unwrap();
        assert_eq!(est.bits, 0.0);
    }

    #[test]
    fn mc_noiseless_limit() {
        let s = RngStream::new(12, 0);
        let est = mi_monte_carlo_pnr(8, 2.5, 0.0, 20_000, &s).unwrap();
        // E_s = 20: erasures are ~2e-9, estimate ≈ log2 8.
        assert!((est.bits - 3.0).abs() < 3.0 * est.std_err + 1e-6, "{est:?}");
    }

    #[test]
    fn mc_geiger_matches_exact() {
        let s = RngStream::new(13, 0);
        let exact = exact_mi_geiger(4, 0.1, 1e-2).unwrap();
        let est =
            mi_monte_carlo(4, 0.1, 1e-2, DetectorKind::Geiger, 200_000, &s).unwrap();
        assert!(
            (est.bits - exact).abs() < 3.0 * est.std_err,
            "exact {exact}, MC {est:?}"
        );
    }

    #[test]
    fn mc_deterministic() {
        let s = RngStream::new(14, 7);
        let a = mi_monte_carlo_pnr(4, 0.1, 1e-2, 50_000, &s).unwrap();
        let b = mi_monte_carlo_pnr(4, 0.1, 1e-2, 50_000, &s).unwrap();
        assert_eq!(a.bits.to_bits(), b.bits.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
    }

    #[test]
    fn data_processing_geiger_below_pnr() {
        let s = RngStream::new(15, 0);
        for &(order, n_a, n_b) in &[(4u64, 0.2, 1e-2), (8, 0.1, 1e-3)] {
            let geiger = exact_mi_geiger(order, n_a, n_b).unwrap();
            let pnr = mi_monte_carlo_pnr(order, n_a, n_b, 200_000, &s.split(order)).unwrap();
            assert!(
                geiger <= pnr.bits + 3.0 * pnr.std_err,
                "M={order}: geiger {geiger} vs pnr {pnr:?}"
            );
            assert!(pnr.bits >= 0.0 && pnr.bits <= (order as f64).log2() + 1e-9);
        }
    }

    #[test]
    fn optimize_single_candidate() {
        let d = optimize_order(1e-2, 1e-3, DetectorKind::Pnr, &[64]).unwrap();
        assert_eq!(d.order, 64);
        assert_relative_eq!(d.pulse_energy, 0.64, max_relative = 1e-12);
        assert!(d.pie_lower_bound > 0.0);
    }

    #[test]
    fn optimal_order_grows_as_signal_weakens() {
        let orders = default_orders();
        let m1 = optimize_order(1e-3, 1e-3, DetectorKind::Pnr, &orders)
            .unwrap()
            .order;
        let m2 = optimize_order(1e-5, 1e-3, DetectorKind::Pnr, &orders)
            .unwrap()
            .order;
        assert!(m2 > m1, "M(1e-3) = {m1}, M(1e-5) = {m2}");
    }

    #[test]
    fn optimal_order_grows_with_noise() {
        // More background needs more pulse energy before the divergence
        // reaches the alphabet cap, so the optimal order moves up.
        let orders = default_orders();
        let noisy = optimize_order(1e-3, 1e-2, DetectorKind::Pnr, &orders)
            .unwrap()
            .order;
        let quiet = optimize_order(1e-3, 1e-5, DetectorKind::Pnr, &orders)
            .unwrap()
            .order;
        assert!(noisy > quiet, "noisy M = {noisy}, quiet M = {quiet}");
    }

    #[test]
    fn optimize_respects_energy_cap() {
        // All candidates above the cap: rejected.
        assert!(optimize_order(1.0, 1e-3, DetectorKind::Pnr, &[1 << 12]).is_err());
        let d = optimize_order(1.0, 1e-3, DetectorKind::Pnr, &[4, 1 << 12]).unwrap();
        assert_eq!(d.order, 4);
    }

    #[test]
    fn optimized_pie_below_holevo() {
        let holevo = pie_asymptote(Scheme::Holevo, 1e-3).unwrap();
        for detector in [DetectorKind::Pnr, DetectorKind::Geiger] {
            let d = optimize_order(1e-4, 1e-3, detector, &default_orders()).unwrap();
            assert!(d.pie_lower_bound <= holevo + 1e-6);
        }
    }

    #[test]
    fn verdu_matches_holevo_for_pnr() {
        for &n_b in &[1e-4, 1e-3, 1e-2] {
            let limit = verdu_pie_limit(n_b, DetectorKind::Pnr).unwrap();
            let holevo = pie_asymptote(Scheme::Holevo, n_b).unwrap();
            assert!(
                ((limit - holevo) / holevo).abs() < 0.01,
                "n_b = {n_b}: {limit} vs {holevo}"
            );
            let geiger = verdu_pie_limit(n_b, DetectorKind::Geiger).unwrap();
            assert!(geiger < limit, "n_b = {n_b}: geiger {geiger} ≥ pnr {limit}");
        }
        assert!(verdu_pie_limit(0.0, DetectorKind::Pnr).is_err());
    }
}
