//! Modulation formats on the M·B⁻¹ × B time-frequency area and the
//! structured Hadamard receiver.
//!
//! PPM and FSK place one pulse of energy M·n_a in one of M time or
//! frequency bins; BPSK-Hadamard spreads that energy evenly with ±√n_a
//! amplitudes taken from rows of a Sylvester Hadamard matrix. The
//! structured receiver applies the unitary H/√M, converting a Hadamard
//! word into a PPM pulse, so all three formats induce the same channel.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::photodetection::{
    empty_slot_pmf, geigerize, pulse_slot_pmf, sample_poisson, DetectorKind,
};
use crate::ppm::{info_density, LlrTable, MiEstimate};
use crate::stream::RngStream;
use crate::{Error, Result};

/// Frames per simulation shard; part of the reproducibility contract.
const SIM_BLOCK: u64 = 4096;

/// Modulation format for one M-ary symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Ppm,
    Fsk,
    HadamardBpsk,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Ppm => "ppm",
            Format::Fsk => "fsk",
            Format::HadamardBpsk => "hadamard-bpsk",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ppm" => Ok(Format::Ppm),
            "fsk" => Ok(Format::Fsk),
            "hadamard-bpsk" | "hadamard" | "bpsk" => Ok(Format::HadamardBpsk),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (expected ppm, fsk, or hadamard-bpsk)"
            ))),
        }
    }
}

/// One modulation symbol as a length-M amplitude vector, in √photons
/// per slot (time bins for PPM/Hadamard, frequency bins for FSK).
#[derive(Debug, Clone)]
pub struct SymbolWord {
    pub amplitudes: Vec<Complex64>,
    pub format: Format,
    pub index: u64,
    pub order: u64,
}

impl SymbolWord {
    /// Total energy Σ|a_i|² in photons.
    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Sylvester Hadamard sign matrix.
#[derive(Debug, Clone)]
pub struct HadamardCode {
    pub order: u64,
    pub rows: Vec<Vec<i8>>,
}

fn require_power_of_two(m: u64) -> Result<()> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::UnsupportedOrder(format!(
            "order {m} is not a power of two"
        )));
    }
    Ok(())
}

/// Sylvester construction: entry (i, j) = (−1)^popcount(i & j).
pub fn hadamard_matrix(order: u64) -> Result<HadamardCode> {
    require_power_of_two(order)?;
    let rows = (0..order)
        .map(|i| {
            (0..order)
                .map(|j| if (i & j).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect();
    Ok(HadamardCode { order, rows })
}

/// Build the amplitude word for one symbol; every format carries total
/// energy M·n_a.
pub fn encode_symbol(format: Format, index: u64, order: u64, n_a: f64) -> Result<SymbolWord> {
    if order < 1 {
        return Err(Error::InvalidParameter("order must be ≥ 1".into()));
    }
    if index >= order {
        return Err(Error::InvalidParameter(format!(
            "symbol index {index} out of range for order {order}"
        )));
    }
    if !(n_a >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_a = {n_a} must be ≥ 0"
        )));
    }
    let amplitudes = match format {
        Format::Ppm | Format::Fsk => {
            let mut v = vec![Complex64::ZERO; order as usize];
            v[index as usize] = Complex64::new((order as f64 * n_a).sqrt(), 0.0);
            v
        }
        Format::HadamardBpsk => {
            require_power_of_two(order)?;
            let amp = n_a.sqrt();
            (0..order)
                .map(|j| {
                    let sign = if (index & j).count_ones() % 2 == 0 { amp } else { -amp };
                    Complex64::new(sign, 0.0)
                })
                .collect()
        }
    };
    Ok(SymbolWord {
        amplitudes,
        format,
        index,
        order,
    })
}

// In-place fast Walsh-Hadamard transform (unnormalized).
fn fwht(v: &mut [Complex64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Apply the structured receiver unitary H/√M. A noiseless Hadamard word
/// of index r comes out as a PPM pulse √(M·n_a)·e_r.
pub fn structured_receive(amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
    require_power_of_two(amplitudes.len() as u64)?;
    let mut out = amplitudes.to_vec();
    fwht(&mut out);
    let scale = 1.0 / (amplitudes.len() as f64).sqrt();
    for a in &mut out {
        *a *= scale;
    }
    Ok(out)
}

/// Frame error rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FrameErrorRate {
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

fn wilson_interval(errors: u64, n: u64) -> FrameErrorRate {
    let z = 1.959963984540054f64; // 97.5% normal quantile
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    FrameErrorRate {
        rate: p,
        wilson_low: (center - half).max(0.0),
        wilson_high: (center + half).min(1.0),
    }
}

/// Outcome of an end-to-end link simulation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LinkSimReport {
    pub frames: u64,
    pub detector: DetectorKind,
    pub format: Format,
    pub order: u64,
    pub n_a: f64,
    pub n_b: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub fer: FrameErrorRate,
    pub mi: MiEstimate,
}

struct FrameChannel {
    order: u64,
    n_b: f64,
    detector: DetectorKind,
    llr: LlrTable,
    ln_click_ratio: f64,
    ln_silence_ratio: f64,
}

impl FrameChannel {
    fn new(order: u64, n_a: f64, n_b: f64, detector: DetectorKind) -> Result<Self> {
        let e_s = order as f64 * n_a;
        let (_, click_pulse) = geigerize(&pulse_slot_pmf(e_s, n_b)?);
        let (_, click_empty) = geigerize(&empty_slot_pmf(n_b)?);
        let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        Ok(Self {
            order,
            n_b,
            detector,
            llr: LlrTable::new(e_s, n_b)?,
            ln_click_ratio: ln(click_pulse) - ln(click_empty),
            ln_silence_ratio: ln(1.0 - click_pulse) - ln(1.0 - click_empty),
        })
    }

    fn slot_llr(&self, count: u64) -> f64 {
        match self.detector {
            DetectorKind::Pnr => self.llr.get(count as usize),
            DetectorKind::Geiger => {
                if count > 0 {
                    self.ln_click_ratio
                } else {
                    self.ln_silence_ratio
                }
            }
        }
    }

    // One frame: (decoded == sent, information density in bits).
    fn run(&self, format: Format, n_a: f64, rng: &mut RngStream) -> (bool, f64) {
        let x = rng.below(self.order);
        let word = encode_symbol(format, x, self.order, n_a)
            .expect("configuration validated before simulation");
        let mut field = word.amplitudes;
        if self.n_b > 0.0 {
            let sigma = (self.n_b / 2.0).sqrt();
            for a in &mut field {
                *a += Complex64::new(
                    sigma * rng.standard_normal(),
                    sigma * rng.standard_normal(),
                );
            }
        }
        if format == Format::HadamardBpsk {
            field = structured_receive(&field)
                .expect("order validated before simulation");
        }
        let mut llrs = Vec::with_capacity(self.order as usize);
        let mut best = f64::NEG_INFINITY;
        let mut decoded = 0u64;
        for (j, a) in field.iter().enumerate() {
            let count = sample_poisson(a.norm_sqr(), rng)
                .expect("slot intensity is finite and nonnegative");
            let l = self.slot_llr(count);
            if l > best {
                best = l;
                decoded = j as u64;
            }
            llrs.push(l);
        }
        (decoded == x, info_density(&llrs, x as usize))
    }
}

/// Monte-Carlo simulation of one M-ary link.
///
/// Each frame draws a uniform symbol, adds circular Gaussian background
/// of variance n_b per slot, applies the structured receiver for
/// Hadamard words, photodetects every slot, and decodes by maximum
/// likelihood with ties broken toward the lowest index. Frames shard
/// into fixed blocks with one child stream each, so results are
/// bit-identical regardless of worker count.
pub fn simulate_link(
    format: Format,
    order: u64,
    n_a: f64,
    n_b: f64,
    detector: DetectorKind,
    n_frames: u64,
    stream: &RngStream,
) -> Result<LinkSimReport> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "order {order} must be ≥ 2"
        )));
    }
    if format == Format::HadamardBpsk {
        require_power_of_two(order)?;
    }
    if n_frames < 100 {
        return Err(Error::InvalidParameter(format!(
            "need ≥ 100 frames, got {n_frames}"
        )));
    }
    if !(n_a >= 0.0) || !(n_b >= 0.0) {
        return Err(Error::InvalidParameter(
            "strengths must be nonnegative".into(),
        ));
    }
    let channel = FrameChannel::new(order, n_a, n_b, detector)?;
    let n_blocks = n_frames.div_ceil(SIM_BLOCK);
    let partials: Vec<(u64, f64, f64, u64)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream.split(block);
            let frames = SIM_BLOCK.min(n_frames - block * SIM_BLOCK);
            let mut errors = 0u64;
            let mut sum = 0.0;
            let mut comp = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..frames {
                let (ok, z) = channel.run(format, n_a, &mut rng);
                if !ok {
                    errors += 1;
                }
                let y = z - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                sum_sq += z * z;
            }
            (errors, sum, sum_sq, frames)
        })
        .collect();

    let mut errors = 0u64;
    let mut total = 0.0;
    let mut total_sq = 0.0;
    for (e, s, sq, _) in partials {
        errors += e;
        total += s;
        total_sq += sq;
    }
    let n = n_frames as f64;
    let mean = total / n;
    let var = (total_sq / n - mean * mean).max(0.0);
    Ok(LinkSimReport {
        frames: n_frames,
        detector,
        format,
        order,
        n_a,
        n_b,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
        fer: wilson_interval(errors, n_frames),
        mi: MiEstimate {
            bits: mean,
            std_err: (var / (n - 1.0)).sqrt(),
        },
    })
}

/// Cross-format consistency report: the three formats induce the same
/// channel, so their simulated statistics must agree.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivalenceReport {
    pub reports: Vec<LinkSimReport>,
    /// Largest pairwise |ΔMI| in combined standard errors.
    pub max_mi_sigma: f64,
    /// Largest pairwise |ΔFER| in combined binomial standard errors.
    pub max_fer_sigma: f64,
    /// True when every pairwise deviation is within 3σ.
    pub consistent: bool,
}

/// Simulate PPM, FSK, and Hadamard-BPSK with a common stream and check
/// pairwise agreement of MI and FER within 3σ.
pub fn format_equivalence_check(
    order: u64,
    n_a: f64,
    n_b: f64,
    detector: DetectorKind,
    n_frames: u64,
    stream: &RngStream,
) -> Result<EquivalenceReport> {
    require_power_of_two(order)?;
    let reports: Vec<LinkSimReport> = [Format::Ppm, Format::Fsk, Format::HadamardBpsk]
        .iter()
        .map(|&f| simulate_link(f, order, n_a, n_b, detector, n_frames, stream))
        .collect::<Result<_>>()?;
    let mut max_mi_sigma = 0.0f64;
    let mut max_fer_sigma = 0.0f64;
    let n = n_frames as f64;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let (a, b) = (&reports[i], &reports[j]);
            let mi_se = (a.mi.std_err.powi(2) + b.mi.std_err.powi(2)).sqrt();
            if mi_se > 0.0 {
                max_mi_sigma = max_mi_sigma.max((a.mi.bits - b.mi.bits).abs() / mi_se);
            }
            let p = 0.5 * (a.fer.rate + b.fer.rate);
            let fer_se = (2.0 * p * (1.0 - p) / n).sqrt();
            if fer_se > 0.0 {
                max_fer_sigma =
                    max_fer_sigma.max((a.fer.rate - b.fer.rate).abs() / fer_se);
            }
        }
    }
    Ok(EquivalenceReport {
        reports,
        max_mi_sigma,
        max_fer_sigma,
        consistent: max_mi_sigma < 3.0 && max_fer_sigma < 3.0,
    })
}
