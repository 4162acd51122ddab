//! Temporal-mode decomposition and matched-filter spectral analysis.
//!
//! The signal occupies the fundamental Gauss-Hermite waveform u₀(t) with
//! broadband noise populating the whole basis u_n(t). The matched filter
//! f(t) ∝ u₀*(−t) is realized as a spectral filter with unit peak
//! amplitude transmission; its output concentrates the signal mode around
//! t = 0. Power transfer coefficients θ_n(Δt) measure how much of each
//! mode's power lands in a detection window of duration Δt, and the
//! efficiency/selectivity trade-off quantifies what spectral filtering
//! can and cannot reject.
//!
//! Time is dimensionless with the Gauss-Hermite width parameter equal
//! to one.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::stream::RngStream;
use crate::{Error, Result};

/// Margin (in mode widths) required between a mode's classical turning
/// point and both the grid extent and the Nyquist frequency.
const RESOLUTION_MARGIN: f64 = 8.0;

/// Relative spectral energy allowed at the grid edge before the transform
/// is declared aliased.
const ALIAS_TOLERANCE: f64 = 1e-8;

/// Uniform time grid t_j = −T + j·Δ, j = 0..N−1, with Δ = 2T/N.
///
/// The right endpoint is excluded (periodic FFT convention); index N/2
/// sits exactly at t = 0.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    points: Vec<f64>,
    dt: f64,
    half_extent: f64,
}

impl TimeGrid {
    /// The reference grid: 4096 points over t ∈ [−20, 20).
    pub fn reference() -> Self {
        Self::new(4096, 20.0).expect("reference grid is valid")
    }

    pub fn new(n: usize, half_extent: f64) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid size {n} must be even and ≥ 16"
            )));
        }
        if !(half_extent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid half-extent {half_extent} must be positive"
            )));
        }
        let dt = 2.0 * half_extent / n as f64;
        let points = (0..n).map(|j| -half_extent + j as f64 * dt).collect();
        Ok(Self {
            points,
            dt,
            half_extent,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Trapezoid quadrature of real samples on this grid.
    pub fn trapezoid(&self, vals: &[f64]) -> f64 {
        let total: f64 = vals.iter().sum();
        self.dt * (total - 0.5 * vals[0] - 0.5 * vals[vals.len() - 1])
    }

    fn check_mode_resolution(&self, n: usize) -> Result<()> {
        // Classical turning point of u_n in time and frequency.
        let reach = (2.0 * n as f64 + 1.0).sqrt() + RESOLUTION_MARGIN;
        let omega_max = std::f64::consts::PI / self.dt;
        if reach > self.half_extent || reach > omega_max {
            return Err(Error::Resolution(format!(
                "mode {n} needs extent and bandwidth ≥ {reach:.1}, grid offers \
                 extent {:.1}, bandwidth {omega_max:.1}",
                self.half_extent
            )));
        }
        Ok(())
    }
}

/// Sampled Gauss-Hermite mode u_n(t) = H_n(t)e^{−t²/2}/(π^{1/2}2^n n!)^{1/2}.
///
/// Evaluated by the normalized recurrence u_n = √(2/n)·t·u_{n−1} −
/// √((n−1)/n)·u_{n−2}, which stays bounded for all n and never forms raw
/// Hermite polynomials or factorials.
pub fn hermite_mode(n: usize, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.check_mode_resolution(n)?;
    let norm0 = std::f64::consts::PI.powf(-0.25);
    let mut prev: Vec<f64> = Vec::new();
    let mut cur: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| norm0 * (-0.5 * t * t).exp())
        .collect();
    for k in 1..=n {
        let a = (2.0 / k as f64).sqrt();
        let b = ((k - 1) as f64 / k as f64).sqrt();
        let next: Vec<f64> = grid
            .points()
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let lower = if k == 1 { 0.0 } else { b * prev[j] };
                a * t * cur[j] - lower
            })
            .collect();
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// An orthonormal stack of the first `n_modes` Gauss-Hermite modes.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    grid: TimeGrid,
    modes: Vec<Vec<f64>>,
}

impl ModeBasis {
    pub fn new(n_modes: usize, grid: &TimeGrid) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("basis needs ≥ 1 mode".into()));
        }
        let modes = (0..n_modes)
            .map(|n| hermite_mode(n, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            modes,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, n: usize) -> &[f64] {
        &self.modes[n]
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// ⟨u_m, u_n⟩ under trapezoid quadrature.
    pub fn inner(&self, m: usize, n: usize) -> f64 {
        let prod: Vec<f64> = self.modes[m]
            .iter()
            .zip(&self.modes[n])
            .map(|(&a, &b)| a * b)
            .collect();
        self.grid.trapezoid(&prod)
    }
}

fn fft_shift<T: Copy>(v: &mut [T]) {
    let half = v.len() / 2;
    v.rotate_left(half);
}

/// Apply the peak-normalized matched spectral filter to a sampled field.
///
/// The field is transformed to the frequency domain, multiplied by the
/// transfer function H(ω) = F(ω)/max|F| with F the spectrum of
/// f(t) = u₀*(−t), and transformed back.
pub fn matched_filter_apply(field: &[Complex64], grid: &TimeGrid) -> Result<Vec<Complex64>> {
    let n = grid.len();
    if field.len() != n {
        return Err(Error::InvalidParameter(format!(
            "field length {} does not match grid length {n}",
            field.len()
        )));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    // Filter spectrum: f(t) = u0*(-t) = u0(t) for the real even Gaussian mode.
    let filter_time = hermite_mode(0, grid)?;
    let mut filter_freq: Vec<Complex64> = filter_time
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    fft_shift(&mut filter_freq); // index 0 ↔ t = 0
    fft.process(&mut filter_freq);
    let peak = filter_freq
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap();

    let mut spec: Vec<Complex64> = field.to_vec();
    fft_shift(&mut spec);
    fft.process(&mut spec);

    // Aliasing check: relative spectral energy at the grid-edge frequency.
    let max_energy = spec.iter().map(|c| c.norm_sqr()).fold(0.0f64, f64::max);
    let edge_energy = spec[n / 2].norm_sqr();
    if max_energy > 0.0 && edge_energy / max_energy > ALIAS_TOLERANCE {
        return Err(Error::Resolution(format!(
            "aliasing detected: edge/peak spectral energy = {:.3e}",
            edge_energy / max_energy
        )));
    }

    let mut out: Vec<Complex64> = spec
        .iter()
        .zip(&filter_freq)
        .map(|(&s, &h)| s * h / peak)
        .collect();
    ifft.process(&mut out);
    let scale = 1.0 / n as f64;
    for c in out.iter_mut() {
        *c *= scale;
    }
    fft_shift(&mut out);
    Ok(out)
}

/// Matched-filter output (f ⋆ u_n)(t) sampled on the grid.
pub fn matched_filter_response(n: usize, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    let mode = hermite_mode(n, grid)?;
    let field: Vec<Complex64> = mode.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    matched_filter_apply(&field, grid)
}

fn windowed_energy(intensity: &[f64], grid: &TimeGrid, window: f64) -> Result<f64> {
    if !(window >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window {window} must be ≥ 0"
        )));
    }
    if window == 0.0 {
        return Ok(0.0);
    }
    let half = window / 2.0;
    if half > grid.half_extent() {
        return Err(Error::Extent(format!(
            "window {window} exceeds grid extent ±{}",
            grid.half_extent()
        )));
    }
    // Cumulative trapezoid, then evaluation at ±window/2 with linear
    // interpolation of the integrand at the partial end cells.
    let pts = grid.points();
    let dt = grid.dt();
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0);
    for j in 1..pts.len() {
        cum.push(cum[j - 1] + 0.5 * dt * (intensity[j - 1] + intensity[j]));
    }
    let eval = |x: f64| -> f64 {
        let pos = (x - pts[0]) / dt;
        let j = (pos.floor() as usize).min(pts.len() - 2);
        let frac = pos - j as f64;
        let i_x = intensity[j] * (1.0 - frac) + intensity[j + 1] * frac;
        cum[j] + 0.5 * frac * dt * (intensity[j] + i_x)
    };
    Ok(eval(half) - eval(-half))
}

/// θ_n(Δt): fraction of mode-n power passing the filter into the window.
pub fn power_transfer(n: usize, window: f64, grid: &TimeGrid) -> Result<f64> {
    let out = matched_filter_response(n, grid)?;
    let intensity: Vec<f64> = out.iter().map(|c| c.norm_sqr()).collect();
    windowed_energy(&intensity, grid, window)
}

/// Power transfer coefficients for a stack of modes over a window grid.
#[derive(Debug, Clone)]
pub struct TransferProfile {
    /// Sorted detection windows Δt.
    pub windows: Vec<f64>,
    /// theta[n][w] = θ_n(windows[w]) ∈ [0, 1].
    pub theta: Vec<Vec<f64>>,
}

pub fn transfer_profile(
    n_modes: usize,
    windows: &[f64],
    grid: &TimeGrid,
) -> Result<TransferProfile> {
    if n_modes == 0 || windows.is_empty() {
        return Err(Error::InvalidParameter(
            "need ≥ 1 mode and a nonempty window grid".into(),
        ));
    }
    if windows.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("windows must be sorted".into()));
    }
    let mut theta = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let out = matched_filter_response(n, grid)?;
        let intensity: Vec<f64> = out.iter().map(|c| c.norm_sqr()).collect();
        let row = windows
            .iter()
            .map(|&w| windowed_energy(&intensity, grid, w))
            .collect::<Result<Vec<_>>>()?;
        theta.push(row);
    }
    Ok(TransferProfile {
        windows: windows.to_vec(),
        theta,
    })
}

/// One point of the efficiency/selectivity trade-off.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TradeoffPoint {
    pub window: f64,
    /// θ₀(Δt): fraction of signal-mode power collected.
    pub efficiency: f64,
    /// θ₀ / Σ_{n=0..n_max} θ_n: fraction of collected power that is signal.
    pub selectivity: f64,
}

/// Default mode-sum cutoff for the selectivity denominator.
pub const DEFAULT_MODE_CUTOFF: usize = 32;

/// Efficiency vs selectivity over a grid of detection windows.
///
/// `n_max` is the highest mode included in the selectivity denominator;
/// the sum must have converged, i.e. θ_{n_max}(max Δt) < 1e−6.
pub fn tradeoff_curve(
    n_max: usize,
    windows: &[f64],
    grid: &TimeGrid,
) -> Result<Vec<TradeoffPoint>> {
    let profile = transfer_profile(n_max + 1, windows, grid)?;
    let last_mode = &profile.theta[n_max];
    let tail = last_mode.last().copied().unwrap_or(0.0);
    if n_max > 0 && tail >= 1e-6 {
        return Err(Error::Convergence(format!(
            "mode sum not converged: θ_{n_max}(Δt = {}) = {tail:.3e} ≥ 1e-6; \
             raise n_max or shrink the window range",
            profile.windows.last().unwrap()
        )));
    }
    Ok(profile
        .windows
        .iter()
        .enumerate()
        .map(|(w, &window)| {
            let total: f64 = profile.theta.iter().map(|row| row[w]).sum();
            let efficiency = profile.theta[0][w];
            let selectivity = if total > 0.0 { efficiency / total } else { 1.0 };
            TradeoffPoint {
                window,
                efficiency,
                selectivity,
            }
        })
        .collect())
}

/// One realization of the noisy multimode field in the mode basis.
#[derive(Debug, Clone)]
pub struct NoiseField {
    /// Mode amplitudes; entry 0 is α + β₀, entries n ≥ 1 are β_n.
    pub amplitudes: Vec<Complex64>,
}

/// Draw i.i.d. circular Gaussian mode amplitudes with ⟨|β|²⟩ = n_b and add
/// the signal amplitude `alpha` to mode 0.
pub fn sample_noise_field(
    n_modes: usize,
    n_b: f64,
    alpha: Complex64,
    stream: &mut RngStream,
) -> Result<NoiseField> {
    if n_modes == 0 {
        return Err(Error::InvalidParameter("need ≥ 1 mode".into()));
    }
    if !(n_b >= 0.0) {
        return Err(Error::InvalidParameter(format!("n_b = {n_b} must be ≥ 0")));
    }
    let sigma = (n_b / 2.0).sqrt();
    let mut amplitudes = Vec::with_capacity(n_modes);
    for i in 0..n_modes {
        let beta = if n_b > 0.0 {
            Complex64::new(
                sigma * stream.standard_normal(),
                sigma * stream.standard_normal(),
            )
        } else {
            Complex64::new(0.0, 0.0)
        };
        amplitudes.push(if i == 0 { alpha + beta } else { beta });
    }
    Ok(NoiseField { amplitudes })
}
