//! Closed-form channel capacities and photon information efficiency.
//!
//! Heterodyne and homodyne capacities follow the Shannon-Hartley theorem
//! with shot-noise-limited detection; the Holevo capacity is the ultimate
//! quantum limit for a channel with additive Gaussian background noise.
//! All capacities are bits per slot; the photon information efficiency
//! (PIE) is capacity divided by the mean detected signal photon number.

use crate::{Error, Result};

/// Planck's constant in J·s.
pub const PLANCK: f64 = 6.626e-34;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Detection scheme for a capacity evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Heterodyne,
    Homodyne,
    Holevo,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Heterodyne => "heterodyne",
            Scheme::Homodyne => "homodyne",
            Scheme::Holevo => "holevo",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heterodyne" | "het" => Ok(Scheme::Heterodyne),
            "homodyne" | "hom" => Ok(Scheme::Homodyne),
            "holevo" | "hol" => Ok(Scheme::Holevo),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Detected signal and background strengths for one slot.
///
/// `n_a` is the mean detected signal photon number per slot, `n_b` the mean
/// background photon number per slot per mode. Both are dimensionless; the
/// shot-noise level defines the unit. Physical link-budget fields are
/// optional and only participate in construction-time consistency checks.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    pub n_a: f64,
    pub n_b: f64,
    pub budget: Option<LinkBudget>,
}

/// Physical link budget backing a [`LinkParams`] value.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    /// Transmitter power in W.
    pub p_tx: f64,
    /// End-to-end transmission including detector efficiency, in (0, 1].
    pub eta: f64,
    /// Channel bandwidth in Hz; the slot duration is 1/B.
    pub bandwidth: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
    /// Noise power spectral density in W/Hz.
    pub n_psd: f64,
}

impl LinkParams {
    /// Dimensionless constructor.
    pub fn new(n_a: f64, n_b: f64) -> Result<Self> {
        if !(n_a >= 0.0) || !n_a.is_finite() {
            return Err(Error::InvalidParameter(format!("n_a = {n_a} must be ≥ 0")));
        }
        if !(n_b >= 0.0) || !n_b.is_finite() {
            return Err(Error::InvalidParameter(format!("n_b = {n_b} must be ≥ 0")));
        }
        Ok(Self {
            n_a,
            n_b,
            budget: None,
        })
    }

    /// Construct from a physical link budget.
    ///
    /// Converts to n_a = η·P_tx/(B·h·f_c) and n_b = N_psd/(h·f_c).
    pub fn from_budget(budget: LinkBudget) -> Result<Self> {
        let LinkBudget {
            p_tx,
            eta,
            bandwidth,
            f_c,
            n_psd,
        } = budget;
        if p_tx < 0.0 || n_psd < 0.0 {
            return Err(Error::InvalidParameter(
                "powers must be nonnegative".into(),
            ));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta = {eta} must be in (0, 1]"
            )));
        }
        if bandwidth <= 0.0 || f_c <= 0.0 {
            return Err(Error::InvalidParameter(
                "bandwidth and carrier frequency must be positive".into(),
            ));
        }
        let photon_energy = PLANCK * f_c;
        let n_a = eta * p_tx / (bandwidth * photon_energy);
        let n_b = n_psd / photon_energy;
        let mut p = Self::new(n_a, n_b)?;
        p.budget = Some(budget);
        Ok(p)
    }

    /// Check the physical-field consistency invariant to relative 1e-12.
    pub fn is_consistent(&self) -> bool {
        match self.budget {
            None => true,
            Some(b) => {
                let photon_energy = PLANCK * b.f_c;
                let n_a = b.eta * b.p_tx / (b.bandwidth * photon_energy);
                let n_b = b.n_psd / photon_energy;
                rel_close(self.n_a, n_a, 1e-12) && rel_close(self.n_b, n_b, 1e-12)
            }
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Capacity of one scheme at one operating point.
#[derive(Debug, Clone, Copy)]
pub struct CapacityResult {
    pub bits_per_slot: f64,
    /// Bits per detected signal photon. At n_a = 0 this is the n_a → 0
    /// limit (the asymptote), never 0/0.
    pub pie: f64,
    pub scheme: Scheme,
}

/// The auxiliary g(x) = (x+1)·log₂(x+1) − x·log₂x, with g(0) = 0.
///
/// For x < 1e-8 the series x·log₂(1/x) + x·log₂e is used to avoid
/// cancellation in the regime x ≪ 1.
pub fn holevo_g(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("g(x) needs x ≥ 0, got {x}")));
    }
    Ok(g_unchecked(x))
}

fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 1e-8 {
        // g(x) = x log2(1/x) + (1+x) log2(1+x) = x log2(1/x) + x log2 e + O(x^2)
        x * (1.0 / x).log2() + x * LOG2_E
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

/// Heterodyne capacity: log₂(1 + n_a/(1+n_b)).
pub fn cap_heterodyne(p: LinkParams) -> CapacityResult {
    let bits = (p.n_a / (1.0 + p.n_b)).ln_1p() * LOG2_E;
    finish(bits, p, Scheme::Heterodyne)
}

/// Homodyne capacity: ½·log₂(1 + 4n_a/(1+2n_b)).
pub fn cap_homodyne(p: LinkParams) -> CapacityResult {
    let bits = 0.5 * (4.0 * p.n_a / (1.0 + 2.0 * p.n_b)).ln_1p() * LOG2_E;
    finish(bits, p, Scheme::Homodyne)
}

/// Holevo capacity: g(n_a+n_b) − g(n_b).
///
/// At n_b = 0 this reduces to the noiseless bound g(n_a).
pub fn cap_holevo(p: LinkParams) -> CapacityResult {
    let bits = if p.n_a == 0.0 {
        0.0
    } else {
        g_unchecked(p.n_a + p.n_b) - g_unchecked(p.n_b)
    };
    finish(bits, p, Scheme::Holevo)
}

/// Evaluate the capacity of `scheme` at `p`.
pub fn capacity(scheme: Scheme, p: LinkParams) -> CapacityResult {
    match scheme {
        Scheme::Heterodyne => cap_heterodyne(p),
        Scheme::Homodyne => cap_homodyne(p),
        Scheme::Holevo => cap_holevo(p),
    }
}

fn finish(bits: f64, p: LinkParams, scheme: Scheme) -> CapacityResult {
    let pie = if p.n_a > 0.0 {
        bits / p.n_a
    } else {
        // Report the limit; diverges for the noiseless Holevo bound.
        match pie_asymptote(scheme, p.n_b) {
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        }
    };
    CapacityResult {
        bits_per_slot: bits,
        pie,
        scheme,
    }
}

/// The n_a → 0 limit of PIE in bits per photon.
///
/// Heterodyne → log₂e/(1+n_b), homodyne → 2·log₂e/(1+2n_b), Holevo →
/// log₂(1 + 1/n_b). The Holevo asymptote diverges at n_b = 0, which is
/// signaled as an error rather than returned as a number.
pub fn pie_asymptote(scheme: Scheme, n_b: f64) -> Result<f64> {
    if !(n_b >= 0.0) {
        return Err(Error::InvalidParameter(format!("n_b = {n_b} must be ≥ 0")));
    }
    match scheme {
        Scheme::Heterodyne => Ok(LOG2_E / (1.0 + n_b)),
        Scheme::Homodyne => Ok(2.0 * LOG2_E / (1.0 + 2.0 * n_b)),
        Scheme::Holevo => {
            if n_b == 0.0 {
                Err(Error::Divergent(
                    "Holevo PIE asymptote is infinite at n_b = 0".into(),
                ))
            } else {
                Ok((1.0 / n_b).ln_1p() * LOG2_E)
            }
        }
    }
}

/// One row of a capacity sweep table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepRow {
    pub n_a: f64,
    pub n_b: f64,
    pub bits_per_slot: f64,
    pub pie: f64,
}

/// Evaluate `scheme` over the outer product of an n_a grid and an n_b list.
///
/// Grids must be strictly positive and sorted ascending.
pub fn capacity_sweep(scheme: Scheme, na_grid: &[f64], nb_list: &[f64]) -> Result<Vec<SweepRow>> {
    if na_grid.is_empty() || nb_list.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    for g in [na_grid, nb_list] {
        if g.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter(
                "sweep grids must be strictly positive".into(),
            ));
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sweep grids must be strictly ascending".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(na_grid.len() * nb_list.len());
    for &n_b in nb_list {
        for &n_a in na_grid {
            let r = capacity(scheme, LinkParams::new(n_a, n_b)?);
            rows.push(SweepRow {
                n_a,
                n_b,
                bits_per_slot: r.bits_per_slot,
                pie: r.pie,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g_trivia() {
        assert_eq!(holevo_g(0.0).unwrap(), 0.0);
        assert_relative_eq!(holevo_g(1.0).unwrap(), 2.0, max_relative = 1e-15);
        // 4 log2 4 - 3 log2 3, pinned by arbitrary-precision evaluation.
        assert_relative_eq!(
            holevo_g(3.0).unwrap(),
            3.245112497836531456,
            max_relative = 1e-14
        );
        assert!(holevo_g(-1.0).is_err());
    }

    #[test]
    fn g_series_matches_direct() {
        // Direct formula vs small-x series around the switch point.
        for &x in &[1e-12, 1e-10, 3e-9, 9e-9, 1.1e-8] {
            let series: f64 = x * (1.0f64 / x).log2() + x * LOG2_E;
            let direct: f64 = (x + 1.0) * x.ln_1p() * LOG2_E - x * x.log2();
            assert_relative_eq!(series, direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn g_increasing_concave() {
        let xs: Vec<f64> = (0..200).map(|i| 1e-6 * 1.1f64.powi(i)).collect();
        for w in xs.windows(3) {
            let (a, b, c) = (
                g_unchecked(w[0]),
                g_unchecked(w[1]),
                g_unchecked(w[2]),
            );
            assert!(b > a && c > b);
        }
        // Concavity on a uniform grid.
        let h = 1e-3;
        for i in 1..500 {
            let x = i as f64 * h;
            let second = g_unchecked(x + h) - 2.0 * g_unchecked(x) + g_unchecked(x - h);
            assert!(second <= 1e-12);
        }
    }

    #[test]
    fn heterodyne_examples() {
        let r = cap_heterodyne(LinkParams::new(1.0, 0.0).unwrap());
        assert_relative_eq!(r.bits_per_slot, 1.0, max_relative = 1e-15);
        let r = cap_heterodyne(LinkParams::new(0.0, 0.5).unwrap());
        assert_eq!(r.bits_per_slot, 0.0);
        // High-precision oracle value.
        let r = cap_heterodyne(LinkParams::new(1e-3, 1e-3).unwrap());
        assert_relative_eq!(r.bits_per_slot, 1.4405343592148819e-3, max_relative = 1e-13);
    }

    #[test]
    fn homodyne_examples() {
        let r = cap_homodyne(LinkParams::new(0.75, 0.0).unwrap());
        assert_relative_eq!(r.bits_per_slot, 1.0, max_relative = 1e-15);
        let r = cap_homodyne(LinkParams::new(0.0, 0.3).unwrap());
        assert_eq!(r.bits_per_slot, 0.0);
        let r = cap_homodyne(LinkParams::new(1e-3, 1e-2).unwrap());
        assert_relative_eq!(r.bits_per_slot, 2.8232815705710312e-3, max_relative = 1e-13);
    }

    #[test]
    fn holevo_examples() {
        let r = cap_holevo(LinkParams::new(1.0, 0.0).unwrap());
        assert_relative_eq!(r.bits_per_slot, 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.pie, 2.0, max_relative = 1e-15);
        let r = cap_holevo(LinkParams::new(0.0, 1.0).unwrap());
        assert_eq!(r.bits_per_slot, 0.0);
        // Pinned by arbitrary-precision g-difference.
        let r = cap_holevo(LinkParams::new(1e-4, 1e-3).unwrap());
        assert_relative_eq!(r.bits_per_slot, 9.8974545987654579e-4, max_relative = 1e-12);
    }

    #[test]
    fn asymptote_values() {
        assert_relative_eq!(
            pie_asymptote(Scheme::Heterodyne, 0.0).unwrap(),
            LOG2_E,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pie_asymptote(Scheme::Homodyne, 0.0).unwrap(),
            2.0 * LOG2_E,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pie_asymptote(Scheme::Holevo, 1e-3).unwrap(),
            1001f64.log2(),
            max_relative = 1e-15
        );
        assert!(matches!(
            pie_asymptote(Scheme::Holevo, 0.0),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn pie_approaches_asymptote() {
        for &n_b in &[1e-5, 1e-4, 1e-3, 1e-2] {
            for scheme in [Scheme::Heterodyne, Scheme::Homodyne, Scheme::Holevo] {
                let finite = capacity(scheme, LinkParams::new(1e-8, n_b).unwrap()).pie;
                let asym = pie_asymptote(scheme, n_b).unwrap();
                assert_relative_eq!(finite, asym, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn holevo_dominates_on_grid() {
        let grid: Vec<f64> = (0..50)
            .map(|i| 1e-7 * (10f64 / 1e-7).powf(i as f64 / 49.0))
            .collect();
        for &n_a in &grid {
            for &n_b in &grid {
                let p = LinkParams::new(n_a, n_b).unwrap();
                let hol = cap_holevo(p).bits_per_slot;
                assert!(hol >= cap_heterodyne(p).bits_per_slot - 1e-12 * hol.max(1.0));
                assert!(hol >= cap_homodyne(p).bits_per_slot - 1e-12 * hol.max(1.0));
            }
        }
    }

    #[test]
    fn pie_monotone_in_na() {
        let na: Vec<f64> = (0..80)
            .map(|i| 1e-7 * (10f64 / 1e-7).powf(i as f64 / 79.0))
            .collect();
        for &n_b in &[0.0, 1e-4, 1e-2, 1.0] {
            for scheme in [Scheme::Heterodyne, Scheme::Homodyne, Scheme::Holevo] {
                let pies: Vec<f64> = na
                    .iter()
                    .map(|&a| capacity(scheme, LinkParams::new(a, n_b).unwrap()).pie)
                    .collect();
                for w in pies.windows(2) {
                    assert!(w[1] <= w[0] * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn sweep_trivial_and_errors() {
        let rows = capacity_sweep(Scheme::Holevo, &[1.0], &[1e-30]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_relative_eq!(rows[0].pie, 2.0, max_relative = 1e-6);
        assert!(capacity_sweep(Scheme::Holevo, &[], &[1.0]).is_err());
        assert!(capacity_sweep(Scheme::Holevo, &[1.0, 0.5], &[1.0]).is_err());
        assert!(capacity_sweep(Scheme::Holevo, &[0.0, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn sweep_pie_rises_toward_asymptote() {
        let rows = capacity_sweep(Scheme::Heterodyne, &[1e-6, 1e-4, 1e-2], &[1e-30]).unwrap();
        assert!(rows[0].pie > rows[1].pie && rows[1].pie > rows[2].pie);
        assert!(rows[0].pie < LOG2_E);
    }

    #[test]
    fn rule_of_thumb_bracket() {
        // At n_a = n_b the Holevo PIE sits between half the asymptote and the asymptote.
        let r = cap_holevo(LinkParams::new(1e-3, 1e-3).unwrap());
        let asym = pie_asymptote(Scheme::Holevo, 1e-3).unwrap();
        assert!(r.pie > 0.5 * asym && r.pie < asym);
    }

    #[test]
    fn budget_roundtrip() {
        let b = LinkBudget {
            p_tx: 4.0,
            eta: 0.1,
            bandwidth: 2e9,
            f_c: 1.93e14, // ~1550 nm
            n_psd: 1.3e-22,
        };
        let p = LinkParams::from_budget(b).unwrap();
        assert!(p.is_consistent());
        assert!(p.n_a > 0.0 && p.n_b > 0.0);
        assert!(LinkParams::from_budget(LinkBudget { eta: 0.0, ..b }).is_err());
        assert!(LinkParams::from_budget(LinkBudget { bandwidth: -1.0, ..b }).is_err());
    }
}
