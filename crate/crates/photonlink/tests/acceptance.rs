//! Acceptance gate: one test per criterion, each printing a pass/fail line.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use photonlink::capacity::{capacity, pie_asymptote, LinkParams, Scheme};
use photonlink::modes::{transfer_profile, TimeGrid};
use photonlink::modulation::{
    encode_symbol, format_equivalence_check, structured_receive, Format,
};
use photonlink::photodetection::{pulse_slot_pmf, sample_photocount, DetectorKind};
use photonlink::ppm::{
    exact_mi_geiger, mi_monte_carlo, optimize_order, verdu_pie_limit,
};
use photonlink::stream::RngStream;

fn report(criterion: u32, name: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    match &result {
        Ok(()) => println!("acceptance criterion {criterion} ({name}): PASS [{elapsed:.2?}]"),
        Err(msg) => println!("acceptance criterion {criterion} ({name}): FAIL — {msg}"),
    }
    if let Err(msg) = result {
        panic!("criterion {criterion} failed: {msg}");
    }
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its {budget:?} runtime budget ({elapsed:?})"
    );
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn criterion_1_holevo_asymptote() {
    report(1, "Holevo asymptote", Duration::from_secs(1), || {
        let asym = pie_asymptote(Scheme::Holevo, 1e-3).map_err(|e| e.to_string())?;
        let target = 1001f64.log2();
        check((asym - target).abs() < 1e-12, || {
            format!("asymptote {asym} vs log2(1001) = {target}")
        })?;
        let p = LinkParams::new(1e-8, 1e-3).map_err(|e| e.to_string())?;
        let pie = capacity(Scheme::Holevo, p).pie;
        check(((pie - asym) / asym).abs() < 1e-4, || {
            format!("finite-n_a PIE {pie} not within 1e-4 of {asym}")
        })
    });
}

#[test]
fn criterion_2_coherent_ceilings() {
    report(2, "coherent-detection ceilings", Duration::from_secs(1), || {
        let log2e = std::f64::consts::LOG2_E;
        let het = pie_asymptote(Scheme::Heterodyne, 0.0).map_err(|e| e.to_string())?;
        let hom = pie_asymptote(Scheme::Homodyne, 0.0).map_err(|e| e.to_string())?;
        check((het - log2e).abs() < 1e-6, || {
            format!("heterodyne ceiling {het} vs {log2e}")
        })?;
        check((hom - 2.0 * log2e).abs() < 1e-6, || {
            format!("homodyne ceiling {hom} vs {}", 2.0 * log2e)
        })?;
        // The finite-n_a PIE approaches the ceilings from below.
        let p = LinkParams::new(1e-9, 0.0).map_err(|e| e.to_string())?;
        let het_f = capacity(Scheme::Heterodyne, p).pie;
        let hom_f = capacity(Scheme::Homodyne, p).pie;
        check((het_f - log2e).abs() < 1e-6 && (hom_f - 2.0 * log2e).abs() < 1e-6, || {
            format!("finite-n_a PIEs {het_f}, {hom_f} off the ceilings")
        })
    });
}

#[test]
fn criterion_3_matched_filter_ceiling() {
    report(3, "matched-filter ceiling", Duration::from_secs(10), || {
        let grid = TimeGrid::reference();
        let windows: Vec<f64> = (0..=64).map(|i| i as f64 * 0.25).collect();
        let profile = transfer_profile(9, &windows, &grid).map_err(|e| e.to_string())?;
        let theta0_16 = profile.theta[0][64];
        check((0.70705..=0.70717).contains(&theta0_16), || {
            format!("theta_0(16) = {theta0_16} outside [0.70705, 0.70717]")
        })?;
        for (n, row) in profile.theta.iter().enumerate() {
            for w in row.windows(2) {
                check(w[1] >= w[0] - 1e-12, || {
                    format!("theta_{n} not monotone in the window")
                })?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_4_photocount_statistics() {
    report(4, "photocount statistics", Duration::from_secs(30), || {
        for &e_s in &[0.1, 1.0, 10.0] {
            for &n_b in &[1e-5, 1e-3, 1e-1] {
                let pmf = pulse_slot_pmf(e_s, n_b).map_err(|e| e.to_string())?;
                let mean = pmf.mean();
                check((mean - (e_s + n_b)).abs() < 1e-10, || {
                    format!("mean({e_s}, {n_b}) = {mean} vs {}", e_s + n_b)
                })?;
            }
        }
        // Chi-square goodness of fit of the sampler against the law.
        let (e_s, n_b) = (1.0, 1e-1);
        let pmf = pulse_slot_pmf(e_s, n_b).map_err(|e| e.to_string())?;
        let n = 1_000_000u64;
        let mut rng = RngStream::new(0xACCE97, 4);
        let alpha = Complex64::new(e_s.sqrt(), 0.0);
        let mut counts = vec![0u64; pmf.k_max() + 2];
        for _ in 0..n {
            let k = sample_photocount(alpha, n_b, &mut rng).map_err(|e| e.to_string())? as usize;
            let slot = k.min(pmf.k_max() + 1);
            counts[slot] += 1;
        }
        // Merge bins until every expected count is ≥ 10.
        let mut expected: Vec<f64> = pmf.probs().iter().map(|&p| p * n as f64).collect();
        expected.push(pmf.tail_mass() * n as f64);
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut acc_e, mut acc_o) = (0.0f64, 0.0f64);
        for (e, &o) in expected.iter().zip(&counts) {
            acc_e += e;
            acc_o += o as f64;
            if acc_e >= 10.0 {
                bins.push((acc_e, acc_o));
                acc_e = 0.0;
                acc_o = 0.0;
            }
        }
        if acc_e > 0.0 {
            let last = bins.last_mut().unwrap();
            last.0 += acc_e;
            last.1 += acc_o;
        }
        let chi2: f64 = bins.iter().map(|&(e, o)| (o - e) * (o - e) / e).sum();
        let dof = (bins.len() - 1) as f64;
        let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
        check(p_value > 1e-3, || {
            format!("GOF p = {p_value:.2e} (chi2 = {chi2:.1}, dof = {dof})")
        })
    });
}

#[test]
fn criterion_5_verdu_convergence() {
    report(5, "Verdu/Holevo convergence", Duration::from_secs(60), || {
        for &n_b in &[1e-5, 1e-4, 1e-3, 1e-2] {
            let pnr = verdu_pie_limit(n_b, DetectorKind::Pnr).map_err(|e| e.to_string())?;
            let holevo = pie_asymptote(Scheme::Holevo, n_b).map_err(|e| e.to_string())?;
            check(((pnr - holevo) / holevo).abs() < 0.01, || {
                format!("n_b = {n_b}: PNR limit {pnr} vs Holevo {holevo}")
            })?;
            let geiger = verdu_pie_limit(n_b, DetectorKind::Geiger).map_err(|e| e.to_string())?;
            check(geiger < pnr, || {
                format!("n_b = {n_b}: Geiger limit {geiger} not below PNR {pnr}")
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_gap_closure() {
    report(6, "gap closure", Duration::from_secs(120), || {
        // Dense geometric order ladder up to 2^26: power-of-two-only
        // candidates quantize the pulse energy by factors of two and that
        // alone breaks strict monotonicity of the ratio.
        let orders: Vec<u64> = (16..=416)
            .map(|j| (2.0f64).powf(j as f64 / 16.0).round() as u64)
            .collect();
        let n_b = 1e-3;
        let holevo = pie_asymptote(Scheme::Holevo, n_b).map_err(|e| e.to_string())?;
        let mut prev_ratio = f64::NEG_INFINITY;
        let mut prev_order = 0u64;
        for i in 0..5 {
            let n_a = 1e-3 * 10f64.powi(-i);
            let d = optimize_order(n_a, n_b, DetectorKind::Pnr, &orders)
                .map_err(|e| e.to_string())?;
            let ratio = d.pie_lower_bound / holevo;
            check(ratio > prev_ratio, || {
                format!("ratio {ratio:.6} at n_a = {n_a} not above {prev_ratio:.6}")
            })?;
            check(d.order >= prev_order, || {
                format!("optimal order {} at n_a = {n_a} below {prev_order}", d.order)
            })?;
            prev_ratio = ratio;
            prev_order = d.order;
        }
        Ok(())
    });
}

#[test]
fn criterion_7_exact_mi_oracle() {
    report(7, "exact-MI oracle equivalence", Duration::from_secs(120), || {
        for &(order, n_a, n_b) in &[(4u64, 0.1, 1e-2), (8, 0.05, 1e-3), (16, 0.2, 0.05)] {
            let fast = exact_mi_geiger(order, n_a, n_b).map_err(|e| e.to_string())?;
            let brute = brute_force_mi_geiger(order, n_a, n_b)?;
            check((fast - brute).abs() < 1e-12, || {
                format!("M = {order}: {fast} vs brute force {brute}")
            })?;
        }
        let (order, n_a, n_b) = (8u64, 0.1, 1e-2);
        let exact = exact_mi_geiger(order, n_a, n_b).map_err(|e| e.to_string())?;
        let stream = RngStream::new(0xACCE97, 7);
        let mc = mi_monte_carlo(order, n_a, n_b, DetectorKind::Geiger, 1_000_000, &stream)
            .map_err(|e| e.to_string())?;
        check((mc.bits - exact).abs() < 3.0 * mc.std_err, || {
            format!("MC {} +/- {} vs exact {exact}", mc.bits, mc.std_err)
        })
    });
}

#[test]
fn criterion_8_structured_receiver() {
    report(8, "structured receiver", Duration::from_secs(180), || {
        let mut order = 2u64;
        while order <= 1024 {
            let n_a = 0.1;
            let peak = (order as f64 * n_a).sqrt();
            for index in [0, order - 1, order / 2] {
                let word = encode_symbol(Format::HadamardBpsk, index, order, n_a)
                    .map_err(|e| e.to_string())?;
                let out = structured_receive(&word.amplitudes).map_err(|e| e.to_string())?;
                for (j, a) in out.iter().enumerate() {
                    if j as u64 != index {
                        check(a.norm() < 1e-12 * peak, || {
                            format!("M = {order}: leakage {:.2e} at slot {j}", a.norm())
                        })?;
                    }
                }
            }
            order *= 2;
        }
        let stream = RngStream::new(0xACCE97, 8);
        let rep = format_equivalence_check(8, 0.05, 1e-3, DetectorKind::Pnr, 200_000, &stream)
            .map_err(|e| e.to_string())?;
        check(rep.consistent, || {
            format!(
                "formats inconsistent: mi sigma {:.2}, fer sigma {:.2}",
                rep.max_mi_sigma, rep.max_fer_sigma
            )
        })
    });
}

#[test]
fn criterion_9_determinism() {
    report(9, "determinism", Duration::from_secs(300), || {
        let stream = RngStream::new(0xACCE97, 9);
        let a = mi_monte_carlo(8, 0.1, 1e-2, DetectorKind::Geiger, 100_000, &stream)
            .map_err(|e| e.to_string())?;
        let b = mi_monte_carlo(8, 0.1, 1e-2, DetectorKind::Geiger, 100_000, &stream)
            .map_err(|e| e.to_string())?;
        let (ja, jb) = (
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
        );
        check(ja == jb, || format!("MC estimates differ: {ja} vs {jb}"))?;
        let ea = format_equivalence_check(8, 0.05, 1e-3, DetectorKind::Pnr, 50_000, &stream)
            .map_err(|e| e.to_string())?;
        let eb = format_equivalence_check(8, 0.05, 1e-3, DetectorKind::Pnr, 50_000, &stream)
            .map_err(|e| e.to_string())?;
        let (ja, jb) = (
            serde_json::to_string(&ea).unwrap(),
            serde_json::to_string(&eb).unwrap(),
        );
        check(ja == jb, || "equivalence reports differ across reruns".into())
    });
}

// Reference 2^M enumeration of the Geiger-mode PPM channel.
fn brute_force_mi_geiger(order: u64, n_a: f64, n_b: f64) -> Result<f64, String> {
    use photonlink::photodetection::{empty_slot_pmf, geigerize};
    let m = order as usize;
    let e_s = order as f64 * n_a;
    let (_, a) = geigerize(&pulse_slot_pmf(e_s, n_b).map_err(|e| e.to_string())?);
    let (_, b) = geigerize(&empty_slot_pmf(n_b).map_err(|e| e.to_string())?);
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
    Ok(mi)
}
