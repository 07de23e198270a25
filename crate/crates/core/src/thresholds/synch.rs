//! Thresholds for truth-or-Haar and Gaussian synchronization.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{total_weight, Element, GroupSpec, Representation};
use crate::models::pair_frequencies;
use crate::numeric::{golden_max, log_sum_exp, multi_start_max, SimplexOptions};
use crate::report::{Diagnostics, Method, ThresholdReport};
use crate::rng::seeded;

fn toh_closed_form(l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("L must be at least 2, got {l}")));
    }
    if l == 2 {
        return Ok(1.0);
    }
    let lf = l as f64;
    Ok((2.0 * (lf - 1.0) * (lf - 1.0).ln() / (lf * (lf - 2.0))).sqrt())
}

/// `p̃*_L = √(2(L−1)log(L−1)/(L(L−2)))`, 1 at L = 2.
pub fn toh_threshold(l: usize) -> Result<ThresholdReport> {
    Ok(ThresholdReport::new(format!("toh L={l}"), toh_closed_form(l)?, Method::ClosedForm))
}

/// `√(4 log L/(L−1))`, above which exhaustive search succeeds.
pub fn toh_upper_threshold(l: usize) -> Result<ThresholdReport> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("L must be at least 2, got {l}")));
    }
    let lf = l as f64;
    Ok(ThresholdReport::new(
        format!("toh upper L={l}"),
        (4.0 * lf.ln() / (lf - 1.0)).sqrt(),
        Method::UpperBound,
    ))
}

/// Gaussian synchronization with all frequencies of a group of order L:
/// the same closed form as [`toh_threshold`].
pub fn synch_conditioning_threshold_allfreq(l: usize) -> Result<ThresholdReport> {
    Ok(ThresholdReport::new(
        format!("synch all frequencies L={l}"),
        toh_closed_form(l)?,
        Method::Conditioning,
    ))
}

/// `C_k = (L−2k)/(k(L−k) log((L−k)/k))`, with limit 2/L at k = L/2.
pub fn c_k(l: f64, k: f64) -> f64 {
    let gap = l - 2.0 * k;
    if gap.abs() < 1e-12 {
        return 2.0 / l;
    }
    gap / (k * (l - k) * (gap / k).ln_1p())
}

/// The reduced objective `(L/2)(Σα_h² − 1/L)/D(α, ᾱ)` with k coordinates
/// equal to x and the rest `(1−kx)/(L−k)`.
pub fn matrix_opt_objective(l: usize, k: usize, x: f64) -> f64 {
    let (lf, kf) = (l as f64, k as f64);
    let y = (1.0 - kf * x) / (lf - kf);
    let xlogx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    let num = kf * x * x + (lf - kf) * y * y - 1.0 / lf;
    let den = lf.ln() + kf * xlogx(x) + (lf - kf) * xlogx(y);
    lf / 2.0 * num / den
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixOptReport {
    pub l: usize,
    pub numeric_sup: f64,
    pub closed_form: f64,
    pub abs_error: f64,
    pub argmax_k: usize,
    pub argmax_x: f64,
    /// `(k, numeric optimum for this k, L·C_k/2)`.
    pub per_k: Vec<(usize, f64, f64)>,
    /// `C_k` strictly decreasing on a 1e-3 grid of [1, L/2].
    pub c_k_decreasing: bool,
    pub maximizer_matches: bool,
}

/// Maximizes the reduced objective over k ∈ {1..⌊L/2⌋} and x ∈ [0, 1/k]
/// (grid scan plus golden refinement, excluding a 1e-6 ball around
/// x = 1/L) and compares with `L(L−2)/(2(L−1)log(L−1))`.
pub fn matrix_opt_verify(l: usize) -> Result<MatrixOptReport> {
    if !(2..=64).contains(&l) {
        return Err(Error::InvalidParameter(format!("L must lie in 2..=64, got {l}")));
    }
    const GRID: usize = 4000;
    let lf = l as f64;
    let closed_form = if l == 2 {
        1.0
    } else {
        lf * (lf - 2.0) / (2.0 * (lf - 1.0) * (lf - 1.0).ln())
    };
    let centre = 1.0 / lf;
    let mut per_k = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0, 0.0);
    for k in 1..=l / 2 {
        let hi = 1.0 / k as f64;
        let f = |x: f64| {
            if (x - centre).abs() < 1e-6 || !(0.0..=hi).contains(&x) {
                f64::NEG_INFINITY
            } else {
                matrix_opt_objective(l, k, x)
            }
        };
        let (mut bx, mut bv) = (0.0, f64::NEG_INFINITY);
        for i in 0..=GRID {
            let x = hi * i as f64 / GRID as f64;
            let v = f(x);
            if v > bv {
                (bx, bv) = (x, v);
            }
        }
        let h = hi / GRID as f64;
        let (a, b) = ((bx - h).max(0.0), (bx + h).min(hi));
        // refine on each side of the excluded ball separately
        let mut cands = vec![(bx, bv)];
        for (lo, up) in [(a, b.min(centre - 1e-6)), (a.max(centre + 1e-6), b)] {
            if up > lo {
                cands.push(golden_max(f, lo, up, 1e-13));
            }
        }
        let (x, v) = cands.into_iter().fold((0.0, f64::NEG_INFINITY), |p, q| if q.1 > p.1 { q } else { p });
        per_k.push((k, v, lf * c_k(lf, k as f64) / 2.0));
        if v > best.0 {
            best = (v, k, x);
        }
    }
    let steps = ((lf / 2.0 - 1.0) / 1e-3).floor() as usize;
    let c_k_decreasing = (1..=steps).all(|i| {
        let k0 = 1.0 + (i - 1) as f64 * 1e-3;
        c_k(lf, k0 + 1e-3) < c_k(lf, k0)
    });
    let expected_x = (lf - 1.0) / lf;
    Ok(MatrixOptReport {
        l,
        numeric_sup: best.0,
        closed_form,
        abs_error: (best.0 - closed_form).abs(),
        argmax_k: best.1,
        argmax_x: best.2,
        per_k,
        c_k_decreasing,
        maximizer_matches: l == 2 || (best.1 == 1 && (best.2 - expected_x).abs() < 1e-4),
    })
}

/// The vector `Z(h)`: each `√(β_ρ d_ρ) ρ(h)` split into real components
/// and concatenated in frequency order.
pub fn z_vector(freqs: &[Representation], h: Element) -> Vec<f64> {
    freqs
        .iter()
        .flat_map(|r| {
            let s = ((r.beta() * r.dim) as f64).sqrt();
            r.real_components(h).into_iter().map(move |c| s * c)
        })
        .collect()
}

/// Quadrature nodes for Haar measure on U(1); the trapezoid rule is
/// spectrally accurate for these periodic integrands.
const U1_NODES: usize = 1024;

/// Support points of `Z(h)` under Haar measure, equally weighted.
fn z_support(group: &GroupSpec, freqs: &[Representation]) -> Vec<Vec<f64>> {
    match group {
        GroupSpec::Finite(g) => (0..g.order()).map(|h| z_vector(freqs, Element::Finite(h))).collect(),
        GroupSpec::U1 => (0..U1_NODES)
            .map(|j| z_vector(freqs, Element::Angle(2.0 * PI * j as f64 / U1_NODES as f64)))
            .collect(),
    }
}

/// `log E exp⟨Z, v⟩` over equally weighted support points.
fn z_cgf(support: &[Vec<f64>], v: &[f64]) -> f64 {
    let s: Vec<f64> = support.iter().map(|z| z.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
    let m = s.len() as f64;
    if s.iter().all(|x| x.abs() < 30.0) {
        (s.iter().map(|x| x.exp_m1()).sum::<f64>() / m).ln_1p()
    } else {
        log_sum_exp(s) - m.ln()
    }
}

/// `(σ*)² = sup_v (2/‖v‖²) log E exp⟨Z, v⟩` and `λ* = 1/σ*`. For U(1) the
/// rotation symmetry fixes the imaginary part of the first frequency's
/// coordinate at zero.
pub fn synch_subgaussian_threshold(group: &GroupSpec, freqs: &[Representation]) -> Result<ThresholdReport> {
    synch_subgaussian_threshold_with(group, freqs, 24, 0x5eed)
}

pub fn synch_subgaussian_threshold_with(
    group: &GroupSpec,
    freqs: &[Representation],
    restarts: usize,
    seed: u64,
) -> Result<ThresholdReport> {
    if freqs.is_empty() {
        return Err(Error::Config("at least one frequency is required".into()));
    }
    if freqs.iter().any(|r| r.is_trivial(group)) {
        return Err(Error::TrivialRepresentation);
    }
    let d = total_weight(freqs);
    if d > 16 {
        return Err(Error::InvalidParameter(format!("D = {d} exceeds the supported maximum of 16")));
    }
    let mut freqs = freqs.to_vec();
    crate::groups::sort_frequencies(&mut freqs);
    let support = z_support(group, &freqs);
    let reduced = matches!(group, GroupSpec::U1) && d >= 2;
    let expand = |z: &[f64]| -> Vec<f64> {
        if reduced {
            let mut v = Vec::with_capacity(d);
            v.push(z[0]);
            v.push(0.0);
            v.extend_from_slice(&z[1..]);
            v
        } else {
            z.to_vec()
        }
    };
    let objective = |z: &[f64]| {
        let v = expand(z);
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 < 1e-12 {
            return 1.0;
        }
        2.0 / r2 * z_cgf(&support, &v)
    };
    let dim = if reduced { d - 1 } else { d };
    let opts = SimplexOptions {
        initial_step: 0.1,
        max_evals: 8000,
        ..SimplexOptions::default()
    };
    let run = |count: usize, seed: u64| {
        let mut rng = seeded(seed);
        let radii = [0.4, 0.9, 1.6, 3.0];
        let starts: Vec<Vec<f64>> = (0..count)
            .map(|i| {
                let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                dir.iter().map(|x| radii[i % radii.len()] * x / norm).collect()
            })
            .collect();
        multi_start_max(&objective, &starts, opts)
    };
    let agreeing = |res: &[crate::numeric::LocalOptimum]| {
        let top = res[0].value;
        res.iter().filter(|o| (o.value - top).abs() <= 1e-6 * top.abs().max(1.0)).count()
    };
    let mut results = run(restarts.max(2), seed);
    if agreeing(&results) < 2 {
        let confirm = run(4 * restarts.max(2), seed ^ 0xc0ff_ee);
        let spread = (confirm[0].value - results[0].value).abs();
        if spread > 1e-4 && agreeing(&confirm) < 2 {
            return Err(Error::OptimizerStall { spread });
        }
        if confirm[0].value > results[0].value {
            results = confirm;
        }
    }
    let evaluations = results.iter().map(|o| o.evaluations).sum();
    let best = &results[0];
    let (sigma2, argmax) = if best.value <= 1.0 + 1e-9 {
        (1.0, vec![0.0; d])
    } else {
        let mut v = expand(&best.x);
        if matches!(group, GroupSpec::U1) {
            canonicalize_u1(&freqs, &mut v);
        }
        (best.value, v)
    };
    let spread = results
        .iter()
        .take(agreeing(&results))
        .map(|o| (o.value - best.value).abs())
        .fold(0.0, f64::max);
    let labels: Vec<&str> = freqs.iter().map(|r| r.label.as_str()).collect();
    Ok(ThresholdReport::new(
        format!("synch subgaussian {} [{}]", group.id(), labels.join(", ")),
        sigma2.sqrt().recip(),
        Method::Subgaussian,
    )
    .with_diagnostics(Diagnostics {
        objective: Some(sigma2),
        argmax: Some(argmax),
        evaluations: Some(evaluations),
        restarts: Some(results.len()),
        spread: Some(spread),
        ..Diagnostics::default()
    }))
}

/// Rotates a U(1) argmax so that the first frequency's coordinate is real
/// and nonnegative.
fn canonicalize_u1(freqs: &[Representation], v: &mut [f64]) {
    let ks: Vec<f64> = freqs
        .iter()
        .map(|r| {
            // recover k from the representation at θ = 1
            let z = r.matrix(Element::Angle(1.0))[(0, 0)];
            z.arg().round()
        })
        .collect();
    let phase = v[1].atan2(v[0]) / ks[0];
    for (j, k) in ks.iter().enumerate() {
        let (re, im) = (v[2 * j], v[2 * j + 1]);
        let a = -k * phase;
        v[2 * j] = re * a.cos() - im * a.sin();
        v[2 * j + 1] = re * a.sin() + im * a.cos();
    }
    v[1] = 0.0;
}

/// `1/√D`, `D = Σ β_ρ d_ρ²`.
pub fn synch_general_bound(freqs: &[Representation]) -> Result<ThresholdReport> {
    let d = total_weight(freqs);
    if d == 0 {
        return Err(Error::Config("at least one frequency is required".into()));
    }
    Ok(ThresholdReport::new(
        format!("synch general D={d}"),
        1.0 / (d as f64).sqrt(),
        Method::ClosedForm,
    ))
}

/// `Σ_ρ λ_ρ² β_ρ d_ρ² > 4 log L`.
pub fn synch_upper_condition(lambdas: &[f64], group: &GroupSpec, freqs: &[Representation]) -> Result<bool> {
    let l = group
        .order()
        .ok_or_else(|| Error::Config("the upper condition needs a finite group".into()))?;
    let pairs = pair_frequencies(freqs, lambdas)?;
    let s: f64 = pairs.iter().map(|(r, lam)| lam * lam * r.weight() as f64).sum();
    Ok(s > 4.0 * (l as f64).ln())
}
