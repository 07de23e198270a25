//! Detection statistics and decision rules: spectral, pre-transformed
//! spectral, exhaustive-search likelihood tests, and the Wishart
//! min-quadratic test.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{Element, FiniteGroup, GroupSpec, RepType, Representation};
use crate::linalg::{extreme_eigenpair, Which};
use crate::models::{pair_frequencies, ModelId, Observation, SampleBundle};
use crate::noise::NoiseModel;
use crate::rng::derive_seed;

/// Largest number of candidates an exhaustive search will enumerate.
pub const MAX_CANDIDATES: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Spiked,
    Unspiked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    Eigenvector(DVector<f64>),
    Assignment(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Squared overlap with the truth (spectral tests) or the fraction of
    /// vertices recovered up to a global shift (exhaustive tests).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    /// Set when the test carries no information (e.g. β = 0).
    #[serde(default)]
    pub uninformative: bool,
}

impl DetectionOutcome {
    fn above(statistic: f64, threshold: f64) -> Self {
        Self {
            statistic,
            threshold,
            decision: if statistic > threshold { Decision::Spiked } else { Decision::Unspiked },
            witness: None,
            correlation: None,
            uninformative: false,
        }
    }

    fn below(statistic: f64, threshold: f64) -> Self {
        Self {
            decision: if statistic < threshold { Decision::Spiked } else { Decision::Unspiked },
            ..Self::above(statistic, threshold)
        }
    }

    pub fn is_spiked(&self) -> bool {
        self.decision == Decision::Spiked
    }
}

/// How to set a decision threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// The asymptotic rule (with the default margin for spectral tests).
    Asymptotic,
    /// A fixed value, e.g. from [`Calibration`].
    Fixed(f64),
}

fn squared_overlap(v: &DVector<f64>, x: Option<&DVector<f64>>) -> Option<f64> {
    let x = x?;
    let nx = x.norm();
    (nx > 0.0).then(|| (v.dot(x) / nx).powi(2))
}

fn wigner_matrix(bundle: &SampleBundle) -> Result<&DMatrix<f64>> {
    match (&bundle.model, &bundle.observation) {
        (ModelId::GaussianWigner | ModelId::Wigner, Observation::Real { y }) => Ok(y),
        _ => Err(Error::Config("expected a Wigner-type bundle".into())),
    }
}

/// Top eigenvalue of Y against `2 + n^{-1/3}` (or a fixed edge).
pub fn pca_detect(bundle: &SampleBundle, rule: Rule) -> Result<DetectionOutcome> {
    let y = wigner_matrix(bundle)?;
    let n = y.nrows() as f64;
    let threshold = match rule {
        Rule::Asymptotic => 2.0 + n.powf(-1.0 / 3.0),
        Rule::Fixed(t) => t,
    };
    let top = extreme_eigenpair(y, Which::Max)?;
    let mut out = DetectionOutcome::above(top.value, threshold);
    out.correlation = squared_overlap(&top.vector, bundle.spike_vector());
    out.witness = Some(Witness::Eigenvector(top.vector));
    Ok(out)
}

/// `f(√n Y)` entrywise with `f = −p′/p`, diagonal zero.
pub fn score_transform(y: &DMatrix<f64>, noise: &NoiseModel) -> Result<DMatrix<f64>> {
    let n = y.nrows();
    let root = (n as f64).sqrt();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = noise.score(root * y[(i, j)])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `λ_max(f(√n Y))/√n` against `2√F + √F n^{-1/3}` (or a fixed edge).
pub fn pretransformed_pca(bundle: &SampleBundle, noise: &NoiseModel, rule: Rule) -> Result<DetectionOutcome> {
    let y = wigner_matrix(bundle)?;
    let n = y.nrows() as f64;
    let threshold = match rule {
        Rule::Asymptotic => {
            let root_f = noise.fisher_information()?.sqrt();
            root_f * (2.0 + n.powf(-1.0 / 3.0))
        }
        Rule::Fixed(t) => t,
    };
    let m = score_transform(y, noise)?;
    let top = extreme_eigenpair(&m, Which::Max)?;
    let mut out = DetectionOutcome::above(top.value / n.sqrt(), threshold);
    out.correlation = squared_overlap(&top.vector, bundle.spike_vector());
    out.witness = Some(Witness::Eigenvector(top.vector));
    Ok(out)
}

/// Maximizes `Σ_{u<v} cost[u][v][g_u][g_v]` over `g ∈ [L]^n` with `g_0`
/// pinned to `pinned`, by depth-first search split across workers.
fn max_pairwise(n: usize, l: usize, pinned: usize, cost: &[Vec<Vec<f64>>]) -> Result<(f64, Vec<usize>)> {
    let candidates = (l as f64).powi(n as i32 - 1);
    if candidates > MAX_CANDIDATES {
        return Err(Error::SearchSpaceTooLarge(candidates));
    }
    // cost index for the pair (u, v), u < v
    let idx = |u: usize, v: usize| u * n + v;
    let pair = |u: usize, v: usize, a: usize, b: usize| cost[idx(u, v)][a][b];

    fn dfs(
        depth: usize,
        g: &mut Vec<usize>,
        acc: f64,
        n: usize,
        l: usize,
        pair: &dyn Fn(usize, usize, usize, usize) -> f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if depth == n {
            if acc > best.0 {
                *best = (acc, g.clone());
            }
            return;
        }
        for a in 0..l {
            let gain: f64 = (0..depth).map(|u| pair(u, depth, g[u], a)).sum();
            g.push(a);
            dfs(depth + 1, g, acc + gain, n, l, pair, best);
            g.pop();
        }
    }

    // enumerate a prefix of the free coordinates to get parallel work items
    let mut prefix_len = 1;
    while prefix_len < n && l.pow(prefix_len as u32 - 1) < 64 {
        prefix_len += 1;
    }
    let items = l.pow(prefix_len as u32 - 1);
    let best = (0..items)
        .into_par_iter()
        .map(|code| {
            let mut g = vec![pinned];
            let mut c = code;
            for _ in 1..prefix_len {
                g.push(c % l);
                c /= l;
            }
            let mut acc = 0.0;
            for v in 1..prefix_len {
                for u in 0..v {
                    acc += pair(u, v, g[u], g[v]);
                }
            }
            let mut best = (f64::NEG_INFINITY, Vec::new());
            dfs(prefix_len, &mut g, acc, n, l, &pair, &mut best);
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(best)
}

/// Fraction of vertices with `g_u = g*_u h`, maximized over the global
/// shift h.
pub fn recovered_fraction(group: &FiniteGroup, g: &[usize], truth: &[usize]) -> f64 {
    let n = g.len() as f64;
    (0..group.order())
        .map(|h| g.iter().zip(truth).filter(|&(&a, &b)| a == group.mul(b, h)).count() as f64 / n)
        .fold(0.0, f64::max)
}

fn finite_truth(bundle: &SampleBundle) -> Option<Vec<usize>> {
    bundle.group_spike().map(|s| {
        s.iter()
            .filter_map(|e| match e {
                Element::Finite(i) => Some(*i),
                Element::Angle(_) => None,
            })
            .collect()
    })
}

fn group_table(bundle: &SampleBundle) -> Result<&Vec<Vec<usize>>> {
    match &bundle.observation {
        Observation::GroupTable { y } => Ok(y),
        _ => Err(Error::Config("expected a truth-or-Haar bundle".into())),
    }
}

/// Number of edges u < v with `Y_uv = g_u g_v⁻¹`.
pub fn toh_satisfied_edges(bundle: &SampleBundle, group: &FiniteGroup, g: &[usize]) -> Result<usize> {
    let y = group_table(bundle)?;
    let n = y.len();
    Ok((0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| y[u][v] == group.relative(g[u], g[v]))
        .count())
}

/// The asymptotic truth-or-Haar rule `Np′ − n log n` with
/// `p′ = p + (1−p)/L`, `p = p̃/√n`.
pub fn toh_asymptotic_threshold(n: usize, l: usize, p_tilde: f64) -> f64 {
    let nf = n as f64;
    let p = p_tilde / nf.sqrt();
    let pp = p + (1.0 - p) / l as f64;
    nf * (nf - 1.0) / 2.0 * pp - nf * nf.ln()
}

/// `T = max_g T(g)` over all assignments with `g_1` fixed to the identity.
/// `p_tilde` is the alternative used by the asymptotic rule.
pub fn toh_exhaustive_test(bundle: &SampleBundle, group: &GroupSpec, p_tilde: f64, rule: Rule) -> Result<DetectionOutcome> {
    let g = group
        .finite()
        .ok_or_else(|| Error::Config("exhaustive search needs a finite group".into()))?;
    let y = group_table(bundle)?;
    let (n, l) = (y.len(), g.order());
    let mut cost = vec![Vec::new(); n * n];
    for u in 0..n {
        for v in u + 1..n {
            cost[u * n + v] = (0..l)
                .map(|a| (0..l).map(|b| f64::from(u8::from(y[u][v] == g.relative(a, b)))).collect())
                .collect();
        }
    }
    let (stat, best) = max_pairwise(n, l, g.identity(), &cost)?;
    let threshold = match rule {
        Rule::Asymptotic => toh_asymptotic_threshold(n, l, p_tilde),
        Rule::Fixed(t) => t,
    };
    let mut out = DetectionOutcome::above(stat, threshold);
    // ties at the threshold count as spiked: T ≥ threshold
    if stat >= threshold {
        out.decision = Decision::Spiked;
    }
    out.correlation = finite_truth(bundle).map(|t| recovered_fraction(g, &best, &t));
    out.witness = Some(Witness::Assignment(best));
    Ok(out)
}

/// `Re Tr(A* M B)` for complex matrices, halved for quaternionic type so
/// that it equals the real part of the quaternion trace.
fn real_trace(rep: &Representation, a: &DMatrix<Complex64>, m: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let t = (a.adjoint() * m * b).trace().re;
    if rep.rep_type == RepType::Quaternionic {
        t / 2.0
    } else {
        t
    }
}

fn gsynch_parts<'a>(
    bundle: &'a SampleBundle,
    freqs: &[Representation],
    lambdas: &[f64],
) -> Result<(Vec<(Representation, f64)>, &'a Vec<DMatrix<Complex64>>)> {
    let ys = match &bundle.observation {
        Observation::Complex { y } => y,
        _ => return Err(Error::Config("expected a synchronization bundle".into())),
    };
    let pairs = pair_frequencies(freqs, lambdas)?;
    let labels: Vec<&str> = pairs.iter().map(|p| p.0.label.as_str()).collect();
    if labels != bundle.params.freqs.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Config(format!(
            "frequencies {labels:?} do not match the bundle's {:?}",
            bundle.params.freqs
        )));
    }
    Ok((pairs, ys))
}

/// `T(g) = Σ_ρ λ_ρ β_ρ d_ρ Tr(V_ρ(g)* Y_ρ V_ρ(g))`.
pub fn gsynch_statistic(bundle: &SampleBundle, freqs: &[Representation], lambdas: &[f64], g: &[Element]) -> Result<f64> {
    let (pairs, ys) = gsynch_parts(bundle, freqs, lambdas)?;
    let n = bundle.n();
    let mut total = 0.0;
    for ((rep, lambda), y) in pairs.iter().zip(ys) {
        let cd = rep.complex_dim();
        let mats: Vec<_> = g.iter().map(|&e| rep.matrix(e)).collect();
        let mut s = 0.0;
        for u in 0..n {
            for v in 0..n {
                let block = y.view((u * cd, v * cd), (cd, cd)).into_owned();
                s += real_trace(rep, &mats[u], &block, &mats[v]);
            }
        }
        total += lambda * (rep.weight() / rep.dim) as f64 * s;
    }
    Ok(total)
}

/// The asymptotic synchronization rule `Σ n λ²βd² − √(n log n)`.
pub fn gsynch_asymptotic_threshold(n: usize, pairs: &[(Representation, f64)]) -> f64 {
    let nf = n as f64;
    pairs.iter().map(|(r, l)| nf * l * l * r.weight() as f64).sum::<f64>() - (nf * nf.ln()).sqrt()
}

/// `T = max_g T(g)` over a finite group with `g_1` fixed to the identity;
/// `lambdas` are the alternative's signal strengths, which weight T.
pub fn gsynch_exhaustive_test(
    bundle: &SampleBundle,
    group: &GroupSpec,
    freqs: &[Representation],
    lambdas: &[f64],
    rule: Rule,
) -> Result<DetectionOutcome> {
    let g = group
        .finite()
        .ok_or_else(|| Error::Config("exhaustive search needs a finite group".into()))?;
    let (pairs, ys) = gsynch_parts(bundle, freqs, lambdas)?;
    let (n, l) = (bundle.n(), g.order());
    let candidates = (l as f64).powi(n as i32 - 1);
    if candidates > MAX_CANDIDATES {
        return Err(Error::SearchSpaceTooLarge(candidates));
    }
    // diagonal blocks contribute Tr(Y_uu) whatever g is
    let mut constant = 0.0;
    let mut cost = vec![Vec::new(); n * n];
    for ((rep, lambda), y) in pairs.iter().zip(ys) {
        let cd = rep.complex_dim();
        let c = lambda * (rep.weight() / rep.dim) as f64;
        let mats: Vec<_> = (0..l).map(|a| rep.matrix(Element::Finite(a))).collect();
        for u in 0..n {
            let block = y.view((u * cd, u * cd), (cd, cd)).into_owned();
            constant += c * real_trace(rep, &mats[0], &block, &mats[0]);
            for v in u + 1..n {
                let block = y.view((u * cd, v * cd), (cd, cd)).into_owned();
                let entry = &mut cost[u * n + v];
                if entry.is_empty() {
                    *entry = vec![vec![0.0; l]; l];
                }
                for a in 0..l {
                    for b in 0..l {
                        // the (v, u) block is the adjoint, contributing the same real part
                        entry[a][b] += 2.0 * c * real_trace(rep, &mats[a], &block, &mats[b]);
                    }
                }
            }
        }
    }
    let (best_val, best) = max_pairwise(n, l, g.identity(), &cost)?;
    let stat = constant + best_val;
    let threshold = match rule {
        Rule::Asymptotic => gsynch_asymptotic_threshold(n, &pairs),
        Rule::Fixed(t) => t,
    };
    let mut out = DetectionOutcome::above(stat, threshold);
    if stat >= threshold {
        out.decision = Decision::Spiked;
    }
    out.correlation = finite_truth(bundle).map(|t| recovered_fraction(g, &best, &t));
    out.witness = Some(Witness::Assignment(best));
    Ok(out)
}

/// Candidate spikes for the min-quadratic test.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidates {
    /// All `±1/√n` vectors modulo global sign.
    Hypercube,
    List(Vec<DVector<f64>>),
}

/// `T = min_x xᵀYx / n` over the candidates (Y = XXᵀ, unit-norm x), with
/// the decision "spiked" iff `T < (1+β+ε)/γ`.
pub fn wishart_min_quadratic_test(
    bundle: &SampleBundle,
    candidates: &Candidates,
    beta: f64,
    gamma: f64,
    eps: f64,
    rule: Rule,
) -> Result<DetectionOutcome> {
    let y = match &bundle.observation {
        Observation::Wishart { y, .. } => y,
        _ => return Err(Error::Config("expected a Wishart bundle".into())),
    };
    if beta > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the min-quadratic test needs beta ≤ 0, got {beta}"
        )));
    }
    let n = y.nrows();
    let (stat, witness) = match candidates {
        Candidates::Hypercube => {
            let (q, s) = hypercube_min_quadratic(y)?;
            let nf = n as f64;
            (q / (nf * nf), DVector::from_iterator(n, s.iter().map(|&v| v / nf.sqrt())))
        }
        Candidates::List(list) => {
            if list.is_empty() {
                return Err(Error::Config("empty candidate list".into()));
            }
            list.par_iter()
                .map(|x| ((x.transpose() * y * x)[(0, 0)] / n as f64, x.clone()))
                .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
                .expect("non-empty")
        }
    };
    let uninformative = beta == 0.0;
    let threshold = match rule {
        Rule::Fixed(t) => t,
        Rule::Asymptotic if uninformative => 1.0 / gamma,
        Rule::Asymptotic => (1.0 + beta + eps) / gamma,
    };
    let mut out = DetectionOutcome::below(stat, threshold);
    out.uninformative = uninformative;
    out.correlation = squared_overlap(&witness, bundle.spike_vector());
    out.witness = Some(Witness::Eigenvector(witness));
    Ok(out)
}

/// `min sᵀYs` over `s ∈ {±1}^n` with `s_1 = +1`, enumerated in Gray-code
/// order with O(n) updates per flip.
fn hypercube_min_quadratic(y: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let n = y.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let free = n - 1;
    if 2f64.powi(free as i32) > MAX_CANDIDATES {
        return Err(Error::SearchSpaceTooLarge(2f64.powi(free as i32)));
    }
    // split the top bits across workers, Gray-code the rest
    let split = free.min(6);
    let inner = free - split;
    (0..1usize << split)
        .into_par_iter()
        .map(|hi| {
            let mut s = vec![1.0; n];
            for b in 0..split {
                if hi >> b & 1 == 1 {
                    s[1 + inner + b] = -1.0;
                }
            }
            let sv = DVector::from_column_slice(&s);
            let mut r = y * &sv;
            let mut q = sv.dot(&r);
            let mut best = (q, s.clone());
            for k in 1..(1usize << inner) {
                let j = 1 + k.trailing_zeros() as usize;
                let sj = s[j];
                q += -4.0 * sj * r[j] + 4.0 * y[(j, j)];
                for i in 0..n {
                    r[i] -= 2.0 * sj * y[(i, j)];
                }
                s[j] = -sj;
                if q < best.0 {
                    best = (q, s.clone());
                }
            }
            best
        })
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::InvalidParameter("no candidates".into()))
}

/// A threshold set by null Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub threshold: f64,
    pub quantile: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Named desk-scale thresholds, stored as JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub entries: BTreeMap<String, CalibrationEntry>,
}

impl Calibration {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).map(|e| e.threshold)
    }
}

/// Runs `statistic` on `trials` null draws (seeds derived from `seed`) and
/// returns the empirical `quantile` of the results.
pub fn calibrate_null<F>(trials: usize, seed: u64, quantile: f64, statistic: F) -> Result<CalibrationEntry>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if trials == 0 || !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidParameter("calibration needs trials ≥ 1 and a quantile in [0, 1]".into()));
    }
    let mut stats = (0..trials)
        .into_par_iter()
        .map(|i| statistic(derive_seed(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    let pos = quantile * (trials - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    let threshold = stats[lo] + (pos - lo as f64) * (stats[hi] - stats[lo]);
    Ok(CalibrationEntry {
        threshold,
        quantile,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_gaussian_wigner, sample_gsynch, sample_toh, sample_wishart};
    use crate::priors::SpikePrior;

    #[test]
    fn strong_spike_is_detected() {
        let b = sample_gaussian_wigner(3.0, &SpikePrior::Spherical, 300, 1).unwrap();
        let out = pca_detect(&b, Rule::Asymptotic).unwrap();
        assert!(out.is_spiked());
        assert!(out.correlation.unwrap() > 0.8);
        let b = sample_gaussian_wigner(0.0, &SpikePrior::Spherical, 300, 1).unwrap();
        assert!(!pca_detect(&b, Rule::Asymptotic).unwrap().is_spiked());
    }

    #[test]
    fn gaussian_score_transform_only_drops_diagonal() {
        let b = sample_gaussian_wigner(1.0, &SpikePrior::IidRademacher, 40, 3).unwrap();
        let y = b.real_matrix().unwrap();
        let m = score_transform(y, &NoiseModel::gaussian()).unwrap();
        let root = (40f64).sqrt();
        for i in 0..40 {
            for j in 0..40 {
                let want = if i == j { 0.0 } else { root * y[(i, j)] };
                assert!((m[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn toh_search_finds_planted_assignment() {
        let g = GroupSpec::from_id("zl:3").unwrap();
        let b = sample_toh(3.0, &g, 9, 8).unwrap();
        let fg = g.finite().unwrap();
        let truth = finite_truth(&b).unwrap();
        let planted = toh_satisfied_edges(&b, fg, &truth).unwrap();
        let out = toh_exhaustive_test(&b, &g, 3.0, Rule::Fixed(0.0)).unwrap();
        assert!(out.statistic >= planted as f64);
        let Some(Witness::Assignment(best)) = &out.witness else { panic!() };
        assert_eq!(best[0], fg.identity());
        assert_eq!(toh_satisfied_edges(&b, fg, best).unwrap() as f64, out.statistic);
    }

    #[test]
    fn gsynch_search_matches_direct_statistic() {
        let g = GroupSpec::from_id("s3").unwrap();
        let freqs = g.frequencies(&[1, 2]).unwrap();
        let b = sample_gsynch(&[1.2], &g, &freqs, 5, 2).unwrap();
        let out = gsynch_exhaustive_test(&b, &g, &freqs, &[1.2], Rule::Asymptotic).unwrap();
        let Some(Witness::Assignment(best)) = &out.witness else { panic!() };
        let els: Vec<_> = best.iter().map(|&i| Element::Finite(i)).collect();
        let direct = gsynch_statistic(&b, &freqs, &[1.2], &els).unwrap();
        assert!((direct - out.statistic).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn gray_code_matches_brute_force() {
        let b = sample_wishart(0.8, -0.5, &SpikePrior::IidRademacher, 9, 4).unwrap();
        let Observation::Wishart { y, .. } = &b.observation else { panic!() };
        let (q, s) = hypercube_min_quadratic(y).unwrap();
        let brute = (0..1u32 << 8)
            .map(|m| {
                let s = DVector::from_fn(9, |i, _| if i > 0 && m >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 });
                (s.transpose() * y * &s)[(0, 0)]
            })
            .fold(f64::INFINITY, f64::min);
        assert!((q - brute).abs() < 1e-9 * brute.abs());
        let sv = DVector::from_column_slice(&s);
        assert!(((sv.transpose() * y * &sv)[(0, 0)] - q).abs() < 1e-8 * q.abs());
    }

    #[test]
    fn zero_beta_is_uninformative() {
        let b = sample_wishart(0.8, 0.0, &SpikePrior::IidRademacher, 8, 0).unwrap();
        let out = wishart_min_quadratic_test(&b, &Candidates::Hypercube, 0.0, 0.8, 0.05, Rule::Asymptotic).unwrap();
        assert!(out.uninformative);
        assert_eq!(out.threshold, 1.0 / 0.8);
    }

    #[test]
    fn search_space_limit() {
        let g = GroupSpec::from_id("zl:10").unwrap();
        let b = sample_toh(1.0, &g, 12, 0).unwrap();
        assert!(matches!(
            toh_exhaustive_test(&b, &g, 1.0, Rule::Asymptotic),
            Err(Error::SearchSpaceTooLarge(_))
        ));
    }

    #[test]
    fn calibration_quantile() {
        let e = calibrate_null(101, 0, 0.9, |s| Ok((s % 1000) as f64)).unwrap();
        assert!(e.threshold > 0.0);
        let e = calibrate_null(11, 0, 0.5, |s| Ok(derive_seed(0, 0).wrapping_sub(s) as f64)).unwrap();
        assert_eq!(e.trials, 11);
    }
}
