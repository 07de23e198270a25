//! Samplers for the five observation models: Gaussian Wigner, general
//! (non-Gaussian) Wigner, spiked Wishart, truth-or-Haar, and Gaussian
//! synchronization.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{quaternion_block, Element, GroupSpec, RepType, Representation};
use crate::noise::NoiseModel;
use crate::priors::SpikePrior;
use crate::rng::{seeded, stream_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    GaussianWigner,
    Wigner,
    Wishart,
    Toh,
    Gsynch,
}

impl ModelId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian_wigner" | "gwig" => Ok(Self::GaussianWigner),
            "wigner" => Ok(Self::Wigner),
            "wishart" => Ok(Self::Wishart),
            "toh" => Ok(Self::Toh),
            "gsynch" => Ok(Self::Gsynch),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters a bundle was drawn with. Fields not used by a model are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub freqs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Spike {
    Vector(DVector<f64>),
    Group(Vec<Element>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    Real { y: DMatrix<f64> },
    /// One Hermitian matrix per frequency, in canonical frequency order.
    Complex { y: Vec<DMatrix<Complex64>> },
    /// `y[u][v]` is the group element observed on edge (u, v).
    GroupTable { y: Vec<Vec<usize>> },
    Wishart { x: DMatrix<f64>, y: DMatrix<f64> },
}

/// A drawn (spike, observation) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBundle {
    pub model: ModelId,
    pub params: ModelParams,
    pub spike: Spike,
    pub observation: Observation,
    pub seed: u64,
}

impl SampleBundle {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn spike_vector(&self) -> Option<&DVector<f64>> {
        match &self.spike {
            Spike::Vector(x) => Some(x),
            Spike::Group(_) => None,
        }
    }

    pub fn group_spike(&self) -> Option<&[Element]> {
        match &self.spike {
            Spike::Group(g) => Some(g),
            Spike::Vector(_) => None,
        }
    }

    /// The real symmetric observation of a Wigner-type bundle.
    pub fn real_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.observation {
            Observation::Real { y } => Some(y),
            _ => None,
        }
    }

    /// Writes the observation as CSV rows (row-major; complex entries as a
    /// single `re,im` field). Multi-matrix observations are separated by a
    /// row holding the block label.
    pub fn write_observation_csv<W: Write>(&self, out: &mut csv::Writer<W>) -> Result<()> {
        fn real_rows<W: Write>(m: &DMatrix<f64>, out: &mut csv::Writer<W>) -> Result<()> {
            for i in 0..m.nrows() {
                out.write_record(m.row(i).iter().map(|v| format!("{v:e}")))?;
            }
            Ok(())
        }
        match &self.observation {
            Observation::Real { y } => real_rows(y, out)?,
            Observation::Complex { y } => {
                for (k, m) in y.iter().enumerate() {
                    out.write_record([format!("frequency {}", self.params.freqs.get(k).map_or("?", |s| s))])?;
                    for i in 0..m.nrows() {
                        out.write_record(m.row(i).iter().map(|z| format!("{:e},{:e}", z.re, z.im)))?;
                    }
                }
            }
            Observation::GroupTable { y } => {
                for row in y {
                    out.write_record(row.iter().map(usize::to_string))?;
                }
            }
            Observation::Wishart { y, .. } => real_rows(y, out)?,
        }
        out.flush()?;
        Ok(())
    }
}

fn normal(rng: &mut SimRng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

fn spike_and_noise_rngs(seed: u64) -> (SimRng, SimRng) {
    (seeded(stream_seed(seed, "spike")), seeded(stream_seed(seed, "noise")))
}

/// `Y = λxxᵀ + W/√n`, with W from the GOE (off-diagonal N(0,1), diagonal
/// N(0,2)).
pub fn sample_gaussian_wigner(lambda: f64, prior: &SpikePrior, n: usize, seed: u64) -> Result<SampleBundle> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (mut srng, mut nrng) = spike_and_noise_rngs(seed);
    let x = prior.sample(n, &mut srng);
    let scale = 1.0 / (n as f64).sqrt();
    let mut y = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let w = if i == j {
                std::f64::consts::SQRT_2 * normal(&mut nrng)
            } else {
                normal(&mut nrng)
            };
            let v = lambda * x[i] * x[j] + scale * w;
            y[(i, j)] = v;
            y[(j, i)] = v;
        }
    }
    Ok(SampleBundle {
        model: ModelId::GaussianWigner,
        params: ModelParams {
            n,
            lambda: Some(lambda),
            prior: Some(prior.id()),
            ..Default::default()
        },
        spike: Spike::Vector(x),
        observation: Observation::Real { y },
        seed,
    })
}

/// Off-diagonal `λ x_i x_j + W_ij/√n` with `W_ij` drawn from `noise`; zero
/// diagonal.
pub fn sample_wigner(lambda: f64, noise: &NoiseModel, prior: &SpikePrior, n: usize, seed: u64) -> Result<SampleBundle> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (mut srng, mut nrng) = spike_and_noise_rngs(seed);
    let x = prior.sample(n, &mut srng);
    let scale = 1.0 / (n as f64).sqrt();
    let mut y = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = lambda * x[i] * x[j] + scale * noise.sample(&mut nrng);
            y[(i, j)] = v;
            y[(j, i)] = v;
        }
    }
    Ok(SampleBundle {
        model: ModelId::Wigner,
        params: ModelParams {
            n,
            lambda: Some(lambda),
            prior: Some(prior.id()),
            noise: Some(noise.id()),
            ..Default::default()
        },
        spike: Spike::Vector(x),
        observation: Observation::Real { y },
        seed,
    })
}

/// Number of samples `N = round(n/γ)`.
pub fn wishart_samples(n: usize, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let big_n = (n as f64 / gamma).round();
    if big_n < 1.0 {
        return Err(Error::InvalidParameter(format!("n/gamma rounds to {big_n}")));
    }
    Ok(big_n as usize)
}

/// `N` columns drawn from `N(0, I + βx̂x̂ᵀ)` via the rank-one update
/// `z + (√(1+β)−1)⟨z,x̂⟩x̂`; returns `X` (n×N) and `Y = XXᵀ`.
pub fn sample_wishart(gamma: f64, beta: f64, prior: &SpikePrior, n: usize, seed: u64) -> Result<SampleBundle> {
    if beta < -1.0 || beta.is_nan() {
        return Err(Error::InvalidBeta(beta));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let big_n = wishart_samples(n, gamma)?;
    let (mut srng, mut nrng) = spike_and_noise_rngs(seed);
    let x = prior.sample(n, &mut srng);
    let norm = x.norm();
    let xhat = if norm > 0.0 { &x / norm } else { DVector::zeros(n) };
    let shrink = (1.0 + beta).sqrt() - 1.0;
    let mut xm = DMatrix::from_fn(n, big_n, |_, _| normal(&mut nrng));
    for mut col in xm.column_iter_mut() {
        let c = shrink * col.dot(&xhat);
        col.axpy(c, &xhat, 1.0);
    }
    let y = &xm * xm.transpose();
    Ok(SampleBundle {
        model: ModelId::Wishart,
        params: ModelParams {
            n,
            beta: Some(beta),
            gamma: Some(gamma),
            prior: Some(prior.id()),
            ..Default::default()
        },
        spike: Spike::Vector(x),
        observation: Observation::Wishart { x: xm, y },
        seed,
    })
}

/// Truth-or-Haar: each edge u < v carries `g_u g_v⁻¹` with probability
/// `p̃/√n`, otherwise a uniform element.
pub fn sample_toh(p_tilde: f64, group: &GroupSpec, n: usize, seed: u64) -> Result<SampleBundle> {
    let g = group
        .finite()
        .ok_or_else(|| Error::Config("truth-or-Haar needs a finite group".into()))?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let p = p_tilde / (n as f64).sqrt();
    if p > 1.0 {
        return Err(Error::InvalidProbability(p));
    }
    if !(p >= 0.0) {
        return Err(Error::InvalidParameter(format!("p_tilde must be nonnegative, got {p_tilde}")));
    }
    let (mut srng, mut nrng) = spike_and_noise_rngs(seed);
    let l = g.order();
    let truth: Vec<usize> = (0..n).map(|_| srng.random_range(0..l)).collect();
    let mut y = vec![vec![g.identity(); n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let e = if nrng.random::<f64>() < p {
                g.relative(truth[u], truth[v])
            } else {
                nrng.random_range(0..l)
            };
            y[u][v] = e;
            y[v][u] = g.inv(e);
        }
    }
    Ok(SampleBundle {
        model: ModelId::Toh,
        params: ModelParams {
            n,
            p_tilde: Some(p_tilde),
            group: Some(group.id()),
            ..Default::default()
        },
        spike: Spike::Group(truth.into_iter().map(Element::Finite).collect()),
        observation: Observation::GroupTable { y },
        seed,
    })
}

/// A Hermitian matrix from the GOE, GUE or GSE. Off-diagonal entries are
/// standard Gaussians of the given type (each real component has variance
/// 1/β), the diagonal is real `N(0, 2/β)`. Quaternionic matrices are
/// returned as their 2m×2m complex embedding.
pub fn sample_gaussian_ensemble(rep_type: RepType, m: usize, rng: &mut SimRng) -> DMatrix<Complex64> {
    let beta = rep_type.beta() as f64;
    let sd = (1.0 / beta).sqrt();
    let diag_sd = (2.0 / beta).sqrt();
    match rep_type {
        RepType::Real | RepType::Complex => {
            let mut w = DMatrix::zeros(m, m);
            for j in 0..m {
                for i in 0..j {
                    let z = match rep_type {
                        RepType::Real => Complex64::new(normal(rng), 0.0),
                        _ => Complex64::new(sd * normal(rng), sd * normal(rng)),
                    };
                    w[(i, j)] = z;
                    w[(j, i)] = z.conj();
                }
                w[(j, j)] = Complex64::new(diag_sd * normal(rng), 0.0);
            }
            w
        }
        RepType::Quaternionic => {
            let mut w = DMatrix::zeros(2 * m, 2 * m);
            for j in 0..m {
                for i in 0..=j {
                    let blk = if i == j {
                        quaternion_block(diag_sd * normal(rng), 0.0, 0.0, 0.0)
                    } else {
                        let [a, b, c, d] = [0; 4].map(|_| sd * normal(rng));
                        quaternion_block(a, b, c, d)
                    };
                    for r in 0..2 {
                        for s in 0..2 {
                            w[(2 * i + r, 2 * j + s)] = blk[r][s];
                            // block (j, i) is the adjoint of block (i, j)
                            w[(2 * j + s, 2 * i + r)] = blk[r][s].conj();
                        }
                    }
                }
            }
            w
        }
    }
}

/// `X_ρ`: the matrices `ρ(g_u)` stacked vertically.
pub fn stack_representation(rep: &Representation, spike: &[Element]) -> DMatrix<Complex64> {
    let cd = rep.complex_dim();
    let mut x = DMatrix::zeros(spike.len() * cd, cd);
    for (u, &g) in spike.iter().enumerate() {
        x.view_mut((u * cd, 0), (cd, cd)).copy_from(&rep.matrix(g));
    }
    x
}

/// Pairs frequencies with their signal strengths (a single λ is broadcast)
/// and sorts them canonically.
pub fn pair_frequencies(freqs: &[Representation], lambdas: &[f64]) -> Result<Vec<(Representation, f64)>> {
    if freqs.is_empty() {
        return Err(Error::Config("at least one frequency is required".into()));
    }
    let lambdas: Vec<f64> = match lambdas.len() {
        1 => vec![lambdas[0]; freqs.len()],
        k if k == freqs.len() => lambdas.to_vec(),
        k => {
            return Err(Error::Config(format!(
                "{k} signal strengths given for {} frequencies",
                freqs.len()
            )))
        }
    };
    if lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::InvalidParameter("signal strengths must be nonnegative".into()));
    }
    let mut pairs: Vec<_> = freqs.iter().cloned().zip(lambdas).collect();
    pairs.sort_by_key(|(r, _)| (r.rep_type, r.dim, r.catalog_id));
    for w in pairs.windows(2) {
        if w[0].0.label == w[1].0.label {
            return Err(Error::Config(format!("frequency {} listed twice", w[0].0.label)));
        }
    }
    Ok(pairs)
}

/// Gaussian synchronization: for each frequency ρ,
/// `Y_ρ = (λ_ρ/n) X_ρ X_ρ* + W_ρ/√(n d_ρ)`.
pub fn sample_gsynch(
    lambdas: &[f64],
    group: &GroupSpec,
    freqs: &[Representation],
    n: usize,
    seed: u64,
) -> Result<SampleBundle> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    for rep in freqs {
        if rep.is_trivial(group) {
            return Err(Error::TrivialRepresentation);
        }
    }
    let pairs = pair_frequencies(freqs, lambdas)?;
    let (mut srng, mut nrng) = spike_and_noise_rngs(seed);
    let truth: Vec<Element> = (0..n).map(|_| group.sample(&mut srng)).collect();
    let ys = pairs
        .iter()
        .map(|(rep, lambda)| {
            let x = stack_representation(rep, &truth);
            let w = sample_gaussian_ensemble(rep.rep_type, n * rep.dim, &mut nrng);
            let signal = &x * x.adjoint() * Complex64::from(lambda / n as f64);
            signal + w * Complex64::from(1.0 / ((n * rep.dim) as f64).sqrt())
        })
        .collect();
    Ok(SampleBundle {
        model: ModelId::Gsynch,
        params: ModelParams {
            n,
            lambdas: pairs.iter().map(|p| p.1).collect(),
            group: Some(group.id()),
            freqs: pairs.iter().map(|p| p.0.label.clone()).collect(),
            ..Default::default()
        },
        spike: Spike::Group(truth),
        observation: Observation::Complex { y: ys },
        seed,
    })
}
