//! The conditioning bound on λ* for i.i.d. priors with finite support:
//!
//! λ* = [ sup_{α ∈ Δ(π), α ≠ ᾱ} ⟨α,β⟩² / (2 D(α, ᾱ)) ]^{-1/2}
//!
//! where Δ(π) is the transportation polytope with row and column sums π,
//! ᾱ = ππᵀ and β_ab = ab.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_predicate, dirichlet_uniform, multi_start_max, SimplexOptions};
use crate::priors::FiniteLaw;
use crate::report::{Diagnostics, Method, ThresholdReport};
use crate::rng::derive_seed;

const EXCLUSION_RADIUS: f64 = 1e-6;
const STALL_TOL: f64 = 1e-4;

/// A point of the transportation polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportationMatrix {
    pub alpha: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
}

impl TransportationMatrix {
    pub fn new(alpha: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let s = pi.len();
        if alpha.len() != s || alpha.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidParameter("alpha must be s×s".into()));
        }
        if alpha.iter().flatten().any(|&a| a < 0.0) {
            return Err(Error::InvalidParameter("alpha must be nonnegative".into()));
        }
        for i in 0..s {
            let row: f64 = alpha[i].iter().sum();
            let col: f64 = alpha.iter().map(|r| r[i]).sum();
            if (row - pi[i]).abs() > 1e-10 || (col - pi[i]).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "row/column {i} sums ({row}, {col}) differ from pi = {}",
                    pi[i]
                )));
            }
        }
        Ok(Self { alpha, pi })
    }

    /// The product coupling ᾱ = ππᵀ.
    pub fn product(pi: &[f64]) -> Self {
        Self {
            alpha: pi.iter().map(|a| pi.iter().map(|b| a * b).collect()).collect(),
            pi: pi.to_vec(),
        }
    }
}

/// `(1+u)ln(1+u) − u`, accurate for small |u|.
fn entropy_kernel(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Σ_{k≥2} (−1)^k u^k / (k(k−1))
        let mut term = u * u;
        let mut sum = 0.0;
        for k in 2..40 {
            let kf = k as f64;
            sum += term / (kf * (kf - 1.0));
            term *= -u;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else if u <= -1.0 {
        1.0
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// The objective restricted to an affine parametrization `α = ᾱ + N z`.
pub struct ConditioningProblem {
    law: FiniteLaw,
    /// vec(ᾱ), row-major.
    alpha_bar: Vec<f64>,
    /// vec(β), row-major.
    beta: Vec<f64>,
    /// Orthonormal null-space basis, s² × k.
    basis: DMatrix<f64>,
    symmetric: bool,
}

impl ConditioningProblem {
    /// `symmetric` restricts to couplings invariant under the reflection
    /// a ↦ −a of a symmetric support, which loses nothing since averaging
    /// α with its reflection keeps ⟨α,β⟩ and does not increase D.
    pub fn new(law: &FiniteLaw, symmetric: bool) -> Result<Self> {
        let s = law.len();
        let pi = law.probs();
        let vals = law.values();
        let idx = |i: usize, j: usize| i * s + j;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for i in 0..s {
            let mut r = vec![0.0; s * s];
            let mut c = vec![0.0; s * s];
            for j in 0..s {
                r[idx(i, j)] = 1.0;
                c[idx(j, i)] = 1.0;
            }
            rows.push(r);
            rows.push(c);
        }
        if symmetric {
            let refl = law.reflection().ok_or_else(|| {
                Error::InvalidParameter("symmetry reduction needs a symmetric support".into())
            })?;
            for i in 0..s {
                for j in 0..s {
                    let (a, b) = (idx(i, j), idx(refl[i], refl[j]));
                    if a < b {
                        let mut r = vec![0.0; s * s];
                        r[a] = 1.0;
                        r[b] = -1.0;
                        rows.push(r);
                    }
                }
            }
        }
        let a = DMatrix::from_fn(rows.len(), s * s, |i, j| rows[i][j]);
        let gram = a.transpose() * &a;
        let eig = SymmetricEigen::new(gram);
        let cols: Vec<DVector<f64>> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l.abs() < 1e-9)
            .map(|(k, _)| eig.eigenvectors.column(k).into_owned())
            .collect();
        if cols.is_empty() {
            return Err(Error::InvalidParameter("transportation polytope is a point".into()));
        }
        let basis = DMatrix::from_columns(&cols);
        Ok(Self {
            law: law.clone(),
            alpha_bar: (0..s * s).map(|k| pi[k / s] * pi[k % s]).collect(),
            beta: (0..s * s).map(|k| vals[k / s] * vals[k % s]).collect(),
            basis,
            symmetric,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn delta(&self, z: &[f64]) -> DVector<f64> {
        &self.basis * DVector::from_column_slice(z)
    }

    /// α for free coordinates `z`, or `None` outside the polytope.
    pub fn alpha(&self, z: &[f64]) -> Option<Vec<f64>> {
        let d = self.delta(z);
        let alpha: Vec<f64> = self.alpha_bar.iter().zip(d.iter()).map(|(a, d)| a + d).collect();
        if alpha.iter().any(|&a| a < -1e-15) {
            None
        } else {
            Some(alpha)
        }
    }

    /// ⟨α,β⟩² / (2 D(α, ᾱ)); `-inf` outside the polytope and inside the
    /// excluded ball around ᾱ.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let d = self.delta(z);
        if d.norm() < EXCLUSION_RADIUS {
            return f64::NEG_INFINITY;
        }
        let mut num = 0.0;
        let mut kl = 0.0;
        for ((&ab, &b), &dk) in self.alpha_bar.iter().zip(&self.beta).zip(d.iter()) {
            if ab + dk < -1e-15 {
                return f64::NEG_INFINITY;
            }
            num += dk * b;
            kl += ab * entropy_kernel(dk / ab);
        }
        if kl <= 0.0 {
            return f64::NEG_INFINITY;
        }
        num * num / (2.0 * kl)
    }

    /// Limit of the objective as α → ᾱ, maximized over directions:
    /// `bᵀ G⁻¹ b` with `b = Nᵀ vec(β)` and `G = Nᵀ diag(1/ᾱ) N`.
    pub fn local_limit(&self) -> f64 {
        let b = self.basis.transpose() * DVector::from_column_slice(&self.beta);
        let w = DMatrix::from_diagonal(&DVector::from_iterator(
            self.alpha_bar.len(),
            self.alpha_bar.iter().map(|a| 1.0 / a),
        ));
        let g = self.basis.transpose() * w * &self.basis;
        match g.cholesky() {
            Some(ch) => b.dot(&ch.solve(&b)),
            None => f64::NAN,
        }
    }

    /// The ratio along each coordinate direction of the free parameters at
    /// distance `h` from ᾱ; these approach [`Self::local_limit`] from the
    /// coordinate rays.
    pub fn coordinate_ray_ratios(&self, h: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let mut z = vec![0.0; self.dim()];
                z[k] = h;
                let plus = self.objective(&z);
                z[k] = -h;
                plus.max(self.objective(&z))
            })
            .collect()
    }

    /// A random interior start: Dirichlet draw, Sinkhorn-balanced to the
    /// marginals, reflected-averaged in the symmetric case.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let s = self.law.len();
        let pi = self.law.probs();
        let mut a = dirichlet_uniform(rng, s * s);
        for _ in 0..500 {
            for i in 0..s {
                let r: f64 = (0..s).map(|j| a[i * s + j]).sum();
                for j in 0..s {
                    a[i * s + j] *= pi[i] / r;
                }
            }
            for j in 0..s {
                let c: f64 = (0..s).map(|i| a[i * s + j]).sum();
                for i in 0..s {
                    a[i * s + j] *= pi[j] / c;
                }
            }
        }
        if self.symmetric {
            let refl = self.law.reflection().expect("checked in new");
            let b = a.clone();
            for i in 0..s {
                for j in 0..s {
                    a[i * s + j] = 0.5 * (b[i * s + j] + b[refl[i] * s + refl[j]]);
                }
            }
        }
        let diff = DVector::from_iterator(s * s, a.iter().zip(&self.alpha_bar).map(|(x, y)| x - y));
        (self.basis.transpose() * diff).iter().copied().collect()
    }
}

/// Outcome of the multi-start search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditioningOptimum {
    /// Best value found away from ᾱ.
    pub nonlocal_value: f64,
    pub argmax: TransportationMatrix,
    /// Limit of the ratio at ᾱ.
    pub local_limit: f64,
    /// max(nonlocal, local).
    pub supremum: f64,
    pub lambda_star: f64,
    pub restarts: usize,
    pub evaluations: usize,
    /// Number of restarts within the stall tolerance of the best.
    pub agreeing: usize,
}

pub fn optimize(problem: &ConditioningProblem, restarts: usize, seed: u64) -> Result<ConditioningOptimum> {
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|i| problem.random_start(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64))))
        .collect();
    let f = |z: &[f64]| problem.objective(z);
    let opts = SimplexOptions {
        initial_step: 0.02,
        max_evals: 6000,
        ..SimplexOptions::default()
    };
    let results = multi_start_max(&f, &starts, opts);
    let best = &results[0];
    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let mut agreeing = results
        .iter()
        .filter(|r| (r.value - best.value).abs() <= STALL_TOL)
        .count();
    if agreeing < 2 {
        // confirm a lone optimum with a fresh simplex from the incumbent
        let check = multi_start_max(&f, std::slice::from_ref(&best.x), SimplexOptions {
            initial_step: 0.05,
            ..opts
        });
        let spread = (check[0].value - best.value).abs();
        if spread > STALL_TOL {
            return Err(Error::OptimizerStall { spread });
        }
        agreeing += 1;
    }
    let s = problem.law.len();
    let alpha = problem.alpha(&best.x).unwrap_or_else(|| problem.alpha_bar.clone());
    let argmax = TransportationMatrix {
        alpha: (0..s).map(|i| alpha[i * s..(i + 1) * s].iter().map(|a| a.max(0.0)).collect()).collect(),
        pi: problem.law.probs().to_vec(),
    };
    let local_limit = problem.local_limit();
    let supremum = best.value.max(local_limit);
    Ok(ConditioningOptimum {
        nonlocal_value: best.value,
        argmax,
        local_limit,
        supremum,
        lambda_star: supremum.powf(-0.5),
        restarts,
        evaluations,
        agreeing,
    })
}

/// λ* by the conditioning method, with the symmetry reduction applied
/// whenever the support is symmetric. Supports of size at most 7.
pub fn conditioning_threshold(law: &FiniteLaw) -> Result<ThresholdReport> {
    conditioning_threshold_with(law, 20, 0x5eed)
}

pub fn conditioning_threshold_with(law: &FiniteLaw, restarts: usize, seed: u64) -> Result<ThresholdReport> {
    if law.len() > 7 {
        return Err(Error::InvalidParameter(format!(
            "support of size {} exceeds the limit of 7",
            law.len()
        )));
    }
    if law.len() < 2 {
        return Err(Error::InvalidParameter("support must have at least two points".into()));
    }
    let symmetric = law.reflection().is_some();
    let problem = ConditioningProblem::new(law, symmetric)?;
    let opt = optimize(&problem, restarts, seed)?;
    let mut notes = vec![format!("local limit {:.10}", opt.local_limit)];
    if symmetric {
        notes.push("reflection-symmetric reduction".into());
    }
    Ok(ThresholdReport::new("conditioning_lambda_star", opt.lambda_star, Method::Conditioning)
        .with_diagnostics(Diagnostics {
            objective: Some(opt.supremum),
            argmax: Some(opt.argmax.alpha.iter().flatten().copied().collect()),
            evaluations: Some(opt.evaluations),
            restarts: Some(opt.restarts),
            spread: Some(opt.supremum - opt.nonlocal_value),
            notes,
            ..Diagnostics::default()
        }))
}

/// Smallest sparse-Rademacher density ρ for which the conditioning method
/// certifies λ* = 1, by bisection on ρ ∈ [lo, hi] to tolerance `tol`.
pub fn critical_sparsity(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let exceeds = |rho: f64| -> Result<bool> {
        let law = FiniteLaw::sparse_rademacher(rho)?;
        let problem = ConditioningProblem::new(&law, true)?;
        let opt = optimize(&problem, 20, 0x5eed)?;
        Ok(opt.nonlocal_value > opt.local_limit + 1e-6)
    };
    if !exceeds(lo)? || exceeds(hi)? {
        return Err(Error::InvalidParameter(format!(
            "[{lo}, {hi}] does not bracket the critical density"
        )));
    }
    let failure = std::cell::RefCell::new(None);
    let rho = bisect_predicate(
        |rho| match exceeds(rho) {
            Ok(v) => !v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                false
            }
        },
        lo,
        hi,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(rho),
    }
}
