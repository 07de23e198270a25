//! Small numerical kernels shared by the analysis modules: adaptive Simpson
//! quadrature, one-dimensional searches, and a bounded multi-start
//! Nelder–Mead simplex.

use rand::Rng;

use crate::error::{Error, Result};

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

const SIMPSON_MAX_DEPTH: u32 = 48;

fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
    failed: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *failed = true;
        }
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err, failed)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err, failed)
}

/// Adaptive Simpson on a finite interval, split into `panels` equal panels
/// so narrow peaks are not skipped by the first coarse estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> Result<Quadrature> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut failed = false;
    let panel_tol = tol / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = lo + width;
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = width / 6.0 * (fa + 4.0 * fm + fb);
        value += simpson_recurse(
            f,
            lo,
            hi,
            fa,
            fm,
            fb,
            whole,
            panel_tol,
            SIMPSON_MAX_DEPTH,
            &mut err,
            &mut failed,
        );
    }
    if failed || !value.is_finite() {
        return Err(Error::QuadratureNonConvergence { estimate: err });
    }
    Ok(Quadrature {
        value,
        error_estimate: err,
    })
}

/// Integral over the real line of an integrand with light tails. The window
/// `[-T, T]` grows until the newest outer slabs contribute less than
/// `1e-12` of the running total.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: &F, tol: f64) -> Result<Quadrature> {
    const SLAB: f64 = 2.0;
    const MAX_HALF_WIDTH: f64 = 200.0;
    let mut half = 8.0;
    let mut total = adaptive_simpson(f, -half, half, tol, 64)?;
    loop {
        let left = adaptive_simpson(f, -half - SLAB, -half, tol * 0.1, 8)?;
        let right = adaptive_simpson(f, half, half + SLAB, tol * 0.1, 8)?;
        total.value += left.value + right.value;
        total.error_estimate += left.error_estimate + right.error_estimate;
        half += SLAB;
        let tail = left.value.abs() + right.value.abs();
        if tail <= 1e-12 * total.value.abs().max(f64::MIN_POSITIVE) || tail == 0.0 {
            return Ok(total);
        }
        if half > MAX_HALF_WIDTH {
            return Err(Error::QuadratureNonConvergence { estimate: tail });
        }
    }
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `f(lo)` and `f(hi)`
/// must have opposite signs (or one of them is zero).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on a monotone predicate: returns the boundary between the
/// region where `pred` is false (near `lo`) and true (near `hi`).
pub fn bisect_predicate<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Options for [`nelder_mead_max`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            max_evals: 4000,
            x_tol: 1e-10,
            f_tol: 1e-13,
        }
    }
}

/// Local optimum returned by the simplex search.
#[derive(Debug, Clone)]
pub struct LocalOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead maximization. Infeasible points should return `-inf`;
/// the simplex then contracts away from them.
pub fn nelder_mead_max<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    opts: SimplexOptions,
) -> LocalOptimum {
    let dim = start.len();
    let neg = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| neg(p)).collect();
    let mut evals = dim + 1;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread_f = (values[dim] - values[0]).abs();
        let spread_x = simplex
            .iter()
            .skip(1)
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if values[0].is_finite() && spread_f <= opts.f_tol && spread_x <= opts.x_tol {
            break;
        }
        if spread_x <= opts.x_tol * 1e-3 {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for p in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = neg(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = neg(&expanded);
            evals += 1;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (contracted, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let v = neg(&c);
                (c, v)
            } else {
                let c = along(0.5);
                let v = neg(&c);
                (c, v)
            };
            evals += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=dim {
                    for (x, b) in simplex[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = neg(&simplex[i]);
                }
                evals += dim;
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    LocalOptimum {
        x: simplex[best].clone(),
        value: -values[best],
        evaluations: evals,
    }
}

/// Multi-start driver: runs the simplex from every start and a coordinate
/// refinement around each local optimum. Results are sorted best first.
pub fn multi_start_max<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    starts: &[Vec<f64>],
    opts: SimplexOptions,
) -> Vec<LocalOptimum> {
    use rayon::prelude::*;
    let mut out: Vec<LocalOptimum> = starts
        .par_iter()
        .map(|s| {
            let first = nelder_mead_max(f, s, opts);
            // restart from the optimum with a smaller simplex
            let mut refined = nelder_mead_max(
                f,
                &first.x,
                SimplexOptions {
                    initial_step: opts.initial_step * 0.05,
                    ..opts
                },
            );
            refined.evaluations += first.evaluations;
            refine_on_grid(f, refined, opts.initial_step * 0.01)
        })
        .collect();
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out
}

/// Local grid polish: coordinate-wise 5-point scans with a shrinking step.
fn refine_on_grid<F: Fn(&[f64]) -> f64>(f: &F, mut opt: LocalOptimum, step: f64) -> LocalOptimum {
    let mut h = step;
    for _ in 0..30 {
        let mut improved = false;
        for i in 0..opt.x.len() {
            for k in [-2.0, -1.0, 1.0, 2.0] {
                let mut y = opt.x.clone();
                y[i] += k * h;
                let v = f(&y);
                opt.evaluations += 1;
                if v > opt.value {
                    opt.value = v;
                    opt.x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
        if h < 1e-12 {
            break;
        }
    }
    opt
}

/// Draws a point from the symmetric Dirichlet(1, …, 1) distribution.
pub fn dirichlet_uniform<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// `ln C(n, k)` by direct summation; exact enough for the small `n` used in
/// enumeration oracles.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Numerically stable `log(sum(exp(x_i)))`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function (W. J. Cody style rational fit through the
/// continued-fraction tail; relative accuracy ~1e-14 on the real line).
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        return 1.0 - erf_series(x);
    }
    // Lentz continued fraction for erfc
    let mut f;
    let tiny = 1e-300;
    let b0 = x * x + 0.5;
    f = b0;
    if f == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = 0.0;
    for n in 1..500 {
        let an = -(n as f64) * (n as f64 - 0.5);
        let bn = x * x + 0.5 + 2.0 * n as f64;
        d = bn + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = bn + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x * (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..60 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_gaussian() {
        let q = integrate_real_line(
            &|w: f64| (-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(q.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|t| -(t - 0.3) * (t - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert_relative_eq!(x, 0.3, epsilon = 1e-6);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let o = nelder_mead_max(
            &f,
            &[-1.2, 1.0],
            SimplexOptions {
                initial_step: 0.5,
                max_evals: 20000,
                ..Default::default()
            },
        );
        assert!((o.x[0] - 1.0).abs() < 1e-5 && (o.x[1] - 1.0).abs() < 1e-5, "{:?}", o);
    }

    #[test]
    fn erfc_known_values() {
        assert_relative_eq!(erfc(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(erfc(1.0), 0.157_299_207_050_285_1, max_relative = 1e-12);
        assert_relative_eq!(erfc(2.5), 4.069_520_174_449_59e-4, max_relative = 1e-11);
        assert_relative_eq!(normal_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-12);
    }

    #[test]
    fn ln_binomial_small() {
        assert_relative_eq!(ln_binomial(10, 3), 120f64.ln(), epsilon = 1e-12);
        assert_eq!(ln_binomial(5, 0), 0.0);
    }
}
