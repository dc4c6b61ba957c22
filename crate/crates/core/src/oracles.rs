//! Brute-force validators for the closed forms in [`crate::structured_cov`]
//! and [`crate::divergence`].
//!
//! Nothing here calls the closed forms being validated. The only shared
//! pieces are the amplitude convention and the dense construction of
//! `I + a(uv' + vu')`.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::divergence::{
    chi_square_exact, gamma_eigs, hoeffding_tail_bound, hoeffding_threshold, select_b,
};
use crate::error::{Error, Result};
use crate::numeric::{rel_err, CompensatedSum};
use crate::rng::stream;
use crate::structured_cov::{amplitude, perturbed_identity, sample_direction, verify, LeastFavorableCov};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `rel_err ≤ tol`, or `abs_err ≤ tol` when the brute-force value is zero.
    Relative(f64),
    Absolute(f64),
    /// `brute_force ≤ closed_form`.
    UpperBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub closed_form: f64,
    pub brute_force: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, closed_form: f64, brute_force: f64, tolerance: Tolerance) -> Self {
        let abs_err = (closed_form - brute_force).abs();
        let rel_err = rel_err(brute_force, closed_form);
        let pass = match tolerance {
            Tolerance::Relative(tol) => rel_err <= tol,
            Tolerance::Absolute(tol) => abs_err <= tol,
            Tolerance::UpperBound => brute_force <= closed_form,
        };
        Self {
            name: name.into(),
            closed_form,
            brute_force,
            abs_err,
            rel_err,
            tolerance,
            pass,
        }
    }

    pub fn failed(name: impl Into<String>, error: &Error) -> Self {
        Self {
            name: format!("{} ({error})", name.into()),
            closed_form: f64::NAN,
            brute_force: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tolerance: Tolerance::Absolute(0.0),
            pass: false,
        }
    }
}

const MAX_ENUMERATION_DIM: usize = 8;

fn all_sign_vectors(m: usize) -> Vec<Vec<i8>> {
    (0..1u32 << m)
        .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
        .collect()
}

fn dot(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| i64::from(x) * i64::from(y)).sum()
}

/// `u'g` for every ordered pair of sign vectors of length `m`.
fn all_overlaps(m: usize) -> Vec<i64> {
    let signs = all_sign_vectors(m);
    signs
        .iter()
        .flat_map(|u| signs.iter().map(move |g| dot(u, g)))
        .collect()
}

/// Average of `(1 − a²(u'g)(v'h))^(−n)` over all `4^(p+q)` sign quadruples, minus one.
pub fn enumerate_chi_square(n: usize, p: usize, q: usize, b: f64) -> Result<f64> {
    if p + q > MAX_ENUMERATION_DIM {
        return Err(Error::Infeasible(format!(
            "p + q = {} exceeds {MAX_ENUMERATION_DIM}",
            p + q
        )));
    }
    let a = amplitude(n, p, q, b)?;
    let a2 = a * a;
    let nf = n as f64;
    let ug = all_overlaps(p);
    let vh = all_overlaps(q);
    let mut acc = CompensatedSum::new();
    for &x_ug in &ug {
        for &x_vh in &vh {
            let x = a2 * (x_ug * x_vh) as f64;
            if 1.0 - x <= 0.0 {
                return Err(Error::DivergenceInfinite(format!(
                    "1 - a^2 (u'g)(v'h) = {} at u'g = {x_ug}, v'h = {x_vh}",
                    1.0 - x
                )));
            }
            // The linear term n·x averages to exactly zero over the enumeration;
            // removing it leaves nonnegative summands.
            acc.add((-nf * (-x).ln_1p()).exp_m1() - nf * x);
        }
    }
    Ok(acc.value() / (ug.len() * vh.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

const MC_BLOCK: usize = 8192;

/// Monte Carlo estimate of `E₀[(f₁/f₀)²] − 1` from draws under the null,
/// evaluating the mixture likelihood ratio through dense inverses and
/// determinants of every `Σ_uv`.
pub fn mc_chi_square(n: usize, p: usize, q: usize, b: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    if p + q > 5 || n > 4 {
        return Err(Error::Infeasible(format!(
            "mixture ratio limited to p + q <= 5 and n <= 4, got p + q = {}, n = {n}",
            p + q
        )));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least two draws"));
    }
    let a = amplitude(n, p, q, b)?;
    let d = p + q;
    // Each component contributes det^(−n/2)·exp(−½ tr((Σ⁻¹ − I) S)) with S = Σ z_i z_i'.
    let mut components: Vec<(f64, Vec<f64>)> = Vec::new();
    for u in all_sign_vectors(p) {
        for v in all_sign_vectors(q) {
            let sigma = perturbed_identity(&u, &v, a);
            let det = verify::dense_det(&sigma);
            if det <= 0.0 {
                return Err(Error::NotPositiveDefinite(a * a * (p * q) as f64));
            }
            let inv = verify::dense_inverse(&sigma).ok_or(Error::NotPositiveDefinite(a * a * (p * q) as f64))?;
            let shifted = inv - DMatrix::<f64>::identity(d, d);
            components.push((det.powf(-(n as f64) / 2.0), shifted.iter().copied().collect()));
        }
    }
    let weight = 1.0 / components.len() as f64;
    let blocks = trials.div_ceil(MC_BLOCK);
    let per_block: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream(seed, &[block as u64]);
            let size = MC_BLOCK.min(trials - block * MC_BLOCK);
            let mut m = Moments { count: 0.0, mean: 0.0, m2: 0.0 };
            let mut z = vec![0.0; d];
            let mut scatter = vec![0.0; d * d];
            for _ in 0..size {
                scatter.iter_mut().for_each(|s| *s = 0.0);
                for _ in 0..n {
                    z.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                    // Column-major to match nalgebra's storage in `components`.
                    for c in 0..d {
                        for r in 0..d {
                            scatter[c * d + r] += z[r] * z[c];
                        }
                    }
                }
                let ratio: f64 = components
                    .iter()
                    .map(|(scale, shifted)| {
                        let trace: f64 = shifted.iter().zip(&scatter).map(|(x, y)| x * y).sum();
                        scale * (-0.5 * trace).exp()
                    })
                    .sum::<f64>()
                    * weight;
                let value = ratio * ratio;
                m.count += 1.0;
                let delta = value - m.mean;
                m.mean += delta / m.count;
                m.m2 += delta * (value - m.mean);
            }
            m
        })
        .collect();
    let total = per_block
        .into_iter()
        .fold(Moments { count: 0.0, mean: 0.0, m2: 0.0 }, Moments::merge);
    let variance = total.m2 / (total.count - 1.0);
    Ok(McEstimate {
        estimate: total.mean - 1.0,
        stderr: (variance / total.count).sqrt(),
        trials,
    })
}

fn chi_cov(u: &[i8], v: &[i8], g: &[i8], h: &[i8]) -> Matrix4<f64> {
    let (p, q) = (u.len() as f64, v.len() as f64);
    let ug = dot(u, g) as f64;
    let vh = dot(v, h) as f64;
    Matrix4::new(
        p, 0.0, ug, 0.0, //
        0.0, q, 0.0, vh, //
        ug, 0.0, p, 0.0, //
        0.0, vh, 0.0, q,
    )
}

fn quad_matrix(a: f64, p: f64, q: f64) -> Matrix4<f64> {
    Matrix4::new(
        -q * a, 1.0, 0.0, 0.0, //
        1.0, -p * a, 0.0, 0.0, //
        0.0, 0.0, -q * a, 1.0, //
        0.0, 0.0, 1.0, -p * a,
    )
}

/// Eigenvalues of `Σ_χ^(1/2) A Σ_χ^(1/2)`, ascending, from a dense eigensolver.
pub fn gamma_numeric(u: &[i8], v: &[i8], g: &[i8], h: &[i8], a: f64) -> Result<[f64; 4]> {
    if u.len() != g.len() || v.len() != h.len() || u.is_empty() || v.is_empty() {
        return Err(Error::DimensionMismatch("u/g and v/h must pair up".into()));
    }
    let cov = chi_cov(u, v, g, h);
    let eig = SymmetricEigen::new(cov);
    // Σ_χ has integer spectrum {p ± u'g, q ± v'h}; anything this small is an exact zero.
    let roots = eig.eigenvalues.map(|l| if l < 1e-9 { 0.0 } else { l.sqrt() });
    let half = eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.transpose();
    let m = half * quad_matrix(a, u.len() as f64, v.len() as f64) * half;
    let sym = (m + m.transpose()) * 0.5;
    let mut out: [f64; 4] = SymmetricEigen::new(sym).eigenvalues.into();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `T(u, v, z) + T(g, h, z)` and `χ'Aχ`, the two sides of the quadratic-form identity.
pub fn quad_form_sides(u: &[i8], v: &[i8], g: &[i8], h: &[i8], a: f64, z: &[f64]) -> (f64, f64) {
    let p = u.len();
    let (zx, zy) = z.split_at(p);
    let proj = |s: &[i8], w: &[f64]| -> f64 { s.iter().zip(w).map(|(&s, &x)| f64::from(s) * x).sum() };
    let (pf, qf) = (p as f64, v.len() as f64);
    let t = |uz: f64, vz: f64| 2.0 * vz * uz - qf * a * uz * uz - pf * a * vz * vz;
    let chi = [proj(u, zx), proj(v, zy), proj(g, zx), proj(h, zy)];
    let lhs = t(chi[0], chi[1]) + t(chi[2], chi[3]);
    let x = nalgebra::Vector4::from(chi);
    let rhs = (x.transpose() * quad_matrix(a, pf, qf) * x)[(0, 0)];
    (lhs, rhs)
}

/// Exact `P(|UV| ≥ threshold)` by enumerating every sign vector.
pub fn enumerate_uv_tail(p: usize, q: usize, threshold: f64) -> Result<f64> {
    if p > 12 || q > 12 || p == 0 || q == 0 {
        return Err(Error::Infeasible(format!("p = {p}, q = {q} outside 1..=12")));
    }
    let counts = |m: usize| -> Vec<(i64, u64)> {
        let mut hist = std::collections::BTreeMap::new();
        for s in all_sign_vectors(m) {
            *hist.entry(s.iter().map(|&x| i64::from(x)).sum::<i64>()).or_insert(0u64) += 1;
        }
        hist.into_iter().collect()
    };
    let (cu, cv) = (counts(p), counts(q));
    let hits: u64 = cu
        .iter()
        .flat_map(|&(uu, nu)| cv.iter().map(move |&(vv, nv)| ((uu * vv).abs(), nu * nv)))
        .filter(|&(prod, _)| prod as f64 >= threshold)
        .map(|(_, c)| c)
        .sum();
    Ok(hits as f64 / (1u64 << (p + q)) as f64)
}

/// `(1 − x)^(−1/x)`, continuous at zero with value `e`.
pub fn inverse_power_envelope(x: f64) -> f64 {
    if x == 0.0 {
        std::f64::consts::E
    } else {
        (-(-x).ln_1p() / x).exp()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub mc_trials: usize,
    pub gamma_draws: usize,
    /// Negative control: scales `γ₀₀` by `1 + 10⁻³` before comparison.
    pub perturb_gamma: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            mc_trials: 200_000,
            gamma_draws: 24,
            perturb_gamma: false,
        }
    }
}

fn random_signs<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<i8> {
    (0..m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// Closed-form entry with the largest discrepancy, paired with its dense counterpart.
fn worst_entry(closed: &DMatrix<f64>, dense: &DMatrix<f64>) -> (f64, f64) {
    closed
        .iter()
        .zip(dense.iter())
        .max_by(|x, y| (x.0 - x.1).abs().total_cmp(&(y.0 - y.1).abs()))
        .map(|(&c, &d)| (c, d))
        .unwrap_or((0.0, 0.0))
}

/// Runs every oracle comparison at small dimensions.
pub fn run_suite(opts: &SuiteOptions) -> Vec<OracleReport> {
    let mut rows = Vec::new();
    let b_star = select_b(1.0, 0.05, 0.35).expect("valid levels");

    for (p, q) in [(1, 1), (1, 3), (2, 2), (3, 3), (2, 5), (4, 4)] {
        for n in [1, 5, 20] {
            for b in [0.3, b_star] {
                let name = format!("chi_square_exact[n={n},p={p},q={q},b={b:.6}]");
                match (chi_square_exact(n, p, q, b), enumerate_chi_square(n, p, q, b)) {
                    (Ok(c), Ok(e)) => rows.push(OracleReport::new(name, c, e, Tolerance::Relative(1e-12))),
                    (Err(e), _) | (_, Err(e)) => rows.push(OracleReport::failed(name, &e)),
                }
            }
        }
    }

    for (i, (n, p, q, b)) in [(2, 1, 1, 0.4), (2, 2, 2, 0.3), (4, 2, 2, 0.4)].into_iter().enumerate() {
        let name = format!("mc_chi_square[n={n},p={p},q={q},b={b}]");
        match (
            chi_square_exact(n, p, q, b),
            mc_chi_square(n, p, q, b, opts.mc_trials, crate::rng::derive_seed(opts.seed, &[1, i as u64])),
        ) {
            (Ok(c), Ok(mc)) => rows.push(OracleReport::new(
                name,
                c,
                mc.estimate,
                Tolerance::Absolute(4.0 * mc.stderr),
            )),
            (Err(e), _) | (_, Err(e)) => rows.push(OracleReport::failed(name, &e)),
        }
    }

    let mut rng = stream(opts.seed, &[2]);
    for draw in 0..opts.gamma_draws {
        let p = rng.random_range(1..=6);
        let q = rng.random_range(1..=6);
        let (u, g) = (random_signs(p, &mut rng), random_signs(p, &mut rng));
        let (v, h) = (random_signs(q, &mut rng), random_signs(q, &mut rng));
        let a = rng.random_range(0.0..0.99) / ((p * q) as f64).sqrt();
        let tag = format!("[draw={draw},p={p},q={q},u'g={},v'h={}]", dot(&u, &g), dot(&v, &h));
        let closed = match gamma_eigs(a, p, q, dot(&u, &g), dot(&v, &h)) {
            Ok(x) => x,
            Err(e) => {
                rows.push(OracleReport::failed(format!("gamma_eigs{tag}"), &e));
                continue;
            }
        };
        let mut gammas = closed.gammas;
        if opts.perturb_gamma {
            gammas[0] *= 1.0 + 1e-3;
        }
        gammas.sort_by(f64::total_cmp);
        match gamma_numeric(&u, &v, &g, &h, a) {
            Ok(numeric) => {
                let k = (0..4)
                    .max_by(|&i, &j| (gammas[i] - numeric[i]).abs().total_cmp(&(gammas[j] - numeric[j]).abs()))
                    .unwrap_or(0);
                rows.push(OracleReport::new(
                    format!("gamma_eigs{tag}"),
                    gammas[k],
                    numeric[k],
                    Tolerance::Absolute(1e-8),
                ));
            }
            Err(e) => rows.push(OracleReport::failed(format!("gamma_eigs{tag}"), &e)),
        }
        rows.push(OracleReport::new(
            format!("gamma_product{tag}"),
            closed.product(),
            closed.product_closed_form(),
            Tolerance::Relative(1e-10),
        ));
        let z: Vec<f64> = (0..p + q).map(|_| rng.sample(StandardNormal)).collect();
        let (lhs, rhs) = quad_form_sides(&u, &v, &g, &h, a, &z);
        rows.push(OracleReport::new(
            format!("quad_form{tag}"),
            lhs,
            rhs,
            Tolerance::Absolute(1e-10 * (1.0 + rhs.abs())),
        ));
    }

    let mut rng = stream(opts.seed, &[3]);
    for (p, q) in [(1, 1), (3, 2), (4, 4), (7, 5), (10, 10)] {
        let dir = sample_direction(p, q, &mut rng);
        let a = rng.random_range(0.0..0.95) / ((p * q) as f64).sqrt();
        let tag = format!("[p={p},q={q},a={a:.6}]");
        let cov = match LeastFavorableCov::new(dir, a) {
            Ok(c) => c,
            Err(e) => {
                rows.push(OracleReport::failed(format!("cov{tag}"), &e));
                continue;
            }
        };
        let sigma = cov.dense_cov();
        match verify::dense_inverse(&sigma) {
            Some(dense) => {
                let (c, d) = worst_entry(&cov.cov_inverse(), &dense);
                rows.push(OracleReport::new(format!("cov_inverse{tag}"), c, d, Tolerance::Absolute(1e-10)));
            }
            None => rows.push(OracleReport::failed(
                format!("cov_inverse{tag}"),
                &Error::NotPositiveDefinite(a * a * (p * q) as f64),
            )),
        }
        rows.push(OracleReport::new(
            format!("cov_det{tag}"),
            cov.cov_det(),
            verify::dense_det(&sigma),
            Tolerance::Relative(1e-10),
        ));
        if let Some(dense) = verify::dense_sqrt(&sigma) {
            let (c, d) = worst_entry(&verify::sqrt_matrix(&cov), &dense);
            rows.push(OracleReport::new(format!("cov_sqrt{tag}"), c, d, Tolerance::Absolute(1e-10)));
        }
    }

    for (p, q, b) in [(3, 3, 0.5), (6, 4, 0.8), (5, 6, 1.2), (2, 2, 2.0)] {
        for mu in [1.5, std::f64::consts::E, 10.0] {
            let name = format!("hoeffding_tail[p={p},q={q},b={b},mu={mu:.4}]");
            let threshold = hoeffding_threshold(p, q, b, mu);
            match (hoeffding_tail_bound(p, q, b, mu), enumerate_uv_tail(p, q, threshold)) {
                (Ok(bound), Ok(exact)) => rows.push(OracleReport::new(name, bound, exact, Tolerance::UpperBound)),
                (Err(e), _) | (_, Err(e)) => rows.push(OracleReport::failed(name, &e)),
            }
        }
    }

    let grid: Vec<f64> = (0..=21_000)
        .map(|k| -10.0 + k as f64 * 0.0005)
        .filter(|&x| x != 0.0 && x <= 0.5)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| inverse_power_envelope(x)).collect();
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rows.push(OracleReport::new("inverse_power_envelope_max[-10,0.5]", 4.0, peak, Tolerance::UpperBound));
    let drops = values.windows(2).filter(|w| w[1] < w[0]).count();
    rows.push(OracleReport::new(
        "inverse_power_envelope_monotone[-10,0.5]",
        0.0,
        drops as f64,
        Tolerance::Absolute(0.0),
    ));

    rows
}
