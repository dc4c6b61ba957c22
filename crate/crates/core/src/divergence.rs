//! Chi-square divergence of the least-favorable mixture from the null and
//! the bound chain leading to a ceiling on minimax power.
//!
//! With `P₀ = N(0, I)^⊗n` and `P₁` the uniform mixture of `N(0, Σ_uv)^⊗n`
//! over all sign patterns, the divergence reduces to a one-dimensional
//! binomial average:
//!
//! ```text
//! χ²(P₁ ‖ P₀) = E_{U,V}[(1 − a²UV)^(−n)] − 1,
//! ```
//!
//! where `U` and `V` are sums of `p` and `q` independent signs.

use crate::error::{Error, Result};
use crate::numeric::{rademacher_sum_log_pmf, stable_sum};
use crate::structured_cov::amplitude;

/// Safety margin for the strict inequality on `b` in [`select_b`].
pub const SELECT_B_MARGIN: f64 = 1e-6;

fn ln4() -> f64 {
    4f64.ln()
}

/// `1/√(ln 4)`, the largest signal for which the closed-form bound is finite.
pub fn closed_bound_cap() -> f64 {
    1.0 / ln4().sqrt()
}

/// Eigenvalues of `Σ_χ^(1/2) A Σ_χ^(1/2)` for the quadratic form in
/// `χ = (u'z, v'z, g'z, h'z)`, indexed `γ₀₀, γ₀₁, γ₁₀, γ₁₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaQuad {
    pub gammas: [f64; 4],
    /// `t = a / (1 − pqa²)`.
    pub t: f64,
    pub a: f64,
    pub p: usize,
    pub q: usize,
    pub ug: i64,
    pub vh: i64,
}

impl GammaQuad {
    /// `∏ (1 − tγ_ij)`.
    pub fn product(&self) -> f64 {
        self.gammas.iter().map(|g| 1.0 - self.t * g).product()
    }

    /// `((1 − a²·ug·vh) / (1 − a²pq))²`.
    pub fn product_closed_form(&self) -> f64 {
        let a2 = self.a * self.a;
        let pq = self.p as f64 * self.q as f64;
        ((1.0 - a2 * (self.ug * self.vh) as f64) / (1.0 - a2 * pq)).powi(2)
    }

    /// Largest `tγ_ij`; the chi-square MGF exists iff this is below 1.
    pub fn max_t_gamma(&self) -> f64 {
        self.gammas
            .iter()
            .map(|g| self.t * g)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_overlap(name: &'static str, value: i64, dim: usize) -> Result<()> {
    let m = dim as i64;
    if value.abs() > m || (value - m).rem_euclid(2) != 0 {
        return Err(Error::invalid(
            name,
            format!("{value} is not an inner product of two sign vectors of length {dim}"),
        ));
    }
    Ok(())
}

/// Closed-form eigenvalues for inner products `ug = u'g`, `vh = v'h`.
///
/// The discriminant is evaluated as `4(p ∓ ug)(q ∓ vh) + a²(q·ug − p·vh)²`,
/// a sum of nonnegative terms, so it is exact at its zeros.
pub fn gamma_eigs(a: f64, p: usize, q: usize, ug: i64, vh: i64) -> Result<GammaQuad> {
    if p == 0 || q == 0 {
        return Err(Error::invalid("p, q", "dimensions must be positive"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("a", format!("{a} is not finite")));
    }
    check_overlap("ug", ug, p)?;
    check_overlap("vh", vh, q)?;
    let (pi, qi) = (p as i64, q as i64);
    let (pf, qf) = (p as f64, q as f64);
    let mut gammas = [0.0; 4];
    for i in 0..2 {
        let s: i64 = if i == 0 { 1 } else { -1 };
        let cross = (qi * ug - pi * vh) as f64;
        let r = (4 * (pi - s * ug) * (qi - s * vh)) as f64 + a * a * cross * cross;
        if r < 0.0 {
            return Err(Error::NegativeDiscriminant(r));
        }
        let base = -2.0 * a * pf * qf + s as f64 * a * (qf * ug as f64 + pf * vh as f64);
        let root = r.sqrt();
        gammas[2 * i] = 0.5 * (base - root);
        gammas[2 * i + 1] = 0.5 * (base + root);
    }
    Ok(GammaQuad {
        gammas,
        t: a / (1.0 - pf * qf * a * a),
        a,
        p,
        q,
        ug,
        vh,
    })
}

/// True iff `a²pq < 1` and `tγ_ij < 1` for every achievable `(u'g, v'h)`.
pub fn mgf_validity(a: f64, p: usize, q: usize) -> bool {
    if p == 0 || q == 0 || !(a >= 0.0 && a.is_finite()) {
        return false;
    }
    if a * a * p as f64 * q as f64 >= 1.0 {
        return false;
    }
    let (pi, qi) = (p as i64, q as i64);
    (0..=pi).all(|k| {
        (0..=qi).all(|l| match gamma_eigs(a, p, q, pi - 2 * k, qi - 2 * l) {
            Ok(g) => g.max_t_gamma() < 1.0,
            Err(_) => false,
        })
    })
}

/// `ln[(1 − x)^(−n) + (1 + x)^(−n) − 2]` for `0 < |x| < 1`.
///
/// Both branches are sums of nonnegative terms, so small signals keep full
/// relative precision.
fn ln_symmetric_excess(n: f64, x: f64) -> f64 {
    let up = -n * (-x).ln_1p();
    let down = -n * x.ln_1p();
    let hi = up.max(down);
    if hi > 1.0 {
        let lo = up.min(down);
        hi + ((lo - hi).exp() - 2.0 * (-hi).exp()).ln_1p()
    } else {
        let mid = 0.5 * (up + down);
        let half_gap = 0.5 * (up - down);
        let sinh_quarter = (0.5 * half_gap).sinh();
        let excess = mid.exp_m1() * half_gap.cosh() + 2.0 * sinh_quarter * sinh_quarter;
        std::f64::consts::LN_2 + excess.ln()
    }
}

/// Exact `χ²(P₁ ‖ P₀)` for the least-favorable mixture at `(n, p, q, b)`.
///
/// Terms with `V` and `−V` are paired so each summand is nonnegative; the
/// binomial weights are combined in log space and accumulated smallest first.
pub fn chi_square_exact(n: usize, p: usize, q: usize, b: f64) -> Result<f64> {
    let a = amplitude(n, p, q, b)?;
    let a2 = a * a;
    let load = a2 * p as f64 * q as f64;
    if load >= 1.0 {
        return Err(Error::DivergenceInfinite(format!(
            "1 - a^2 UV = {} at U = {p}, V = {q}",
            1.0 - load
        )));
    }
    if !mgf_validity(a, p, q) {
        return Err(Error::DivergenceInfinite(format!(
            "quadratic-form MGF undefined at a = {a}"
        )));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let law_u = rademacher_sum_log_pmf(p);
    let law_v = rademacher_sum_log_pmf(q);
    let nf = n as f64;
    let mut log_terms = Vec::with_capacity(law_u.len() * (q / 2 + 1));
    for &(uu, lw_u) in &law_u {
        if uu == 0 {
            continue;
        }
        for &(vv, lw_v) in law_v.iter().filter(|(vv, _)| *vv > 0) {
            let x = a2 * (uu * vv) as f64;
            log_terms.push(lw_u + lw_v + ln_symmetric_excess(nf, x));
        }
    }
    Ok(stable_sum(log_terms.into_iter().map(f64::exp).collect()))
}

/// `4b²ln4 / (1 − b²ln4)`, the closed-form ceiling on the divergence.
pub fn chi_square_closed_bound(b: f64) -> Result<f64> {
    if !(b >= 0.0) || b >= closed_bound_cap() {
        return Err(Error::domain(
            "b",
            format!("{b} not in [0, 1/sqrt(ln 4)) = [0, {})", closed_bound_cap()),
        ));
    }
    let x = b * b * ln4();
    Ok(4.0 * x / (1.0 - x))
}

/// Largest signal constant meeting every cap used in the bound chain:
/// the `(β − α)` target and the `1/(2√κ)` MGF cap (which implies `1/√κ`).
pub fn select_b(kappa: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < beta && beta < 1.0) {
        return Err(Error::invalid(
            "alpha, beta",
            format!("need 0 < alpha < beta < 1, got alpha = {alpha}, beta = {beta}"),
        ));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa", format!("{kappa} is not positive")));
    }
    let gap = beta - alpha;
    let target = gap / (ln4().sqrt() * (1.0 + gap));
    let mgf_cap = (1.0 - SELECT_B_MARGIN) / (2.0 * kappa.sqrt());
    Ok(target.min(mgf_cap))
}

/// `4·μ^(−1/(b² ln 4))`: the Hoeffding bound on `P(|UV| ≥ (ln μ/ln 2)·√(pq)/b²)`.
pub fn hoeffding_tail_bound(p: usize, q: usize, b: f64, mu: f64) -> Result<f64> {
    if p == 0 || q == 0 {
        return Err(Error::invalid("p, q", "dimensions must be positive"));
    }
    if !(mu > 1.0) {
        return Err(Error::domain("mu", format!("{mu} must exceed 1")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid("b", format!("{b} must be positive")));
    }
    Ok(4.0 * mu.powf(-1.0 / (b * b * ln4())))
}

/// Threshold on `|UV|` whose tail [`hoeffding_tail_bound`] controls.
pub fn hoeffding_threshold(p: usize, q: usize, b: f64, mu: f64) -> f64 {
    mu.ln() / std::f64::consts::LN_2 * (p as f64 * q as f64).sqrt() / (b * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validity {
    /// `a²pq < 1`.
    pub pd_ok: bool,
    /// Every `tγ_ij < 1`.
    pub mgf_ok: bool,
    /// `b < 1/(2√κ)` with `κ = (p+q)/n`, and `b < 1/√(ln 4)`.
    pub b_caps_ok: bool,
}

impl Validity {
    pub fn assess(n: usize, p: usize, q: usize, b: f64) -> Self {
        let a = amplitude(n, p, q, b).unwrap_or(f64::NAN);
        let pd_ok = a * a * (p as f64) * (q as f64) < 1.0;
        let mgf_ok = pd_ok && mgf_validity(a, p, q);
        let kappa = (p + q) as f64 / n as f64;
        let b_caps_ok = b < 1.0 / (2.0 * kappa.sqrt()) && b < closed_bound_cap();
        Self {
            pd_ok,
            mgf_ok,
            b_caps_ok,
        }
    }

    pub fn all(&self) -> bool {
        self.pd_ok && self.mgf_ok && self.b_caps_ok
    }
}

/// Divergence and the power ceiling it implies at one `(n, p, q, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub b: f64,
    pub a: f64,
    pub alpha: f64,
    pub chi2_exact: f64,
    /// Infinite when `b ≥ 1/√(ln 4)`.
    pub chi2_closed_bound: f64,
    /// `½√χ²`, an upper bound on the total variation distance.
    pub tv_upper: f64,
    /// `α + tv_upper`, an upper bound on the average power of any level-α test.
    pub power_upper: f64,
    pub validity: Validity,
}

pub fn minimax_power_upper(
    n: usize,
    p: usize,
    q: usize,
    b: f64,
    alpha: f64,
) -> Result<DivergenceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    let a = amplitude(n, p, q, b)?;
    let chi2_exact = chi_square_exact(n, p, q, b)?;
    let chi2_closed_bound = chi_square_closed_bound(b).unwrap_or(f64::INFINITY);
    let tv_upper = 0.5 * chi2_exact.sqrt();
    Ok(DivergenceReport {
        n,
        p,
        q,
        b,
        a,
        alpha,
        chi2_exact,
        chi2_closed_bound,
        tv_upper,
        power_upper: alpha + tv_upper,
        validity: Validity::assess(n, p, q, b),
    })
}
