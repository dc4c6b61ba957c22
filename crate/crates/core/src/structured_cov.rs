//! The least-favorable covariance family `Σ_uv = I + a(uv' + vu')`.
//!
//! `u` lives on the first `p` coordinates and `v` on the last `q`, so the
//! perturbation only touches the cross block: entry `(i, p + j)` equals
//! `a·u_i·v_j`. The rank-two perturbation has eigenpairs
//! `λ± = 1 ± a√(pq)` with unit vectors `w± = (u/√(2p)) ⊕ (±v/√(2q))`, which
//! gives closed forms for the inverse, determinant and symmetric square root.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `a = b / (√(2n)·(pq)^(1/4))`.
pub fn amplitude(n: usize, p: usize, q: usize, b: f64) -> Result<f64> {
    for (name, v) in [("n", n), ("p", p), ("q", q)] {
        if v == 0 {
            return Err(Error::invalid(name, "must be positive"));
        }
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::invalid("b", format!("{b} is not a nonnegative real")));
    }
    let pq = (p as f64) * (q as f64);
    Ok(b / ((2.0 * n as f64).sqrt() * pq.sqrt().sqrt()))
}

/// Sign blocks `u ∈ {±1}^p`, `v ∈ {±1}^q` selecting one member of the family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Direction {
    pub u: Vec<i8>,
    pub v: Vec<i8>,
}

impl Direction {
    pub fn new(u: Vec<i8>, v: Vec<i8>) -> Result<Self> {
        if u.is_empty() || v.is_empty() {
            return Err(Error::invalid("direction", "sign vectors must be nonempty"));
        }
        if u.iter().chain(&v).any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("direction", "entries must be exactly +1 or -1"));
        }
        Ok(Self { u, v })
    }

    pub fn p(&self) -> usize {
        self.u.len()
    }

    pub fn q(&self) -> usize {
        self.v.len()
    }
}

/// Uniform draw over the `2^(p+q)` sign patterns.
pub fn sample_direction<R: Rng + ?Sized>(p: usize, q: usize, rng: &mut R) -> Direction {
    let mut signs = |m: usize| -> Vec<i8> {
        (0..m)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect()
    };
    let u = signs(p);
    let v = signs(q);
    Direction { u, v }
}

/// Dense `I + a(uv' + vu')` with no positive-definiteness check.
pub fn perturbed_identity(u: &[i8], v: &[i8], a: f64) -> DMatrix<f64> {
    let p = u.len();
    let d = p + v.len();
    let mut m = DMatrix::identity(d, d);
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            let e = a * f64::from(ui) * f64::from(vj);
            m[(i, p + j)] = e;
            m[(p + j, i)] = e;
        }
    }
    m
}

/// A positive definite member of the least-favorable family.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastFavorableCov {
    direction: Direction,
    a: f64,
}

impl LeastFavorableCov {
    pub fn new(direction: Direction, a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("{a} is not a nonnegative real")));
        }
        let lf = Self { direction, a };
        let load = lf.a * lf.a * lf.pq();
        if load >= 1.0 {
            return Err(Error::NotPositiveDefinite(load));
        }
        Ok(lf)
    }

    /// Member at signal constant `b` for sample size `n`.
    pub fn from_signal(direction: Direction, n: usize, b: f64) -> Result<Self> {
        let a = amplitude(n, direction.p(), direction.q(), b)?;
        Self::new(direction, a)
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn u(&self) -> &[i8] {
        &self.direction.u
    }

    pub fn v(&self) -> &[i8] {
        &self.direction.v
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> usize {
        self.direction.p()
    }

    pub fn q(&self) -> usize {
        self.direction.q()
    }

    pub fn dim(&self) -> usize {
        self.p() + self.q()
    }

    fn pq(&self) -> f64 {
        self.p() as f64 * self.q() as f64
    }

    /// `‖Σ_XY‖_F = a√(pq)`.
    pub fn cross_frobenius(&self) -> f64 {
        self.a * self.pq().sqrt()
    }

    pub fn dense_cov(&self) -> DMatrix<f64> {
        perturbed_identity(self.u(), self.v(), self.a)
    }

    /// Sherman–Morrison inverse.
    pub fn cov_inverse(&self) -> DMatrix<f64> {
        let (p, q, a) = (self.p(), self.q(), self.a);
        let denom = 1.0 - self.pq() * a * a;
        let xx = a * a * q as f64 / denom;
        let yy = a * a * p as f64 / denom;
        let xy = -a / denom;
        let (u, v) = (self.u(), self.v());
        let mut m = DMatrix::identity(p + q, p + q);
        for i in 0..p {
            for k in 0..p {
                m[(i, k)] += xx * f64::from(u[i] * u[k]);
            }
            for j in 0..q {
                let e = xy * f64::from(u[i] * v[j]);
                m[(i, p + j)] = e;
                m[(p + j, i)] = e;
            }
        }
        for j in 0..q {
            for l in 0..q {
                m[(p + j, p + l)] += yy * f64::from(v[j] * v[l]);
            }
        }
        m
    }

    /// `det Σ_uv = 1 − pq·a²`.
    pub fn cov_det(&self) -> f64 {
        1.0 - self.pq() * self.a * self.a
    }

    /// Eigenvalues `(λ₊, λ₋)` of the rank-two directions.
    pub fn rank_two_eigenvalues(&self) -> (f64, f64) {
        let s = self.a * self.pq().sqrt();
        (1.0 + s, 1.0 - s)
    }

    /// `Σ_uv^(1/2) z` in `O(p + q)`.
    pub fn sqrt_apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = z.to_vec();
        self.sqrt_apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn sqrt_apply_in_place(&self, z: &mut [f64]) -> Result<()> {
        let (p, q) = (self.p(), self.q());
        if z.len() != p + q {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a {}-dimensional covariance",
                z.len(),
                p + q
            )));
        }
        let (lp, lm) = self.rank_two_eigenvalues();
        if lm <= 0.0 {
            return Err(Error::NotPositiveDefinite(self.a * self.a * self.pq()));
        }
        let (zx, zy) = z.split_at_mut(p);
        let ux: f64 = self.u().iter().zip(zx.iter()).map(|(&s, &x)| f64::from(s) * x).sum();
        let vy: f64 = self.v().iter().zip(zy.iter()).map(|(&s, &y)| f64::from(s) * y).sum();
        let sx = 1.0 / (2.0 * p as f64).sqrt();
        let sy = 1.0 / (2.0 * q as f64).sqrt();
        // Projections onto w₊ and w₋.
        let cp = sx * ux + sy * vy;
        let cm = sx * ux - sy * vy;
        let kp = (lp.sqrt() - 1.0) * cp;
        let km = (lm.sqrt() - 1.0) * cm;
        let x_shift = sx * (kp + km);
        let y_shift = sy * (kp - km);
        for (x, &s) in zx.iter_mut().zip(self.u()) {
            *x += x_shift * f64::from(s);
        }
        for (y, &s) in zy.iter_mut().zip(self.v()) {
            *y += y_shift * f64::from(s);
        }
        Ok(())
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Null,
    LeastFavorable(LeastFavorableCov),
    Regression,
    TwoSample,
    External,
}

/// `n` rows of `(x, y)` with `x ∈ ℝ^p`, `y ∈ ℝ^q`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    q: usize,
    values: Vec<f64>,
    origin: Origin,
}

impl Dataset {
    pub fn from_rows(p: usize, q: usize, values: Vec<f64>, origin: Origin) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid("dataset", "p and q must be positive"));
        }
        let d = p + q;
        if values.len() % d != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not split into rows of width {d}",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("dataset", "all values must be finite"));
        }
        Ok(Self {
            n: values.len() / d,
            p,
            q,
            values,
            origin,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.p + self.q;
        &self.values[i * d..(i + 1) * d]
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.row(i)[..self.p]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.row(i)[self.p..]
    }

    /// Reorders whole rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(self.values.len());
        for &i in perm {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            values,
            ..self.clone()
        }
    }
}

/// Generating model for [`sample_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// `Σ = I`.
    Null { p: usize, q: usize },
    Alternative(LeastFavorableCov),
}

impl Hypothesis {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Hypothesis::Null { p, q } => (*p, *q),
            Hypothesis::Alternative(lf) => (lf.p(), lf.q()),
        }
    }
}

/// `n` i.i.d. rows from `N(0, Σ)`.
pub fn sample_dataset<R: Rng + ?Sized>(
    hypothesis: &Hypothesis,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let (p, q) = hypothesis.dims();
    let d = p + q;
    let mut values: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let origin = match hypothesis {
        Hypothesis::Null { .. } => Origin::Null,
        Hypothesis::Alternative(lf) => {
            for row in values.chunks_exact_mut(d) {
                lf.sqrt_apply_in_place(row)?;
            }
            Origin::LeastFavorable(lf.clone())
        }
    };
    Dataset::from_rows(p, q, values, origin)
}

/// Dense reference paths, kept for validating the closed forms above.
pub mod verify {
    use nalgebra::{DMatrix, SymmetricEigen};

    use super::LeastFavorableCov;

    pub fn dense_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        m.clone().lu().try_inverse()
    }

    pub fn dense_det(m: &DMatrix<f64>) -> f64 {
        m.clone().lu().determinant()
    }

    pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
        SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric square root via eigendecomposition; `None` if not PSD.
    pub fn dense_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let eig = SymmetricEigen::new(m.clone());
        if eig.eigenvalues.iter().any(|&l| l < 0.0) {
            return None;
        }
        let roots = eig.eigenvalues.map(f64::sqrt);
        Some(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
    }

    #[derive(Debug, Clone, Copy)]
    pub struct DenseCheck {
        /// `max |Σ·Σ⁻¹ − I|` using the closed-form inverse.
        pub identity_residual: f64,
        /// `max |Σ⁻¹ − LU inverse|`.
        pub inverse_max_abs_err: f64,
        pub det_rel_err: f64,
        /// `max |S − eigen square root|` where `S` is assembled column by column from `sqrt_apply`.
        pub sqrt_max_abs_err: f64,
    }

    impl DenseCheck {
        pub fn max_err(&self) -> f64 {
            self.identity_residual
                .max(self.inverse_max_abs_err)
                .max(self.det_rel_err)
                .max(self.sqrt_max_abs_err)
        }
    }

    pub fn sqrt_matrix(lf: &LeastFavorableCov) -> DMatrix<f64> {
        let d = lf.dim();
        let mut s = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = lf.sqrt_apply(&e).expect("dimension matches");
            for (i, x) in col.into_iter().enumerate() {
                s[(i, j)] = x;
            }
        }
        s
    }

    pub fn check(lf: &LeastFavorableCov) -> DenseCheck {
        let sigma = lf.dense_cov();
        let inv = lf.cov_inverse();
        let d = lf.dim();
        let identity_residual = (&sigma * &inv - DMatrix::<f64>::identity(d, d)).amax();
        let inverse_max_abs_err = match dense_inverse(&sigma) {
            Some(reference) => (&inv - reference).amax(),
            None => f64::INFINITY,
        };
        let det = lf.cov_det();
        let det_rel_err = (det - dense_det(&sigma)).abs() / det.abs();
        let sqrt_max_abs_err = match dense_sqrt(&sigma) {
            Some(reference) => (sqrt_matrix(lf) - reference).amax(),
            None => f64::INFINITY,
        };
        DenseCheck {
            identity_residual,
            inverse_max_abs_err,
            det_rel_err,
            sqrt_max_abs_err,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn lf(u: &[i8], v: &[i8], a: f64) -> LeastFavorableCov {
        LeastFavorableCov::new(Direction::new(u.to_vec(), v.to_vec()).unwrap(), a).unwrap()
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(amplitude(50, 4, 4, 0.5).unwrap(), 0.025);
        assert_relative_eq!(amplitude(1, 1, 1, 2f64.sqrt()).unwrap(), 1.0, max_relative = 1e-15);
        // 0.2 / (20 · 50^(1/4)), 50^(1/4) = 2.6591479484724942.
        assert_relative_eq!(
            amplitude(200, 10, 5, 0.2).unwrap(),
            0.2 / (20.0 * 2.659_147_948_472_494_2),
            max_relative = 1e-14
        );
        assert!(amplitude(0, 1, 1, 0.1).is_err());
        assert!(amplitude(1, 1, 1, -0.1).is_err());
    }

    #[test]
    fn amplitude_matches_theta_radius() {
        let (n, p, q, b) = (200, 10, 5, 0.2);
        let a = amplitude(n, p, q, b).unwrap();
        let radius = b * ((p * q) as f64).powf(0.25) / (2.0 * n as f64).sqrt();
        assert_relative_eq!(a * ((p * q) as f64).sqrt(), radius, max_relative = 1e-14);
    }

    #[test]
    fn direction_rejects_non_signs() {
        assert!(Direction::new(vec![1, 0], vec![1]).is_err());
        assert!(Direction::new(vec![], vec![1]).is_err());
    }

    #[test]
    fn sample_direction_is_deterministic_and_uniform_for_one_by_one() {
        assert_eq!(
            sample_direction(3, 2, &mut stream(5, &[])),
            sample_direction(3, 2, &mut stream(5, &[]))
        );
        let mut rng = stream(11, &[]);
        let mut counts = [0usize; 4];
        let draws = 40_000;
        for _ in 0..draws {
            let d = sample_direction(1, 1, &mut rng);
            counts[usize::from(d.u[0] > 0) * 2 + usize::from(d.v[0] > 0)] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 0.25).abs() < 4.0 * (0.25 * 0.75 / draws as f64).sqrt());
        }
    }

    #[test]
    fn dense_cov_examples() {
        let m = lf(&[1], &[1], 0.3).dense_cov();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]));
        let m = lf(&[1, -1], &[1], 0.2).dense_cov();
        assert_eq!(m[(0, 2)], 0.2);
        assert_eq!(m[(1, 2)], -0.2);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(lf(&[1, -1], &[1, 1], 0.0).dense_cov(), DMatrix::identity(4, 4));
    }

    #[test]
    fn boundary_amplitude_is_rejected() {
        let d = Direction::new(vec![1, 1], vec![1, -1]).unwrap();
        assert!(matches!(
            LeastFavorableCov::new(d.clone(), 0.5),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(LeastFavorableCov::new(d, 0.4999).is_ok());
    }

    #[test]
    fn inverse_and_det_examples() {
        assert_eq!(lf(&[1, 1], &[-1], 0.0).cov_inverse(), DMatrix::identity(3, 3));
        let inv = lf(&[1], &[1], 0.3).cov_inverse();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -0.3, -0.3, 1.0]) / 0.91;
        assert!((inv - expected).amax() < 1e-15);
        assert_eq!(lf(&[1; 4], &[-1; 4], 0.0).cov_det(), 1.0);
        assert_relative_eq!(lf(&[1; 4], &[-1; 4], 0.025).cov_det(), 0.99, max_relative = 1e-15);
    }

    #[test]
    fn sqrt_of_zero_perturbation_is_identity() {
        let z = vec![0.3, -1.2, 2.0];
        assert_eq!(lf(&[1, -1], &[1], 0.0).sqrt_apply(&z).unwrap(), z);
        assert!(lf(&[1], &[1], 0.1).sqrt_apply(&z).is_err());
    }

    #[test]
    fn rank_two_eigenpairs_match_dense_eigensolver() {
        let m = lf(&[1, -1, 1], &[-1, 1], 0.2).dense_cov();
        let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let s = 0.2 * 6f64.sqrt();
        assert_relative_eq!(eig[0], 1.0 - s, max_relative = 1e-13);
        assert_relative_eq!(eig[4], 1.0 + s, max_relative = 1e-13);
        for &mid in &eig[1..4] {
            assert_relative_eq!(mid, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn cross_block_concentrates_on_signed_amplitude() {
        let cov = lf(&[1, -1], &[1, 1], 0.2);
        let n = 100_000;
        let ds = sample_dataset(&Hypothesis::Alternative(cov.clone()), n, &mut stream(3, &[])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let emp: f64 = (0..n).map(|r| ds.x(r)[i] * ds.y(r)[j]).sum::<f64>() / n as f64;
                let target = 0.2 * f64::from(cov.u()[i] * cov.v()[j]);
                assert!((emp - target).abs() < 3.0 / (n as f64).sqrt(), "{emp} vs {target}");
            }
        }
    }

    #[test]
    fn sample_covariance_approaches_dense_cov() {
        let cov = lf(&[1, -1], &[1, -1], 0.3);
        let n = 200_000;
        let ds = sample_dataset(&Hypothesis::Alternative(cov.clone()), n, &mut stream(21, &[])).unwrap();
        let target = cov.dense_cov();
        for i in 0..4 {
            for j in 0..4 {
                let emp: f64 = (0..n).map(|r| ds.row(r)[i] * ds.row(r)[j]).sum::<f64>() / n as f64;
                let sd = ((1.0 + target[(i, j)].powi(2)) / n as f64).sqrt();
                assert!((emp - target[(i, j)]).abs() < 4.5 * sd);
            }
        }
    }

    #[test]
    fn null_rows_have_vanishing_mean() {
        let n = 50_000;
        let ds = sample_dataset(&Hypothesis::Null { p: 2, q: 3 }, n, &mut stream(1, &[])).unwrap();
        assert_eq!(ds.origin(), &Origin::Null);
        for c in 0..5 {
            let mean: f64 = (0..n).map(|r| ds.row(r)[c]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn sampling_is_bit_reproducible() {
        let h = Hypothesis::Alternative(lf(&[1, 1, -1], &[-1, 1], 0.1));
        let a = sample_dataset(&h, 64, &mut stream(9, &[4])).unwrap();
        let b = sample_dataset(&h, 64, &mut stream(9, &[4])).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn dataset_rejects_ragged_or_nonfinite_values() {
        assert!(Dataset::from_rows(1, 1, vec![1.0, 2.0, 3.0], Origin::External).is_err());
        assert!(Dataset::from_rows(1, 1, vec![1.0, f64::NAN], Origin::External).is_err());
        let ds = Dataset::from_rows(1, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], Origin::External).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.y(1), &[5.0, 6.0]);
        assert_eq!(ds.permute_rows(&[1, 0]).x(0), &[4.0]);
    }

    fn arb_lf(max_dim: usize) -> impl Strategy<Value = LeastFavorableCov> {
        (1..=max_dim, 1..=max_dim)
            .prop_flat_map(|(p, q)| {
                (
                    prop::collection::vec(prop::bool::ANY, p),
                    prop::collection::vec(prop::bool::ANY, q),
                    0.0..0.999f64,
                )
            })
            .prop_map(|(u, v, frac)| {
                let sign = |b: bool| if b { 1i8 } else { -1 };
                let d = Direction::new(u.into_iter().map(sign).collect(), v.into_iter().map(sign).collect())
                    .unwrap();
                let a = frac / ((d.p() * d.q()) as f64).sqrt();
                LeastFavorableCov::new(d, a).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn closed_forms_agree_with_dense_paths(cov in arb_lf(10)) {
            let check = verify::check(&cov);
            prop_assert!(check.identity_residual <= 1e-10, "{check:?}");
            // Near the PD boundary the LU inverse itself loses digits.
            let cond = 1.0 / cov.rank_two_eigenvalues().1;
            prop_assert!(check.inverse_max_abs_err <= 1e-12 * cond.max(1.0), "{check:?}");
            prop_assert!(check.det_rel_err <= 1e-10 * cond.max(1.0), "{check:?}");
            prop_assert!(check.sqrt_max_abs_err <= 1e-10 * cond.max(1.0), "{check:?}");
        }

        #[test]
        fn cross_block_has_frobenius_a_sqrt_pq(cov in arb_lf(8)) {
            let m = cov.dense_cov();
            let p = cov.p();
            let fro: f64 = (0..p)
                .flat_map(|i| (0..cov.q()).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, p + j)].powi(2))
                .sum::<f64>()
                .sqrt();
            prop_assert!((fro - cov.cross_frobenius()).abs() <= 1e-14 * fro.max(1e-300));
        }

        #[test]
        fn sqrt_applied_twice_is_multiplication_by_sigma(
            cov in arb_lf(6),
            seed in any::<u64>(),
        ) {
            let mut rng = stream(seed, &[]);
            let z: Vec<f64> = (0..cov.dim()).map(|_| rng.sample(StandardNormal)).collect();
            let twice = cov.sqrt_apply(&cov.sqrt_apply(&z).unwrap()).unwrap();
            let direct = cov.dense_cov() * nalgebra::DVector::from_vec(z);
            for (x, y) in twice.iter().zip(direct.iter()) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn positive_definite_exactly_below_unit_load(
            p in 1usize..5,
            q in 1usize..5,
            load in 0.0..2.0f64,
            seed in any::<u64>(),
        ) {
            prop_assume!((load - 1.0).abs() > 1e-6);
            let d = sample_direction(p, q, &mut stream(seed, &[]));
            let a = (load / (p * q) as f64).sqrt();
            let min_eig = verify::min_eigenvalue(&perturbed_identity(&d.u, &d.v, a));
            prop_assert_eq!(min_eig > 0.0, load < 1.0);
            prop_assert_eq!(LeastFavorableCov::new(d, a).is_ok(), load < 1.0);
        }
    }
}
