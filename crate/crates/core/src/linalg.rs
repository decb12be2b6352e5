//! Small dense linear algebra for regularized Gram matrices.
//!
//! The estimators in this crate all revolve around `V = lambda·I + Σ x xᵀ`
//! and quadratic forms in `V` or `V⁻¹`. [`SpdState`] keeps both the matrix
//! and its inverse: each rank-one update applies the Sherman–Morrison
//! identity
//!
//! ```text
//! (V + x xᵀ)⁻¹ = V⁻¹ − (V⁻¹ x)(V⁻¹ x)ᵀ / (1 + xᵀ V⁻¹ x)
//! ```
//!
//! in O(d²), and every [`REBUILD_PERIOD`]-th update recomputes the inverse
//! from a Cholesky factorization of `V` to stop drift from accumulating.
//! Dimensions stay small (a handful in practice), so full row-major storage
//! is used throughout.

use serde::{Deserialize, Serialize};
use std::ops::{Deref, DerefMut};

use crate::scalar::Real;
use crate::{Error, Result};

/// Rank-one updates between from-scratch inverse rebuilds.
pub const REBUILD_PERIOD: u32 = 256;

/// Dense column vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<F>(Vec<F>);

impl<F: Real> Vector<F> {
    pub fn new(values: Vec<F>) -> Self {
        Vector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![F::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Self) -> F {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> F {
        self.dot(self).sqrt()
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "plus: dimension mismatch");
        Vector(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    pub fn scaled(&self, c: F) -> Self {
        Vector(self.0.iter().map(|&a| a * c).collect())
    }

    pub fn add_in_place(&mut self, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "add_in_place: dimension mismatch");
        for (a, &b) in self.0.iter_mut().zip(other.0.iter()) {
            *a = *a + b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }
}

impl<F> Deref for Vector<F> {
    type Target = [F];
    fn deref(&self) -> &[F] {
        &self.0
    }
}

impl<F> DerefMut for Vector<F> {
    fn deref_mut(&mut self) -> &mut [F] {
        &mut self.0
    }
}

impl<F> From<Vec<F>> for Vector<F> {
    fn from(values: Vec<F>) -> Self {
        Vector(values)
    }
}

/// Which quadratic form [`SpdState::weighted_norm`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// `√(xᵀ V x)`
    Direct,
    /// `√(xᵀ V⁻¹ x)`
    Inverse,
}

/// Symmetric positive-definite matrix `V = lambda·I + Σ x xᵀ` together with
/// its maintained inverse.
///
/// Both buffers are kept exactly symmetric; after every public operation the
/// residual `‖V·V⁻¹ − I‖_max` stays at or below 1e-8 (checked in debug
/// builds, guaranteed by the periodic rebuild).
#[derive(Clone, Debug)]
pub struct SpdState<F> {
    dim: usize,
    matrix: Vec<F>,
    inverse: Vec<F>,
    updates_since_rebuild: u32,
}

impl<F: Real> SpdState<F> {
    /// Starts from `lambda·I`. `dim` must be positive and `lambda` strictly
    /// positive and finite.
    pub fn new(dim: usize, lambda: F) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("spd dimension must be positive"));
        }
        if !(lambda > F::zero()) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "regularizer must be positive and finite, got {lambda}"
            )));
        }
        let mut matrix = vec![F::zero(); dim * dim];
        let mut inverse = vec![F::zero(); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = lambda;
            inverse[i * dim + i] = F::one() / lambda;
        }
        Ok(SpdState {
            dim,
            matrix,
            inverse,
            updates_since_rebuild: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> F {
        self.matrix[i * self.dim + j]
    }

    pub fn inverse_entry(&self, i: usize, j: usize) -> F {
        self.inverse[i * self.dim + j]
    }

    /// Adds `x xᵀ`, updating the inverse via Sherman–Morrison.
    pub fn rank_one_update(&mut self, x: &Vector<F>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::invalid(format!(
                "rank-one update dimension {} does not match state dimension {}",
                x.dim(),
                self.dim
            )));
        }
        if !x.is_finite() {
            return Err(Error::invalid("rank-one update vector must be finite"));
        }

        let vx = self.apply(&self.inverse, x);
        // SPD makes xᵀV⁻¹x ≥ 0, so the denominator never approaches zero.
        let denom = F::one() + x.dot(&vx);

        let d = self.dim;
        for i in 0..d {
            for j in 0..=i {
                let m = self.matrix[i * d + j] + x[i] * x[j];
                self.matrix[i * d + j] = m;
                self.matrix[j * d + i] = m;
                let inv = self.inverse[i * d + j] - vx[i] * vx[j] / denom;
                self.inverse[i * d + j] = inv;
                self.inverse[j * d + i] = inv;
            }
        }

        self.updates_since_rebuild += 1;
        if self.updates_since_rebuild >= REBUILD_PERIOD {
            self.rebuild_inverse();
            self.updates_since_rebuild = 0;
        }
        self.debug_check_residual();
        Ok(())
    }

    /// `√(xᵀ V x)` or `√(xᵀ V⁻¹ x)`. The quadratic form is clamped at zero
    /// before the square root to absorb rounding on near-null vectors.
    pub fn weighted_norm(&self, x: &Vector<F>, mode: NormMode) -> Result<F> {
        if x.dim() != self.dim {
            return Err(Error::invalid(format!(
                "weighted norm dimension {} does not match state dimension {}",
                x.dim(),
                self.dim
            )));
        }
        let buf = match mode {
            NormMode::Direct => &self.matrix,
            NormMode::Inverse => &self.inverse,
        };
        let mx = self.apply(buf, x);
        Ok(x.dot(&mx).max(F::zero()).sqrt())
    }

    /// `V⁻¹ b` through the maintained inverse.
    pub fn solve(&self, b: &Vector<F>) -> Result<Vector<F>> {
        if b.dim() != self.dim {
            return Err(Error::invalid(format!(
                "solve dimension {} does not match state dimension {}",
                b.dim(),
                self.dim
            )));
        }
        Ok(self.apply(&self.inverse, b))
    }

    /// `‖V·V⁻¹ − I‖_max` over the maintained pair.
    pub fn max_inverse_residual(&self) -> F {
        let d = self.dim;
        let mut worst = F::zero();
        for i in 0..d {
            for j in 0..d {
                let mut s = F::zero();
                for k in 0..d {
                    s = s + self.matrix[i * d + k] * self.inverse[k * d + j];
                }
                if i == j {
                    s = s - F::one();
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    fn apply(&self, buf: &[F], x: &Vector<F>) -> Vector<F> {
        let d = self.dim;
        let mut out = Vector::zeros(d);
        for i in 0..d {
            let row = &buf[i * d..(i + 1) * d];
            let mut s = F::zero();
            for (k, &xv) in x.iter().enumerate() {
                s = s + row[k] * xv;
            }
            out[i] = s;
        }
        out
    }

    fn rebuild_inverse(&mut self) {
        let d = self.dim;
        let l = cholesky(&self.matrix, d);
        let mut fresh = vec![F::zero(); d * d];
        let mut col = vec![F::zero(); d];
        for c in 0..d {
            for v in col.iter_mut() {
                *v = F::zero();
            }
            col[c] = F::one();
            // Forward solve L y = e_c, then backward solve Lᵀ x = y.
            for i in 0..d {
                let mut s = col[i];
                for k in 0..i {
                    s = s - l[i * d + k] * col[k];
                }
                col[i] = s / l[i * d + i];
            }
            for i in (0..d).rev() {
                let mut s = col[i];
                for k in (i + 1)..d {
                    s = s - l[k * d + i] * col[k];
                }
                col[i] = s / l[i * d + i];
            }
            for r in 0..d {
                fresh[r * d + c] = col[r];
            }
        }
        for i in 0..d {
            for j in 0..i {
                let avg = (fresh[i * d + j] + fresh[j * d + i]) / F::of(2.0);
                fresh[i * d + j] = avg;
                fresh[j * d + i] = avg;
            }
        }
        self.inverse = fresh;
    }

    fn debug_check_residual(&self) {
        #[cfg(debug_assertions)]
        {
            // 1e-8 at f64 precision; scaled up for coarser scalars.
            let tol = F::of(1e-8).max(F::epsilon().sqrt() * F::of(0.1));
            let res = self.max_inverse_residual();
            debug_assert!(
                res <= tol,
                "inverse residual {res} exceeds tolerance {tol}"
            );
        }
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// Panics if a pivot is not strictly positive: the update path keeps `V`
/// positive definite, so a failure here is an internal error.
fn cholesky<F: Real>(a: &[F], d: usize) -> Vec<F> {
    let mut l = vec![F::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s = s - l[i * d + k] * l[j * d + k];
            }
            if i == j {
                assert!(
                    s > F::zero(),
                    "Gram matrix lost positive definiteness (pivot {s} at {i})"
                );
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// From-scratch Gauss–Jordan inverse, independent of the update path.
    fn direct_inverse(state: &SpdState<f64>) -> Vec<f64> {
        let d = state.dim();
        let mut a: Vec<f64> = (0..d * d).map(|k| state.matrix[k]).collect();
        let mut inv = vec![0.0; d * d];
        for i in 0..d {
            inv[i * d + i] = 1.0;
        }
        for col in 0..d {
            let mut pivot = col;
            for r in (col + 1)..d {
                if a[r * d + col].abs() > a[pivot * d + col].abs() {
                    pivot = r;
                }
            }
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
                inv.swap(col * d + k, pivot * d + k);
            }
            let p = a[col * d + col];
            for k in 0..d {
                a[col * d + k] /= p;
                inv[col * d + k] /= p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r * d + col];
                for k in 0..d {
                    a[r * d + k] -= f * a[col * d + k];
                    inv[r * d + k] -= f * inv[col * d + k];
                }
            }
        }
        inv
    }

    fn random_vector(rng: &mut impl Rng, d: usize, scale: f64) -> Vector<f64> {
        Vector::new((0..d).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * scale).collect())
    }

    #[test]
    fn init_is_scaled_identity() {
        let s = SpdState::<f64>::new(1, 2.5).unwrap();
        assert_eq!(s.entry(0, 0), 2.5);
        assert_eq!(s.inverse_entry(0, 0), 0.4);

        let s = SpdState::<f64>::new(3, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(s.entry(i, j), expect);
                assert_eq!(s.inverse_entry(i, j), expect);
            }
        }
    }

    #[test]
    fn init_rejects_bad_arguments() {
        assert!(matches!(
            SpdState::<f64>::new(2, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            SpdState::<f64>::new(2, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            SpdState::<f64>::new(0, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rank_one_update_matches_hand_inverse() {
        // 1×1: V = 1 + 1·1 = 2.
        let mut s = SpdState::<f64>::new(1, 1.0).unwrap();
        s.rank_one_update(&Vector::new(vec![1.0])).unwrap();
        assert_eq!(s.entry(0, 0), 2.0);
        assert!((s.inverse_entry(0, 0) - 0.5).abs() < 1e-15);

        // 2×2: V = I + (1,1)(1,1)ᵀ = [[2,1],[1,2]], inverse (1/3)[[2,-1],[-1,2]].
        let mut s = SpdState::<f64>::new(2, 1.0).unwrap();
        s.rank_one_update(&Vector::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(s.entry(0, 0), 2.0);
        assert_eq!(s.entry(0, 1), 1.0);
        assert_eq!(s.entry(1, 0), 1.0);
        assert_eq!(s.entry(1, 1), 2.0);
        for (i, j, want) in [
            (0, 0, 2.0 / 3.0),
            (0, 1, -1.0 / 3.0),
            (1, 0, -1.0 / 3.0),
            (1, 1, 2.0 / 3.0),
        ] {
            assert!((s.inverse_entry(i, j) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_update_rejects_bad_input() {
        let mut s = SpdState::<f64>::new(2, 1.0).unwrap();
        assert!(s.rank_one_update(&Vector::new(vec![1.0])).is_err());
        assert!(s
            .rank_one_update(&Vector::new(vec![f64::NAN, 0.0]))
            .is_err());
    }

    #[test]
    fn weighted_norm_on_diagonal_matrix() {
        // V = diag(2, 0.5) via a single axis-aligned update on lambda = 0.5.
        let mut s = SpdState::<f64>::new(2, 0.5).unwrap();
        s.rank_one_update(&Vector::new(vec![1.5f64.sqrt(), 0.0]))
            .unwrap();
        let x = Vector::new(vec![1.0, 1.0]);
        let direct = s.weighted_norm(&x, NormMode::Direct).unwrap();
        let inverse = s.weighted_norm(&x, NormMode::Inverse).unwrap();
        assert!((direct - 2.5f64.sqrt()).abs() < 1e-12);
        assert!((inverse - 2.5f64.sqrt()).abs() < 1e-12);

        assert!(s
            .weighted_norm(&Vector::new(vec![1.0]), NormMode::Direct)
            .is_err());
    }

    #[test]
    fn long_update_sequences_stay_accurate() {
        // Random directions, then a deliberately ill-conditioned stream that
        // keeps hammering the same direction.
        let cases: [(usize, bool); 2] = [(6, false), (3, true)];
        for (ci, (d, adversarial)) in cases.into_iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(900 + ci as u64);
            let mut s = SpdState::<f64>::new(d, 1.0).unwrap();
            let fixed = random_vector(&mut rng, d, 2.0);
            for i in 0..10_000 {
                let x = if adversarial && i % 4 != 0 {
                    fixed.clone()
                } else {
                    random_vector(&mut rng, d, 2.0)
                };
                s.rank_one_update(&x).unwrap();
            }
            assert!(s.max_inverse_residual() <= 1e-8);
            let oracle = direct_inverse(&s);
            for (k, entry) in oracle.iter().enumerate() {
                assert!(
                    (s.inverse[k] - entry).abs() <= 1e-7,
                    "entry {k} drifted: {} vs {entry}",
                    s.inverse[k]
                );
            }
        }
    }

    #[test]
    fn quadratic_forms_stay_positive() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let mut s = SpdState::<f64>::new(4, 0.3).unwrap();
        for _ in 0..500 {
            s.rank_one_update(&random_vector(&mut rng, 4, 3.0)).unwrap();
        }
        for _ in 0..100 {
            let x = random_vector(&mut rng, 4, 1.0);
            if x.norm() == 0.0 {
                continue;
            }
            assert!(s.weighted_norm(&x, NormMode::Direct).unwrap() > 0.0);
            assert!(s.weighted_norm(&x, NormMode::Inverse).unwrap() > 0.0);
        }
    }

    #[test]
    fn works_at_f32() {
        let mut s = SpdState::<f32>::new(2, 1.0f32).unwrap();
        s.rank_one_update(&Vector::new(vec![1.0f32, 1.0])).unwrap();
        assert!((s.inverse_entry(0, 0) - 2.0 / 3.0).abs() < 1e-6);
        let x = Vector::new(vec![1.0f32, 0.0]);
        assert!(s.weighted_norm(&x, NormMode::Direct).unwrap() > 1.0);
    }

    proptest! {
        #[test]
        fn weighted_norm_is_absolutely_homogeneous(
            seed in 0u64..500,
            c in -10.0f64..10.0,
            updates in 0usize..30,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = 3;
            let mut s = SpdState::<f64>::new(d, 1.0).unwrap();
            for _ in 0..updates {
                s.rank_one_update(&random_vector(&mut rng, d, 2.0)).unwrap();
            }
            let x = random_vector(&mut rng, d, 1.0);
            for mode in [NormMode::Direct, NormMode::Inverse] {
                let lhs = s.weighted_norm(&x.scaled(c), mode).unwrap();
                let rhs = c.abs() * s.weighted_norm(&x, mode).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
            }
        }

        #[test]
        fn elliptical_potential_is_bounded(seed in 0u64..200) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let d = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=200);
            let bound = 2.0;
            let lambda = 1.0;
            let mut s = SpdState::<f64>::new(d, lambda).unwrap();
            let mut lhs = 0.0;
            for _ in 0..k {
                let mut x = random_vector(&mut rng, d, bound);
                let n = x.norm();
                if n > bound {
                    x = x.scaled(bound / n);
                }
                let w = s.weighted_norm(&x, NormMode::Inverse).unwrap();
                lhs += (w * w).min(1.0);
                s.rank_one_update(&x).unwrap();
            }
            let df = d as f64;
            let rhs = 2.0 * df * (1.0 + k as f64 * bound * bound / (lambda * df)).ln();
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }
}
