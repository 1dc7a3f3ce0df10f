//! Dirichlet sine eigenbasis on an interval with Gauss–Legendre quadrature.
//!
//! The basis functions `w^k(x) = sqrt(2/|Ω|) sin(kπ(x−left)/|Ω|)` are the
//! eigenfunctions of −Δ with Dirichlet conditions, orthonormal in L², with
//! eigenvalues `λ_k = (kπ/|Ω|)²`. All L² pairings of basis-expanded
//! quantities are modal dot products; only genuinely nonlinear or x-explicit
//! integrands route through the quadrature rule.

use crate::error::{Error, Result};
use crate::problem::Interval;

/// Coefficients of a function in the `w^k` expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalVector {
    pub coeffs: Vec<f64>,
}

impl ModalVector {
    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n] }
    }

    /// Unit vector along mode `k` (1-based).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coeffs[k - 1] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Euclidean norm; equals the L² norm of the expanded function.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Nodes and weights of an `n`-point Gauss–Legendre rule on (−1, 1).
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the node counts used here (≤ a few thousand).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Sine eigenbasis of the Dirichlet Laplacian on an interval.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub domain: Interval,
    pub n_modes: usize,
    /// `λ_k = (kπ/|Ω|)²`, strictly increasing.
    pub eigenvalues: Vec<f64>,
    pub quad_nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// `w_table[k * M + m] = w^{k+1}(x_m)`, cached for the O(NM) transforms.
    w_table: Vec<f64>,
}

/// Builds the basis with `M = quad_factor · n_modes` Gauss–Legendre nodes.
pub fn build_basis(domain: Interval, n_modes: usize, quad_factor: usize) -> Result<SpectralBasis> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if quad_factor < 4 {
        return Err(Error::InvalidArgument(
            "quad_factor must be at least 4 (anti-aliasing margin)".into(),
        ));
    }
    let len = domain.length();
    let m = quad_factor * n_modes;
    let (ref_nodes, ref_weights) = gauss_legendre(m);
    let half = 0.5 * len;
    let mid = 0.5 * (domain.left + domain.right);
    let quad_nodes: Vec<f64> = ref_nodes.iter().map(|x| mid + half * x).collect();
    let quad_weights: Vec<f64> = ref_weights.iter().map(|w| half * w).collect();

    let eigenvalues: Vec<f64> = (1..=n_modes)
        .map(|k| {
            let kp = k as f64 * std::f64::consts::PI / len;
            kp * kp
        })
        .collect();

    let amp = (2.0 / len).sqrt();
    let mut w_table = vec![0.0; n_modes * m];
    for k in 0..n_modes {
        let freq = (k + 1) as f64 * std::f64::consts::PI / len;
        for (j, &x) in quad_nodes.iter().enumerate() {
            w_table[k * m + j] = amp * (freq * (x - domain.left)).sin();
        }
    }

    Ok(SpectralBasis { domain, n_modes, eigenvalues, quad_nodes, quad_weights, w_table })
}

impl SpectralBasis {
    /// `w^k(x)` for 1-based `k`, at an arbitrary point.
    pub fn eval_mode(&self, k: usize, x: f64) -> f64 {
        let len = self.domain.length();
        let amp = (2.0 / len).sqrt();
        amp * (k as f64 * std::f64::consts::PI / len * (x - self.domain.left)).sin()
    }

    /// Projects `f` onto the first `n_modes` modes by quadrature.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> ModalVector {
        let values: Vec<f64> = self.quad_nodes.iter().map(|&x| f(x)).collect();
        self.project_values(&values)
    }

    /// Projects samples given at the quadrature nodes.
    pub fn project_values(&self, values: &[f64]) -> ModalVector {
        let m = self.quad_nodes.len();
        let mut coeffs = vec![0.0; self.n_modes];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let row = &self.w_table[k * m..(k + 1) * m];
            *c = row
                .iter()
                .zip(values)
                .zip(&self.quad_weights)
                .map(|((w, v), q)| w * v * q)
                .sum();
        }
        ModalVector { coeffs }
    }

    /// Pointwise synthesis `Σ_k coeffs_k w^k(x)` at arbitrary points.
    pub fn evaluate(&self, v: &ModalVector, points: &[f64]) -> Result<Vec<f64>> {
        let (l, r) = (self.domain.left, self.domain.right);
        let slack = 1e-12 * self.domain.length();
        for &x in points {
            if x < l - slack || x > r + slack {
                return Err(Error::PointOutsideDomain { point: x, left: l, right: r });
            }
        }
        Ok(points
            .iter()
            .map(|&x| {
                (1..=self.n_modes).map(|k| v.coeffs[k - 1] * self.eval_mode(k, x)).sum()
            })
            .collect())
    }

    /// Values of the expansion at the quadrature nodes (cached table).
    pub fn synthesize_at_nodes(&self, v: &ModalVector) -> Vec<f64> {
        let m = self.quad_nodes.len();
        let mut out = vec![0.0; m];
        for k in 0..self.n_modes {
            let c = v.coeffs[k];
            if c == 0.0 {
                continue;
            }
            let row = &self.w_table[k * m..(k + 1) * m];
            for (o, w) in out.iter_mut().zip(row) {
                *o += c * w;
            }
        }
        out
    }

    /// `∫ ∇u·∇v dx = Σ_k λ_k u_k v_k`, exact in the eigenbasis.
    pub fn gradient_pairing(&self, u: &ModalVector, v: &ModalVector) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&u.coeffs)
            .zip(&v.coeffs)
            .map(|((l, a), b)| l * a * b)
            .sum()
    }

    /// `‖∇u‖²_{L²} = Σ λ_k u_k²`.
    pub fn grad_norm_sq(&self, u: &ModalVector) -> f64 {
        self.gradient_pairing(u, u)
    }

    /// Quadrature inner product of two node-sample vectors.
    pub fn quad_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.quad_weights).map(|((x, y), w)| x * y * w).sum()
    }

    /// Quadrature L² norm of a function.
    pub fn quad_norm(&self, f: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.quad_nodes.iter().map(|&x| f(x)).collect();
        self.quad_inner(&vals, &vals).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_pi_basis(n: usize) -> SpectralBasis {
        build_basis(Interval::new(0.0, PI).unwrap(), n, 4).unwrap()
    }

    #[test]
    fn eigenvalues_on_zero_pi() {
        let b = unit_pi_basis(3);
        assert_abs_diff_eq!(b.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.eigenvalues[1], 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(b.eigenvalues[2], 9.0, epsilon = 1e-13);
    }

    #[test]
    fn eigenvalues_on_unit_interval() {
        let b = build_basis(Interval::new(0.0, 1.0).unwrap(), 2, 4).unwrap();
        assert_relative_eq!(b.eigenvalues[0], PI * PI, epsilon = 1e-13);
        assert_relative_eq!(b.eigenvalues[1], 4.0 * PI * PI, epsilon = 1e-13);
    }

    #[test]
    fn rejects_zero_modes_and_thin_quadrature() {
        assert!(build_basis(Interval::new(0.0, 1.0).unwrap(), 0, 4).is_err());
        assert!(build_basis(Interval::new(0.0, 1.0).unwrap(), 4, 3).is_err());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let b = unit_pi_basis(8);
        let m = b.quad_nodes.len();
        for j in 1..=8 {
            let vj: Vec<f64> = (0..m).map(|i| b.w_table[(j - 1) * m + i]).collect();
            for k in 1..=8 {
                let vk: Vec<f64> = (0..m).map(|i| b.w_table[(k - 1) * m + i]).collect();
                let g = b.quad_inner(&vj, &vk);
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((g - expect).abs() <= 1e-10, "gram[{j}][{k}] = {g}");
            }
        }
    }

    #[test]
    fn project_picks_out_single_modes() {
        let b = unit_pi_basis(6);
        let v = b.project(|x| b.eval_mode(1, x));
        assert_abs_diff_eq!(v.coeffs[0], 1.0, epsilon = 1e-12);
        for c in &v.coeffs[1..] {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
        let lin = b.project(|x| 3.0 * b.eval_mode(2, x) - 2.0 * b.eval_mode(5, x));
        let expect = [0.0, 3.0, 0.0, 0.0, -2.0, 0.0];
        for (c, e) in lin.coeffs.iter().zip(expect) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn project_parabola_matches_sine_series() {
        // x(π−x) on (0,π): ⟨f, w^k⟩ = sqrt(2/π) · 2(1−(−1)^k)/k³, i.e. the
        // classical series x(π−x) = (8/π) Σ_{k odd} sin(kx)/k³.
        let b = unit_pi_basis(12);
        let v = b.project(|x| x * (PI - x));
        for k in 1..=12usize {
            let parity = if k % 2 == 0 { 0.0 } else { 2.0 };
            let expect = (2.0 / PI).sqrt() * 2.0 * parity / (k as f64).powi(3);
            assert_abs_diff_eq!(v.coeffs[k - 1], expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn evaluate_respects_dirichlet_and_midpoint() {
        let b = unit_pi_basis(4);
        let e1 = ModalVector::unit(4, 1);
        let vals = b.evaluate(&e1, &[PI / 2.0, 0.0, PI]).unwrap();
        assert_relative_eq!(vals[0], (2.0 / PI).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[2], 0.0, epsilon = 1e-13);
        assert!(b.evaluate(&e1, &[-0.1]).is_err());
    }

    #[test]
    fn gradient_pairing_matches_eigenvalues_and_parabola() {
        let b = unit_pi_basis(64);
        let e1 = ModalVector::unit(64, 1);
        let e2 = ModalVector::unit(64, 2);
        assert_abs_diff_eq!(b.gradient_pairing(&e1, &e1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.gradient_pairing(&e1, &e2), 0.0, epsilon = 1e-14);
        // ‖∇(x(π−x))‖² = ∫ (π−2x)² dx = π³/3; the N = 64 truncation leaves
        // a relative tail of ≈6e-7.
        let v = b.project(|x| x * (PI - x));
        assert_relative_eq!(b.grad_norm_sq(&v), PI.powi(3) / 3.0, max_relative = 1e-6);
    }

    proptest! {
        // Round trip + Parseval for band-limited inputs.
        #[test]
        fn transform_round_trip(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, c5 in -3.0f64..3.0) {
            let b = unit_pi_basis(8);
            let f = move |x: f64| {
                c1 * (2.0 / PI).sqrt() * x.sin()
                    + c2 * (2.0 / PI).sqrt() * (2.0 * x).sin()
                    + c5 * (2.0 / PI).sqrt() * (5.0 * x).sin()
            };
            let v = b.project(f);
            let back = b.synthesize_at_nodes(&v);
            for (&x, &got) in b.quad_nodes.iter().zip(&back) {
                prop_assert!((got - f(x)).abs() <= 1e-10);
            }
            // Parseval: quadrature norm equals modal norm.
            let vals: Vec<f64> = b.quad_nodes.iter().map(|&x| f(x)).collect();
            let l2 = b.quad_inner(&vals, &vals);
            prop_assert!((l2 - v.dot(&v)).abs() <= 1e-10);
        }

        // Friedrichs inequality in modal arithmetic: ‖u‖² ≤ (1/λ₁)‖∇u‖².
        #[test]
        fn friedrichs_realized(coeffs in proptest::collection::vec(-5.0f64..5.0, 6)) {
            let b = unit_pi_basis(6);
            let v = ModalVector { coeffs };
            let lhs = v.dot(&v);
            let rhs = b.grad_norm_sq(&v) / b.eigenvalues[0];
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
        }
    }
}
