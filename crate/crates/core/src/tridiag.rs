//! Kernels for tridiagonal matrices of Schrödinger form
//! `T = c·L + diag(w)`, where `L` is the Dirichlet second-difference matrix
//! (`2` on the diagonal, `−1` off it) and `c > 0` is the kinetic prefactor.
//!
//! Keeping `c` and `w` apart (instead of the assembled diagonal `2c + w`)
//! lets quadratic forms be evaluated in difference form, which avoids the
//! cancellation between the `O(1/h²)` diagonal and off-diagonal entries.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};

/// Number of eigenvalues of the real matrix `c·L + diag(w)` strictly below `lambda`.
pub fn sturm_count(kinetic: f64, onsite: &[f64], lambda: f64) -> usize {
    let c2 = kinetic * kinetic;
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for (i, &w) in onsite.iter().enumerate() {
        let d = 2.0 * kinetic + w - lambda;
        q = if i == 0 { d } else { d - c2 / q };
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sturm counts at several shifts, evaluated as independent interleaved
/// recurrences so the division latency is shared.
fn sturm_counts<const M: usize>(kinetic: f64, onsite: &[f64], lambdas: [f64; M]) -> [usize; M] {
    let c2 = kinetic * kinetic;
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut counts = [0usize; M];
    let mut q = [0.0f64; M];
    for (i, &w) in onsite.iter().enumerate() {
        let base = 2.0 * kinetic + w;
        for m in 0..M {
            let d = base - lambdas[m];
            let mut next = if i == 0 { d } else { d - c2 / q[m] };
            if next == 0.0 {
                next = -tiny;
            }
            counts[m] += (next < 0.0) as usize;
            q[m] = next;
        }
    }
    counts
}

/// The `k` lowest eigenvalues of the real matrix `c·L + diag(w)` by Sturm
/// bisection, ascending. Accurate to a few ulps of the matrix norm.
pub fn lowest_eigenvalues(kinetic: f64, onsite: &[f64], k: usize) -> Vec<f64> {
    bisect_lowest(kinetic, onsite, k, 0.0)
}

/// Multisection with four interior points per pass; stops once a bracket is
/// narrower than `abs_tol` or the rounding floor, whichever is larger.
fn bisect_lowest(kinetic: f64, onsite: &[f64], k: usize, abs_tol: f64) -> Vec<f64> {
    let n = onsite.len();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let wmin = onsite.iter().copied().fold(f64::INFINITY, f64::min);
    let wmax = onsite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower = wmin - 1.0;
    let mut upper = lower + 1.0;
    let mut step = 1.0;
    while sturm_count(kinetic, onsite, upper) < k {
        step *= 2.0;
        upper = lower + step;
    }

    let scale = 4.0 * kinetic + wmax.abs().max(wmin.abs());
    let floor = 4.0 * f64::EPSILON * scale;
    let mut lo = vec![lower; k];
    let mut hi = vec![upper; k];
    for j in 0..k {
        if j > 0 {
            lo[j] = lo[j].max(lo[j - 1]);
        }
        let mut passes = 0;
        while hi[j] - lo[j] > floor.max(abs_tol * (1.0 + lo[j].abs())) && passes < 100 {
            let width = hi[j] - lo[j];
            let probes: [f64; 4] = std::array::from_fn(|m| lo[j] + width * (m as f64 + 1.0) / 5.0);
            let counts = sturm_counts(kinetic, onsite, probes);
            for (&mid, &count) in probes.iter().zip(&counts) {
                for (m, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate().skip(j) {
                    if m < count {
                        *h = h.min(mid);
                    } else {
                        *l = l.max(mid);
                    }
                }
            }
            passes += 1;
        }
    }
    lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
}

/// LU factorization with partial pivoting of `c·L + diag(w) − shift·I`.
pub struct TridiagLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T> TridiagLu<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    pub fn new(kinetic: f64, onsite: &[T], shift: T) -> Self {
        let n = onsite.len();
        let off = T::from_real(-kinetic);
        let two_c = T::from_real(2.0 * kinetic);
        let mut d: Vec<T> = onsite.iter().map(|&w| two_c + w - shift).collect();
        let mut dl = vec![off; n.saturating_sub(1)];
        let mut du = vec![off; n.saturating_sub(1)];
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * (4.0 * kinetic + 1.0);

        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    d[i] = T::from_real(tiny);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1].modulus() == 0.0 {
            d[n - 1] = T::from_real(tiny);
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    /// Overwrites `b` with the solution of the factored system.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let t = self.dl[i] * b[i];
                b[i + 1] -= t;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Non-conjugated bilinear form `yᵀ T z` evaluated in difference form.
pub fn bilinear<T>(kinetic: f64, onsite: &[T], y: &[T], z: &[T]) -> T
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = onsite.len();
    let c = T::from_real(kinetic);
    let mut kin = y[0] * z[0] + y[n - 1] * z[n - 1];
    for i in 0..n - 1 {
        kin += (y[i + 1] - y[i]) * (z[i + 1] - z[i]);
    }
    let mut pot = T::zero();
    for i in 0..n {
        pot += onsite[i] * y[i] * z[i];
    }
    c * kin + pot
}

/// `T y`.
pub fn apply<T>(kinetic: f64, onsite: &[T], y: &[T]) -> Vec<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = onsite.len();
    let c = T::from_real(kinetic);
    (0..n)
        .map(|i| {
            let left = if i > 0 { y[i - 1] } else { T::zero() };
            let right = if i + 1 < n { y[i + 1] } else { T::zero() };
            c * ((y[i] - left) + (y[i] - right)) + onsite[i] * y[i]
        })
        .collect()
}

/// Euclidean norm of `T y − θ y`.
pub fn residual<T>(kinetic: f64, onsite: &[T], y: &[T], theta: T) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    apply(kinetic, onsite, y)
        .iter()
        .zip(y)
        .map(|(&ty, &yi)| (ty - theta * yi).modulus_squared())
        .sum::<f64>()
        .sqrt()
}

/// Deterministic, non-degenerate start vector for inverse iteration.
pub fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    let mut state = (seed as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    (0..n)
        .map(|_| {
            // xorshift64*
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            let r = state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11;
            0.5 + r as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    norm
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
    }
}

/// Eigenpairs of a real symmetric matrix in Schrödinger form.
#[derive(Clone, Debug)]
pub struct SymmetricPairs {
    pub values: Vec<f64>,
    /// Euclidean-normalized eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// The `k` lowest eigenpairs of `c·L + diag(w)`.
///
/// Eigenvalues closer than `cluster_gap` are treated as a cluster: their
/// vectors are orthogonalized during inverse iteration and the cluster is
/// resolved by a Rayleigh–Ritz step on the subspace.
pub fn symmetric_lowest(kinetic: f64, onsite: &[f64], k: usize, cluster_gap: f64) -> SymmetricPairs {
    let n = onsite.len();
    let approx = bisect_lowest(kinetic, onsite, k, 1e-9);
    let k = approx.len();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for j in 1..=k {
        if j == k || approx[j] - approx[j - 1] >= cluster_gap {
            clusters.push((start, j));
            start = j;
        }
    }

    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &(a, b) in &clusters {
        let mut block: Vec<Vec<f64>> = Vec::with_capacity(b - a);
        for (j, &lambda) in approx.iter().enumerate().take(b).skip(a) {
            // nudge the shift off the eigenvalue so the factorization stays finite
            let shift = lambda + 8.0 * f64::EPSILON * (4.0 * kinetic + lambda.abs());
            let lu = TridiagLu::new(kinetic, onsite, shift);
            let mut v = start_vector(n, j);
            orthogonalize(&mut v, &block);
            normalize(&mut v);
            for _ in 0..4 {
                lu.solve_in_place(&mut v);
                orthogonalize(&mut v, &block);
                normalize(&mut v);
            }
            block.push(v);
        }

        let m = block.len();
        let mut proj = DMatrix::<f64>::zeros(m, m);
        for p in 0..m {
            for q in p..m {
                let val = bilinear(kinetic, onsite, &block[p], &block[q]);
                proj[(p, q)] = val;
                proj[(q, p)] = val;
            }
        }
        if m == 1 {
            values.push(proj[(0, 0)]);
            vectors.push(block.pop().unwrap());
            continue;
        }
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        for &col in &order {
            let mut v = vec![0.0; n];
            for (p, b) in block.iter().enumerate() {
                let coef = eig.eigenvectors[(p, col)];
                v.iter_mut().zip(b).for_each(|(x, y)| *x += coef * y);
            }
            normalize(&mut v);
            values.push(bilinear(kinetic, onsite, &v, &v));
            vectors.push(v);
        }
    }

    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&t, v)| residual(kinetic, onsite, v, t))
        .collect();
    SymmetricPairs {
        values,
        vectors,
        residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    fn dense(kinetic: f64, onsite: &[f64]) -> DMatrix<f64> {
        let n = onsite.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 * kinetic + onsite[i]
            } else if i.abs_diff(j) == 1 {
                -kinetic
            } else {
                0.0
            }
        })
    }

    fn dense_eigs(kinetic: f64, onsite: &[f64]) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(dense(kinetic, onsite)).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn sample_onsite(n: usize, seed: f64) -> Vec<f64> {
        (0..n).map(|i| 3.0 * ((i as f64) * seed).sin() + 0.01 * i as f64).collect()
    }

    #[test]
    fn sturm_count_matches_dense() {
        let w = sample_onsite(40, 0.73);
        let eigs = dense_eigs(2.5, &w);
        for lambda in [-4.0, -1.0, 0.0, 2.5, 7.0, 11.0, 20.0] {
            let expected = eigs.iter().filter(|&&e| e < lambda).count();
            assert_eq!(sturm_count(2.5, &w, lambda), expected);
        }
    }

    #[test]
    fn bisection_matches_dense() {
        let w = sample_onsite(60, 1.31);
        let eigs = dense_eigs(4.0, &w);
        let got = lowest_eigenvalues(4.0, &w, 12);
        for (g, e) in got.iter().zip(&eigs) {
            assert!((g - e).abs() < 1e-11, "{g} vs {e}");
        }
    }

    #[test]
    fn eigenpairs_match_dense_and_resolve_degeneracy() {
        // two decoupled identical halves give exact doublets
        let half = sample_onsite(30, 0.91);
        let mut w = half.clone();
        w.push(1e6);
        w.extend(half.iter().rev());
        let pairs = symmetric_lowest(1.5, &w, 8, 1e-3);
        let eigs = dense_eigs(1.5, &w);
        for j in 0..8 {
            assert!((pairs.values[j] - eigs[j]).abs() < 1e-9);
            assert!(pairs.residuals[j] < 1e-8, "residual {}", pairs.residuals[j]);
        }
        for p in 0..8 {
            for q in 0..8 {
                let dot: f64 = pairs.vectors[p].iter().zip(&pairs.vectors[q]).map(|(a, b)| a * b).sum();
                let expected = if p == q { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bilinear_equals_dense_product() {
        let w = sample_onsite(25, 0.4);
        let y: Vec<f64> = start_vector(25, 3);
        let z: Vec<f64> = start_vector(25, 7);
        let t = dense(3.0, &w);
        let yv = nalgebra::DVector::from_vec(y.clone());
        let zv = nalgebra::DVector::from_vec(z.clone());
        let expected = yv.dot(&(&t * &zv));
        assert!((bilinear(3.0, &w, &y, &z) - expected).abs() < 1e-10);
        let ty = apply(3.0, &w, &y);
        let dense_ty = &t * &yv;
        for i in 0..25 {
            assert!((ty[i] - dense_ty[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_lu_solves_with_pivoting() {
        let n = 50;
        let w: Vec<C64> = (0..n).map(|i| C64::new(((i as f64) * 0.3).cos() * 5.0, (i as f64 * 0.2).sin())).collect();
        // shift near the diagonal magnitude forces row swaps
        let shift = C64::new(9.7, 0.1);
        let lu = TridiagLu::new(2.0, &w, shift);
        let rhs: Vec<C64> = (0..n).map(|i| C64::new(1.0, i as f64 * 0.01)).collect();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        let shifted: Vec<C64> = w.iter().map(|&v| v - shift).collect();
        let back = apply(2.0, &shifted, &x);
        for i in 0..n {
            assert!((back[i] - rhs[i]).norm() < 1e-10, "row {i}");
        }
    }

    proptest! {
        #[test]
        fn sturm_count_is_monotone(seed in 0.1f64..3.0, a in -5.0f64..10.0, b in -5.0f64..10.0) {
            let w = sample_onsite(30, seed);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(sturm_count(1.0, &w, lo) <= sturm_count(1.0, &w, hi));
        }

        #[test]
        fn real_lu_solution_has_small_residual(seed in 0.1f64..3.0, shift in -3.0f64..8.0) {
            let w = sample_onsite(40, seed);
            let lu = TridiagLu::new(1.7, &w, shift);
            let rhs = start_vector(40, 1);
            let mut x = rhs.clone();
            lu.solve_in_place(&mut x);
            let shifted: Vec<f64> = w.iter().map(|v| v - shift).collect();
            let back = apply(1.7, &shifted, &x);
            let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for i in 0..40 {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-9 * scale);
            }
        }
    }
}
