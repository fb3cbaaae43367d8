//! Truncated singular value decomposition of dense matrices.
//!
//! Small matrices use one-sided (Hestenes) Jacobi on the whole matrix.
//! Larger ones use block subspace iteration on `AᵀA` with oversampling,
//! finished by Jacobi on the projected block.

use rand::Rng;

use super::SemanticsError;

const ROTATION_EPS: f64 = 1e-15;
const TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 80;
const MAX_SUBSPACE_ITERS: usize = 3000;
const OVERSAMPLE: usize = 10;
const JACOBI_LIMIT: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdMethod {
    #[default]
    Auto,
    Jacobi,
    Subspace,
}

/// Rank-`k` factors `A ≈ U Σ Vᵀ`.
///
/// `u` is `rows × k` and `v` is `cols × k`, both row-major with
/// orthonormal columns. Singular values are non-increasing. Each column
/// of `u` has its largest-magnitude entry positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub u: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub v: Vec<f64>,
}

impl Svd {
    pub fn u_at(&self, i: usize, c: usize) -> f64 {
        self.u[i * self.k + c]
    }

    pub fn v_at(&self, j: usize, c: usize) -> f64 {
        self.v[j * self.k + c]
    }

    /// `U Σ Vᵀ` as a row-major `rows × cols` matrix.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i * self.cols + j] = (0..self.k)
                    .map(|c| self.u_at(i, c) * self.singular_values[c] * self.v_at(j, c))
                    .sum();
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One-sided Jacobi on the columns of `a` (`rows × cols`, row-major).
/// Returns all `cols` singular triplets, sorted by singular value.
fn jacobi(a: &[f64], rows: usize, cols: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>), SemanticsError> {
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    let fro2: f64 = a.iter().map(|x| x * x).sum();
    let negligible = fro2 * 1e-30;
    let mut converged = false;
    let mut worst = 0.0f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                worst = worst.max(off);
                if off <= ROTATION_EPS {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && worst > TOLERANCE {
        return Err(SemanticsError::ConvergenceFailure { residual: worst });
    }

    let sigma: Vec<f64> = w.iter().map(|col| norm(col)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
    let scale = sigma.iter().cloned().fold(0.0, f64::max);

    let mut us: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut vs = Vec::with_capacity(cols);
    let mut ss = Vec::with_capacity(cols);
    for &j in &order {
        let s = sigma[j];
        let u = if s > scale * 1e-13 && s > 0.0 {
            w[j].iter().map(|x| x / s).collect()
        } else {
            complete_basis(&us, rows)
        };
        us.push(u);
        vs.push(v[j].clone());
        ss.push(s);
    }
    Ok((us, ss, vs))
}

fn rotate(p: &mut [f64], q: &mut [f64], c: f64, s: f64) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// A unit vector orthogonal to `basis`, built from the standard basis.
fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    for e in 0..dim {
        let mut cand = vec![0.0; dim];
        cand[e] = 1.0;
        for b in basis {
            let d = dot(&cand, b);
            cand.iter_mut().zip(b).for_each(|(c, x)| *c -= d * x);
        }
        let n = norm(&cand);
        if n > 1e-8 {
            return cand.into_iter().map(|x| x / n).collect();
        }
    }
    vec![0.0; dim]
}

/// Modified Gram-Schmidt on column vectors, in place.
fn orthonormalize(cols: &mut [Vec<f64>]) {
    let dim = cols.first().map_or(0, Vec::len);
    for i in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..i {
                let (done, rest) = cols.split_at_mut(i);
                let d = dot(&rest[0], &done[j]);
                rest[0].iter_mut().zip(&done[j]).for_each(|(c, x)| *c -= d * x);
            }
        }
        let n = norm(&cols[i]);
        if n > 1e-12 {
            cols[i].iter_mut().for_each(|c| *c /= n);
        } else {
            let (done, rest) = cols.split_at_mut(i);
            rest[0] = complete_basis(done, dim);
        }
    }
}

fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|i| dot(&a[i * cols..(i + 1) * cols], x)).collect()
}

fn mat_t_vec(a: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for i in 0..rows {
        let yi = y[i];
        if yi != 0.0 {
            out.iter_mut().zip(&a[i * cols..(i + 1) * cols]).for_each(|(o, x)| *o += yi * x);
        }
    }
    out
}

type Triplets = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>);

fn subspace(a: &[f64], rows: usize, cols: usize, k: usize) -> Result<Triplets, SemanticsError> {
    let l = (k + OVERSAMPLE).min(cols);
    let mut rng = crate::rng::substream(0, "svd", 0);
    let mut q: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..cols).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    orthonormalize(&mut q);

    let scale = {
        let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        fro.max(f64::MIN_POSITIVE)
    };
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SUBSPACE_ITERS {
        // project, then extract Ritz triplets from the block B = A Q
        let b_cols: Vec<Vec<f64>> = q.iter().map(|qc| mat_vec(a, rows, cols, qc)).collect();
        let mut b = vec![0.0; rows * l];
        for (c, col) in b_cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                b[i * l + c] = *x;
            }
        }
        let (us, ss, ws) = jacobi(&b, rows, l)?;
        let vs: Vec<Vec<f64>> = ws
            .iter()
            .map(|w| {
                let mut v = vec![0.0; cols];
                for (c, wc) in w.iter().enumerate() {
                    v.iter_mut().zip(&q[c]).for_each(|(o, x)| *o += wc * x);
                }
                v
            })
            .collect();

        residual = (0..k)
            .map(|i| {
                let atu = mat_t_vec(a, rows, cols, &us[i]);
                atu.iter().zip(&vs[i]).map(|(x, v)| (x - ss[i] * v).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
            / scale;
        if residual <= TOLERANCE {
            return Ok((us, ss, vs));
        }
        // next block: Aᵀ A V
        q = b_cols.iter().map(|col| mat_t_vec(a, rows, cols, col)).collect();
        orthonormalize(&mut q);
    }
    Err(SemanticsError::ConvergenceFailure { residual })
}

/// Leading `k` singular triplets of the row-major `rows × cols` matrix.
pub fn truncated_svd(
    a: &[f64],
    rows: usize,
    cols: usize,
    k: usize,
    method: SvdMethod,
) -> Result<Svd, SemanticsError> {
    if a.len() != rows * cols {
        return Err(SemanticsError::DimensionMismatch { expected: rows * cols, got: a.len() });
    }
    if k == 0 || k > rows.min(cols) {
        return Err(SemanticsError::InvalidRank { k, max: rows.min(cols) });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(SemanticsError::NonFinite);
    }
    let use_jacobi = match method {
        SvdMethod::Jacobi => true,
        SvdMethod::Subspace => false,
        SvdMethod::Auto => cols <= JACOBI_LIMIT || k + OVERSAMPLE >= cols,
    };
    let (mut us, ss, mut vs) = if use_jacobi {
        jacobi(a, rows, cols)?
    } else {
        subspace(a, rows, cols, k)?
    };

    for (u, v) in us.iter_mut().zip(vs.iter_mut()).take(k) {
        let pivot = u
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1.abs() { (i, x) } else { best });
        if pivot.1 < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }

    let mut u = vec![0.0; rows * k];
    let mut v = vec![0.0; cols * k];
    for c in 0..k {
        for i in 0..rows {
            u[i * k + c] = us[c][i];
        }
        for j in 0..cols {
            v[j * k + c] = vs[c][j];
        }
    }
    Ok(Svd { rows, cols, k, u, singular_values: ss[..k].to_vec(), v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random();
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        m
    }

    fn oracle_singular_values(a: &[f64], n: usize) -> Vec<f64> {
        let m = DMatrix::from_row_slice(n, n, a);
        let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    fn assert_orthonormal_columns(m: &[f64], rows: usize, k: usize) {
        for a in 0..k {
            for b in 0..k {
                let d: f64 = (0..rows).map(|i| m[i * k + a] * m[i * k + b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-8, "columns {a},{b}: {d}");
            }
        }
    }

    #[test]
    fn identity_spectrum() {
        let mut id = vec![0.0; 16];
        for i in 0..4 {
            id[i * 4 + i] = 1.0;
        }
        let svd = truncated_svd(&id, 4, 4, 4, SvdMethod::Auto).unwrap();
        for s in &svd.singular_values {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_spectrum() {
        let x = [1.0, 2.0, 0.5, 3.0, 1.5];
        let a: Vec<f64> = x.iter().flat_map(|&p| x.iter().map(move |&q| p * q)).collect();
        let svd = truncated_svd(&a, 5, 5, 5, SvdMethod::Auto).unwrap();
        let expected: f64 = x.iter().map(|v| v * v).sum();
        assert!((svd.singular_values[0] - expected).abs() < 1e-12);
        assert!(svd.singular_values[1..].iter().all(|&s| s < 1e-10));
        assert_orthonormal_columns(&svd.u, 5, 5);
    }

    #[test]
    fn jacobi_matches_dense_oracle() {
        for seed in 0..5 {
            let a = random_symmetric(30, seed);
            let svd = truncated_svd(&a, 30, 30, 30, SvdMethod::Jacobi).unwrap();
            let oracle = oracle_singular_values(&a, 30);
            for (s, o) in svd.singular_values.iter().zip(&oracle) {
                assert!((s - o).abs() < 1e-10, "{s} vs {o}");
            }
            assert_orthonormal_columns(&svd.u, 30, 30);
            assert_orthonormal_columns(&svd.v, 30, 30);
        }
    }

    #[test]
    fn subspace_matches_dense_oracle() {
        for seed in 0..3 {
            let a = random_symmetric(60, 100 + seed);
            let oracle = oracle_singular_values(&a, 60);
            for k in [1, 3, 5] {
                let svd = truncated_svd(&a, 60, 60, k, SvdMethod::Subspace).unwrap();
                for (s, o) in svd.singular_values.iter().zip(&oracle) {
                    assert!((s - o).abs() < 1e-8, "k={k}: {s} vs {o}");
                }
                assert_orthonormal_columns(&svd.u, 60, k);
            }
        }
    }

    #[test]
    fn rectangular_reconstruction() {
        let a = [3.0, 1.0, 0.0, 1.0, 3.0, 1.0];
        let svd = truncated_svd(&a, 2, 3, 2, SvdMethod::Jacobi).unwrap();
        for (x, y) in svd.reconstruct().iter().zip(&a) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_convention_pivots_positive() {
        let a = random_symmetric(8, 3);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let s1 = truncated_svd(&a, 8, 8, 3, SvdMethod::Auto).unwrap();
        let s2 = truncated_svd(&neg, 8, 8, 3, SvdMethod::Auto).unwrap();
        for c in 0..3 {
            let col: Vec<f64> = (0..8).map(|i| s1.u_at(i, c)).collect();
            let max = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(max > 0.0);
        }
        // negating A flips V only
        for i in 0..8 {
            for c in 0..3 {
                assert!((s1.u_at(i, c) - s2.u_at(i, c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_and_shape_errors() {
        let a = vec![1.0; 4];
        assert!(matches!(
            truncated_svd(&a, 2, 2, 3, SvdMethod::Auto),
            Err(SemanticsError::InvalidRank { .. })
        ));
        assert!(matches!(
            truncated_svd(&a, 2, 3, 1, SvdMethod::Auto),
            Err(SemanticsError::DimensionMismatch { .. })
        ));
    }
}
