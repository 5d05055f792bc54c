//! Dense linear-algebra helpers used by the steady-state machinery:
//! shift-invert Arnoldi for smallest-magnitude eigenpairs, a Padé
//! scaling-and-squaring matrix exponential, trace norms, and the bordered
//! (trace-augmented) steady-state solve.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Eig, Factorize, FactorizeInto, Norm, Solve, SVD};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

/// Smallest-|λ| eigenpairs of a general complex matrix via shift-invert (at
/// zero) Arnoldi. Returns up to `nev` pairs sorted by ascending |λ|, each with
/// its normalized right eigenvector.
///
/// A start vector (for example the previous truncation step's steady state,
/// zero-padded) speeds up convergence considerably.
pub fn smallest_eigenpairs(
    matrix: &ArrayView2<C64>,
    nev: usize,
    start: Option<&Array1<C64>>,
    max_subspace: usize,
) -> Result<Vec<(C64, Array1<C64>)>> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    if n <= 3 || n <= nev + 2 {
        return dense_smallest(matrix, nev);
    }
    let lu = match matrix.factorize() {
        Ok(f) => f,
        Err(_) => {
            // exactly singular to machine precision: nudge the shift off zero
            let scale = matrix.iter().fold(0.0f64, |a, x| a.max(x.norm()));
            let mut shifted = matrix.to_owned();
            let eps = 1e-14 * scale.max(1e-30);
            for i in 0..n {
                shifted[[i, i]] += C64::new(eps, 0.0);
            }
            shifted
                .factorize_into()
                .map_err(|e| CoreError::Numerical(format!("shift-invert factorization: {e}")))?
        }
    };

    let m = max_subspace.max(2 * nev + 12).min(n);
    let mut v0 = match start {
        Some(v) if v.len() == n => v.clone(),
        _ => Array1::from_shape_fn(n, |i| {
            C64::new(((i * 2654435761) % 1009) as f64 / 1009.0 - 0.5, 0.3)
        }),
    };
    let norm = v0.norm_l2();
    if !norm.is_finite() || norm == 0.0 {
        return Err(CoreError::Numerical("invalid start vector".into()));
    }
    v0.mapv_inplace(|x| x / norm);

    let mut best: Option<Vec<(C64, Array1<C64>)>> = None;
    for _restart in 0..4 {
        let mut basis: Vec<Array1<C64>> = vec![v0.clone()];
        let mut h = Array2::<C64>::zeros((m + 1, m));
        let mut steps = 0usize;
        for j in 0..m {
            let mut w = lu
                .solve(&basis[j])
                .map_err(|e| CoreError::Numerical(format!("shift-invert solve: {e}")))?;
            // modified Gram-Schmidt with one re-orthogonalization pass
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c: C64 = q.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
                    h[[i, j]] += c;
                    ndarray::Zip::from(&mut w).and(q).for_each(|wi, qi| *wi -= c * qi);
                }
            }
            let nw = w.norm_l2();
            steps = j + 1;
            if !nw.is_finite() {
                return Err(CoreError::Numerical("Arnoldi breakdown (overflow)".into()));
            }
            h[[j + 1, j]] = C64::new(nw, 0.0);
            if nw < 1e-300 {
                break; // invariant subspace found
            }
            basis.push(w.mapv(|x| x / nw));
        }
        let hm = h.slice(ndarray::s![0..steps, 0..steps]).to_owned();
        let (theta, svecs) = hm
            .eig()
            .map_err(|e| CoreError::Numerical(format!("Hessenberg eigensolve: {e}")))?;
        // sort Ritz values of K^{-1} by descending magnitude = ascending |λ|
        let mut order: Vec<usize> = (0..steps).collect();
        order.sort_by(|&a, &b| theta[b].norm().partial_cmp(&theta[a].norm()).unwrap());
        let beta = h[[steps.min(m), steps - 1]].norm();
        let mut pairs = Vec::new();
        let mut converged = true;
        for &idx in order.iter().take(nev.min(steps)) {
            let resid = beta * svecs[[steps - 1, idx]].norm();
            if resid > 1e-8 * theta[idx].norm().max(1e-300) {
                converged = false;
            }
            let mut y = Array1::<C64>::zeros(n);
            for (j, q) in basis.iter().take(steps).enumerate() {
                let c = svecs[[j, idx]];
                ndarray::Zip::from(&mut y).and(q).for_each(|yi, qi| *yi += c * qi);
            }
            let ny = y.norm_l2();
            y.mapv_inplace(|x| x / ny);
            // Rayleigh quotient on the original matrix for the eigenvalue
            let ky = matrix.dot(&y);
            let lambda: C64 = y.iter().zip(ky.iter()).map(|(a, b)| a.conj() * b).sum();
            pairs.push((lambda, y));
        }
        pairs.sort_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap());
        if converged || steps < m {
            return Ok(pairs);
        }
        v0 = pairs[0].1.clone();
        best = Some(pairs);
    }
    // restarts exhausted; the dominant pair is still accurate in practice,
    // hand back the best estimate
    best.ok_or_else(|| CoreError::Numerical("Arnoldi produced no Ritz pairs".into()))
}

fn dense_smallest(matrix: &ArrayView2<C64>, nev: usize) -> Result<Vec<(C64, Array1<C64>)>> {
    let (vals, vecs) = matrix
        .to_owned()
        .eig()
        .map_err(|e| CoreError::Numerical(format!("dense eigensolve: {e}")))?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].norm().partial_cmp(&vals[b].norm()).unwrap());
    Ok(order
        .into_iter()
        .take(nev)
        .map(|i| (vals[i], vecs.column(i).to_owned()))
        .collect())
}

/// Full complex spectrum (no eigenvectors).
pub fn dense_eigenvalues(matrix: &ArrayView2<C64>) -> Result<Vec<C64>> {
    let (vals, _) = matrix
        .to_owned()
        .eig()
        .map_err(|e| CoreError::Numerical(format!("dense eigensolve: {e}")))?;
    Ok(vals.to_vec())
}

/// Trace norm ‖M‖₁ = Σ singular values.
pub fn trace_norm(matrix: &ArrayView2<C64>) -> Result<f64> {
    if matrix.is_empty() {
        return Ok(0.0);
    }
    let (_, sv, _) = matrix
        .to_owned()
        .svd(false, false)
        .map_err(|e| CoreError::Numerical(format!("SVD: {e}")))?;
    Ok(sv.sum())
}

/// Solve the trace-augmented steady-state system min ‖[K; τᵀ]x − [0; 1]‖₂ via
/// the normal equations (K†K + ττᵀ)x = τ. The trace row τ regularizes exactly
/// the near-null direction, so the normal-equation conditioning stays benign.
pub fn bordered_steady_state(matrix: &ArrayView2<C64>, trace_row: &[f64]) -> Result<Array1<C64>> {
    let n = matrix.nrows();
    let kh = conj_transpose(matrix);
    let mut m = kh.dot(matrix);
    for i in 0..n {
        if trace_row[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if trace_row[j] != 0.0 {
                m[[i, j]] += C64::new(trace_row[i] * trace_row[j], 0.0);
            }
        }
    }
    let rhs = Array1::from_shape_fn(n, |i| C64::new(trace_row[i], 0.0));
    m.solve_into(rhs)
        .map_err(|e| CoreError::Numerical(format!("bordered solve: {e}")))
}

pub fn conj_transpose(m: &ArrayView2<C64>) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros((m.ncols(), m.nrows()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[[j, i]] = m[[i, j]].conj();
        }
    }
    out
}

/// Matrix exponential by Padé order-13 approximation with scaling and squaring.
pub fn expm(matrix: &ArrayView2<C64>) -> Result<Array2<C64>> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| matrix[[i, j]].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let theta13 = 5.371920351148152;
    let squarings = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a = matrix.mapv(|x| x / C64::new(2f64.powi(squarings as i32), 0.0));
    let b: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &a6 * C64::new(b[13], 0.0)
        + &a4 * C64::new(b[11], 0.0)
        + &a2 * C64::new(b[9], 0.0);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + &a6 * C64::new(b[7], 0.0)
            + &a4 * C64::new(b[5], 0.0)
            + &a2 * C64::new(b[3], 0.0)
            + &eye * C64::new(b[1], 0.0)),
    );
    let v_inner = &a6 * C64::new(b[12], 0.0)
        + &a4 * C64::new(b[10], 0.0)
        + &a2 * C64::new(b[8], 0.0);
    let v = a6.dot(&v_inner)
        + &a6 * C64::new(b[6], 0.0)
        + &a4 * C64::new(b[4], 0.0)
        + &a2 * C64::new(b[2], 0.0)
        + &eye * C64::new(b[0], 0.0);
    let p = &v + &u;
    let q = &v - &u;
    let f = q
        .factorize_into()
        .map_err(|e| CoreError::Numerical(format!("Padé denominator: {e}")))?;
    let mut r = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        let col = f
            .solve(&p.column(j).to_owned())
            .map_err(|e| CoreError::Numerical(format!("Padé solve: {e}")))?;
        r.column_mut(j).assign(&col);
    }
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn smallest_eigenpair_diagonal() {
        let m = Array2::from_diag(&array![
            C64::new(3.0, 0.0),
            C64::new(-0.001, 0.5),
            C64::new(0.0001, 0.0),
            C64::new(-2.0, 1.0),
            C64::new(1.5, -0.3),
        ]);
        let pairs = smallest_eigenpairs(&m.view(), 2, None, 16).unwrap();
        assert!((pairs[0].0 - C64::new(0.0001, 0.0)).norm() < 1e-12);
        assert!((pairs[1].0.norm() - (0.001f64 * 0.001 + 0.25).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn smallest_eigenpair_larger_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            m[[i, i]] += C64::new(6.0, 0.0);
        }
        let dense = dense_smallest(&m.view(), 3).unwrap();
        let arn = smallest_eigenpairs(&m.view(), 3, None, 30).unwrap();
        for (d, a) in dense.iter().zip(arn.iter()) {
            assert!((d.0 - a.0).norm() < 1e-8 * d.0.norm().max(1.0), "{} vs {}", d.0, a.0);
        }
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let m = Array2::from_diag(&array![C64::new(0.0, 1.0), C64::new(-2.0, 0.0)]);
        let e = expm(&m.view()).unwrap();
        assert!((e[[0, 0]] - C64::new(0.0, 1.0).exp()).norm() < 1e-13);
        assert!((e[[1, 1]] - C64::new((-2.0f64).exp(), 0.0)).norm() < 1e-13);
        // nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut niln = Array2::<C64>::zeros((2, 2));
        niln[[0, 1]] = C64::new(1.0, 0.0);
        let e = expm(&niln.view()).unwrap();
        assert!((e[[0, 1]] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((e[[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_large_norm_scaling() {
        // commutation with itself: exp(A)exp(-A) = 1
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let a = Array2::from_shape_fn((n, n), |_| {
            C64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))
        });
        let e1 = expm(&a.view()).unwrap();
        let e2 = expm(&a.mapv(|x| -x).view()).unwrap();
        let prod = e1.dot(&e2);
        let err = (&prod - &Array2::<C64>::eye(n)).iter().fold(0.0f64, |m, x| m.max(x.norm()));
        assert!(err < 1e-9, "exp(A)exp(-A) deviates by {err}");
    }

    #[test]
    fn trace_norm_known() {
        let m = array![
            [C64::new(3.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-4.0, 0.0)]
        ];
        assert!((trace_norm(&m.view()).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn bordered_solve_recovers_kernel() {
        // singular matrix with known kernel (1, 1)/2 after trace normalization
        let k = array![
            [C64::new(-1.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]
        ];
        let x = bordered_steady_state(&k.view(), &[1.0, 1.0]).unwrap();
        assert!((x[0] - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((x[1] - C64::new(0.5, 0.0)).norm() < 1e-12);
    }
}
