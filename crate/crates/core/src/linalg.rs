//! Symmetric eigensolvers: dense, generalized by canonical orthogonalization,
//! and thick-restarted Lanczos with full reorthogonalization.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest |A_ij - A_ji|.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn require_symmetric(m: &DMatrix<f64>, tol: f64, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}", m.nrows(), m.ncols())));
    }
    let a = asymmetry(m);
    if a > tol {
        return Err(Error::Contract(format!("{what} is not symmetric (defect {a:e})")));
    }
    Ok(())
}

/// Eigenpairs of a real symmetric matrix, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(m: &DMatrix<f64>, symmetry_tol: f64) -> Result<Eigen> {
    require_symmetric(m, symmetry_tol, "matrix")?;
    if m.nrows() == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: DMatrix::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let cols: Vec<DVector<f64>> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    Ok(Eigen { values, vectors: DMatrix::from_columns(&cols) })
}

/// Solution of H D = E S D restricted to overlap directions above a threshold.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    /// Columns are S-orthonormal eigenvectors in the original basis.
    pub vectors: DMatrix<f64>,
    pub discarded: usize,
    /// All overlap eigenvalues, ascending.
    pub overlap_spectrum: Vec<f64>,
}

pub fn generalized_eigen(h: &DMatrix<f64>, s: &DMatrix<f64>, lindep: f64, symmetry_tol: f64) -> Result<GeneralizedEigen> {
    require_symmetric(h, symmetry_tol, "H")?;
    require_symmetric(s, symmetry_tol, "S")?;
    if h.shape() != s.shape() {
        return Err(Error::Dimension(format!("H is {:?}, S is {:?}", h.shape(), s.shape())));
    }
    let se = symmetric_eigen(s, symmetry_tol)?;
    let keep: Vec<usize> = (0..se.values.len()).filter(|&k| se.values[k] > lindep).collect();
    if keep.is_empty() {
        return Err(Error::DegenerateSubspace(s.nrows()));
    }
    let x = DMatrix::from_columns(
        &keep.iter().map(|&k| se.vectors.column(k) / se.values[k].sqrt()).collect::<Vec<_>>(),
    );
    let hp = x.transpose() * h * &x;
    let he = symmetric_eigen(&((&hp + hp.transpose()) * 0.5), f64::INFINITY)?;
    Ok(GeneralizedEigen {
        values: he.values,
        vectors: x * he.vectors,
        discarded: s.nrows() - keep.len(),
        overlap_spectrum: se.values,
    })
}

/// Lowest eigenpairs of a symmetric operator given by its action.
pub fn lanczos_lowest<F>(apply: F, start: &[f64], n_roots: usize, tol: f64, max_matvecs: usize) -> Result<Eigen>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = start.len();
    let n_roots = n_roots.min(dim);
    if n_roots == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: DMatrix::zeros(dim, 0) });
    }
    let max_basis = (n_roots + 60).max(3 * n_roots).min(dim);
    let keep = (n_roots + 10).min(max_basis.saturating_sub(1)).max(n_roots);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next = start.to_vec();
    let mut matvecs = 0;
    let mut seed = 1u64;
    loop {
        // full (twice-iterated) reorthogonalization
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
                for (n, a) in next.iter_mut().zip(v) {
                    *n -= c * a;
                }
            }
        }
        let nrm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm < 1e-10 {
            if basis.len() >= dim {
                break;
            }
            // invariant subspace; continue from a fresh deterministic direction
            next = (0..dim)
                .map(|i| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407 ^ i as u64);
                    (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            continue;
        }
        for x in &mut next {
            *x /= nrm;
        }
        let w = apply(&next);
        matvecs += 1;
        basis.push(std::mem::take(&mut next));
        images.push(w);
        let m = basis.len();

        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v: f64 = basis[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum();
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = symmetric_eigen(&t, f64::INFINITY)?;
        let ritz = |k: usize| -> (Vec<f64>, Vec<f64>) {
            let mut u = vec![0.0; dim];
            let mut au = vec![0.0; dim];
            for i in 0..m {
                let y = eig.vectors[(i, k)];
                for d in 0..dim {
                    u[d] += y * basis[i][d];
                    au[d] += y * images[i][d];
                }
            }
            (u, au)
        };
        let wanted = n_roots.min(m);
        let converged = m >= n_roots
            && (0..wanted).all(|k| {
                let (u, au) = ritz(k);
                let r: f64 = u.iter().zip(&au).map(|(a, b)| (b - eig.values[k] * a).powi(2)).sum::<f64>().sqrt();
                r < tol * eig.values[k].abs().max(1.0)
            });
        if converged || m == dim {
            let vectors = DMatrix::from_fn(dim, wanted, |d, k| (0..m).map(|i| eig.vectors[(i, k)] * basis[i][d]).sum());
            return Ok(Eigen { values: eig.values[..wanted].to_vec(), vectors });
        }
        if matvecs >= max_matvecs {
            return Err(Error::Contract(format!("Lanczos did not converge in {max_matvecs} matrix-vector products")));
        }
        next = images[m - 1].clone();
        if m >= max_basis {
            // continuation vector must be orthogonal to the whole old basis
            for _ in 0..2 {
                for v in &basis {
                    let c: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
                    for (n, a) in next.iter_mut().zip(v) {
                        *n -= c * a;
                    }
                }
            }
            let mut nb = Vec::with_capacity(keep);
            let mut ni = Vec::with_capacity(keep);
            for k in 0..keep {
                let (u, au) = ritz(k);
                nb.push(u);
                ni.push(au);
            }
            basis = nb;
            images = ni;
        }
    }
    Err(Error::Contract("Lanczos exhausted the space without convergence".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                i as f64 * 0.5 + ((i * 7) % 5) as f64
            } else {
                0.1 / (1.0 + (i as f64 - j as f64).abs())
            }
        })
    }

    #[test]
    fn dense_eigen_is_sorted_and_orthonormal() {
        let m = test_matrix(30);
        let e = symmetric_eigen(&m, 1e-12).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let q = &e.vectors;
        assert!((q.transpose() * q - DMatrix::identity(30, 30)).amax() < 1e-12);
        let recon = q * DMatrix::from_diagonal(&DVector::from_vec(e.values.clone())) * q.transpose();
        assert!((recon - m).amax() < 1e-12);
    }

    #[test]
    fn asymmetric_input_is_a_contract_violation() {
        let mut m = test_matrix(4);
        m[(0, 1)] += 1e-6;
        assert!(matches!(symmetric_eigen(&m, 1e-10), Err(Error::Contract(_))));
    }

    #[test]
    fn lanczos_matches_dense() {
        let m = test_matrix(150);
        let dense = symmetric_eigen(&m, 1e-12).unwrap();
        let start: Vec<f64> = (0..150).map(|i| 1.0 + 0.01 * (i as f64).sin()).collect();
        let lz = lanczos_lowest(|x| (&m * DVector::from_column_slice(x)).as_slice().to_vec(), &start, 4, 1e-10, 5000).unwrap();
        for k in 0..4 {
            assert!((lz.values[k] - dense.values[k]).abs() < 1e-9, "{k}: {} vs {}", lz.values[k], dense.values[k]);
        }
    }

    #[test]
    fn generalized_drops_dependent_directions() {
        // duplicate basis vector: S singular, spectrum unchanged
        let h0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0]);
        let t = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let h = t.transpose() * &h0 * &t;
        let s = t.transpose() * &t;
        let g = generalized_eigen(&h, &s, 1e-8, 1e-12).unwrap();
        assert_eq!(g.discarded, 1);
        let direct = symmetric_eigen(&h0, 1e-12).unwrap();
        for k in 0..2 {
            assert!((g.values[k] - direct.values[k]).abs() < 1e-12);
        }
        let metric = g.vectors.transpose() * &s * &g.vectors;
        assert!((metric - DMatrix::identity(2, 2)).amax() < 1e-12);
        let zero = DMatrix::zeros(2, 2);
        assert!(matches!(generalized_eigen(&zero, &zero, 1e-8, 1e-12), Err(Error::DegenerateSubspace(2))));
    }
}
