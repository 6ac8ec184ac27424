//! Minimum of the boundary-to-interior norm ratio over the basis span.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Result of minimizing `‖A_w α‖/‖B α‖` at one energy.
#[derive(Debug, Clone)]
pub struct TensionEval {
    pub t_min: f64,
    /// Minimizer, normalized so that `‖B α‖ = 1`.
    pub alpha: DVector<f64>,
    /// Numerical rank kept from the stacked SVD.
    pub rank_eps: usize,
    /// Smallest singular value of the upper block `Q_A`.
    pub c_min: f64,
}

/// Thin SVD with singular values sorted in decreasing order.
struct SortedSvd {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v_t: DMatrix<f64>,
}

fn sorted_svd(a: DMatrix<f64>) -> Result<SortedSvd> {
    let svd = a.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not return singular vectors".into())),
    };
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    Ok(SortedSvd {
        u: u.select_columns(&order),
        sigma: order.iter().map(|&i| s[i]).collect(),
        v_t: v_t.select_rows(&order),
    })
}

/// Minimize `‖A_w α‖/‖B α‖` by the regularized generalized SVD.
///
/// `[A_w; B] = Q Σ Wᵀ` is truncated to the singular values `σ_j ≥ eps·σ₁`.
/// The truncated `Q = [Q_A; Q_B]` has orthonormal columns, so
/// `‖Q_A β‖² + ‖Q_B β‖² = ‖β‖²` and the cosine-sine pairs reduce to the SVD of
/// `Q_A`: its smallest singular value `c` gives the minimum `c/√(1 - c²)` at the
/// corresponding right singular vector `β`, and `α = W Σ⁻¹ β`.
///
/// When the smallest `c` is repeated the minimizer is any vector in the
/// associated subspace; one of them is returned.
pub fn min_tension(a_w: &DMatrix<f64>, b: &DMatrix<f64>, eps: f64) -> Result<TensionEval> {
    let n = a_w.ncols();
    if b.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "A_w has {n} columns but B has {}",
            b.ncols()
        )));
    }
    let rows_a = a_w.nrows();
    let mut stacked = DMatrix::<f64>::zeros(rows_a + b.nrows(), n);
    stacked.rows_mut(0, rows_a).copy_from(a_w);
    stacked.rows_mut(rows_a, b.nrows()).copy_from(b);

    let outer = sorted_svd(stacked)?;
    let sigma1 = outer.sigma.first().copied().unwrap_or(0.0);
    if !(sigma1 > 0.0) {
        return Err(Error::RankCollapse);
    }
    let rank = outer.sigma.iter().take_while(|&&s| s >= eps * sigma1).count();
    if rank == 0 {
        return Err(Error::RankCollapse);
    }

    // Pad with zero rows so the SVD of Q_A exposes a full set of right vectors.
    let q_a_rows = rows_a.max(rank);
    let mut q_a = DMatrix::<f64>::zeros(q_a_rows, rank);
    q_a.rows_mut(0, rows_a)
        .copy_from(&outer.u.view((0, 0), (rows_a, rank)));
    let inner = sorted_svd(q_a)?;
    let c_min = inner.sigma[rank - 1];
    if c_min >= 1.0 - 1e-14 {
        return Err(Error::NoInteriorMass(c_min));
    }
    let beta = inner.v_t.row(rank - 1).transpose();
    let t_min = c_min / ((1.0 - c_min) * (1.0 + c_min)).sqrt();

    let mut alpha = DVector::<f64>::zeros(n);
    for j in 0..rank {
        alpha.axpy(beta[j] / outer.sigma[j], &outer.v_t.row(j).transpose(), 1.0);
    }
    let interior = (b * &alpha).norm();
    if !(interior > 0.0) {
        return Err(Error::NoInteriorMass(c_min));
    }
    alpha /= interior;
    Ok(TensionEval {
        t_min,
        alpha,
        rank_eps: rank,
        c_min,
    })
}

fn ratio(num: &DMatrix<f64>, b: &DMatrix<f64>, alpha: &DVector<f64>) -> Result<f64> {
    let den = (b * alpha).norm();
    if !(den > 0.0) {
        return Err(Error::NoInteriorMass(1.0));
    }
    Ok((num * alpha).norm() / den)
}

/// `‖A_w α‖/‖B α‖` for a given coefficient vector.
pub fn tension_of(alpha: &DVector<f64>, a_w: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    ratio(a_w, b, alpha)
}

/// Unweighted tension `‖A_nor α‖/‖B α‖` (the filter replaced by the identity).
pub fn classical_tension(alpha: &DVector<f64>, a_nor: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    ratio(a_nor, b, alpha)
}
