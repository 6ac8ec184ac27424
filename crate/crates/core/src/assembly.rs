//! Boundary matrices of the fundamental-solution basis at a fixed energy,
//! the boundary form of the interior `L²` norm, and its square-root factor.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{build_grid, charge_points, BoundaryGrid, ChargeSet, RadialCurve};
use crate::special::y0_y1;
use crate::weight::build_filter_matrix;

/// Node/charge separations below this are treated as coincident.
const MIN_SEPARATION: f64 = 1e-12;

pub const DEFAULT_EPS_H: f64 = 1e-12;
pub const DEFAULT_EPS_SVD: f64 = 1e-14;

/// Discretization parameters: `M` boundary nodes, `N` charges at imaginary
/// shift `tau`, and the two eigenvalue/singular-value cutoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub m: usize,
    pub n: usize,
    pub tau: f64,
    pub eps_h: f64,
    pub eps_svd: f64,
}

impl Discretization {
    pub fn new(m: usize, n: usize, tau: f64) -> Self {
        Discretization {
            m,
            n,
            tau,
            eps_h: DEFAULT_EPS_H,
            eps_svd: DEFAULT_EPS_SVD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "M = {} must be a positive multiple of 4",
                self.m
            )));
        }
        if self.n == 0 || self.n > self.m {
            return Err(Error::InvalidParameter(format!(
                "N = {} must satisfy 1 <= N <= M = {}",
                self.n, self.m
            )));
        }
        for (name, v) in [("eps_h", self.eps_h), ("eps_svd", self.eps_svd)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// `√w`-weighted boundary samples of `φ_n`, `d_n φ_n`, `d_t φ_n` and `x·∇φ_n`.
#[derive(Debug, Clone)]
pub struct BasisMatrices {
    pub val: DMatrix<f64>,
    pub nor: DMatrix<f64>,
    pub tan: DMatrix<f64>,
    pub dil: DMatrix<f64>,
}

fn check_energy(e: f64) -> Result<()> {
    if e > 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("energy E = {e} must be positive")))
    }
}

/// `φ_n(x) = Y0(√E|x - y_n|)`, `∇φ_n = -√E Y1(√E|x - y_n|)(x - y_n)/|x - y_n|`.
pub fn basis_matrices(grid: &BoundaryGrid, charges: &ChargeSet, e: f64) -> Result<BasisMatrices> {
    check_energy(e)?;
    let k = e.sqrt();
    let m = grid.len();
    let columns: Vec<[Vec<f64>; 4]> = charges
        .y
        .par_iter()
        .enumerate()
        .map(|(j, y)| {
            let mut col = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
            for i in 0..m {
                let d = grid.x[i] - y;
                let r = d.norm();
                if r < MIN_SEPARATION {
                    return Err(Error::SingularKernel {
                        node: i,
                        charge: j,
                        distance: r,
                    });
                }
                let (y0, y1) = y0_y1(k * r);
                let sw = grid.w[i].sqrt();
                let grad = d * (-k * y1 / r);
                col[0][i] = sw * y0;
                col[1][i] = sw * grad.dot(&grid.nrm[i]);
                col[2][i] = sw * grad.dot(&grid.tng[i]);
                col[3][i] = sw * grad.dot(&grid.x[i]);
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let n = columns.len();
    let build = |which: usize| DMatrix::from_fn(m, n, |i, j| columns[j][which][i]);
    Ok(BasisMatrices {
        val: build(0),
        nor: build(1),
        tan: build(2),
        dil: build(3),
    })
}

/// Gram matrix of the interior norm, from the boundary identity valid for
/// any `E`-Helmholtz function:
/// ```text
/// ‖u‖²_Ω = 1/(2E) ∫_∂Ω (x·n)(E u² - (d_n u)² - (d_t u)²) + 2 (x·∇u) d_n u ds
/// ```
/// with `n` the outward normal. This is the divergence theorem applied to
/// `(x·∇u)∇u - ½x|∇u|² + ½E x u²`, whose divergence is `E u²`.
pub fn interior_norm_matrix(grid: &BoundaryGrid, basis: &BasisMatrices, e: f64) -> Result<DMatrix<f64>> {
    check_energy(e)?;
    let xn: Vec<f64> = grid.x.iter().zip(&grid.nrm).map(|(x, n)| x.dot(n)).collect();
    let weighted = |a: &DMatrix<f64>| {
        let mut out = a.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row.scale_mut(xn[i]);
        }
        out
    };
    let mut h = basis.val.tr_mul(&weighted(&basis.val)) * e;
    h -= basis.nor.tr_mul(&weighted(&basis.nor));
    h -= basis.tan.tr_mul(&weighted(&basis.tan));
    let cross = basis.dil.tr_mul(&basis.nor);
    h += &cross + cross.transpose();
    h *= 0.5 / e;
    Ok((&h + h.transpose()) * 0.5)
}

/// `B` with `BᵀB ≈ H`, keeping eigenpairs with `λ_j ≥ eps_h·λ₁`.
///
/// Returns `B` (rank × N) and the kept rank.
pub fn sqrt_factor(h: &DMatrix<f64>, eps_h: f64) -> Result<(DMatrix<f64>, usize)> {
    let n = h.ncols();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = order.first().map(|&i| eig.eigenvalues[i]).unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::DegenerateNorm(top));
    }
    let kept: Vec<usize> = order
        .into_iter()
        .take_while(|&i| eig.eigenvalues[i] >= eps_h * top)
        .collect();
    let rank = kept.len();
    let b = DMatrix::from_fn(rank, n, |r, c| {
        let j = kept[r];
        eig.eigenvalues[j].sqrt() * eig.eigenvectors[(c, j)]
    });
    Ok((b, rank))
}

/// All matrices needed to evaluate tensions at one energy.
#[derive(Debug, Clone)]
pub struct TensionSystem {
    pub e: f64,
    /// Semiclassical parameter `E^{-1/2}`.
    pub h: f64,
    pub basis: BasisMatrices,
    pub filter: DMatrix<f64>,
    /// `F·A_nor`.
    pub a_w: DMatrix<f64>,
    pub interior: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub rank_h: usize,
}

/// Grid and charges for one curve and discretization, reused across energies.
#[derive(Debug, Clone)]
pub struct Problem {
    pub curve: RadialCurve,
    pub params: Discretization,
    pub grid: BoundaryGrid,
    pub charges: ChargeSet,
}

impl Problem {
    pub fn new(curve: RadialCurve, params: Discretization) -> Result<Self> {
        params.validate()?;
        let grid = build_grid(&curve, params.m)?;
        let charges = charge_points(&curve, params.n, params.tau)?;
        Ok(Problem {
            curve,
            params,
            grid,
            charges,
        })
    }

    pub fn assemble(&self, e: f64) -> Result<TensionSystem> {
        check_energy(e)?;
        let h = e.sqrt().recip();
        if h > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "energy E = {e} below 1 gives h > 1"
            )));
        }
        let basis = basis_matrices(&self.grid, &self.charges, e)?;
        let filter = build_filter_matrix(&self.grid, h)?;
        let a_w = &filter * &basis.nor;
        let interior = interior_norm_matrix(&self.grid, &basis, e)?;
        let (b, rank_h) = sqrt_factor(&interior, self.params.eps_h)?;
        let system = TensionSystem {
            e,
            h,
            basis,
            filter,
            a_w,
            interior,
            b,
            rank_h,
        };
        for (name, mat) in [
            ("A_val", &system.basis.val),
            ("A_nor", &system.basis.nor),
            ("A_tan", &system.basis.tan),
            ("A_dil", &system.basis.dil),
            ("H", &system.interior),
        ] {
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("{name} has non-finite entries at E = {e}")));
            }
        }
        Ok(system)
    }
}

pub fn assemble_system(curve: &RadialCurve, m: usize, n: usize, tau: f64, e: f64) -> Result<TensionSystem> {
    Problem::new(curve.clone(), Discretization::new(m, n, tau))?.assemble(e)
}
