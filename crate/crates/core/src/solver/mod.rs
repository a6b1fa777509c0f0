//! Independent eigen-solver for BDD Hamiltonians.
//!
//! The kinetic term is discretised in conservative flux form,
//! `−(ħ²/2) (ψ'/m)'`, with `1/m` taken at cell midpoints. Dirichlet ends
//! drop the boundary sample; Robin ends keep it with a half-cell weight.
//! Either way the weighted operator is symmetrised to a plain symmetric
//! tridiagonal matrix, so the spectrum is real and the eigenvectors are
//! orthogonal.

mod tridiagonal;

use std::sync::Arc;

pub use tridiagonal::SymTridiagonal;

use crate::error::{invalid, Error, Result};
use crate::numerics::{derivative, inner, l2_normalize, same_grid, Grid, SampledFunction};
use crate::profile::MassProfile;

/// `c1 ψ + c2 (1/m) ψ' = 0` at each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub c1_left: f64,
    pub c2_left: f64,
    pub c1_right: f64,
    pub c2_right: f64,
}

impl BoundaryCondition {
    pub fn new(c1_left: f64, c2_left: f64, c1_right: f64, c2_right: f64) -> Result<Self> {
        if (c1_left == 0.0 && c2_left == 0.0) || (c1_right == 0.0 && c2_right == 0.0) {
            return Err(invalid("boundary coefficients (c1, c2) must not both vanish"));
        }
        Ok(Self {
            c1_left,
            c2_left,
            c1_right,
            c2_right,
        })
    }

    pub fn dirichlet() -> Self {
        Self {
            c1_left: 1.0,
            c2_left: 0.0,
            c1_right: 1.0,
            c2_right: 0.0,
        }
    }
}

impl Default for BoundaryCondition {
    fn default() -> Self {
        Self::dirichlet()
    }
}

/// Symmetric tridiagonal form of a BDD Hamiltonian on a grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: Arc<Grid>,
    profile: MassProfile,
    matrix: SymTridiagonal,
    boundary: BoundaryCondition,
    mass_at_midpoints: Vec<f64>,
    // quadrature weight of each unknown
    weights: Vec<f64>,
    first_unknown: usize,
}

impl DiscretizedOperator {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn diagonal(&self) -> &[f64] {
        self.matrix.diag()
    }

    pub fn off_diagonal(&self) -> &[f64] {
        self.matrix.off()
    }

    pub fn profile(&self) -> &MassProfile {
        &self.profile
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn mass_at_midpoints(&self) -> &[f64] {
        &self.mass_at_midpoints
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.len()
    }

    /// Dense copy of the symmetric matrix, for inspection in tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.unknowns();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.matrix.diag()[i];
            if i + 1 < n {
                a[i][i + 1] = self.matrix.off()[i];
                a[i + 1][i] = self.matrix.off()[i];
            }
        }
        a
    }

    /// Applies the discrete operator to grid samples (boundary samples of
    /// Dirichlet ends are ignored; the result is zero there).
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        same_grid(&self.grid, f.grid())?;
        let n = self.unknowns();
        let y: Vec<f64> = (0..n)
            .map(|j| self.weights[j].sqrt() * f.values()[self.first_unknown + j])
            .collect();
        let mut out = vec![0.0; self.grid.len()];
        for j in 0..n {
            let mut r = self.matrix.diag()[j] * y[j];
            if j > 0 {
                r += self.matrix.off()[j - 1] * y[j - 1];
            }
            if j + 1 < n {
                r += self.matrix.off()[j] * y[j + 1];
            }
            out[self.first_unknown + j] = r / self.weights[j].sqrt();
        }
        SampledFunction::new(Arc::clone(&self.grid), out)
    }
}

/// Flux-form discretisation of `−(ħ²/2)(ψ'/m)' + Vψ`.
pub fn discretize(
    profile: &MassProfile,
    potential: &SampledFunction,
    bc: BoundaryCondition,
    hbar: f64,
) -> Result<DiscretizedOperator> {
    let grid = Arc::clone(potential.grid());
    let pts = grid.points();
    let n = pts.len();
    let h = grid.spacing();
    let k = 0.5 * hbar * hbar;

    let mut mass_mid = Vec::with_capacity(n - 1);
    for w in pts.windows(2) {
        let xm = 0.5 * (w[0] + w[1]);
        let m = profile.mass(xm)?;
        if !(m > 0.0) {
            return Err(Error::Domain(format!(
                "non-positive mass {m} at midpoint x = {xm}"
            )));
        }
        mass_mid.push(m);
    }
    let p: Vec<f64> = mass_mid.iter().map(|m| 1.0 / m).collect();

    let left_robin = bc.c2_left != 0.0;
    let right_robin = bc.c2_right != 0.0;
    let first = if left_robin { 0 } else { 1 };
    let last = if right_robin { n - 1 } else { n - 2 };
    let v = potential.values();

    let mut diag = Vec::with_capacity(last - first + 1);
    let mut weights = Vec::with_capacity(last - first + 1);
    for i in first..=last {
        if !v[i].is_finite() {
            return Err(Error::Domain(format!(
                "potential is not finite at x = {}",
                pts[i]
            )));
        }
        let (a, w) = if i == 0 {
            (k * (p[0] / h - bc.c1_left / bc.c2_left) + 0.5 * h * v[0], 0.5 * h)
        } else if i == n - 1 {
            (
                k * (p[n - 2] / h + bc.c1_right / bc.c2_right) + 0.5 * h * v[n - 1],
                0.5 * h,
            )
        } else {
            (k / h * (p[i - 1] + p[i]) + h * v[i], h)
        };
        diag.push(a / w);
        weights.push(w);
    }
    let mut off = Vec::with_capacity(diag.len().saturating_sub(1));
    for (j, i) in (first..last).enumerate() {
        let a = -k / h * p[i];
        off.push(a / (weights[j] * weights[j + 1]).sqrt());
    }

    Ok(DiscretizedOperator {
        grid,
        profile: profile.clone(),
        matrix: SymTridiagonal::new(diag, off),
        boundary: bc,
        mass_at_midpoints: mass_mid,
        weights,
        first_unknown: first,
    })
}

/// Lowest eigenpairs of a discretised operator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<SampledFunction>,
    pub node_counts: Vec<usize>,
    pub bc_residuals: Vec<f64>,
}

/// Sign changes among samples above `1e-9 · max|ψ|`.
pub fn count_nodes(psi: &SampledFunction) -> usize {
    let floor = 1e-9 * psi.max_abs();
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in psi.values() {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

/// The `k` lowest eigenpairs by Sturm bisection plus inverse iteration.
pub fn solve_spectrum(op: &DiscretizedOperator, k: usize) -> Result<SpectrumReport> {
    let n_points = op.grid.len();
    if k == 0 || 4 * k >= n_points {
        return Err(invalid(format!(
            "requested {k} levels on {n_points} points; need 1 <= k < n/4"
        )));
    }
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut report = SpectrumReport {
        eigenvalues: Vec::with_capacity(k),
        eigenfunctions: Vec::with_capacity(k),
        node_counts: Vec::with_capacity(k),
        bc_residuals: Vec::with_capacity(k),
    };
    for level in 0..k {
        let lambda = op.matrix.eigenvalue(level);
        let y = op.matrix.eigenvector(level, lambda, &vectors)?;
        let mut values = vec![0.0; n_points];
        for (j, yj) in y.iter().enumerate() {
            values[op.first_unknown + j] = yj / op.weights[j].sqrt();
        }
        let psi = l2_normalize(&SampledFunction::new(Arc::clone(&op.grid), values)?)?;
        let (_, residual) = check_boundary_condition(&psi, &op.profile, &op.boundary, DEFAULT_BC_TOLERANCE)?;
        report.node_counts.push(count_nodes(&psi));
        report.bc_residuals.push(residual);
        report.eigenvalues.push(lambda);
        report.eigenfunctions.push(psi);
        vectors.push(y);
    }
    Ok(report)
}

pub const DEFAULT_BC_TOLERANCE: f64 = 1e-4;

/// Relative residual of `c1 ψ + c2 (1/m) ψ'` at both ends; `true` when both
/// are below `tolerance`.
pub fn check_boundary_condition(
    psi: &SampledFunction,
    profile: &MassProfile,
    bc: &BoundaryCondition,
    tolerance: f64,
) -> Result<(bool, f64)> {
    let scale = psi.max_abs();
    if scale == 0.0 {
        return Ok((true, 0.0));
    }
    let grid = psi.grid();
    let n = psi.len();
    let slope = derivative(psi, 1)?;
    let end = |i: usize, c1: f64, c2: f64| -> Result<f64> {
        let flux = if c2 == 0.0 {
            0.0
        } else {
            c2 * slope.values()[i] / profile.mass(grid.points()[i])?
        };
        Ok((c1 * psi.values()[i] + flux).abs() / scale)
    };
    let left = end(0, bc.c1_left, bc.c2_left)?;
    let right = end(n - 1, bc.c1_right, bc.c2_right)?;
    let worst = left.max(right);
    Ok((worst < tolerance, worst))
}

/// Gram matrix by trapezoid quadrature.
pub fn overlap_matrix(states: &[SampledFunction]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; states.len()]; states.len()];
    for i in 0..states.len() {
        for j in i..states.len() {
            let v = inner(&states[i], &states[j])?;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// Outcome of [`solve_with_widening`].
#[derive(Debug, Clone)]
pub struct WidenedSpectrum {
    pub report: SpectrumReport,
    pub grid: Arc<Grid>,
    pub rounds: usize,
    pub last_change: f64,
}

/// Solves on `grid`, then repeatedly extends the open ends by a quarter of the
/// width at fixed spacing until the `k` eigenvalues move by less than `tol`.
///
/// `build` maps a grid to the potential to discretise on it.
#[allow(clippy::too_many_arguments)]
pub fn solve_with_widening(
    profile: &MassProfile,
    grid: &Arc<Grid>,
    widen_left: bool,
    widen_right: bool,
    k: usize,
    hbar: f64,
    tol: f64,
    build: impl Fn(&Arc<Grid>) -> Result<SampledFunction>,
) -> Result<WidenedSpectrum> {
    let solve = |g: &Arc<Grid>| -> Result<SpectrumReport> {
        let v = build(g)?;
        let op = discretize(profile, &v, BoundaryCondition::dirichlet(), hbar)?;
        solve_spectrum(&op, k)
    };
    let mut current = Arc::clone(grid);
    let mut report = solve(&current)?;
    let h = grid.spacing();
    let mut last_change = f64::INFINITY;
    for round in 1..=8 {
        if !(widen_left || widen_right) {
            return Ok(WidenedSpectrum {
                report,
                grid: current,
                rounds: 0,
                last_change: 0.0,
            });
        }
        let extra = 0.25 * (current.x_max() - current.x_min());
        let lo = if widen_left { current.x_min() - extra } else { current.x_min() };
        let hi = if widen_right { current.x_max() + extra } else { current.x_max() };
        let wider = Arc::new(Grid::with_spacing(lo, hi, h)?);
        let next = solve(&wider)?;
        last_change = report
            .eigenvalues
            .iter()
            .zip(&next.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report = next;
        current = wider;
        if last_change < tol {
            return Ok(WidenedSpectrum {
                report,
                grid: current,
                rounds: round,
                last_change,
            });
        }
    }
    Err(Error::Solver {
        level: k,
        iterations: 8,
        residual: last_change,
    })
}
