//! Lowest eigenpair of a sector Hamiltonian: dense diagonalization for small
//! sectors, Davidson iteration above.

use faer::{Mat, Side};
use log::debug;

use crate::error::{Error, Result};
use crate::sector::{dot, spin_squared_matrix, DeterminantSector, SectorOperator, SectorVector, Symmetry};

pub const DENSE_MAX: usize = 4096;
const DAVIDSON_TOL: f64 = 1e-9;
const DAVIDSON_MAX_ITER: usize = 400;
const RESIDUAL_TOL: f64 = 1e-9;
const SINGLET_TOL: f64 = 1e-6;
const LEVEL_GAP: f64 = 1e-8;
const SPIN_PENALTY: f64 = 1.0;
const MAX_ROOTS: usize = 16;

#[derive(Clone, Debug)]
pub struct FciResult {
    pub energy: f64,
    pub ground_vector: SectorVector,
    pub dimension: usize,
    /// `⟨S²⟩` of the returned vector.
    pub s_squared: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solver {
    Auto,
    Dense,
    Davidson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    /// Lowest eigenvalue of the whole sector.
    Lowest,
    /// The `k`-th distinct singlet energy level counting from 0, so a
    /// degenerate pair is one level.
    SingletLevel(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FciOptions {
    pub solver: Solver,
    pub target: Target,
}

impl Default for FciOptions {
    fn default() -> Self {
        Self { solver: Solver::Auto, target: Target::Lowest }
    }
}

/// Lowest eigenpair of `hmat` over the whole sector.
pub fn fci_ground_state(sector: &DeterminantSector, hmat: &SectorOperator) -> Result<FciResult> {
    fci_with(sector, hmat, FciOptions::default())
}

/// Lowest singlet eigenpair.
pub fn fci_singlet_ground_state(sector: &DeterminantSector, hmat: &SectorOperator) -> Result<FciResult> {
    fci_with(sector, hmat, FciOptions { target: Target::SingletLevel(0), ..FciOptions::default() })
}

pub fn fci_with(sector: &DeterminantSector, hmat: &SectorOperator, opts: FciOptions) -> Result<FciResult> {
    if hmat.symmetry() != Symmetry::Hermitian {
        return Err(Error::Contract("FCI needs a Hermitian operator".into()));
    }
    if hmat.dim() != sector.dim() {
        return Err(Error::Dimension(format!("operator {} vs sector {}", hmat.dim(), sector.dim())));
    }
    let s2 = spin_squared_matrix(sector);
    let dense = match opts.solver {
        Solver::Auto => sector.dim() <= DENSE_MAX,
        Solver::Dense => true,
        Solver::Davidson => false,
    };
    let hf = sector.hf_index;
    let v = match opts.target {
        Target::Lowest if dense => dense_eigen(hmat, 1)?.remove(0).1,
        Target::Lowest => davidson(hmat, &[hf], 1)?.remove(0).1,
        Target::SingletLevel(level) => {
            let shifted = hmat.add_scaled(&s2, SPIN_PENALTY)?.with_symmetry(Symmetry::Hermitian)?;
            let mut nroots = (level + 4).min(sector.dim());
            loop {
                let roots = if dense {
                    dense_eigen(&shifted, sector.dim())?
                } else {
                    davidson(&shifted, &lowest_diagonal(&shifted, hf, nroots), nroots)?
                };
                let complete = roots.len() == sector.dim();
                if let Some(v) = nth_singlet_level(&s2, roots, level) {
                    break v;
                }
                if complete || nroots >= MAX_ROOTS.min(sector.dim()) {
                    return Err(Error::NotConverged(format!("singlet level {level} not among the {nroots} lowest roots")));
                }
                nroots = (2 * nroots).min(MAX_ROOTS).min(sector.dim());
            }
        }
    };
    let hv = hmat.apply(&v);
    let energy = dot(&v, &hv);
    let residual = hv.iter().zip(v.iter()).map(|(h, x)| (h - energy * x).abs()).fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::NotConverged(format!("FCI eigen-residual {residual:.2e}")));
    }
    let s_squared = s2.expectation(&v);
    Ok(FciResult { energy, ground_vector: v, dimension: sector.dim(), s_squared })
}

/// Picks the first vector of singlet level `level` from ascending roots. The
/// last level seen is not trusted since its partner may lie beyond the roots.
fn nth_singlet_level(s2: &SectorOperator, roots: Vec<(f64, SectorVector)>, level: usize) -> Option<SectorVector> {
    let total = roots.len();
    let mut seen: Option<f64> = None;
    let mut count = 0;
    for (k, (e, v)) in roots.into_iter().enumerate() {
        if s2.expectation(&v).abs() > SINGLET_TOL {
            continue;
        }
        if seen.is_some_and(|p| e - p < LEVEL_GAP) {
            continue;
        }
        if seen.is_some() {
            count += 1;
        }
        seen = Some(e);
        if count == level && k + 1 < total {
            return Some(v);
        }
    }
    None
}

/// `count` starting indices: `first`, then the smallest diagonal entries.
fn lowest_diagonal(op: &SectorOperator, first: usize, count: usize) -> Vec<usize> {
    let d = op.diagonal();
    let mut order: Vec<usize> = (0..d.len()).filter(|&k| k != first).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    std::iter::once(first).chain(order).take(count).collect()
}

/// The `count` lowest eigenpairs by full diagonalization.
pub fn dense_eigen(op: &SectorOperator, count: usize) -> Result<Vec<(f64, SectorVector)>> {
    let n = op.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    for r in 0..n {
        for (c, v) in op.row(r) {
            m[(r, c)] = v;
        }
    }
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NotConverged(format!("dense eigensolver: {e:?}")))?;
    let u = eig.U();
    Ok((0..count.min(n))
        .map(|k| {
            let mut v: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
            canonical_phase(&mut v);
            (eig.S()[k], SectorVector::from_vec(v))
        })
        .collect())
}

fn canonical_phase(v: &mut [f64]) {
    let k = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() + 1e-12 { i } else { best });
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn orthonormalize_against(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Block Davidson for the `nroots` lowest eigenpairs, started from unit
/// vectors at `starts` and preconditioned with the diagonal.
pub fn davidson(op: &SectorOperator, starts: &[usize], nroots: usize) -> Result<Vec<(f64, SectorVector)>> {
    let n = op.dim();
    let nroots = nroots.min(n);
    let max_basis = (nroots * 12).max(60).min(n);
    let diag = op.diagonal();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut pending: Vec<Vec<f64>> = starts.iter().map(|&k| SectorVector::basis(n, k).into_vec()).collect();
    let mut worst = f64::INFINITY;

    for iter in 0..DAVIDSON_MAX_ITER {
        for mut v in pending.drain(..) {
            if orthonormalize_against(&basis, &mut v) > 1e-10 {
                images.push(op.apply(&v).into_vec());
                basis.push(v);
            }
        }
        let m = basis.len();
        if m < nroots {
            return Err(Error::NotConverged(format!("Davidson subspace collapsed to {m} vectors")));
        }
        let sub = Mat::<f64>::from_fn(m, m, |i, j| dot(&basis[i], &images[j]));
        let eig = sub
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NotConverged(format!("Davidson subspace: {e:?}")))?;
        let keep = (2 * nroots).min(m);
        let mut ritz = Vec::with_capacity(keep);
        worst = 0.0;
        for root in 0..keep {
            let theta = eig.S()[root];
            let mut x = vec![0.0; n];
            let mut ax = vec![0.0; n];
            for k in 0..m {
                let c = eig.U()[(k, root)];
                x.iter_mut().zip(&basis[k]).for_each(|(a, b)| *a += c * b);
                ax.iter_mut().zip(&images[k]).for_each(|(a, b)| *a += c * b);
            }
            let r: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - theta * b).collect();
            let rnorm = dot(&r, &r).sqrt();
            if root < nroots {
                worst = worst.max(rnorm);
            }
            ritz.push((theta, x, ax, r, rnorm));
        }
        debug!("Davidson {iter}: θ0 = {:.12} max |r| = {worst:.2e} (basis {m})", ritz[0].0);
        if worst < DAVIDSON_TOL {
            return Ok(ritz
                .into_iter()
                .take(nroots)
                .map(|(theta, mut x, ..)| {
                    canonical_phase(&mut x);
                    (theta, SectorVector::from_vec(x))
                })
                .collect());
        }
        for (theta, _, _, r, rnorm) in &ritz[..nroots] {
            if *rnorm < DAVIDSON_TOL {
                continue;
            }
            pending.push(
                r.iter()
                    .zip(&diag)
                    .map(|(ri, di)| {
                        let d = di - theta;
                        ri / if d.abs() < 1e-8 { 1e-8_f64.copysign(d) } else { d }
                    })
                    .collect(),
            );
        }
        if m + pending.len() > max_basis {
            basis = ritz.iter().map(|t| t.1.clone()).collect();
            images = ritz.iter().map(|t| t.2.clone()).collect();
        }
    }
    Err(Error::NotConverged(format!("Davidson did not reach {DAVIDSON_TOL:e} in {DAVIDSON_MAX_ITER} iterations (max |r| = {worst:.2e})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::enumerate_sector;
    use approx::assert_abs_diff_eq;

    fn tridiagonal(n: usize) -> SectorOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, i as f64 * 0.5 - 1.0));
            if i + 1 < n {
                t.push((i, i + 1, 0.1));
                t.push((i + 1, i, 0.1));
            }
        }
        SectorOperator::from_triplets(n, t, Symmetry::Hermitian).unwrap()
    }

    #[test]
    fn dense_and_davidson_agree() {
        let op = tridiagonal(200);
        let dense = dense_eigen(&op, 3).unwrap();
        let dav = davidson(&op, &[0, 1, 2], 3).unwrap();
        for ((a, va), (b, vb)) in dense.iter().zip(&dav) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            assert_abs_diff_eq!(dot(va, vb).abs(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn one_determinant() {
        let sector = enumerate_sector(2, 1, 1).unwrap();
        let h = SectorOperator::diagonal_matrix(&[-1.166]);
        let r = fci_ground_state(&sector, &h).unwrap();
        assert_eq!(r.energy, -1.166);
        assert_eq!(r.dimension, 1);
    }

    #[test]
    fn rejects_non_hermitian() {
        let sector = enumerate_sector(2, 1, 1).unwrap();
        let h = SectorOperator::from_triplets(1, vec![(0, 0, 1.0)], Symmetry::General).unwrap();
        assert!(fci_ground_state(&sector, &h).is_err());
    }
}
