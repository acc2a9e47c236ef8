//! Projective spin-orbital CCD and CCSD.
//!
//! Residuals are the projections `⟨Φ_μ|e^{−T} H e^{T}|0⟩` written with the
//! usual Stanton–Gauss intermediates. Iteration is Jacobi on the canonical
//! denominators, accelerated with DIIS.

use std::collections::VecDeque;

use faer::prelude::Solve;
use faer::Mat;
use log::{debug, warn};
use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::amplitudes::Amplitudes;
use crate::error::{Error, Result};
use crate::hamiltonian::{denominators, Denominators, SpinOrbitalHamiltonian};
use crate::sector::{apply_string, taylor_exp_action, DeterminantSector, SectorOperator};

const DEGENERACY_TOL: f64 = 1e-10;
/// Abandon iteration once amplitudes reach this size.
const DIVERGENCE: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcConfig {
    pub residual_tol: f64,
    pub max_iter: usize,
    pub diis_depth: usize,
    /// Fraction of the previous amplitudes kept in each Jacobi step.
    pub damping: f64,
}

impl Default for CcConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-8, max_iter: 200, diis_depth: 8, damping: 0.0 }
    }
}

impl CcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.max_iter > 0 && self.diis_depth > 0) {
            return Err(Error::Config("CC tolerances and counts must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("CC damping {} outside [0, 1)", self.damping)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcLevel {
    Ccd,
    Ccsd,
}

#[derive(Clone, Debug)]
pub struct CcResult {
    pub level: CcLevel,
    pub amplitudes: Amplitudes,
    pub e_corr: f64,
    pub e_total: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of the final projected residual.
    pub residual_norm: f64,
    /// Correlation energy after each Jacobi update, first entry from zero amplitudes.
    pub trace: Vec<f64>,
}

/// Projected residuals `⟨Φ_i^a|H̄|0⟩` and `⟨Φ_ij^ab|H̄|0⟩`.
#[derive(Clone, Debug)]
pub struct Residual {
    pub r1: Array2<f64>,
    pub r2: Array4<f64>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.r1.iter().chain(self.r2.iter()).fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `Σ f_ia t_i^a + ¼ Σ ⟨ij||ab⟩ τ_ij^ab` with `τ = t2 + ½ P(ab) t1 t1`.
pub fn cc_energy(h: &SpinOrbitalHamiltonian, t: &Amplitudes) -> f64 {
    let (o, v) = (t.n_occ, t.n_virt);
    let mut e = 0.0;
    for i in 0..o {
        for a in 0..v {
            e += h.fock[[i, o + a]] * t.t1[[i, a]];
        }
    }
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let w = h.v_anti[[i, j, o + a, o + b]];
                    if w != 0.0 {
                        e += w * (0.25 * t.t2[[i, j, a, b]] + 0.5 * t.t1[[i, a]] * t.t1[[j, b]]);
                    }
                }
            }
        }
    }
    e
}

/// Projected CC residuals at amplitudes `t`; `t.t1` is ignored at CCD level
/// and the singles residual is returned as zero.
pub fn residual(h: &SpinOrbitalHamiltonian, t: &Amplitudes, level: CcLevel) -> Residual {
    let (o, v) = (t.n_occ, t.n_virt);
    let f = &h.fock;
    let g = &h.v_anti;
    let t1 = match level {
        CcLevel::Ccd => Array2::zeros((o, v)),
        CcLevel::Ccsd => t.t1.clone(),
    };
    let t2 = &t.t2;
    let tau_t = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        t2[[i, j, a, b]] + 0.5 * (t1[[i, a]] * t1[[j, b]] - t1[[i, b]] * t1[[j, a]])
    });
    let tau = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        t2[[i, j, a, b]] + t1[[i, a]] * t1[[j, b]] - t1[[i, b]] * t1[[j, a]]
    });

    let mut f_ae = Array2::<f64>::zeros((v, v));
    for a in 0..v {
        for e in 0..v {
            let mut s = if a == e { 0.0 } else { f[[o + a, o + e]] };
            for m in 0..o {
                s -= 0.5 * f[[m, o + e]] * t1[[m, a]];
                for fv in 0..v {
                    s += t1[[m, fv]] * g[[m, o + a, o + fv, o + e]];
                    for nn in 0..o {
                        s -= 0.5 * tau_t[[m, nn, a, fv]] * g[[m, nn, o + e, o + fv]];
                    }
                }
            }
            f_ae[[a, e]] = s;
        }
    }
    let mut f_mi = Array2::<f64>::zeros((o, o));
    for m in 0..o {
        for i in 0..o {
            let mut s = if m == i { 0.0 } else { f[[m, i]] };
            for e in 0..v {
                s += 0.5 * t1[[i, e]] * f[[m, o + e]];
                for nn in 0..o {
                    s += t1[[nn, e]] * g[[m, nn, i, o + e]];
                    for fv in 0..v {
                        s += 0.5 * tau_t[[i, nn, e, fv]] * g[[m, nn, o + e, o + fv]];
                    }
                }
            }
            f_mi[[m, i]] = s;
        }
    }
    let mut f_me = Array2::<f64>::zeros((o, v));
    for m in 0..o {
        for e in 0..v {
            let mut s = f[[m, o + e]];
            for nn in 0..o {
                for fv in 0..v {
                    s += t1[[nn, fv]] * g[[m, nn, o + e, o + fv]];
                }
            }
            f_me[[m, e]] = s;
        }
    }
    let w_mnij = Array4::from_shape_fn((o, o, o, o), |(m, nn, i, j)| {
        let mut s = g[[m, nn, i, j]];
        for e in 0..v {
            s += t1[[j, e]] * g[[m, nn, i, o + e]] - t1[[i, e]] * g[[m, nn, j, o + e]];
            for fv in 0..v {
                s += 0.25 * tau[[i, j, e, fv]] * g[[m, nn, o + e, o + fv]];
            }
        }
        s
    });
    let w_abef = Array4::from_shape_fn((v, v, v, v), |(a, b, e, fv)| {
        let mut s = g[[o + a, o + b, o + e, o + fv]];
        for m in 0..o {
            s -= t1[[m, b]] * g[[o + a, m, o + e, o + fv]] - t1[[m, a]] * g[[o + b, m, o + e, o + fv]];
            for nn in 0..o {
                s += 0.25 * tau[[m, nn, a, b]] * g[[m, nn, o + e, o + fv]];
            }
        }
        s
    });
    // W_mbej stored as [m][b][e][j]
    let w_mbej = Array4::from_shape_fn((o, v, v, o), |(m, b, e, j)| {
        let mut s = g[[m, o + b, o + e, j]];
        for fv in 0..v {
            s += t1[[j, fv]] * g[[m, o + b, o + e, o + fv]];
        }
        for nn in 0..o {
            s -= t1[[nn, b]] * g[[m, nn, o + e, j]];
            for fv in 0..v {
                s -= (0.5 * t2[[j, nn, fv, b]] + t1[[j, fv]] * t1[[nn, b]]) * g[[m, nn, o + e, o + fv]];
            }
        }
        s
    });

    let d = denominators(h);
    let mut r1 = Array2::<f64>::zeros((o, v));
    if level == CcLevel::Ccsd {
        for i in 0..o {
            for a in 0..v {
                let mut s = f[[i, o + a]] - d.d1[[i, a]] * t1[[i, a]];
                for e in 0..v {
                    s += t1[[i, e]] * f_ae[[a, e]];
                }
                for m in 0..o {
                    s -= t1[[m, a]] * f_mi[[m, i]];
                    for e in 0..v {
                        s += t2[[i, m, a, e]] * f_me[[m, e]];
                        for fv in 0..v {
                            s -= 0.5 * t2[[i, m, e, fv]] * g[[m, o + a, o + e, o + fv]];
                        }
                        for nn in 0..o {
                            s -= 0.5 * t2[[m, nn, a, e]] * g[[nn, m, o + e, i]];
                        }
                    }
                }
                for nn in 0..o {
                    for fv in 0..v {
                        s -= t1[[nn, fv]] * g[[nn, o + a, i, o + fv]];
                    }
                }
                r1[[i, a]] = s;
            }
        }
    }

    // P(ij)P(ab) contributions, antisymmetrized below
    let mut x = Array4::<f64>::zeros((o, o, v, v));
    let fb: Array2<f64> = Array2::from_shape_fn((v, v), |(b, e)| {
        f_ae[[b, e]] - 0.5 * (0..o).map(|m| t1[[m, b]] * f_me[[m, e]]).sum::<f64>()
    });
    let fj: Array2<f64> = Array2::from_shape_fn((o, o), |(m, j)| {
        f_mi[[m, j]] + 0.5 * (0..v).map(|e| t1[[j, e]] * f_me[[m, e]]).sum::<f64>()
    });
    let mut r2 = Array4::<f64>::zeros((o, o, v, v));
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let mut pp = 0.0;
                    for m in 0..o {
                        for e in 0..v {
                            pp += t2[[i, m, a, e]] * w_mbej[[m, b, e, j]] - t1[[i, e]] * t1[[m, a]] * g[[m, o + b, o + e, j]];
                        }
                    }
                    x[[i, j, a, b]] = pp;
                    let mut s = g[[i, j, o + a, o + b]] - d.d2[[i, j, a, b]] * t2[[i, j, a, b]];
                    for m in 0..o {
                        for nn in 0..o {
                            s += 0.5 * tau[[m, nn, a, b]] * w_mnij[[m, nn, i, j]];
                        }
                    }
                    for e in 0..v {
                        for fv in 0..v {
                            s += 0.5 * tau[[i, j, e, fv]] * w_abef[[a, b, e, fv]];
                        }
                    }
                    r2[[i, j, a, b]] = s;
                }
            }
        }
    }
    let pab = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        let mut s = 0.0;
        for e in 0..v {
            s += t2[[i, j, a, e]] * fb[[b, e]];
        }
        for m in 0..o {
            s -= t1[[m, a]] * g[[m, o + b, i, j]];
        }
        s
    });
    let pij = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        let mut s = 0.0;
        for m in 0..o {
            s -= t2[[i, m, a, b]] * fj[[m, j]];
        }
        for e in 0..v {
            s += t1[[i, e]] * g[[o + a, o + b, o + e, j]];
        }
        s
    });
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    r2[[i, j, a, b]] += pab[[i, j, a, b]] - pab[[i, j, b, a]] + pij[[i, j, a, b]] - pij[[j, i, a, b]]
                        + x[[i, j, a, b]]
                        - x[[j, i, a, b]]
                        - x[[i, j, b, a]]
                        + x[[j, i, b, a]];
                }
            }
        }
    }
    Residual { r1, r2 }
}

fn check_denominators(d: &Denominators, o: usize) -> Result<()> {
    for ((i, a), &x) in d.d1.indexed_iter() {
        if x.abs() < DEGENERACY_TOL && i % 2 == (o + a) % 2 {
            return Err(Error::Degenerate { location: format!("D1[{i}][{}]", o + a), value: x });
        }
    }
    for ((i, j, a, b), &x) in d.d2.indexed_iter() {
        if i != j && a != b && x.abs() < DEGENERACY_TOL {
            return Err(Error::Degenerate { location: format!("D2[{i}][{j}][{}][{}]", o + a, o + b), value: x });
        }
    }
    Ok(())
}

fn flatten(t: &Amplitudes, level: CcLevel) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(t.t1.len() + t.t2.len());
    if level == CcLevel::Ccsd {
        out.extend(t.t1.iter());
    }
    out.extend(t.t2.iter());
    out
}

fn unflatten(x: &[f64], o: usize, v: usize, level: CcLevel) -> Amplitudes {
    let mut t = Amplitudes::zeros(o, v);
    let split = if level == CcLevel::Ccsd { o * v } else { 0 };
    if split > 0 {
        t.t1 = Array2::from_shape_vec((o, v), x[..split].to_vec()).expect("t1 shape");
    }
    t.t2 = Array4::from_shape_vec((o, o, v, v), x[split..].to_vec()).expect("t2 shape");
    t
}

/// Pulay extrapolation over stored `(amplitudes, error)` pairs.
fn diis_extrapolate(history: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Option<Vec<f64>> {
    let m = history.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let b = Mat::<f64>::from_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
        (true, true) => dot(&history[i].1, &history[j].1),
        (true, false) | (false, true) => -1.0,
        (false, false) => 0.0,
    });
    let rhs = Mat::<f64>::from_fn(m + 1, 1, |i, _| if i < m { 0.0 } else { -1.0 });
    let c = b.full_piv_lu().solve(&rhs);
    let coeffs: Vec<f64> = (0..m).map(|i| c[(i, 0)]).collect();
    if coeffs.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut out = vec![0.0; history[0].0.len()];
    for (w, (amp, _)) in coeffs.iter().zip(history) {
        for (o, a) in out.iter_mut().zip(amp) {
            *o += w * a;
        }
    }
    Some(out)
}

pub fn ccd_solve(h: &SpinOrbitalHamiltonian, cfg: &CcConfig) -> Result<CcResult> {
    solve(h, cfg, CcLevel::Ccd, None)
}

pub fn ccsd_solve(h: &SpinOrbitalHamiltonian, cfg: &CcConfig) -> Result<CcResult> {
    solve(h, cfg, CcLevel::Ccsd, None)
}

/// Iterates the CC equations from `start` (zero amplitudes when `None`).
pub fn solve(h: &SpinOrbitalHamiltonian, cfg: &CcConfig, level: CcLevel, start: Option<&Amplitudes>) -> Result<CcResult> {
    cfg.validate()?;
    let (o, v) = (h.n_occ, h.n_virt());
    let d = denominators(h);
    check_denominators(&d, o)?;
    let mut t = match start {
        Some(s) if s.n_occ == o && s.n_virt == v => s.clone(),
        Some(s) => return Err(Error::Dimension(format!("start amplitudes {}x{} for {o}x{v}", s.n_occ, s.n_virt))),
        None => Amplitudes::zeros(o, v),
    };
    if level == CcLevel::Ccd {
        t.t1.fill(0.0);
    }
    let mut trace = vec![cc_energy(h, &t)];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut r = residual(h, &t, level);
    let mut norm = r.max_abs();
    let mut iterations = 0;
    while norm >= cfg.residual_tol && iterations < cfg.max_iter {
        let mut next = t.clone();
        if level == CcLevel::Ccsd {
            for ((i, a), x) in next.t1.indexed_iter_mut() {
                let den = d.d1[[i, a]];
                if den.abs() >= DEGENERACY_TOL {
                    *x += (1.0 - cfg.damping) * r.r1[[i, a]] / den;
                }
            }
        }
        for ((i, j, a, b), x) in next.t2.indexed_iter_mut() {
            let den = d.d2[[i, j, a, b]];
            if den.abs() >= DEGENERACY_TOL {
                *x += (1.0 - cfg.damping) * r.r2[[i, j, a, b]] / den;
            }
        }
        let flat = flatten(&next, level);
        let old = flatten(&t, level);
        let err: Vec<f64> = flat.iter().zip(&old).map(|(a, b)| a - b).collect();
        trace.push(cc_energy(h, &next));
        history.push_back((flat, err));
        while history.len() > cfg.diis_depth {
            history.pop_front();
        }
        t = if history.len() >= 2 {
            diis_extrapolate(&history).map(|x| unflatten(&x, o, v, level)).unwrap_or(next)
        } else {
            next
        };
        iterations += 1;
        r = residual(h, &t, level);
        norm = r.max_abs();
        debug!("{level:?} iter {iterations}: E = {:.12}, |r|∞ = {norm:.3e}", cc_energy(h, &t));
        if !norm.is_finite() || t.t2.iter().any(|x| x.abs() > DIVERGENCE) {
            break;
        }
    }
    let converged = norm < cfg.residual_tol;
    if !converged {
        warn!("{level:?} not converged after {iterations} iterations: |r|∞ = {norm:.2e}");
    }
    let e_corr = cc_energy(h, &t);
    Ok(CcResult { level, amplitudes: t, e_corr, e_total: h.e_hf + e_corr, iterations, converged, residual_norm: norm, trace })
}

/// `⟨Φ_μ|e^{−T} H e^{T}|0⟩` evaluated in the determinant sector, returning
/// the energy and the singles/doubles projections.
pub fn similarity_transform_projection(
    sector: &DeterminantSector,
    hmat: &SectorOperator,
    t: &Amplitudes,
) -> Result<(f64, Residual)> {
    let op = t.to_operator(sector)?;
    let psi = taylor_exp_action(&op, &sector.hf_vector(), 1.0);
    let hpsi = hmat.apply(&psi).into_vec();
    let hbar = taylor_exp_action(&op, &hpsi, -1.0);
    let (o, v) = (t.n_occ, t.n_virt);
    let hf = sector.hf_det();
    let project = |creators: &[usize], annihilators: &[usize]| {
        apply_string(hf, creators, annihilators)
            .and_then(|(det, sign)| sector.index_of(det).map(|k| sign * hbar[k]))
            .unwrap_or(0.0)
    };
    let r1 = Array2::from_shape_fn((o, v), |(i, a)| project(&[o + a], &[i]));
    let r2 = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        if i == j || a == b {
            0.0
        } else {
            project(&[o + a, o + b], &[i, j])
        }
    });
    Ok((hbar[sector.hf_index], Residual { r1, r2 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::random_t2;
    use crate::fcidump::{SpatialIntegrals, freeze_core};
    use crate::fci::fci_ground_state;
    use crate::hamiltonian::{mp2, to_spin_orbital};
    use crate::sector::{hamiltonian_matrix, sector_for};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture(name: &str) -> SpinOrbitalHamiltonian {
        let path = format!("{}/../../fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR"));
        to_spin_orbital(&SpatialIntegrals::from_file(path).unwrap()).unwrap()
    }

    fn max_diff(x: &Residual, y: &Residual) -> f64 {
        x.r1.iter()
            .zip(y.r1.iter())
            .chain(x.r2.iter().zip(y.r2.iter()))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn residuals_match_similarity_transform_on_h4() {
        let h = fixture("h4_chain_1.0");
        let sector = sector_for(&h).unwrap();
        let hmat = hamiltonian_matrix(&sector, &h).unwrap();
        let (o, v) = (h.n_occ, h.n_virt());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let mut t = random_t2(o, v, 0.2, &mut rng);
            for ((i, a), x) in t.t1.indexed_iter_mut() {
                if i % 2 == (o + a) % 2 {
                    *x = rng.random_range(-0.1..0.1);
                }
            }
            let (energy, oracle) = similarity_transform_projection(&sector, &hmat, &t).unwrap();
            let r = residual(&h, &t, CcLevel::Ccsd);
            assert!(max_diff(&r, &oracle) < 1e-9, "CCSD residual differs by {}", max_diff(&r, &oracle));
            assert_abs_diff_eq!(energy, h.e_hf + cc_energy(&h, &t), epsilon = 1e-10);

            t.t1.fill(0.0);
            let (_, oracle) = similarity_transform_projection(&sector, &hmat, &t).unwrap();
            let r = residual(&h, &t, CcLevel::Ccd);
            let diff = r.r2.iter().zip(oracle.r2.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-9, "CCD residual differs by {diff}");
        }
    }

    #[test]
    fn first_iterate_is_mp2() {
        let h = fixture("h4_chain_1.0");
        let (amps, e2) = mp2(&h).unwrap();
        for level in [CcLevel::Ccd, CcLevel::Ccsd] {
            let cfg = CcConfig { max_iter: 1, diis_depth: 1, ..Default::default() };
            let res = solve(&h, &cfg, level, None).unwrap();
            assert_eq!(res.trace[0], 0.0);
            assert_abs_diff_eq!(res.trace[1], e2, epsilon = 1e-12);
            let diff = (&res.amplitudes.t2 - &amps.t2).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn ccsd_is_exact_for_two_electrons() {
        let h = fixture("h2_0.74");
        let sector = sector_for(&h).unwrap();
        let hmat = hamiltonian_matrix(&sector, &h).unwrap();
        let fci = fci_ground_state(&sector, &hmat).unwrap();
        let res = ccsd_solve(&h, &CcConfig::default()).unwrap();
        assert!(res.converged);
        assert_abs_diff_eq!(res.e_total, fci.energy, epsilon = 1e-8);
    }

    #[test]
    fn converged_residual_rechecked_in_sector() {
        let h = fixture("h4_chain_1.0");
        let sector = sector_for(&h).unwrap();
        let hmat = hamiltonian_matrix(&sector, &h).unwrap();
        let res = ccsd_solve(&h, &CcConfig::default()).unwrap();
        assert!(res.converged);
        let (energy, oracle) = similarity_transform_projection(&sector, &hmat, &res.amplitudes).unwrap();
        assert!(oracle.max_abs() < 1e-8);
        assert_abs_diff_eq!(energy, res.e_total, epsilon = 1e-10);
    }

    #[test]
    fn zero_two_electron_integrals_give_zero_correlation() {
        let mut ints = SpatialIntegrals::zeros(3, 2);
        ints.set_h(0, 0, -1.0);
        ints.set_h(1, 1, 0.3);
        ints.set_h(2, 2, 0.7);
        let h = to_spin_orbital(&ints).unwrap();
        for res in [ccd_solve(&h, &CcConfig::default()).unwrap(), ccsd_solve(&h, &CcConfig::default()).unwrap()] {
            assert!(res.converged);
            assert_eq!(res.e_corr, 0.0);
        }
    }

    #[test]
    fn frozen_core_water_converges_below_hf() {
        let path = format!("{}/../../fixtures/h2o_eq.fcidump", env!("CARGO_MANIFEST_DIR"));
        let ints = freeze_core(&SpatialIntegrals::from_file(path).unwrap(), 1).unwrap();
        let h = to_spin_orbital(&ints).unwrap();
        let ccd = ccd_solve(&h, &CcConfig::default()).unwrap();
        let ccsd = ccsd_solve(&h, &CcConfig::default()).unwrap();
        assert!(ccd.converged && ccsd.converged);
        assert!(ccd.e_corr < 0.0 && ccsd.e_corr < 0.0);
        assert!(ccd.amplitudes.t1.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let h = fixture("h2_0.74");
        let cfg = CcConfig { residual_tol: 0.0, ..Default::default() };
        assert!(matches!(ccd_solve(&h, &cfg), Err(Error::Config(_))));
        let cfg = CcConfig { damping: 1.0, ..Default::default() };
        assert!(matches!(ccsd_solve(&h, &cfg), Err(Error::Config(_))));
    }
}
