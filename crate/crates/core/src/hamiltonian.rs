//! Spin-orbital Hamiltonian in normal-ordered form relative to the RHF
//! determinant, orbital-energy denominators and MP2.
//!
//! Spin orbitals interleave spin: `p = 2P + σ` with even `p` α and odd `p` β.
//! The normal-ordered Hamiltonian splits into a diagonal one-body part
//! `f_N = Σ_p f_pp {p†p}` and a perturbation `W_N` holding the
//! occupied-virtual Fock blocks and `¼ Σ ⟨pq||rs⟩ {p†q†sr}`.

use ndarray::{Array2, Array4};

use crate::amplitudes::Amplitudes;
use crate::error::{Error, Result};
use crate::fcidump::SpatialIntegrals;

/// Tolerance on `max |f_ia|` for treating the reference as canonical.
pub const CANONICAL_TOL: f64 = 1e-8;
/// Denominators smaller than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpinOrbitalHamiltonian {
    pub n_so: usize,
    pub n_occ: usize,
    pub e_core: f64,
    pub e_hf: f64,
    /// Bare one-electron integrals over spin orbitals.
    pub h: Array2<f64>,
    pub fock: Array2<f64>,
    /// `⟨pq||rs⟩`, physicists' notation.
    pub v_anti: Array4<f64>,
}

impl SpinOrbitalHamiltonian {
    pub fn n_virt(&self) -> usize {
        self.n_so - self.n_occ
    }

    /// `max |f_ia|` over occupied `i`, virtual `a`.
    pub fn max_ov_fock(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_occ {
            for a in self.n_occ..self.n_so {
                worst = worst.max(self.fock[[i, a]].abs());
            }
        }
        worst
    }

    pub fn check_canonical(&self) -> Result<()> {
        let worst = self.max_ov_fock();
        if worst > CANONICAL_TOL {
            return Err(Error::Contract(format!(
                "reference is not canonical: max |f_ia| = {worst:.3e} exceeds {CANONICAL_TOL:e}"
            )));
        }
        Ok(())
    }

    /// Orbital energies `f_pp`.
    pub fn orbital_energies(&self) -> Vec<f64> {
        (0..self.n_so).map(|p| self.fock[[p, p]]).collect()
    }

    /// HOMO-LUMO gap from the Fock diagonal; `None` without virtuals.
    pub fn homo_lumo_gap(&self) -> Option<f64> {
        if self.n_occ == 0 || self.n_occ == self.n_so {
            return None;
        }
        let eps = self.orbital_energies();
        let homo = eps[..self.n_occ].iter().cloned().fold(f64::MIN, f64::max);
        let lumo = eps[self.n_occ..].iter().cloned().fold(f64::MAX, f64::min);
        Some(lumo - homo)
    }
}

/// Builds the spin-orbital Hamiltonian from spatial integrals for a
/// closed-shell reference.
pub fn to_spin_orbital(ints: &SpatialIntegrals) -> Result<SpinOrbitalHamiltonian> {
    if ints.n_electrons % 2 != 0 {
        return Err(Error::UnsupportedReference(format!(
            "{} electrons; only closed-shell RHF references are supported",
            ints.n_electrons
        )));
    }
    let n = ints.n_orb;
    let n_so = 2 * n;
    let n_occ = ints.n_electrons;

    let mut h = Array2::zeros((n_so, n_so));
    for p in 0..n_so {
        for q in 0..n_so {
            if p % 2 == q % 2 {
                h[[p, q]] = ints.h[[p / 2, q / 2]];
            }
        }
    }

    let mut v_anti = Array4::zeros((n_so, n_so, n_so, n_so));
    for p in 0..n_so {
        for q in 0..n_so {
            for r in 0..n_so {
                for s in 0..n_so {
                    let mut v = 0.0;
                    if p % 2 == r % 2 && q % 2 == s % 2 {
                        v += ints.g[[p / 2, r / 2, q / 2, s / 2]];
                    }
                    if p % 2 == s % 2 && q % 2 == r % 2 {
                        v -= ints.g[[p / 2, s / 2, q / 2, r / 2]];
                    }
                    v_anti[[p, q, r, s]] = v;
                }
            }
        }
    }

    let mut fock = h.clone();
    for p in 0..n_so {
        for q in 0..n_so {
            fock[[p, q]] += (0..n_occ).map(|i| v_anti[[p, i, q, i]]).sum::<f64>();
        }
    }

    let mut e_hf = ints.e_core;
    for i in 0..n_occ {
        e_hf += h[[i, i]];
        for j in 0..n_occ {
            e_hf += 0.5 * v_anti[[i, j, i, j]];
        }
    }

    Ok(SpinOrbitalHamiltonian { n_so, n_occ, e_core: ints.e_core, e_hf, h, fock, v_anti })
}

/// Møller–Plesset denominators built from the Fock diagonal.
#[derive(Clone, Debug)]
pub struct Denominators {
    /// `D1[i][a] = f_ii − f_aa`
    pub d1: Array2<f64>,
    /// `D2[i][j][a][b] = f_ii + f_jj − f_aa − f_bb`
    pub d2: Array4<f64>,
}

impl Denominators {
    /// Smallest `|D1|` over S_z-allowed `(i, a)` pairs, if any.
    pub fn min_abs_d1(&self) -> Option<f64> {
        let (o, _) = self.d1.dim();
        self.d1
            .indexed_iter()
            .filter(|((i, a), _)| i % 2 == (o + a) % 2)
            .map(|(_, d)| d.abs())
            .reduce(f64::min)
    }
}

pub fn denominators(h: &SpinOrbitalHamiltonian) -> Denominators {
    let (o, v) = (h.n_occ, h.n_virt());
    let eps = h.orbital_energies();
    let d1 = Array2::from_shape_fn((o, v), |(i, a)| eps[i] - eps[o + a]);
    let d2 = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| eps[i] + eps[j] - eps[o + a] - eps[o + b]);
    Denominators { d1, d2 }
}

/// First-order doubles and the second-order energy `¼ Σ ⟨ij||ab⟩ t_ij^ab`.
pub fn mp2(h: &SpinOrbitalHamiltonian) -> Result<(Amplitudes, f64)> {
    let (o, v) = (h.n_occ, h.n_virt());
    let d = denominators(h);
    let mut amps = Amplitudes::zeros(o, v);
    let mut energy = 0.0;
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let num = h.v_anti[[i, j, o + a, o + b]];
                    if num == 0.0 {
                        continue;
                    }
                    let den = d.d2[[i, j, a, b]];
                    if den.abs() < DEGENERACY_TOL {
                        return Err(Error::Degenerate {
                            location: format!("D2[{i}][{j}][{}][{}]", o + a, o + b),
                            value: den,
                        });
                    }
                    let t = num / den;
                    amps.t2[[i, j, a, b]] = t;
                    energy += 0.25 * num * t;
                }
            }
        }
    }
    Ok((amps, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcidump::parse_fcidump;
    use approx::assert_abs_diff_eq;

    fn one_orbital() -> SpatialIntegrals {
        parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0 &END\n0.6250 1 1 1 1\n-1.2520 1 1 0 0\n0.7130 0 0 0 0\n").unwrap()
    }

    #[test]
    fn one_orbital_hand_values() {
        let h = to_spin_orbital(&one_orbital()).unwrap();
        assert_eq!(h.n_so, 2);
        assert_eq!(h.n_occ, 2);
        assert_abs_diff_eq!(h.v_anti[[0, 1, 0, 1]], 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(h.v_anti[[0, 1, 1, 0]], -0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(h.e_hf, 0.713 + 2.0 * -1.252 + 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(h.e_hf, -1.166, epsilon = 1e-14);
    }

    #[test]
    fn same_spin_diagonal_is_coulomb_minus_exchange() {
        let mut ints = SpatialIntegrals::zeros(2, 2);
        ints.set_eri(0, 0, 1, 1, 0.7);
        ints.set_eri(0, 1, 1, 0, 0.2);
        let h = to_spin_orbital(&ints).unwrap();
        // both alpha: p = 0 (orbital 0), q = 2 (orbital 1)
        assert_abs_diff_eq!(h.v_anti[[0, 2, 0, 2]], 0.7 - 0.2, epsilon = 1e-15);
        // opposite spin: no exchange
        assert_abs_diff_eq!(h.v_anti[[0, 3, 0, 3]], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn odd_electron_count_is_rejected() {
        let ints = SpatialIntegrals::zeros(2, 3);
        assert!(matches!(to_spin_orbital(&ints), Err(Error::UnsupportedReference(_))));
    }

    #[test]
    fn two_level_denominator() {
        let mut ints = SpatialIntegrals::zeros(2, 2);
        ints.set_h(0, 0, -1.0);
        ints.set_h(1, 1, 1.0);
        let h = to_spin_orbital(&ints).unwrap();
        let d = denominators(&h);
        assert_eq!(d.d1[[0, 0]], -2.0);
        for ((i, j, a, b), &x) in d.d2.indexed_iter() {
            assert_eq!(x, d.d1[[i, a]] + d.d1[[j, b]]);
        }
    }

    #[test]
    fn degenerate_fock_gives_zero_denominators_and_mp2_error() {
        // exchange (01|01) lowers the virtual Fock diagonal by 0.1; h_11 undoes it
        let mut ints = SpatialIntegrals::zeros(2, 2);
        ints.set_eri(0, 1, 0, 1, 0.1);
        ints.set_h(1, 1, 0.1);
        let h = to_spin_orbital(&ints).unwrap();
        let d = denominators(&h);
        assert!(d.d1.iter().all(|&x| x == 0.0));
        assert!(d.d2.iter().all(|&x| x == 0.0));
        assert!(matches!(mp2(&h), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn mp2_trivial_cases() {
        let mut ints = SpatialIntegrals::zeros(2, 2);
        ints.set_h(0, 0, -1.0);
        ints.set_h(1, 1, 0.5);
        let (amps, e) = mp2(&to_spin_orbital(&ints).unwrap()).unwrap();
        assert_eq!(e, 0.0);
        assert!(amps.t2.iter().all(|&t| t == 0.0));

        let (amps, e) = mp2(&to_spin_orbital(&one_orbital()).unwrap()).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(amps.t2.len(), 0);
    }
}
