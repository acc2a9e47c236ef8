//! Perturbative singles from converged doubles: `T1^[2] = (W_N T2)_C / D1`,
//! `T1^[3] = (T2† W_N T2)_C / D1`, and the [4S] and [6S] energy corrections
//! built from them.
//!
//! Both projections are evaluated as plain singles projections, which equal
//! the connected parts for a canonical reference (`f_ia = 0`).

use ndarray::Array2;

use crate::amplitudes::Amplitudes;
use crate::error::{Error, Result};
use crate::hamiltonian::{Denominators, SpinOrbitalHamiltonian, DEGENERACY_TOL};
use crate::sector::{apply_string, DeterminantSector, SectorOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct SinglesCorrection {
    pub t1_2: Array2<f64>,
    pub t1_3: Array2<f64>,
    /// `Σ D1 (t1_2)²`
    pub e4s: f64,
    /// `2 Σ D1 t1_2 t1_3`
    pub e5: f64,
    /// `Σ D1 (t1_3)²`
    pub e6: f64,
    /// `e4s + e5 + e6`
    pub e6s: f64,
}

fn check_inputs(h: &SpinOrbitalHamiltonian, t2: &Amplitudes, d: &Denominators) -> Result<()> {
    h.check_canonical()?;
    let (o, v) = (h.n_occ, h.n_virt());
    if (t2.n_occ, t2.n_virt) != (o, v) || d.d1.dim() != (o, v) {
        return Err(Error::Dimension(format!(
            "amplitudes {}x{} and denominators {:?} for {o} occupied, {v} virtual",
            t2.n_occ,
            t2.n_virt,
            d.d1.dim()
        )));
    }
    Ok(())
}

/// Divides a singles numerator by `D1`, refusing near-zero denominators
/// where the numerator is nonzero.
fn divide(num: Array2<f64>, d: &Denominators, n_occ: usize) -> Result<Array2<f64>> {
    let mut out = num;
    for ((i, a), x) in out.indexed_iter_mut() {
        if *x == 0.0 {
            continue;
        }
        let den = d.d1[[i, a]];
        if den.abs() < DEGENERACY_TOL {
            return Err(Error::Degenerate { location: format!("D1[{i}][{}]", n_occ + a), value: den });
        }
        *x /= den;
    }
    Ok(out)
}

/// `⟨Φ_i^a| W_N T2 |0⟩` as an `o × v` tensor.
pub fn w_t2_singles(h: &SpinOrbitalHamiltonian, t2: &Amplitudes) -> Array2<f64> {
    let (o, v) = (h.n_occ, h.n_virt());
    let g = &h.v_anti;
    let t = &t2.t2;
    Array2::from_shape_fn((o, v), |(i, a)| {
        let mut x = 0.0;
        for m in 0..o {
            for e in 0..v {
                for f in 0..v {
                    x -= 0.5 * t[[i, m, e, f]] * g[[m, o + a, o + e, o + f]];
                }
                for n in 0..o {
                    x -= 0.5 * t[[m, n, a, e]] * g[[n, m, o + e, i]];
                }
            }
        }
        x
    })
}

/// Dense `o³v³` tensor indexed `[i][j][k][a][b][c]`.
struct Triples {
    o: usize,
    v: usize,
    data: Vec<f64>,
}

impl Triples {
    fn zeros(o: usize, v: usize) -> Self {
        Self { o, v, data: vec![0.0; o * o * o * v * v * v] }
    }

    fn at(&self, i: usize, j: usize, k: usize, a: usize, b: usize, c: usize) -> usize {
        ((((i * self.o + j) * self.o + k) * self.v + a) * self.v + b) * self.v + c
    }

    fn get(&self, i: usize, j: usize, k: usize, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.at(i, j, k, a, b, c)]
    }
}

/// `⟨Φ_ijk^abc| W_N T2 |0⟩` with `Φ_ijk^abc = a†_a a†_b a†_c a_k a_j a_i |0⟩`.
fn w_t2_triples(h: &SpinOrbitalHamiltonian, t2: &Amplitudes) -> Triples {
    let (o, v) = (h.n_occ, h.n_virt());
    let g = &h.v_anti;
    let t = &t2.t2;
    let mut raw = Triples::zeros(o, v);
    for i in 0..o {
        for j in 0..o {
            for k in 0..o {
                for a in 0..v {
                    for b in 0..v {
                        for c in 0..v {
                            let mut x = 0.0;
                            for e in 0..v {
                                x += t[[j, k, a, e]] * g[[o + e, i, o + b, o + c]];
                            }
                            for m in 0..o {
                                x -= t[[i, m, b, c]] * g[[m, o + a, j, k]];
                            }
                            let at = raw.at(i, j, k, a, b, c);
                            raw.data[at] = x;
                        }
                    }
                }
            }
        }
    }
    // P(i/jk) P(a/bc)
    let mut z = Triples::zeros(o, v);
    for i in 0..o {
        for j in 0..o {
            for k in 0..o {
                let occ = [(i, j, k, 1.0), (j, i, k, -1.0), (k, j, i, -1.0)];
                for a in 0..v {
                    for b in 0..v {
                        for c in 0..v {
                            let vir = [(a, b, c, 1.0), (b, a, c, -1.0), (c, b, a, -1.0)];
                            let mut x = 0.0;
                            for &(p, q, r, s) in &occ {
                                for &(d, e, f, u) in &vir {
                                    x += s * u * raw.get(p, q, r, d, e, f);
                                }
                            }
                            let at = z.at(i, j, k, a, b, c);
                            z.data[at] = x;
                        }
                    }
                }
            }
        }
    }
    z
}

/// `⟨Φ_i^a| T2† W_N T2 |0⟩` as an `o × v` tensor.
pub fn t2_w_t2_singles(h: &SpinOrbitalHamiltonian, t2: &Amplitudes) -> Array2<f64> {
    let (o, v) = (h.n_occ, h.n_virt());
    let z = w_t2_triples(h, t2);
    let t = &t2.t2;
    Array2::from_shape_fn((o, v), |(i, a)| {
        let mut y = 0.0;
        for j in 0..o {
            for k in j + 1..o {
                for b in 0..v {
                    for c in b + 1..v {
                        let tj = t[[j, k, b, c]];
                        if tj != 0.0 {
                            y += tj * z.get(i, j, k, a, b, c);
                        }
                    }
                }
            }
        }
        y
    })
}

/// Second-order singles `T1^[2]`.
pub fn t1_second_order(h: &SpinOrbitalHamiltonian, t2: &Amplitudes, d: &Denominators) -> Result<Array2<f64>> {
    check_inputs(h, t2, d)?;
    divide(w_t2_singles(h, t2), d, h.n_occ)
}

/// Third-order singles `T1^[3]`.
pub fn t1_third_order(h: &SpinOrbitalHamiltonian, t2: &Amplitudes, d: &Denominators) -> Result<Array2<f64>> {
    check_inputs(h, t2, d)?;
    divide(t2_w_t2_singles(h, t2), d, h.n_occ)
}

pub fn corrections(h: &SpinOrbitalHamiltonian, t2: &Amplitudes, d: &Denominators) -> Result<SinglesCorrection> {
    let t1_2 = t1_second_order(h, t2, d)?;
    let t1_3 = t1_third_order(h, t2, d)?;
    let mut e4s = 0.0;
    let mut e5 = 0.0;
    let mut e6 = 0.0;
    for (&den, (&x2, &x3)) in d.d1.iter().zip(t1_2.iter().zip(t1_3.iter())) {
        e4s += den * x2 * x2;
        e5 += 2.0 * den * x2 * x3;
        e6 += den * x3 * x3;
    }
    Ok(SinglesCorrection { t1_2, t1_3, e4s, e5, e6, e6s: e4s + e5 + e6 })
}

/// `⟨Φ_i^a| op |0⟩` read from the reference column of a sector operator.
pub fn oracle_singles_projection(sector: &DeterminantSector, op: &SectorOperator) -> Array2<f64> {
    let o = sector.n_occ();
    let v = sector.n_so - o;
    let hf = sector.hf_det();
    let column: Vec<f64> = {
        let mut unit = vec![0.0; sector.dim()];
        unit[sector.hf_index] = 1.0;
        op.apply(&unit).into_vec()
    };
    Array2::from_shape_fn((o, v), |(i, a)| {
        apply_string(hf, &[o + a], &[i])
            .and_then(|(det, sign)| sector.index_of(det).map(|row| sign * column[row]))
            .unwrap_or(0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::random_t2;
    use crate::fcidump::SpatialIntegrals;
    use crate::hamiltonian::{denominators, to_spin_orbital};
    use crate::sector::{excitation_matrix, hamiltonian_matrix, perturbation_matrix, sector_for};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct System {
        h: SpinOrbitalHamiltonian,
        sector: DeterminantSector,
        w: SectorOperator,
        d: Denominators,
    }

    fn system(name: &str) -> System {
        let path = format!("{}/../../fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR"));
        let h = to_spin_orbital(&SpatialIntegrals::from_file(&path).unwrap()).unwrap();
        let sector = sector_for(&h).unwrap();
        let w = perturbation_matrix(&hamiltonian_matrix(&sector, &h).unwrap(), &sector, &h).unwrap();
        let d = denominators(&h);
        System { h, sector, w, d }
    }

    fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn oracle_numerators(s: &System, t2: &Amplitudes) -> (Array2<f64>, Array2<f64>) {
        let t = t2.to_operator(&s.sector).unwrap();
        let wt = s.w.matmul(&t).unwrap();
        let twt = t.transpose().matmul(&wt).unwrap();
        (oracle_singles_projection(&s.sector, &wt), oracle_singles_projection(&s.sector, &twt))
    }

    #[test]
    fn zero_doubles_give_zero() {
        let s = system("h4_chain_1.0");
        let t2 = Amplitudes::zeros(s.h.n_occ, s.h.n_virt());
        let c = corrections(&s.h, &t2, &s.d).unwrap();
        assert!(c.t1_2.iter().chain(c.t1_3.iter()).all(|&x| x == 0.0));
        assert_eq!((c.e4s, c.e5, c.e6, c.e6s), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn matches_fock_space_oracle_on_h4() {
        let s = system("h4_chain_1.0");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t2 = random_t2(s.h.n_occ, s.h.n_virt(), 0.2, &mut rng);
            let (x2, x3) = oracle_numerators(&s, &t2);
            assert!(max_diff(&w_t2_singles(&s.h, &t2), &x2) < 1e-10);
            assert!(max_diff(&t2_w_t2_singles(&s.h, &t2), &x3) < 1e-10);
            assert!(x3.iter().any(|x| x.abs() > 1e-4));
        }
    }

    #[test]
    fn e4s_is_the_matrix_element() {
        let s = system("h4_chain_1.0");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t2 = random_t2(s.h.n_occ, s.h.n_virt(), 0.2, &mut rng);
        let c = corrections(&s.h, &t2, &s.d).unwrap();
        let mut t1 = Amplitudes::zeros(s.h.n_occ, s.h.n_virt());
        t1.t1 = c.t1_2.clone();
        let hf = s.sector.hf_vector();
        let t1_ket = t1.to_operator(&s.sector).unwrap().apply(&hf);
        let wt2_ket = s.w.apply(&t2.to_operator(&s.sector).unwrap().apply(&hf));
        let direct: f64 = t1_ket.iter().zip(wt2_ket.iter()).map(|(a, b)| a * b).sum();
        assert!((c.e4s - direct).abs() < 1e-10);
        assert!(c.e4s < 0.0);
    }

    #[test]
    fn paired_doubles_against_oracle() {
        let s = system("h4_chain_1.0");
        let (o, v) = (s.h.n_occ, s.h.n_virt());
        let mut t2 = Amplitudes::zeros(o, v);
        for (k, (i, a)) in [(0, 0), (0, 2), (2, 0), (2, 2)].into_iter().enumerate() {
            t2.set_t2(i, i + 1, a, a + 1, 0.05 * (k as f64 + 1.0));
        }
        let (x2, x3) = oracle_numerators(&s, &t2);
        assert!(max_diff(&w_t2_singles(&s.h, &t2), &x2) < 1e-10);
        assert!(max_diff(&t2_w_t2_singles(&s.h, &t2), &x3) < 1e-10);
    }

    #[test]
    fn parities_and_scaling() {
        let s = system("h4_chain_1.0");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t2 = random_t2(s.h.n_occ, s.h.n_virt(), 0.1, &mut rng);
        let plus = corrections(&s.h, &t2, &s.d).unwrap();
        let minus = corrections(&s.h, &t2.scaled(-1.0), &s.d).unwrap();
        assert_eq!(plus.e4s, minus.e4s);
        assert_eq!(plus.e6, minus.e6);
        assert_eq!(plus.e5, -minus.e5);
        let scaled = t1_third_order(&s.h, &t2.scaled(2.0), &s.d).unwrap();
        assert!(max_diff(&scaled, &(&plus.t1_3 * 4.0)) < 1e-14);
        assert_eq!(plus.e6s, plus.e4s + plus.e5 + plus.e6);
    }

    #[test]
    fn oracle_trivial_operators() {
        let s = system("h4_chain_1.0");
        let id = SectorOperator::identity(s.sector.dim());
        assert!(oracle_singles_projection(&s.sector, &id).iter().all(|&x| x == 0.0));
        let o = s.h.n_occ;
        let e = excitation_matrix(&s.sector, &[o + 3], &[1]);
        let p = oracle_singles_projection(&s.sector, &e);
        for ((i, a), &x) in p.indexed_iter() {
            assert_eq!(x, if (i, a) == (1, 3) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn h2_singles_vanish() {
        let s = system("h2_0.74");
        let t2 = crate::hamiltonian::mp2(&s.h).unwrap().0;
        let (x2, _) = oracle_numerators(&s, &t2);
        assert!(x2.iter().all(|x| x.abs() < 1e-14));
        assert!(w_t2_singles(&s.h, &t2).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn rejects_non_canonical_reference() {
        let mut s = system("h4_chain_1.0");
        let o = s.h.n_occ;
        s.h.fock[[0, o]] = 1e-4;
        s.h.fock[[o, 0]] = 1e-4;
        let t2 = Amplitudes::zeros(o, s.h.n_virt());
        assert!(matches!(t1_second_order(&s.h, &t2, &s.d), Err(Error::Contract(_))));
    }

    #[test]
    fn degenerate_denominator_is_named() {
        let mut s = system("h4_chain_1.0");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t2 = random_t2(s.h.n_occ, s.h.n_virt(), 0.1, &mut rng);
        let num = w_t2_singles(&s.h, &t2);
        let ((i, a), _) = num.indexed_iter().find(|(_, x)| x.abs() > 1e-6).unwrap();
        s.d.d1[[i, a]] = 0.0;
        match t1_second_order(&s.h, &t2, &s.d) {
            Err(Error::Degenerate { location, .. }) => assert_eq!(location, format!("D1[{i}][{}]", s.h.n_occ + a)),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }
}
