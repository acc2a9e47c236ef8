//! Generator sets and state preparation for the unitary doubles family.
//!
//! A doubles generator `E = a†_a a†_b a_i a_j` (creators `[a, b]`,
//! annihilators applied `j` then `i`, with `i < j`, `a < b`) enters as
//! `τ = E − E†` with parameter `θ_ij^ab`. Since `E = −a†_a a†_b a_j a_i`, a
//! state carrying cluster amplitude `t_ij^ab` at first order has
//! `θ_ij^ab = −t_ij^ab`. Singles are `a†_a a_i` with `θ = t_i^a`.
//! Single-exponential preparation gives `e^{Σ θ τ} |0⟩`; the
//! Trotterized form applies the factors in list order,
//! `e^{θ_n τ_n} ⋯ e^{θ_2 τ_2} e^{θ_1 τ_1} |0⟩`.

use std::fmt;

use gauss_quad::GaussLegendre;

use crate::amplitudes::Amplitudes;
use crate::error::{Error, Result};
use crate::hamiltonian::SpinOrbitalHamiltonian;
use crate::sector::{dot, excitation_couplings, taylor_exp_action, DeterminantSector, SectorOperator, SectorVector, Symmetry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnsatzKind {
    Doubles,
    PairedDoubles,
    SinglesDoubles,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Excitation {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl Excitation {
    /// `a†_a a†_b a_i a_j`
    pub fn double(i: usize, j: usize, a: usize, b: usize) -> Self {
        Self { creators: vec![a, b], annihilators: vec![j, i] }
    }

    /// Occupied indices in ascending order.
    pub fn holes(&self) -> Vec<usize> {
        let mut h = self.annihilators.clone();
        h.sort_unstable();
        h
    }

    pub fn single(i: usize, a: usize) -> Self {
        Self { creators: vec![a], annihilators: vec![i] }
    }

    pub fn rank(&self) -> usize {
        self.creators.len()
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}<-{:?}", self.creators, self.annihilators)
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub kind: AnsatzKind,
    pub trotterized: bool,
    pub n_so: usize,
    pub n_occ: usize,
    pub generators: Vec<Excitation>,
}

impl GeneratorSet {
    pub fn param_count(&self) -> usize {
        self.generators.len()
    }

    /// `2 Δε` per generator, a diagonal Hessian estimate at `θ = 0`.
    pub fn hessian_guess(&self, h: &SpinOrbitalHamiltonian) -> Vec<f64> {
        let eps = h.orbital_energies();
        self.generators
            .iter()
            .map(|g| {
                let gap: f64 = g.creators.iter().map(|&a| eps[a]).sum::<f64>() - g.annihilators.iter().map(|&i| eps[i]).sum::<f64>();
                2.0 * gap.abs().max(0.1)
            })
            .collect()
    }

    pub fn label(&self) -> &'static str {
        match (self.kind, self.trotterized) {
            (AnsatzKind::Doubles, false) => "UCCD",
            (AnsatzKind::Doubles, true) => "tUCCD",
            (AnsatzKind::PairedDoubles, false) => "pUCCD",
            (AnsatzKind::PairedDoubles, true) => "tpUCCD",
            (AnsatzKind::SinglesDoubles, false) => "UCCSD",
            (AnsatzKind::SinglesDoubles, true) => "tUCCSD",
        }
    }
}

/// Enumerates S_z-conserving generators in application order. The written
/// product is singles, then same-spin pairs `e^{θ_IJ^AB} e^{θ_ĪJ̄^ĀB̄}` over
/// `I<J, A<B`, then mixed-spin factors over all `I, J, A, B`, acting on `|0⟩`
/// from the right; the list is that product reversed, so the first listed
/// generator acts first.
pub fn build_generators(h: &SpinOrbitalHamiltonian, kind: AnsatzKind, trotterized: bool) -> GeneratorSet {
    generators_for(h.n_so, h.n_occ, kind, trotterized)
}

pub fn generators_for(n_so: usize, n_occ: usize, kind: AnsatzKind, trotterized: bool) -> GeneratorSet {
    let (occ, orb) = (n_occ / 2, n_so / 2);
    let sorted = |p: usize, q: usize| if p < q { (p, q) } else { (q, p) };
    let mut written = Vec::new();
    if kind == AnsatzKind::SinglesDoubles {
        for i in 0..n_occ {
            for a in (n_occ..n_so).filter(|a| a % 2 == i % 2) {
                written.push(Excitation::single(i, a));
            }
        }
    }
    match kind {
        AnsatzKind::PairedDoubles => {
            for i in 0..occ {
                for a in occ..orb {
                    written.push(Excitation::double(2 * i, 2 * i + 1, 2 * a, 2 * a + 1));
                }
            }
        }
        AnsatzKind::Doubles | AnsatzKind::SinglesDoubles => {
            for i in 0..occ {
                for j in i + 1..occ {
                    for a in occ..orb {
                        for b in a + 1..orb {
                            written.push(Excitation::double(2 * i, 2 * j, 2 * a, 2 * b));
                            written.push(Excitation::double(2 * i + 1, 2 * j + 1, 2 * a + 1, 2 * b + 1));
                        }
                    }
                }
            }
            for i in 0..occ {
                for j in 0..occ {
                    for a in occ..orb {
                        for b in occ..orb {
                            let (p, q) = sorted(2 * i, 2 * j + 1);
                            let (r, s) = sorted(2 * a, 2 * b + 1);
                            written.push(Excitation::double(p, q, r, s));
                        }
                    }
                }
            }
        }
    }
    written.reverse();
    GeneratorSet { kind, trotterized, n_so, n_occ, generators: written }
}

/// Doubles parameters read directly as an antisymmetric `t2`,
/// `t2[i][j][a][b] = θ_ij^ab`.
pub fn params_to_t2(gens: &GeneratorSet, params: &[f64]) -> Result<Amplitudes> {
    if gens.kind == AnsatzKind::SinglesDoubles {
        return Err(Error::Invalid("singles-bearing ansatz cannot be mapped onto t2 alone".into()));
    }
    check_len(gens, params)?;
    let o = gens.n_occ;
    let mut amps = Amplitudes::zeros(o, gens.n_so - o);
    for (g, &theta) in gens.generators.iter().zip(params) {
        let [i, j] = g.holes()[..] else { unreachable!("doubles-only set") };
        amps.set_t2(i, j, g.creators[0] - o, g.creators[1] - o, theta);
    }
    Ok(amps)
}

/// Parameters whose state matches the cluster amplitudes `amps` to first
/// order: `θ_ij^ab = −t_ij^ab`, `θ_i^a = t_i^a`.
pub fn params_from_amplitudes(gens: &GeneratorSet, amps: &Amplitudes) -> Vec<f64> {
    let o = gens.n_occ;
    gens.generators
        .iter()
        .map(|g| match g.rank() {
            2 => {
                let [i, j] = g.holes()[..] else { unreachable!("rank 2") };
                -amps.t2[[i, j, g.creators[0] - o, g.creators[1] - o]]
            }
            _ => amps.t1[[g.annihilators[0], g.creators[0] - o]],
        })
        .collect()
}

fn check_len(gens: &GeneratorSet, params: &[f64]) -> Result<()> {
    if params.len() != gens.param_count() {
        return Err(Error::Dimension(format!("{} parameters for {} generators", params.len(), gens.param_count())));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
struct Coupling {
    col: u32,
    row: u32,
    sign: f64,
}

/// A generator set bound to a sector: per-generator couplings and, for the
/// single-exponential form, a fixed sparsity pattern for `Σ θ τ`.
#[derive(Clone, Debug)]
pub struct CompiledAnsatz {
    pub gens: GeneratorSet,
    dim: usize,
    hf_index: usize,
    couplings: Vec<Vec<Coupling>>,
    pattern: Option<SectorOperator>,
    slots: Vec<Vec<(usize, usize)>>,
}

impl CompiledAnsatz {
    pub fn new(gens: GeneratorSet, sector: &DeterminantSector) -> Result<Self> {
        if sector.n_so != gens.n_so || sector.n_occ() != gens.n_occ {
            return Err(Error::Dimension(format!(
                "ansatz over {} spin orbitals / {} electrons, sector {} / {}",
                gens.n_so,
                gens.n_occ,
                sector.n_so,
                sector.n_occ()
            )));
        }
        let couplings: Vec<Vec<Coupling>> = gens
            .generators
            .iter()
            .map(|g| {
                excitation_couplings(sector, &g.creators, &g.annihilators)
                    .into_iter()
                    .map(|(col, row, sign)| Coupling { col: col as u32, row: row as u32, sign })
                    .collect()
            })
            .collect();
        let (pattern, slots) = if gens.trotterized {
            (None, Vec::new())
        } else {
            let mut t = Vec::new();
            for c in couplings.iter().flatten() {
                t.push((c.row as usize, c.col as usize, 1.0));
                t.push((c.col as usize, c.row as usize, -1.0));
            }
            let op = SectorOperator::from_triplets(sector.dim(), t, Symmetry::AntiHermitian)?;
            let slots = couplings
                .iter()
                .map(|cs| {
                    cs.iter()
                        .map(|c| {
                            let (r, k) = (c.row as usize, c.col as usize);
                            (op.slot(r, k).expect("stored"), op.slot(k, r).expect("stored"))
                        })
                        .collect()
                })
                .collect();
            (Some(op), slots)
        };
        Ok(Self { gens, dim: sector.dim(), hf_index: sector.hf_index, couplings, pattern, slots })
    }

    pub fn param_count(&self) -> usize {
        self.gens.param_count()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `τ_k` as an explicit anti-Hermitian matrix.
    pub fn generator_matrix(&self, k: usize) -> SectorOperator {
        let t = self.couplings[k]
            .iter()
            .flat_map(|c| [(c.row as usize, c.col as usize, c.sign), (c.col as usize, c.row as usize, -c.sign)])
            .collect();
        SectorOperator::from_triplets(self.dim, t, Symmetry::AntiHermitian).expect("τ = E − E† is anti-Hermitian")
    }

    /// `Σ_k θ_k τ_k` over the fixed pattern.
    pub fn summed_generator(&self, params: &[f64]) -> Result<SectorOperator> {
        check_len(&self.gens, params)?;
        if let Some(pattern) = &self.pattern {
            let mut op = pattern.clone();
            let values = op.values_mut();
            for ((slots, cs), &theta) in self.slots.iter().zip(&self.couplings).zip(params) {
                for (&(rc, cr), c) in slots.iter().zip(cs) {
                    values[rc] = theta * c.sign;
                    values[cr] = -theta * c.sign;
                }
            }
            return Ok(op);
        }
        let t = self
            .couplings
            .iter()
            .zip(params)
            .flat_map(|(cs, &theta)| {
                cs.iter()
                    .flat_map(move |c| [(c.row as usize, c.col as usize, theta * c.sign), (c.col as usize, c.row as usize, -theta * c.sign)])
            })
            .collect();
        SectorOperator::from_triplets(self.dim, t, Symmetry::AntiHermitian)
    }

    /// `e^{θ τ_k}` applied in place; `τ_k` rotates disjoint 2-planes.
    fn rotate(&self, k: usize, theta: f64, v: &mut [f64]) {
        if theta == 0.0 {
            return;
        }
        let (s, c) = theta.sin_cos();
        for cp in &self.couplings[k] {
            let (col, row) = (cp.col as usize, cp.row as usize);
            let (x, y) = (v[col], v[row]);
            v[col] = c * x - s * cp.sign * y;
            v[row] = c * y + s * cp.sign * x;
        }
    }

    /// `⟨l| τ_k |r⟩`
    fn tau_element(&self, k: usize, l: &[f64], r: &[f64]) -> f64 {
        self.couplings[k]
            .iter()
            .map(|c| c.sign * (l[c.row as usize] * r[c.col as usize] - l[c.col as usize] * r[c.row as usize]))
            .sum()
    }

    pub fn prepare_state(&self, params: &[f64]) -> Result<SectorVector> {
        check_len(&self.gens, params)?;
        let mut v = vec![0.0; self.dim];
        v[self.hf_index] = 1.0;
        if self.gens.trotterized {
            for (k, &theta) in params.iter().enumerate() {
                self.rotate(k, theta, &mut v);
            }
        } else if params.iter().any(|&p| p != 0.0) {
            v = taylor_exp_action(&self.summed_generator(params)?, &v, 1.0);
        }
        Ok(SectorVector::from_vec(v))
    }

    /// `⟨Ψ(θ)|H|Ψ(θ)⟩`
    pub fn energy(&self, params: &[f64], hmat: &SectorOperator) -> Result<f64> {
        let psi = self.prepare_state(params)?;
        Ok(hmat.expectation(&psi))
    }

    /// Energy and its exact parameter gradient.
    pub fn energy_and_gradient(&self, params: &[f64], hmat: &SectorOperator) -> Result<(f64, Vec<f64>)> {
        if self.gens.trotterized {
            self.trotter_gradient(params, hmat)
        } else {
            self.exponential_gradient(params, hmat)
        }
    }

    /// Central-difference gradient with step `h`.
    pub fn gradient_fd(&self, params: &[f64], hmat: &SectorOperator, h: f64) -> Result<Vec<f64>> {
        let mut x = params.to_vec();
        let mut g = vec![0.0; params.len()];
        for k in 0..params.len() {
            x[k] = params[k] + h;
            let up = self.energy(&x, hmat)?;
            x[k] = params[k] - h;
            let down = self.energy(&x, hmat)?;
            x[k] = params[k];
            g[k] = (up - down) / (2.0 * h);
        }
        Ok(g)
    }

    fn trotter_gradient(&self, params: &[f64], hmat: &SectorOperator) -> Result<(f64, Vec<f64>)> {
        let mut phi = self.prepare_state(params)?.into_vec();
        let mut lambda = hmat.apply(&phi).into_vec();
        let energy = dot(&phi, &lambda);
        let mut g = vec![0.0; params.len()];
        for k in (0..params.len()).rev() {
            g[k] = 2.0 * self.tau_element(k, &lambda, &phi);
            self.rotate(k, -params[k], &mut phi);
            self.rotate(k, -params[k], &mut lambda);
        }
        Ok((energy, g))
    }

    /// `∂E/∂θ_μ = 2 ∫₀¹ ⟨e^{−sA} Hψ| τ_μ |e^{(1−s)A} 0⟩ ds` by Gauss–Legendre.
    fn exponential_gradient(&self, params: &[f64], hmat: &SectorOperator) -> Result<(f64, Vec<f64>)> {
        let a = self.summed_generator(params)?;
        let mut hf = vec![0.0; self.dim];
        hf[self.hf_index] = 1.0;
        let psi = taylor_exp_action(&a, &hf, 1.0);
        let hpsi = hmat.apply(&psi).into_vec();
        let energy = dot(&psi, &hpsi);
        let mut g = vec![0.0; params.len()];
        if params.iter().all(|&p| p == 0.0) {
            for (k, gk) in g.iter_mut().enumerate() {
                *gk = 2.0 * self.tau_element(k, &hpsi, &hf);
            }
            return Ok((energy, g));
        }

        let nodes = quadrature_nodes(spectral_norm(&a))?;
        // nodes ascending in s; walk u = e^{−sA}Hψ forward from s = 0 and
        // w = e^{(1−s)A}|0⟩ backward from s = 1
        let mut w_at: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
        let mut w = hf.clone();
        let mut t_prev = 0.0;
        for &(s, _) in nodes.iter().rev() {
            w = taylor_exp_action(&a, &w, (1.0 - s) - t_prev);
            t_prev = 1.0 - s;
            w_at.push(w.clone());
        }
        w_at.reverse();
        let mut u = hpsi;
        let mut s_prev = 0.0;
        for (&(s, weight), w) in nodes.iter().zip(&w_at) {
            u = taylor_exp_action(&a, &u, -(s - s_prev));
            s_prev = s;
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += 2.0 * weight * self.tau_element(k, &u, w);
            }
        }
        Ok((energy, g))
    }
}

/// Largest singular value of an anti-Hermitian `a`, from power iteration on
/// `−a²`, padded by 10%.
fn spectral_norm(a: &SectorOperator) -> f64 {
    let n = a.dim();
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 + (k % 7) as f64 * 0.1).collect();
    let mut rho = 0.0;
    for _ in 0..20 {
        let w = a.apply(&v);
        let w2 = a.apply(&w);
        let norm = dot(&w2, &w2).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        rho = (norm / dot(&v, &v).sqrt()).sqrt();
        v = w2.iter().map(|x| -x / norm).collect();
    }
    1.1 * rho
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, sized to the generator norm.
fn quadrature_nodes(norm: f64) -> Result<Vec<(f64, f64)>> {
    let degree = (6.0 + 3.0 * norm).ceil().min(60.0) as usize;
    let rule = GaussLegendre::new(degree).map_err(|e| Error::Invalid(format!("quadrature rule: {e}")))?;
    let mut nodes: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::{enumerate_sector, excitation_matrix};
    use approx::assert_abs_diff_eq;

    #[test]
    fn generator_counts() {
        assert_eq!(generators_for(4, 2, AnsatzKind::Doubles, false).param_count(), 1);
        assert_eq!(generators_for(10, 4, AnsatzKind::PairedDoubles, false).param_count(), 6);
        // 2 occupied / 2 virtual spatial: αα 1, ββ 1, αβ 4 × 4
        let g = generators_for(8, 4, AnsatzKind::Doubles, true);
        assert_eq!(g.param_count(), 18);
        assert_eq!(g.generators[0], Excitation::double(2, 3, 6, 7));
        assert_eq!(g.generators[16], Excitation::double(1, 3, 5, 7));
        assert_eq!(g.generators[17], Excitation::double(0, 2, 4, 6));
        let gs = generators_for(8, 4, AnsatzKind::SinglesDoubles, true);
        assert_eq!(gs.param_count(), 18 + 8);
        assert!(gs.generators[18..].iter().all(|e| e.rank() == 1));
    }

    #[test]
    fn no_repeated_indices_or_duplicates() {
        let g = generators_for(12, 6, AnsatzKind::SinglesDoubles, false);
        let mut seen = std::collections::HashSet::new();
        for e in &g.generators {
            let mut all: Vec<usize> = e.creators.iter().chain(&e.annihilators).copied().collect();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), 2 * e.rank());
            assert!(seen.insert(e.clone()));
        }
    }

    #[test]
    fn paired_generators_are_pair_strings() {
        let g = generators_for(10, 4, AnsatzKind::PairedDoubles, false);
        for e in &g.generators {
            let h = e.holes();
            assert_eq!(h[1], h[0] + 1);
            assert_eq!(e.creators[1], e.creators[0] + 1);
            assert_eq!(h[0] % 2, 0);
        }
    }

    #[test]
    fn t2_mapping() {
        let g = generators_for(8, 4, AnsatzKind::Doubles, false);
        let zero = params_to_t2(&g, &vec![0.0; g.param_count()]).unwrap();
        assert!(zero.t2.iter().all(|&x| x == 0.0));
        let mut p = vec![0.0; g.param_count()];
        let k = g.generators.iter().position(|e| *e == Excitation::double(0, 2, 4, 6)).unwrap();
        p[k] = 0.1;
        let amps = params_to_t2(&g, &p).unwrap();
        // (0, 2 -> 4, 6) in block-relative virtual indices (0, 2)
        assert_eq!(amps.t2[[0, 2, 0, 2]], 0.1);
        assert_eq!(amps.t2[[2, 0, 0, 2]], -0.1);
        assert_eq!(params_from_amplitudes(&g, &amps), p.iter().map(|x| -x).collect::<Vec<_>>());
        let s = generators_for(8, 4, AnsatzKind::SinglesDoubles, false);
        assert!(params_to_t2(&s, &vec![0.0; s.param_count()]).is_err());

        let pg = generators_for(8, 4, AnsatzKind::PairedDoubles, false);
        let pa = params_to_t2(&pg, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        for ((i, j, a, b), &x) in pa.t2.indexed_iter() {
            if x != 0.0 {
                assert!(i / 2 == j / 2 && a / 2 == b / 2);
            }
        }
    }

    #[test]
    fn amplitude_parameters_agree_to_first_order() {
        let path = format!("{}/../../fixtures/h4_chain_1.0.fcidump", env!("CARGO_MANIFEST_DIR"));
        let h = crate::hamiltonian::to_spin_orbital(&crate::fcidump::SpatialIntegrals::from_file(&path).unwrap()).unwrap();
        let sector = crate::sector::sector_for(&h).unwrap();
        let (mut amps, _) = crate::hamiltonian::mp2(&h).unwrap();
        amps.t1[[0, 2]] = 0.03;
        let eps = 1e-4;
        let tket = amps.scaled(eps).to_operator(&sector).unwrap().apply(&sector.hf_vector());
        for trot in [false, true] {
            let c = CompiledAnsatz::new(build_generators(&h, AnsatzKind::SinglesDoubles, trot), &sector).unwrap();
            let p: Vec<f64> = params_from_amplitudes(&c.gens, &amps).iter().map(|x| x * eps).collect();
            let psi = c.prepare_state(&p).unwrap();
            for (k, (x, t)) in psi.iter().zip(tket.iter()).enumerate() {
                let hf = if k == sector.hf_index { 1.0 } else { 0.0 };
                assert!((x - hf - t).abs() < 1e-6, "component {k}: {x} vs {}", hf + t);
            }
        }
    }

    #[test]
    fn zero_params_give_hf() {
        let sector = enumerate_sector(8, 2, 2).unwrap();
        for trot in [false, true] {
            let c = CompiledAnsatz::new(generators_for(8, 4, AnsatzKind::SinglesDoubles, trot), &sector).unwrap();
            let v = c.prepare_state(&vec![0.0; c.param_count()]).unwrap();
            assert_eq!(v, sector.hf_vector());
        }
    }

    #[test]
    fn closed_form_factor_matches_generator_matrix() {
        let sector = enumerate_sector(4, 1, 1).unwrap();
        let c = CompiledAnsatz::new(generators_for(4, 2, AnsatzKind::Doubles, true), &sector).unwrap();
        let tau = c.generator_matrix(0);
        let e = excitation_matrix(&sector, &[2, 3], &[1, 0]);
        assert_eq!(tau.to_dense(), e.add_scaled(&e.transpose(), -1.0).unwrap().to_dense());
        let theta = 0.37;
        let v = c.prepare_state(&[theta]).unwrap();
        let w = taylor_exp_action(&tau, &sector.hf_vector(), theta);
        for (x, y) in v.iter().zip(&w) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let sector = enumerate_sector(4, 1, 1).unwrap();
        let c = CompiledAnsatz::new(generators_for(4, 2, AnsatzKind::Doubles, false), &sector).unwrap();
        assert!(c.prepare_state(&[0.1, 0.2]).is_err());
    }
}
