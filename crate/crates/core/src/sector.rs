//! Exact determinant-basis representation of states and second-quantized
//! operators at fixed `(N_α, N_β)`.
//!
//! A determinant is a bitmask over spin orbitals (bit `p` set when `p` is
//! occupied) and stands for `a†_{p1} a†_{p2} … |vac⟩` with `p1 < p2 < …`.
//! Acting with `a_p` or `a†_p` therefore picks up `(−1)^{#occupied below p}`.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinOrbitalHamiltonian;

pub type Det = u64;

const SYMMETRY_TOL: f64 = 1e-12;
const TAYLOR_TOL: f64 = 1e-15;
const TAYLOR_MAX_TERMS: usize = 200;

#[inline]
fn parity_below(det: Det, p: usize) -> f64 {
    if (det & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies `a†_{c1} a†_{c2} … a_{a_k} … a_{a1}` to `det`, i.e. the
/// annihilators act first, in the listed order, then the creators from last
/// to first. Returns the resulting determinant and its sign, or `None` when
/// the string annihilates the state.
pub fn apply_string(det: Det, creators: &[usize], annihilators: &[usize]) -> Option<(Det, f64)> {
    let mut d = det;
    let mut sign = 1.0;
    for &p in annihilators {
        let bit = 1u64 << p;
        if d & bit == 0 {
            return None;
        }
        sign *= parity_below(d, p);
        d &= !bit;
    }
    for &p in creators.iter().rev() {
        let bit = 1u64 << p;
        if d & bit != 0 {
            return None;
        }
        sign *= parity_below(d, p);
        d |= bit;
    }
    Some((d, sign))
}

/// Occupied spin orbitals of `det` in ascending order.
pub fn occupied(det: Det, n_so: usize) -> Vec<usize> {
    (0..n_so).filter(|&p| det & (1u64 << p) != 0).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Ordered basis of determinants with fixed α and β electron counts.
#[derive(Clone, Debug)]
pub struct DeterminantSector {
    pub n_so: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    dets: Vec<Det>,
    pub hf_index: usize,
}

impl DeterminantSector {
    pub fn dim(&self) -> usize {
        self.dets.len()
    }

    pub fn dets(&self) -> &[Det] {
        &self.dets
    }

    pub fn det(&self, index: usize) -> Det {
        self.dets[index]
    }

    pub fn index_of(&self, det: Det) -> Option<usize> {
        self.dets.binary_search(&det).ok()
    }

    pub fn hf_det(&self) -> Det {
        self.dets[self.hf_index]
    }

    pub fn n_occ(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    /// Unit vector on the Aufbau determinant.
    pub fn hf_vector(&self) -> SectorVector {
        SectorVector::basis(self.dim(), self.hf_index)
    }
}

/// Enumerates every determinant with `n_alpha` even and `n_beta` odd bits set.
pub fn enumerate_sector(n_so: usize, n_alpha: usize, n_beta: usize) -> Result<DeterminantSector> {
    if n_so % 2 != 0 || n_so > 64 {
        return Err(Error::Invalid(format!("{n_so} spin orbitals: need an even count not above 64")));
    }
    let n_orb = n_so / 2;
    if n_alpha > n_orb || n_beta > n_orb {
        return Err(Error::Invalid(format!(
            "({n_alpha}, {n_beta}) electrons do not fit in {n_orb} spatial orbitals"
        )));
    }
    let strings = |count: usize, offset: usize| -> Vec<Det> {
        (0u64..(1u64 << n_orb))
            .filter(|m| m.count_ones() as usize == count)
            .map(|m| (0..n_orb).filter(|k| m & (1 << k) != 0).fold(0u64, |acc, k| acc | (1u64 << (2 * k + offset))))
            .collect()
    };
    let alpha = strings(n_alpha, 0);
    let beta = strings(n_beta, 1);
    let mut dets: Vec<Det> = Vec::with_capacity(alpha.len() * beta.len());
    for &a in &alpha {
        for &b in &beta {
            dets.push(a | b);
        }
    }
    dets.sort_unstable();
    debug_assert_eq!(dets.len(), binomial(n_orb, n_alpha) * binomial(n_orb, n_beta));
    let hf = (0..n_alpha).fold(0u64, |acc, k| acc | (1 << (2 * k))) | (0..n_beta).fold(0u64, |acc, k| acc | (1 << (2 * k + 1)));
    let hf_index = dets.binary_search(&hf).expect("Aufbau determinant is in its own sector");
    Ok(DeterminantSector { n_so, n_alpha, n_beta, dets, hf_index })
}

/// Sector for a closed-shell Hamiltonian (`N_α = N_β = n_occ / 2`).
pub fn sector_for(h: &SpinOrbitalHamiltonian) -> Result<DeterminantSector> {
    enumerate_sector(h.n_so, h.n_occ / 2, h.n_occ / 2)
}

/// Dense coefficient vector over a sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorVector(Vec<f64>);

impl SectorVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self(v)
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for SectorVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SectorVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    AntiHermitian,
    General,
}

/// Sparse real operator over a sector basis (CSR storage).
#[derive(Clone, Debug)]
pub struct SectorOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl SectorOperator {
    /// Assembles from `(row, col, value)` triplets, summing duplicates, and
    /// verifies the claimed symmetry to `1e-12`.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>, symmetry: Symmetry) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::Dimension(format!("entry ({r}, {c}) outside a {dim}-dimensional sector")));
        }
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry pushed") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let op = Self { dim, indptr, indices, values, symmetry: Symmetry::General };
        op.with_symmetry(symmetry)
    }

    /// Re-labels the symmetry after checking it holds.
    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Result<Self> {
        let residual = match symmetry {
            Symmetry::General => 0.0,
            Symmetry::Hermitian => self.symmetry_residual(1.0),
            Symmetry::AntiHermitian => self.symmetry_residual(-1.0),
        };
        if residual > SYMMETRY_TOL {
            return Err(Error::Contract(format!("operator is not {symmetry:?}: residual {residual:.3e}")));
        }
        self.symmetry = symmetry;
        Ok(self)
    }

    /// `max |A − sign·Aᵀ|`.
    pub fn symmetry_residual(&self, sign: f64) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - sign * t.get(r, c)).abs());
            }
            for (c, v) in t.row(r) {
                worst = worst.max((self.get(r, c) - sign * v).abs());
            }
        }
        worst
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.dim) {
            let span = self.indptr[r]..self.indptr[r + 1];
            let mut acc = 0.0;
            for (c, v) in self.indices[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[*c];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> SectorVector {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        SectorVector(y)
    }

    /// `⟨x|A|x⟩`
    pub fn expectation(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dim).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t: Vec<(usize, usize, f64)> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let sym = self.symmetry;
        Self::from_triplets(self.dim, t, Symmetry::General)
            .map(|mut op| {
                op.symmetry = sym;
                op
            })
            .expect("transpose of a valid operator")
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `self + factor·other`; the result is labelled general.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, factor * v)));
        Self::from_triplets(self.dim, t, Symmetry::General)
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        let mut t = Vec::new();
        let mut acc = vec![0.0; self.dim];
        let mut seen = vec![false; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                if acc[c] != 0.0 {
                    t.push((r, c, acc[c]));
                }
                acc[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.dim, t, Symmetry::General)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for (c, v) in self.row(r) {
                out[r * n + c] = v;
            }
        }
        out
    }

    /// `max_rc |A_rc|` summed per column, i.e. the induced 1-norm.
    pub fn norm_one(&self) -> f64 {
        let mut cols = vec![0.0; self.dim];
        for (c, v) in self.indices.iter().zip(&self.values) {
            cols[*c] += v.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal_matrix(&vec![1.0; dim])
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let t = diag.iter().enumerate().map(|(k, &v)| (k, k, v)).collect();
        Self::from_triplets(diag.len(), t, Symmetry::Hermitian).expect("diagonal matrices are symmetric")
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of entry `(r, c)` in the value array, if stored.
    pub(crate) fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].binary_search(&c).ok().map(|k| span.start + k)
    }
}

/// Matrix of `a†_{c1} … a†_{cn} a_{an} … a_{a1}` over the sector.
pub fn excitation_matrix(sector: &DeterminantSector, creators: &[usize], annihilators: &[usize]) -> SectorOperator {
    let t = excitation_couplings(sector, creators, annihilators)
        .into_iter()
        .map(|(col, row, sign)| (row, col, sign))
        .collect();
    SectorOperator::from_triplets(sector.dim(), t, Symmetry::General).expect("indices come from the sector")
}

/// `(source column, target row, sign)` for every determinant the string
/// maps inside the sector.
pub fn excitation_couplings(sector: &DeterminantSector, creators: &[usize], annihilators: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let need: Det = annihilators.iter().fold(0, |m, &p| m | (1 << p));
    for (col, &det) in sector.dets.iter().enumerate() {
        if det & need != need {
            continue;
        }
        if let Some((target, sign)) = apply_string(det, creators, annihilators) {
            if let Some(row) = sector.index_of(target) {
                out.push((col, row, sign));
            }
        }
    }
    out
}

fn check_hamiltonian_fits(sector: &DeterminantSector, h: &SpinOrbitalHamiltonian) -> Result<()> {
    if sector.n_so != h.n_so || sector.n_occ() != h.n_occ {
        return Err(Error::Dimension(format!(
            "sector has {} spin orbitals / {} electrons, Hamiltonian {} / {}",
            sector.n_so,
            sector.n_occ(),
            h.n_so,
            h.n_occ
        )));
    }
    Ok(())
}

/// Diagonal matrix element `⟨D|H|D⟩` by Slater–Condon rules.
pub fn diagonal_element(h: &SpinOrbitalHamiltonian, occ: &[usize]) -> f64 {
    let mut e = h.e_core;
    for &p in occ {
        e += h.h[[p, p]];
        for &q in occ {
            e += 0.5 * h.v_anti[[p, q, p, q]];
        }
    }
    e
}

/// Hamiltonian over the sector assembled with Slater–Condon rules.
pub fn hamiltonian_matrix(sector: &DeterminantSector, h: &SpinOrbitalHamiltonian) -> Result<SectorOperator> {
    check_hamiltonian_fits(sector, h)?;
    let n_so = sector.n_so;
    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    for (col, &det) in sector.dets.iter().enumerate() {
        let occ = occupied(det, n_so);
        let virt: Vec<usize> = (0..n_so).filter(|&p| det & (1 << p) == 0).collect();
        t.push((col, col, diagonal_element(h, &occ)));

        for &p in &occ {
            for &q in virt.iter().filter(|&&q| q % 2 == p % 2) {
                let mut v = h.h[[q, p]];
                for &k in &occ {
                    v += h.v_anti[[q, k, p, k]];
                }
                if v != 0.0 {
                    let (target, sign) = apply_string(det, &[q], &[p]).expect("p occupied, q empty");
                    let row = sector.index_of(target).expect("spin-conserving single stays in sector");
                    t.push((row, col, sign * v));
                }
            }
        }

        for (x, &p) in occ.iter().enumerate() {
            for &r in &occ[x + 1..] {
                for (y, &q) in virt.iter().enumerate() {
                    for &s in &virt[y + 1..] {
                        if (p % 2 + r % 2) != (q % 2 + s % 2) {
                            continue;
                        }
                        let v = h.v_anti[[q, s, p, r]];
                        if v == 0.0 {
                            continue;
                        }
                        let (target, sign) = apply_string(det, &[q, s], &[p, r]).expect("valid double");
                        if let Some(row) = sector.index_of(target) {
                            t.push((row, col, sign * v));
                        }
                    }
                }
            }
        }
    }
    SectorOperator::from_triplets(sector.dim(), t, Symmetry::Hermitian)
}

/// Hamiltonian over the sector summed from operator strings
/// `e_core + Σ h_pq p†q + Σ_{p<q, r<s} ⟨pq||rs⟩ p†q†sr`. Independent of the
/// Slater–Condon path; intended for small systems.
pub fn hamiltonian_matrix_from_strings(sector: &DeterminantSector, h: &SpinOrbitalHamiltonian) -> Result<SectorOperator> {
    check_hamiltonian_fits(sector, h)?;
    let n = h.n_so;
    let mut t: Vec<(usize, usize, f64)> = (0..sector.dim()).map(|k| (k, k, h.e_core)).collect();
    for p in 0..n {
        for q in 0..n {
            let v = h.h[[p, q]];
            if v == 0.0 {
                continue;
            }
            for (col, row, sign) in excitation_couplings(sector, &[p], &[q]) {
                t.push((row, col, v * sign));
            }
        }
    }
    for p in 0..n {
        for q in p + 1..n {
            for r in 0..n {
                for s in r + 1..n {
                    let v = h.v_anti[[p, q, r, s]];
                    if v == 0.0 {
                        continue;
                    }
                    // p†q†sr == a†_p a†_q a_s a_r: annihilate r first, then s.
                    for (col, row, sign) in excitation_couplings(sector, &[p, q], &[r, s]) {
                        t.push((row, col, v * sign));
                    }
                }
            }
        }
    }
    SectorOperator::from_triplets(sector.dim(), t, Symmetry::Hermitian)
}

/// Eigenvalue of `f_N = Σ_p f_pp {p†p}` on each determinant:
/// `Σ_{a∈D virt} f_aa − Σ_{i∉D occ} f_ii`.
pub fn fock_diagonal(sector: &DeterminantSector, h: &SpinOrbitalHamiltonian) -> Vec<f64> {
    let eps = h.orbital_energies();
    let hf = sector.hf_det();
    sector
        .dets
        .iter()
        .map(|&det| {
            let created = det & !hf;
            let removed = hf & !det;
            occupied(created, sector.n_so).iter().map(|&a| eps[a]).sum::<f64>()
                - occupied(removed, sector.n_so).iter().map(|&i| eps[i]).sum::<f64>()
        })
        .collect()
}

/// `W_N = H − e_hf − f_N` as a sector matrix.
pub fn perturbation_matrix(h_matrix: &SectorOperator, sector: &DeterminantSector, h: &SpinOrbitalHamiltonian) -> Result<SectorOperator> {
    let shift: Vec<f64> = fock_diagonal(sector, h).into_iter().map(|f| -(f + h.e_hf)).collect();
    Ok(h_matrix
        .add_scaled(&SectorOperator::diagonal_matrix(&shift), 1.0)?
        .with_symmetry(Symmetry::Hermitian)?)
}

/// Total spin `S²` over the sector, `S_−S_+ + S_z(S_z + 1)`.
pub fn spin_squared_matrix(sector: &DeterminantSector) -> SectorOperator {
    let n_orb = sector.n_so / 2;
    let sz = 0.5 * (sector.n_alpha as f64 - sector.n_beta as f64);
    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    for (col, &det) in sector.dets.iter().enumerate() {
        t.push((col, col, sz * (sz + 1.0)));
        // S_+ = Σ_P a†_{Pα} a_{Pβ}, then S_− = Σ_Q a†_{Qβ} a_{Qα}
        for p in 0..n_orb {
            let Some((mid, s1)) = apply_string(det, &[2 * p], &[2 * p + 1]) else { continue };
            for q in 0..n_orb {
                if let Some((target, s2)) = apply_string(mid, &[2 * q + 1], &[2 * q]) {
                    let row = sector.index_of(target).expect("S−S+ conserves the sector");
                    t.push((row, col, s1 * s2));
                }
            }
        }
    }
    SectorOperator::from_triplets(sector.dim(), t, Symmetry::Hermitian).expect("S² is symmetric")
}

/// `e^{gen} v` for anti-Hermitian `gen` by scaled Taylor summation.
pub fn apply_exponential(gen: &SectorOperator, v: &[f64]) -> Result<SectorVector> {
    if gen.symmetry() != Symmetry::AntiHermitian {
        return Err(Error::Contract(format!("exponential generator must be anti-Hermitian, got {:?}", gen.symmetry())));
    }
    if v.len() != gen.dim() {
        return Err(Error::Dimension(format!("vector {} vs operator {}", v.len(), gen.dim())));
    }
    Ok(SectorVector(taylor_exp_action(gen, v, 1.0)))
}

/// `e^{t·A} v` by Taylor series in `ceil(|t|·‖A‖₁ / 4)` steps; used for both
/// the unitary path and nilpotent (cluster-operator) exponentials.
pub(crate) fn taylor_exp_action(a: &SectorOperator, v: &[f64], t: f64) -> Vec<f64> {
    let norm = a.norm_one() * t.abs();
    let steps = (norm / 4.0).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut out = v.to_vec();
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        for k in 1..=TAYLOR_MAX_TERMS {
            a.matvec_into(&term, &mut next);
            let scale = h / k as f64;
            let mut term_norm = 0.0;
            for ((o, t), n) in out.iter_mut().zip(term.iter_mut()).zip(&next) {
                *t = n * scale;
                *o += *t;
                term_norm += *t * *t;
            }
            if term_norm.sqrt() < TAYLOR_TOL {
                break;
            }
        }
    }
    out
}
