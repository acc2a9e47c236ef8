//! Cluster amplitudes over occupied/virtual spin orbitals and their plain-text
//! interchange format.
//!
//! Indices inside [`Amplitudes`] are block-relative: `t1[[i, a]]` and
//! `t2[[i, j, a, b]]` with `i, j < n_occ` and `a, b < n_virt`; virtual `a`
//! is spin orbital `n_occ + a`. The text format uses absolute 0-based
//! spin-orbital indices, one unique `i<j, a<b` entry per line:
//!
//! ```text
//! # i j a b value
//! 0 1 4 5 -0.0612...
//! ```

use std::fmt::Write as _;

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};
use crate::sector::{excitation_couplings, DeterminantSector, SectorOperator, Symmetry};

const WRITE_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Amplitudes {
    pub n_occ: usize,
    pub n_virt: usize,
    pub t1: Array2<f64>,
    pub t2: Array4<f64>,
}

impl Amplitudes {
    pub fn zeros(n_occ: usize, n_virt: usize) -> Self {
        Self {
            n_occ,
            n_virt,
            t1: Array2::zeros((n_occ, n_virt)),
            t2: Array4::zeros((n_occ, n_occ, n_virt, n_virt)),
        }
    }

    /// Writes `value` at `(i, j, a, b)` and its three antisymmetric images.
    pub fn set_t2(&mut self, i: usize, j: usize, a: usize, b: usize, value: f64) {
        self.t2[[i, j, a, b]] = value;
        self.t2[[j, i, a, b]] = -value;
        self.t2[[i, j, b, a]] = -value;
        self.t2[[j, i, b, a]] = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_occ: self.n_occ,
            n_virt: self.n_virt,
            t1: &self.t1 * factor,
            t2: &self.t2 * factor,
        }
    }

    /// `T1 + T2` as a sector matrix, `Σ t_i^a a†_a a_i + Σ_{i<j,a<b} t_ij^ab a†_a a†_b a_j a_i`.
    pub fn to_operator(&self, sector: &DeterminantSector) -> Result<SectorOperator> {
        let (o, v) = (self.n_occ, self.n_virt);
        if sector.n_occ() != o || sector.n_so != o + v {
            return Err(Error::Dimension(format!("{o}+{v} amplitude orbitals for a sector over {} spin orbitals", sector.n_so)));
        }
        let mut t = Vec::new();
        let mut push = |amp: f64, creators: &[usize], annihilators: &[usize]| {
            if amp != 0.0 {
                for (col, row, sign) in excitation_couplings(sector, creators, annihilators) {
                    t.push((row, col, amp * sign));
                }
            }
        };
        for i in 0..o {
            for a in 0..v {
                push(self.t1[[i, a]], &[o + a], &[i]);
            }
        }
        for i in 0..o {
            for j in i + 1..o {
                for a in 0..v {
                    for b in a + 1..v {
                        push(self.t2[[i, j, a, b]], &[o + a, o + b], &[i, j]);
                    }
                }
            }
        }
        SectorOperator::from_triplets(sector.dim(), t, Symmetry::General)
    }

    /// Largest violation of `t2` antisymmetry or S_z conservation.
    pub fn symmetry_violation(&self) -> f64 {
        let (o, v) = (self.n_occ, self.n_virt);
        let mut worst: f64 = 0.0;
        for i in 0..o {
            for j in 0..o {
                for a in 0..v {
                    for b in 0..v {
                        let t = self.t2[[i, j, a, b]];
                        worst = worst
                            .max((t + self.t2[[j, i, a, b]]).abs())
                            .max((t + self.t2[[i, j, b, a]]).abs());
                        let spin_in = i % 2 + j % 2;
                        let spin_out = (o + a) % 2 + (o + b) % 2;
                        if spin_in != spin_out {
                            worst = worst.max(t.abs());
                        }
                    }
                }
            }
        }
        for i in 0..o {
            for a in 0..v {
                if i % 2 != (o + a) % 2 {
                    worst = worst.max(self.t1[[i, a]].abs());
                }
            }
        }
        worst
    }

    /// Serializes the unique `t2` entries as `i j a b value` lines.
    pub fn to_text(&self) -> String {
        let (o, v) = (self.n_occ, self.n_virt);
        let mut out = String::from("# i j a b value\n");
        for i in 0..o {
            for j in i + 1..o {
                for a in 0..v {
                    for b in a + 1..v {
                        let t = self.t2[[i, j, a, b]];
                        if t.abs() > WRITE_THRESHOLD {
                            let _ = writeln!(out, "{} {} {} {} {:.17e}", i, j, o + a, o + b, t);
                        }
                    }
                }
            }
        }
        out
    }

    /// Reads the `i j a b value` table back, replicating antisymmetric images.
    pub fn from_text(text: &str, n_occ: usize, n_so: usize) -> Result<Self> {
        if n_occ > n_so {
            return Err(Error::Invalid(format!("{n_occ} occupied of {n_so} spin orbitals")));
        }
        let mut amps = Self::zeros(n_occ, n_so - n_occ);
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() != 5 {
                return Err(Error::Parse { line, msg: "expected 'i j a b value'".into() });
            }
            let mut idx = [0usize; 4];
            for (slot, tok) in idx.iter_mut().zip(&toks[..4]) {
                *slot = tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad index {tok:?}") })?;
            }
            let value: f64 = toks[4]
                .parse()
                .map_err(|_| Error::Parse { line, msg: format!("bad value {:?}", toks[4]) })?;
            let [i, j, a, b] = idx;
            if i >= n_occ || j >= n_occ || a < n_occ || b < n_occ || a >= n_so || b >= n_so || i == j || a == b {
                return Err(Error::Parse { line, msg: format!("indices {i} {j} {a} {b} are not an occupied pair and a virtual pair") });
            }
            amps.set_t2(i, j, a - n_occ, b - n_occ, value);
        }
        Ok(amps)
    }
}

/// Random S_z-conserving antisymmetric doubles with entries in `±scale`.
#[cfg(test)]
pub(crate) fn random_t2(n_occ: usize, n_virt: usize, scale: f64, rng: &mut impl rand::Rng) -> Amplitudes {
    let mut amps = Amplitudes::zeros(n_occ, n_virt);
    for i in 0..n_occ {
        for j in i + 1..n_occ {
            for a in 0..n_virt {
                for b in a + 1..n_virt {
                    if i % 2 + j % 2 == (n_occ + a) % 2 + (n_occ + b) % 2 {
                        amps.set_t2(i, j, a, b, scale * rng.random_range(-1.0..1.0));
                    }
                }
            }
        }
    }
    amps
}
