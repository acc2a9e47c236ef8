//! FCIDUMP reading/writing and frozen-core folding.
//!
//! Integrals are held over spatial orbitals in chemists' notation `(pq|rs)`.
//! Index dispatch for body lines `value i j k l` (1-based):
//!
//! | pattern            | meaning                    |
//! |--------------------|----------------------------|
//! | `i j k l` all > 0  | two-electron `(ij|kl)`     |
//! | `i j 0 0`          | one-electron `h_ij`        |
//! | `i 0 0 0`          | orbital energy of `i`      |
//! | `0 0 0 0`          | scalar core energy         |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};

const DUPLICATE_TOL: f64 = 1e-10;
const WRITE_THRESHOLD: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// One- and two-electron integrals over spatial molecular orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialIntegrals {
    pub n_orb: usize,
    pub n_electrons: usize,
    pub ms2: i64,
    /// Nuclear repulsion plus any folded core energy (Hartree).
    pub e_core: f64,
    pub h: Array2<f64>,
    /// `(pq|rs)`, chemists' convention, full 8-fold replicated tensor.
    pub g: Array4<f64>,
    pub orbital_energies: Option<Vec<f64>>,
    /// Point-group labels as read from `ORBSYM`; carried through but unused.
    pub orbsym: Option<Vec<i64>>,
}

impl SpatialIntegrals {
    /// All-zero integrals for `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_electrons: usize) -> Self {
        Self {
            n_orb,
            n_electrons,
            ms2: 0,
            e_core: 0.0,
            h: Array2::zeros((n_orb, n_orb)),
            g: Array4::zeros((n_orb, n_orb, n_orb, n_orb)),
            orbital_energies: None,
            orbsym: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_fcidump(&text)
    }

    /// Sets `(pq|rs)` and all of its real-orbital permutations.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in eri_permutations(p, q, r, s) {
            self.g[[a, b, c, d]] = value;
        }
    }

    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        self.h[[p, q]] = value;
        self.h[[q, p]] = value;
    }

    /// Checks the symmetry and electron-count invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orb;
        if self.n_electrons == 0 || self.n_electrons > 2 * n {
            return Err(Error::Invalid(format!(
                "{} electrons cannot occupy {} spatial orbitals",
                self.n_electrons, n
            )));
        }
        if self.h.dim() != (n, n) || self.g.dim() != (n, n, n, n) {
            return Err(Error::Dimension("integral arrays do not match n_orb".into()));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.h[[p, q]] - self.h[[q, p]]).abs() > SYMMETRY_TOL {
                    return Err(Error::Invalid(format!("h not symmetric at ({p},{q})")));
                }
            }
        }
        for ((p, q, r, s), &v) in self.g.indexed_iter() {
            for (a, b, c, d) in eri_permutations(p, q, r, s) {
                if (self.g[[a, b, c, d]] - v).abs() > SYMMETRY_TOL {
                    return Err(Error::Invalid(format!(
                        "(pq|rs) lacks 8-fold symmetry at ({p}{q}|{r}{s})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn eri_permutations(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

fn canonical_pair(p: usize, q: usize) -> (usize, usize) {
    if p >= q {
        (p, q)
    } else {
        (q, p)
    }
}

fn canonical_quad(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let a = canonical_pair(p, q);
    let b = canonical_pair(r, s);
    if a >= b {
        (a.0, a.1, b.0, b.1)
    } else {
        (b.0, b.1, a.0, a.1)
    }
}

#[derive(Debug, Default)]
struct Namelist {
    entries: HashMap<String, Vec<String>>,
}

impl Namelist {
    fn parse(raw: &str, line: usize) -> Result<Self> {
        // Normalize `KEY = v` into `KEY=v` so tokens split cleanly.
        let mut text = raw.to_string();
        while text.contains(" =") || text.contains("= ") {
            text = text.replace(" =", "=").replace("= ", "=");
        }
        let mut entries: HashMap<String, Vec<String>> = HashMap::new();
        let mut current: Option<String> = None;
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            match tok.split_once('=') {
                Some((key, rest)) => {
                    let key = key.trim().to_ascii_uppercase();
                    if key.is_empty() {
                        return Err(Error::Parse { line, msg: format!("dangling '=' in namelist near {tok:?}") });
                    }
                    let values = entries.entry(key.clone()).or_default();
                    if !rest.is_empty() {
                        values.push(rest.to_string());
                    }
                    current = Some(key);
                }
                None => match &current {
                    Some(key) => entries.get_mut(key).expect("key inserted").push(tok.to_string()),
                    None => {
                        return Err(Error::Parse { line, msg: format!("value {tok:?} before any namelist key") })
                    }
                },
            }
        }
        Ok(Self { entries })
    }

    fn int(&self, key: &str, line: usize) -> Result<Option<i64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => v[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| Error::Parse { line, msg: format!("{key} is not an integer: {:?}", v[0]) }),
            Some(v) => Err(Error::Parse { line, msg: format!("{key} expects one value, got {}", v.len()) }),
        }
    }

    fn int_list(&self, key: &str, line: usize) -> Result<Option<Vec<i64>>> {
        self.entries
            .get(key)
            .map(|v| {
                v.iter()
                    .map(|s| {
                        s.parse::<i64>()
                            .map_err(|_| Error::Parse { line, msg: format!("{key} entry is not an integer: {s:?}") })
                    })
                    .collect()
            })
            .transpose()
    }
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, msg: format!("not a number: {tok:?}") })
}

#[derive(Clone, Copy, Debug, Hash, PartialEq, Eq)]
enum EntryKey {
    Eri(usize, usize, usize, usize),
    OneBody(usize, usize),
    OrbitalEnergy(usize),
    Core,
}

/// Parses FCIDUMP text.
pub fn parse_fcidump(text: &str) -> Result<SpatialIntegrals> {
    let lines: Vec<&str> = text.lines().collect();

    let start = lines
        .iter()
        .position(|l| l.trim_start().to_ascii_uppercase().starts_with("&FCI"))
        .ok_or(Error::Parse { line: 1, msg: "missing &FCI namelist header".into() })?;
    let mut header = String::new();
    let mut body_start = None;
    for (k, raw) in lines.iter().enumerate().skip(start) {
        let upper = raw.to_ascii_uppercase();
        let mut chunk: &str = if k == start {
            let at = upper.find("&FCI").expect("found above");
            &raw[at + 4..]
        } else {
            raw
        };
        let upper_chunk = chunk.to_ascii_uppercase();
        let end = upper_chunk.find("&END").or_else(|| upper_chunk.trim_end().ends_with('/').then(|| upper_chunk.rfind('/').unwrap()));
        if let Some(pos) = end {
            chunk = &chunk[..pos];
            header.push(' ');
            header.push_str(chunk);
            body_start = Some(k + 1);
            break;
        }
        header.push(' ');
        header.push_str(chunk);
    }
    let body_start = body_start.ok_or(Error::Parse { line: start + 1, msg: "namelist is not terminated by &END or /".into() })?;
    let header_line = start + 1;
    let nl = Namelist::parse(&header, header_line)?;

    let norb = nl
        .int("NORB", header_line)?
        .ok_or(Error::Parse { line: header_line, msg: "NORB missing from namelist".into() })?;
    let nelec = nl
        .int("NELEC", header_line)?
        .ok_or(Error::Parse { line: header_line, msg: "NELEC missing from namelist".into() })?;
    let ms2 = nl.int("MS2", header_line)?.unwrap_or(0);
    if norb <= 0 || nelec <= 0 {
        return Err(Error::Parse { line: header_line, msg: format!("NORB={norb}, NELEC={nelec} must be positive") });
    }
    let n = norb as usize;
    let orbsym = nl.int_list("ORBSYM", header_line)?;

    let mut ints = SpatialIntegrals::zeros(n, nelec as usize);
    ints.ms2 = ms2;
    ints.orbsym = orbsym;
    let mut orbital_energies: Option<Vec<f64>> = None;
    let mut seen: HashMap<EntryKey, (f64, usize)> = HashMap::new();

    for (k, raw) in lines.iter().enumerate().skip(body_start) {
        let line = k + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::Parse { line, msg: format!("expected 'value i j k l', got {} fields", toks.len()) });
        }
        let value = parse_value(toks[0], line)?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad index {tok:?}") })?;
            if v < 0 || v > norb {
                return Err(Error::Parse { line, msg: format!("index {v} outside [0, {norb}]") });
            }
            *slot = v as usize;
        }
        let [i, j, kk, l] = idx;
        let key = match (i, j, kk, l) {
            (0, 0, 0, 0) => EntryKey::Core,
            (i, 0, 0, 0) => EntryKey::OrbitalEnergy(i - 1),
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (p, q) = canonical_pair(i - 1, j - 1);
                EntryKey::OneBody(p, q)
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = canonical_quad(i - 1, j - 1, k - 1, l - 1);
                EntryKey::Eri(p, q, r, s)
            }
            _ => return Err(Error::Parse { line, msg: format!("unrecognized index pattern {i} {j} {kk} {l}") }),
        };
        if let Some(&(prev, prev_line)) = seen.get(&key) {
            if (prev - value).abs() > DUPLICATE_TOL {
                return Err(Error::Parse {
                    line,
                    msg: format!("value {value} conflicts with {prev} given on line {prev_line}"),
                });
            }
        }
        seen.insert(key, (value, line));
        match key {
            EntryKey::Core => ints.e_core = value,
            EntryKey::OrbitalEnergy(p) => orbital_energies.get_or_insert_with(|| vec![0.0; n])[p] = value,
            EntryKey::OneBody(p, q) => ints.set_h(p, q, value),
            EntryKey::Eri(p, q, r, s) => ints.set_eri(p, q, r, s, value),
        }
    }
    ints.orbital_energies = orbital_energies;
    ints.validate().map_err(|e| Error::Parse { line: header_line, msg: e.to_string() })?;
    Ok(ints)
}

/// Serializes integrals as FCIDUMP text, emitting one representative per
/// permutation class and dropping entries below `1e-12` in magnitude.
pub fn write_fcidump(ints: &SpatialIntegrals) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, ints.n_electrons, ints.ms2);
    if let Some(sym) = &ints.orbsym {
        let labels: Vec<String> = sym.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "  ORBSYM={},", labels.join(","));
        let _ = writeln!(out, "  ISYM=1,");
    }
    let _ = writeln!(out, " &END");
    let mut emit = |v: f64, i: usize, j: usize, k: usize, l: usize| {
        let _ = writeln!(out, "{v:>26.17e} {i:4} {j:4} {k:4} {l:4}");
    };
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if (r, s) > (p, q) {
                        continue;
                    }
                    let v = ints.g[[p, q, r, s]];
                    if v.abs() > WRITE_THRESHOLD {
                        emit(v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h[[p, q]];
            if v.abs() > WRITE_THRESHOLD {
                emit(v, p + 1, q + 1, 0, 0);
            }
        }
    }
    if let Some(eps) = &ints.orbital_energies {
        for (p, &v) in eps.iter().enumerate() {
            if v.abs() > WRITE_THRESHOLD {
                emit(v, p + 1, 0, 0, 0);
            }
        }
    }
    emit(ints.e_core, 0, 0, 0, 0);
    out
}

/// Folds the first `n_frozen` (doubly occupied) spatial orbitals into an
/// effective one-body operator and scalar shift.
pub fn freeze_core(ints: &SpatialIntegrals, n_frozen: usize) -> Result<SpatialIntegrals> {
    if n_frozen >= ints.n_orb {
        return Err(Error::Invalid(format!(
            "cannot freeze {n_frozen} of {} orbitals",
            ints.n_orb
        )));
    }
    if 2 * n_frozen > ints.n_electrons {
        return Err(Error::Invalid(format!(
            "freezing {n_frozen} orbitals needs {} electrons, have {}",
            2 * n_frozen,
            ints.n_electrons
        )));
    }
    if n_frozen == 0 {
        return Ok(ints.clone());
    }
    let n = ints.n_orb - n_frozen;
    let (h, g) = (&ints.h, &ints.g);

    let mut e_core = ints.e_core;
    for c in 0..n_frozen {
        e_core += 2.0 * h[[c, c]];
        for d in 0..n_frozen {
            e_core += 2.0 * g[[c, c, d, d]] - g[[c, d, d, c]];
        }
    }

    let mut out = SpatialIntegrals::zeros(n, ints.n_electrons - 2 * n_frozen);
    out.ms2 = ints.ms2;
    out.e_core = e_core;
    for p in 0..n {
        for q in 0..n {
            let (pp, qq) = (p + n_frozen, q + n_frozen);
            let mut v = h[[pp, qq]];
            for c in 0..n_frozen {
                v += 2.0 * g[[pp, qq, c, c]] - g[[pp, c, c, qq]];
            }
            out.h[[p, q]] = v;
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    out.g[[p, q, r, s]] = g[[p + n_frozen, q + n_frozen, r + n_frozen, s + n_frozen]];
                }
            }
        }
    }
    out.orbital_energies = ints.orbital_energies.as_ref().map(|e| e[n_frozen..].to_vec());
    out.orbsym = ints.orbsym.as_ref().map(|s| s[n_frozen.min(s.len())..].to_vec());
    Ok(out)
}
