//! End-to-end runs: method dispatch over one geometry, potential energy scans
//! and percent-correlation tables.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! methods = ["UCCD", "UCCD[4S]", "CCSD"]
//! frozen = 2                 # default for every system below
//!
//! [[system]]
//! tag = "CO"
//! fcidump = "../fixtures/co_eq.fcidump"   # relative to this file
//! fci_level = 0              # singlet level used as the FCI reference
//!
//! [vqe]
//! init = "mp2-scaled"
//!
//! [cc]
//! residual_tol = 1e-8
//!
//! [output]
//! csv = "co.csv"
//! summary = "co.json"
//! ```
//!
//! A top-level `fcidump`/`tag` pair is shorthand for a single system.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_generators, params_to_t2, AnsatzKind, CompiledAnsatz};
use crate::cc::{self, similarity_transform_projection, CcConfig, CcLevel};
use crate::error::{Error, Result};
use crate::fci::{fci_with, FciOptions, FciResult, Solver, Target};
use crate::fcidump::{freeze_core, SpatialIntegrals};
use crate::hamiltonian::{denominators, mp2, to_spin_orbital, SpinOrbitalHamiltonian};
use crate::sector::{hamiltonian_matrix, sector_for, DeterminantSector, SectorOperator};
use crate::singles::corrections;
use crate::vqe::{initial_parameters, minimize_from, VqeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseMethod {
    Uccd,
    Tuccd,
    Puccd,
    Tpuccd,
    Uccsd,
    Tuccsd,
    Ccd,
    Ccsd,
    Mp2,
    Fci,
}

impl BaseMethod {
    pub const ALL: [BaseMethod; 10] = [
        BaseMethod::Uccd,
        BaseMethod::Tuccd,
        BaseMethod::Puccd,
        BaseMethod::Tpuccd,
        BaseMethod::Uccsd,
        BaseMethod::Tuccsd,
        BaseMethod::Ccd,
        BaseMethod::Ccsd,
        BaseMethod::Mp2,
        BaseMethod::Fci,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BaseMethod::Uccd => "UCCD",
            BaseMethod::Tuccd => "tUCCD",
            BaseMethod::Puccd => "pUCCD",
            BaseMethod::Tpuccd => "tpUCCD",
            BaseMethod::Uccsd => "UCCSD",
            BaseMethod::Tuccsd => "tUCCSD",
            BaseMethod::Ccd => "CCD",
            BaseMethod::Ccsd => "CCSD",
            BaseMethod::Mp2 => "MP2",
            BaseMethod::Fci => "FCI",
        }
    }

    /// Ansatz kind and Trotter flag for the unitary methods.
    pub fn ansatz(self) -> Option<(AnsatzKind, bool)> {
        match self {
            BaseMethod::Uccd => Some((AnsatzKind::Doubles, false)),
            BaseMethod::Tuccd => Some((AnsatzKind::Doubles, true)),
            BaseMethod::Puccd => Some((AnsatzKind::PairedDoubles, false)),
            BaseMethod::Tpuccd => Some((AnsatzKind::PairedDoubles, true)),
            BaseMethod::Uccsd => Some((AnsatzKind::SinglesDoubles, false)),
            BaseMethod::Tuccsd => Some((AnsatzKind::SinglesDoubles, true)),
            _ => None,
        }
    }

    pub fn is_unitary_doubles(self) -> bool {
        matches!(self.ansatz(), Some((AnsatzKind::Doubles | AnsatzKind::PairedDoubles, _)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Correction {
    S4,
    S6,
}

/// A method label such as `tUCCD[6S]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Method {
    pub base: BaseMethod,
    pub correction: Option<Correction>,
}

impl Method {
    pub fn new(base: BaseMethod, correction: Option<Correction>) -> Result<Self> {
        if correction.is_some() && !base.is_unitary_doubles() {
            return Err(Error::Config(format!("singles corrections apply only to UCC doubles methods, not {}", base.label())));
        }
        Ok(Self { base, correction })
    }

    pub fn plain(base: BaseMethod) -> Self {
        Self { base, correction: None }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base.label())?;
        match self.correction {
            Some(Correction::S4) => f.write_str("[4S]"),
            Some(Correction::S6) => f.write_str("[6S]"),
            None => Ok(()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, correction) = match s.find('[') {
            Some(k) => {
                let suffix = &s[k..];
                let c = match suffix.to_ascii_uppercase().as_str() {
                    "[4S]" => Correction::S4,
                    "[6S]" => Correction::S6,
                    _ => return Err(Error::Config(format!("unknown correction suffix {suffix:?} in {s:?}"))),
                };
                (&s[..k], Some(c))
            }
            None => (s, None),
        };
        let base = BaseMethod::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))?;
        Method::new(base, correction)
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// Singles correction terms in Hartree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub e4s: f64,
    pub e5: f64,
    pub e6: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub e_total: f64,
    pub e_corr: f64,
    pub pct_corr: f64,
    pub correction_breakdown: Option<Breakdown>,
    pub converged: bool,
    pub wall_time: f64,
    pub iterations: usize,
    /// Set when the method failed outright; energies are then NaN.
    pub error: Option<String>,
}

/// `100·(e_method − e_hf)/(e_fci − e_hf)`.
pub fn percent_correlation(e_method: f64, e_hf: f64, e_fci: f64) -> Result<f64> {
    if !(e_fci < e_hf) {
        return Err(Error::Invalid(format!("FCI energy {e_fci} is not below HF {e_hf}; percent correlation undefined")));
    }
    Ok(100.0 * (e_method - e_hf) / (e_fci - e_hf))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub tag: String,
    pub fcidump: PathBuf,
    #[serde(default)]
    pub frozen: Option<usize>,
    /// Index of the singlet FCI level used as reference (0 = lowest singlet).
    #[serde(default)]
    pub fci_level: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fcidump: Option<PathBuf>,
    pub tag: Option<String>,
    pub frozen: usize,
    pub fci_level: usize,
    #[serde(rename = "system")]
    pub systems: Vec<SystemSpec>,
    pub methods: Vec<Method>,
    pub vqe: VqeConfig,
    pub cc: CcConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken from its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.fcidump.as_mut() {
            resolve(p);
        }
        for s in &mut cfg.systems {
            resolve(&mut s.fcidump);
        }
        if let Some(p) = cfg.output.csv.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.output.summary.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    /// Systems in config order with defaults filled in.
    pub fn points(&self) -> Vec<SystemSpec> {
        let single = self.fcidump.as_ref().map(|p| SystemSpec {
            tag: self.tag.clone().unwrap_or_else(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()),
            fcidump: p.clone(),
            frozen: None,
            fci_level: None,
        });
        single
            .into_iter()
            .chain(self.systems.iter().cloned())
            .map(|mut s| {
                s.frozen = Some(s.frozen.unwrap_or(self.frozen));
                s.fci_level = Some(s.fci_level.unwrap_or(self.fci_level));
                s
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.vqe.validate()?;
        self.cc.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if self.points().is_empty() {
            return Err(Error::Config("no FCIDUMP input given".into()));
        }
        Ok(())
    }
}

/// One prepared geometry: Hamiltonian, sector matrix and FCI reference.
pub struct Point {
    pub spec: SystemSpec,
    pub h: SpinOrbitalHamiltonian,
    pub sector: DeterminantSector,
    pub hmat: SectorOperator,
    pub fci: FciResult,
    pub fci_time: f64,
}

impl Point {
    pub fn load(spec: &SystemSpec) -> Result<Self> {
        let ints = SpatialIntegrals::from_file(&spec.fcidump)?;
        Self::from_integrals(spec, &ints)
    }

    pub fn from_integrals(spec: &SystemSpec, ints: &SpatialIntegrals) -> Result<Self> {
        let ints = freeze_core(ints, spec.frozen.unwrap_or(0))?;
        let h = to_spin_orbital(&ints)?;
        let sector = sector_for(&h)?;
        let hmat = hamiltonian_matrix(&sector, &h)?;
        let start = Instant::now();
        let target = Target::SingletLevel(spec.fci_level.unwrap_or(0));
        let fci = fci_with(&sector, &hmat, FciOptions { solver: Solver::Auto, target })?;
        let fci_time = start.elapsed().as_secs_f64();
        info!("{}: dimension {}, E_HF = {:.10}, E_FCI = {:.10}", spec.tag, sector.dim(), h.e_hf, fci.energy);
        Ok(Self { spec: spec.clone(), h, sector, hmat, fci, fci_time })
    }

    pub fn percent(&self, e: f64) -> Result<f64> {
        percent_correlation(e, self.h.e_hf, self.fci.energy)
    }
}

/// Converged parameters per ansatz label, carried between scan points.
pub type WarmStart = BTreeMap<String, Vec<f64>>;

struct VqeOutcome {
    energy: f64,
    params: Vec<f64>,
    converged: bool,
    iterations: usize,
    time: f64,
    breakdown: Option<Breakdown>,
}

fn run_vqe(point: &Point, kind: AnsatzKind, trotterized: bool, cfg: &VqeConfig, warm: &WarmStart) -> Result<VqeOutcome> {
    let start = Instant::now();
    let gens = build_generators(&point.h, kind, trotterized);
    let ansatz = CompiledAnsatz::new(gens, &point.sector)?;
    let x0 = match warm.get(ansatz.gens.label()) {
        Some(p) if p.len() == ansatz.param_count() => p.clone(),
        _ => initial_parameters(&ansatz, &point.h, cfg.init)?,
    };
    let res = minimize_from(&ansatz, &point.hmat, &point.h, &x0, cfg)?;
    let breakdown = if kind == AnsatzKind::SinglesDoubles {
        None
    } else {
        let t2 = params_to_t2(&ansatz.gens, &res.params)?;
        let c = corrections(&point.h, &t2, &denominators(&point.h))?;
        Some(Breakdown { e4s: c.e4s, e5: c.e5, e6: c.e6 })
    };
    Ok(VqeOutcome {
        energy: res.energy,
        params: res.params,
        converged: res.converged,
        iterations: res.iterations,
        time: start.elapsed().as_secs_f64(),
        breakdown,
    })
}

fn run_cc(point: &Point, level: CcLevel, cfg: &CcConfig) -> Result<(f64, bool, usize)> {
    let res = cc::solve(&point.h, cfg, level, None)?;
    let mut converged = res.converged;
    if converged {
        // independent recheck of the converged equations in the determinant sector
        let (_, r) = similarity_transform_projection(&point.sector, &point.hmat, &res.amplitudes)?;
        let r = match level {
            CcLevel::Ccd => r.r2.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            CcLevel::Ccsd => r.max_abs(),
        };
        if r >= 2.0 * cfg.residual_tol {
            warn!("{level:?} residual recheck failed on {}: {r:.2e}", point.spec.tag);
            converged = false;
        }
    }
    Ok((res.e_total, converged, res.iterations))
}

/// Runs `methods` on one point, sharing one VQE per ansatz between its
/// corrected and uncorrected rows. Failures become flagged rows.
pub fn run_methods(point: &Point, methods: &[Method], vqe: &VqeConfig, cc_cfg: &CcConfig, warm: &mut WarmStart) -> Vec<MethodResult> {
    let mut cache: BTreeMap<BaseMethod, VqeOutcome> = BTreeMap::new();
    let mut next_warm = warm.clone();
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let outcome: Result<(f64, bool, usize, Option<Breakdown>, f64)> = (|| match method.base {
            BaseMethod::Fci => Ok((point.fci.energy, true, 0, None, point.fci_time)),
            BaseMethod::Mp2 => {
                let (_, e2) = mp2(&point.h)?;
                Ok((point.h.e_hf + e2, true, 0, None, start.elapsed().as_secs_f64()))
            }
            BaseMethod::Ccd | BaseMethod::Ccsd => {
                let level = if method.base == BaseMethod::Ccd { CcLevel::Ccd } else { CcLevel::Ccsd };
                let (e, conv, it) = run_cc(point, level, cc_cfg)?;
                Ok((e, conv, it, None, start.elapsed().as_secs_f64()))
            }
            base => {
                let (kind, trotterized) = base.ansatz().expect("unitary method");
                if !cache.contains_key(&base) {
                    let out = run_vqe(point, kind, trotterized, vqe, warm)?;
                    next_warm.insert(base.label().to_string(), out.params.clone());
                    cache.insert(base, out);
                }
                let out = &cache[&base];
                let b = out.breakdown;
                let e = match (method.correction, b) {
                    (None, _) => out.energy,
                    (Some(Correction::S4), Some(b)) => out.energy + b.e4s,
                    (Some(Correction::S6), Some(b)) => out.energy + b.e4s + b.e5 + b.e6,
                    (Some(_), None) => unreachable!("corrections are validated on parse"),
                };
                let shown = method.correction.and(b);
                Ok((e, out.converged, out.iterations, shown, out.time + start.elapsed().as_secs_f64()))
            }
        })();
        let row = match outcome.and_then(|(e, conv, it, b, t)| Ok((e, point.percent(e)?, conv, it, b, t))) {
            Ok((e, pct, converged, iterations, correction_breakdown, wall_time)) => MethodResult {
                method,
                e_total: e,
                e_corr: e - point.h.e_hf,
                pct_corr: pct,
                correction_breakdown,
                converged,
                wall_time,
                iterations,
                error: None,
            },
            Err(err) => {
                warn!("{method} failed on {}: {err}", point.spec.tag);
                MethodResult {
                    method,
                    e_total: f64::NAN,
                    e_corr: f64::NAN,
                    pct_corr: f64::NAN,
                    correction_breakdown: None,
                    converged: false,
                    wall_time: start.elapsed().as_secs_f64(),
                    iterations: 0,
                    error: Some(err.to_string()),
                }
            }
        };
        info!("{} {}: E = {:.10}, {:.3}%, converged {}", point.spec.tag, row.method, row.e_total, row.pct_corr, row.converged);
        rows.push(row);
    }
    *warm = next_warm;
    rows
}

pub fn run_method(point: &Point, method: Method, vqe: &VqeConfig, cc_cfg: &CcConfig) -> MethodResult {
    run_methods(point, &[method], vqe, cc_cfg, &mut WarmStart::new()).remove(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub tag: String,
    pub fcidump: PathBuf,
    pub frozen: usize,
    pub dimension: usize,
    pub e_hf: f64,
    pub e_fci: f64,
    pub results: Vec<MethodResult>,
}

impl PointSummary {
    pub fn all_converged(&self) -> bool {
        self.results.iter().all(|r| r.converged)
    }
}

fn failed_point(spec: &SystemSpec, methods: &[Method], err: &Error) -> PointSummary {
    warn!("{} failed: {err}", spec.tag);
    PointSummary {
        tag: spec.tag.clone(),
        fcidump: spec.fcidump.clone(),
        frozen: spec.frozen.unwrap_or(0),
        dimension: 0,
        e_hf: f64::NAN,
        e_fci: f64::NAN,
        results: methods
            .iter()
            .map(|&method| MethodResult {
                method,
                e_total: f64::NAN,
                e_corr: f64::NAN,
                pct_corr: f64::NAN,
                correction_breakdown: None,
                converged: false,
                wall_time: 0.0,
                iterations: 0,
                error: Some(err.to_string()),
            })
            .collect(),
    }
}

/// Runs every configured point in order. With `warm_start`, each VQE begins
/// from the previous point's converged parameters for the same ansatz.
pub fn run_points(cfg: &RunConfig, warm_start: bool) -> Result<Vec<PointSummary>> {
    cfg.validate()?;
    let mut warm = WarmStart::new();
    let mut out = Vec::new();
    for spec in cfg.points() {
        let summary = match Point::load(&spec) {
            Ok(point) => {
                if !warm_start {
                    warm.clear();
                }
                let results = run_methods(&point, &cfg.methods, &cfg.vqe, &cfg.cc, &mut warm);
                PointSummary {
                    tag: spec.tag.clone(),
                    fcidump: spec.fcidump.clone(),
                    frozen: spec.frozen.unwrap_or(0),
                    dimension: point.sector.dim(),
                    e_hf: point.h.e_hf,
                    e_fci: point.fci.energy,
                    results,
                }
            }
            Err(err) => failed_point(&spec, &cfg.methods, &err),
        };
        out.push(summary);
    }
    Ok(out)
}

/// Potential energy scan with warm-started VQE along the configured points.
pub fn scan_pec(cfg: &RunConfig) -> Result<Vec<PointSummary>> {
    run_points(cfg, true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub geometry_tag: String,
    pub method: String,
    pub e_total: f64,
    pub e_corr: f64,
    pub pct_corr: f64,
    pub error_vs_fci: f64,
    pub converged: bool,
}

pub fn csv_rows(points: &[PointSummary]) -> Vec<CsvRow> {
    points
        .iter()
        .flat_map(|p| {
            p.results.iter().map(move |r| CsvRow {
                geometry_tag: p.tag.clone(),
                method: r.method.to_string(),
                e_total: r.e_total,
                e_corr: r.e_corr,
                pct_corr: r.pct_corr,
                error_vs_fci: r.e_total - p.e_fci,
                converged: r.converged,
            })
        })
        .collect()
}

pub fn write_csv(points: &[PointSummary], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in csv_rows(points) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl std::io::Read) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_summary(points: &[PointSummary], out: impl std::io::Write) -> Result<()> {
    serde_json::to_writer_pretty(out, points).map_err(|e| Error::Invalid(e.to_string()))
}

/// Writes the CSV and summary files named in the config, if any.
pub fn write_outputs(cfg: &RunConfig, points: &[PointSummary]) -> Result<()> {
    let create = |path: &Path| -> Result<fs::File> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        Ok(fs::File::create(path)?)
    };
    if let Some(path) = &cfg.output.csv {
        write_csv(points, create(path)?)?;
    }
    if let Some(path) = &cfg.output.summary {
        write_summary(points, create(path)?)?;
    }
    Ok(())
}

/// Percent-correlation matrix, methods down and systems across.
pub fn format_table(points: &[PointSummary], methods: &[Method]) -> String {
    let mut out = format!("{:<12}", "");
    for p in points {
        out += &format!("{:>10}", p.tag);
    }
    out.push('\n');
    for m in methods {
        out += &format!("{:<12}", m.to_string());
        for p in points {
            match p.results.iter().find(|r| r.method == *m) {
                Some(r) if r.error.is_none() => {
                    let flag = if r.converged { ' ' } else { '*' };
                    out += &format!("{:>9.2}{flag}", r.pct_corr);
                }
                _ => out += &format!("{:>10}", "-"),
            }
        }
        out.push('\n');
    }
    if points.iter().any(|p| !p.all_converged()) {
        out += "* not converged\n";
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fixture(name: &str) -> PathBuf {
        PathBuf::from(format!("{}/../../fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR")))
    }

    #[test]
    fn method_labels_round_trip() {
        for base in BaseMethod::ALL {
            let m = Method::plain(base);
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        let m: Method = "tpUCCD[6S]".parse().unwrap();
        assert_eq!(m, Method { base: BaseMethod::Tpuccd, correction: Some(Correction::S6) });
        assert_eq!(m.to_string(), "tpUCCD[6S]");
        assert_eq!("uccd[4s]".parse::<Method>().unwrap().to_string(), "UCCD[4S]");
    }

    #[test]
    fn corrections_only_on_doubles_methods() {
        for bad in ["UCCSD[4S]", "tUCCSD[6S]", "CCSD[4S]", "FCI[6S]", "MP2[4S]"] {
            assert!(matches!(bad.parse::<Method>(), Err(Error::Config(_))), "{bad}");
        }
        assert!("UCCD[5S]".parse::<Method>().is_err());
        assert!("CISD".parse::<Method>().is_err());
    }

    #[test]
    fn percent_correlation_definition() {
        assert_eq!(percent_correlation(-1.2, -1.0, -1.2).unwrap(), 100.0);
        assert_eq!(percent_correlation(-1.0, -1.0, -1.2).unwrap(), 0.0);
        assert!(percent_correlation(-1.3, -1.0, -1.2).unwrap() > 100.0);
        assert!(percent_correlation(-1.0, -1.0, -1.0).is_err());
        assert!(percent_correlation(-1.0, -1.0, -0.9).is_err());
    }

    #[test]
    fn config_parses_and_fills_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            methods = ["UCCD", "UCCD[6S]", "CCSD"]
            frozen = 2
            [[system]]
            tag = "a"
            fcidump = "a.fcidump"
            [[system]]
            tag = "b"
            fcidump = "b.fcidump"
            frozen = 1
            fci_level = 1
            [vqe]
            init = "zeros"
            [cc]
            max_iter = 50
            "#,
        )
        .unwrap();
        let pts = cfg.points();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].frozen, pts[0].fci_level), (Some(2), Some(0)));
        assert_eq!((pts[1].frozen, pts[1].fci_level), (Some(1), Some(1)));
        assert_eq!(cfg.cc.max_iter, 50);
        assert_eq!(cfg.methods[1].correction, Some(Correction::S6));
        assert!(RunConfig::from_toml("methods = [\"CCSD[4S]\"]").is_err());
        assert!(RunConfig::from_toml("method = [\"CCSD\"]").is_err());
    }

    #[test]
    fn h2_rows() {
        let spec = SystemSpec { tag: "H2".into(), fcidump: fixture("h2_0.74"), frozen: Some(0), fci_level: Some(0) };
        let point = Point::load(&spec).unwrap();
        let methods: Vec<Method> = ["FCI", "UCCD", "UCCD[6S]", "CCSD", "MP2"].iter().map(|s| s.parse().unwrap()).collect();
        let rows = run_methods(&point, &methods, &VqeConfig::default(), &CcConfig::default(), &mut WarmStart::new());
        assert_eq!(rows[0].pct_corr, 100.0);
        assert_abs_diff_eq!(rows[1].pct_corr, 100.0, epsilon = 1e-4);
        let b = rows[2].correction_breakdown.unwrap();
        assert_eq!(rows[2].e_total, rows[1].e_total + b.e4s + b.e5 + b.e6);
        assert!(rows.iter().all(|r| r.converged && r.error.is_none()));
        assert!(rows[4].pct_corr > 0.0 && rows[4].pct_corr < 100.0);
    }

    #[test]
    fn missing_file_is_flagged_and_scan_continues() {
        let cfg = RunConfig {
            methods: vec!["MP2".parse().unwrap()],
            systems: vec![
                SystemSpec { tag: "gone".into(), fcidump: fixture("does_not_exist"), frozen: None, fci_level: None },
                SystemSpec { tag: "H2".into(), fcidump: fixture("h2_0.74"), frozen: None, fci_level: None },
            ],
            ..Default::default()
        };
        let pts = scan_pec(&cfg).unwrap();
        assert!(!pts[0].all_converged());
        assert!(pts[0].results[0].error.is_some());
        assert!(pts[1].all_converged());
    }

    #[test]
    fn csv_is_reparseable() {
        let cfg = RunConfig {
            methods: vec!["MP2".parse().unwrap(), "CCD".parse().unwrap()],
            systems: vec![SystemSpec { tag: "H2".into(), fcidump: fixture("h2_0.74"), frozen: None, fci_level: None }],
            ..Default::default()
        };
        let pts = run_points(&cfg, false).unwrap();
        let mut buf = Vec::new();
        write_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("geometry_tag,method,e_total,e_corr,pct_corr,error_vs_fci,converged\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), csv_rows(&pts));
        let table = format_table(&pts, &cfg.methods);
        assert!(table.contains("CCD") && table.contains("H2"));
    }
}
