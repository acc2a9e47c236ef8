//! Variational minimization of `⟨Ψ(θ)|H|Ψ(θ)⟩` over ansatz parameters.

use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, IterState, State, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::ansatz::{params_from_amplitudes, CompiledAnsatz};
use crate::error::{Error, Result};
use crate::hamiltonian::{mp2, SpinOrbitalHamiltonian};
use crate::sector::SectorOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Zeros,
    Mp2Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    Analytic,
    CentralDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub init: Init,
    pub energy_tol: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub gradient: GradientMethod,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            init: Init::Mp2Scaled,
            energy_tol: 1e-9,
            grad_tol: 1e-6,
            max_iter: 500,
            fd_step: 1e-5,
            gradient: GradientMethod::Analytic,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0 && self.grad_tol > 0.0 && self.fd_step > 0.0) {
            return Err(Error::Config("VQE tolerances and step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    pub params: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    /// Energies of accepted iterates, starting point first.
    pub trace: Vec<f64>,
}

pub fn energy(ansatz: &CompiledAnsatz, params: &[f64], hmat: &SectorOperator) -> Result<f64> {
    ansatz.energy(params, hmat)
}

/// Starting parameters: zeros, or MP2 doubles amplitudes on the doubles
/// generators.
pub fn initial_parameters(ansatz: &CompiledAnsatz, h: &SpinOrbitalHamiltonian, init: Init) -> Result<Vec<f64>> {
    match init {
        Init::Zeros => Ok(vec![0.0; ansatz.param_count()]),
        Init::Mp2Scaled => {
            let (amps, _) = mp2(h)?;
            Ok(params_from_amplitudes(&ansatz.gens, &amps))
        }
    }
}

pub fn minimize(ansatz: &CompiledAnsatz, hmat: &SectorOperator, h: &SpinOrbitalHamiltonian, cfg: &VqeConfig) -> Result<VqeResult> {
    let start = initial_parameters(ansatz, h, cfg.init)?;
    minimize_from(ansatz, hmat, h, &start, cfg)
}

struct Objective<'a> {
    ansatz: &'a CompiledAnsatz,
    hmat: &'a SectorOperator,
    cfg: &'a VqeConfig,
    cache: Mutex<Option<(Vec<f64>, f64, Vec<f64>)>>,
}

impl Objective<'_> {
    fn evaluate(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some((x, e, g)) = cache.as_ref() {
            if x.as_slice() == p {
                return Ok((*e, g.clone()));
            }
        }
        let (e, g) = match self.cfg.gradient {
            GradientMethod::Analytic => self.ansatz.energy_and_gradient(p, self.hmat)?,
            GradientMethod::CentralDifference => {
                (self.ansatz.energy(p, self.hmat)?, self.ansatz.gradient_fd(p, self.hmat, self.cfg.fd_step)?)
            }
        };
        *cache = Some((p.to_vec(), e, g.clone()));
        Ok((e, g))
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.evaluate(p)?.0)
    }
}

impl Gradient for Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.evaluate(p)?.1)
    }
}

type BfgsState = IterState<Vec<f64>, Vec<f64>, (), Vec<Vec<f64>>, (), f64>;

#[derive(Clone, Default)]
struct Trace(Arc<Mutex<Vec<(Vec<f64>, f64)>>>);

impl Observe<BfgsState> for Trace {
    fn observe_iter(&mut self, state: &BfgsState, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        if let Some(p) = state.get_param() {
            self.0.lock().expect("trace lock").push((p.clone(), state.get_cost()));
        }
        Ok(())
    }
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn diagonal(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len()).map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect()
}

/// BFGS with a More–Thuente line search from `start`, seeded with the
/// orbital-energy diagonal Hessian. Restarts from the best accepted point when
/// a run stalls short of the tolerances.
pub fn minimize_from(
    ansatz: &CompiledAnsatz,
    hmat: &SectorOperator,
    h: &SpinOrbitalHamiltonian,
    start: &[f64],
    cfg: &VqeConfig,
) -> Result<VqeResult> {
    cfg.validate()?;
    if start.len() != ansatz.param_count() {
        return Err(Error::Dimension(format!("{} starting values for {} parameters", start.len(), ansatz.param_count())));
    }
    let inv_diag: Vec<f64> = ansatz.gens.hessian_guess(h).iter().map(|x| 1.0 / x).collect();
    let objective = Objective { ansatz, hmat, cfg, cache: Mutex::new(None) };
    let (mut e, mut g) = objective.evaluate(start)?;
    let mut x = start.to_vec();
    let mut trace = vec![e];
    let mut last_de = if inf_norm(&g) < cfg.grad_tol { 0.0 } else { f64::INFINITY };
    let mut iterations = 0;
    let mut failed_restarts = 0;

    let done = |g: &[f64], de: f64| inf_norm(g) < cfg.grad_tol && de < cfg.energy_tol;
    while !done(&g, last_de) && iterations < cfg.max_iter && failed_restarts < 3 {
        let observer = Trace::default();
        let solver = BFGS::new(MoreThuenteLineSearch::new())
            .with_tolerance_grad(cfg.grad_tol)
            .and_then(|s| s.with_tolerance_cost(cfg.energy_tol * 1e-4))
            .map_err(|err| Error::Invalid(err.to_string()))?;
        let problem = Objective { ansatz, hmat, cfg, cache: Mutex::new(Some((x.clone(), e, g.clone()))) };
        let outcome = Executor::new(problem, solver)
            .configure(|state| {
                state
                    .param(x.clone())
                    .inv_hessian(diagonal(&inv_diag))
                    .gradient(g.clone())
                    .max_iters((cfg.max_iter - iterations) as u64)
            })
            .add_observer(observer.clone(), ObserverMode::Always)
            .run();
        let steps = std::mem::take(&mut *observer.0.lock().expect("trace lock"));
        match &outcome {
            Ok(res) => debug!("BFGS run: {} steps, {:?}", steps.len(), res.state.get_termination_reason()),
            Err(err) => debug!("BFGS run ended early after {} steps: {err}", steps.len()),
        }
        let before = e;
        for (p, cost) in steps {
            if cost < e {
                last_de = e - cost;
                x = p;
                e = cost;
                trace.push(cost);
            }
            iterations += 1;
        }
        g = objective.evaluate(&x)?.1;
        if e < before {
            failed_restarts = 0;
        } else {
            failed_restarts += 1;
        }
    }
    let grad_norm = inf_norm(&g);
    let converged = done(&g, last_de);
    if !converged {
        warn!("{} not converged after {iterations} iterations: |g|∞ = {grad_norm:.2e}", ansatz.gens.label());
    }
    Ok(VqeResult { params: x, energy: e, iterations, converged, grad_norm, trace })
}
