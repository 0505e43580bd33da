//! QAOA driver: ansatz construction, expectation evaluation, multi-restart
//! derivative-free optimization, linear-ramp warm starts, and layer sweeps.
//!
//! The ansatz alternates the diagonal cost unitary (a phase per basis state)
//! with a mixer layer of `RX(2 beta)` on every qubit, starting from the
//! uniform superposition. Angles are kept in `beta in [0, pi)`,
//! `gamma in [0, 2 pi)` by wrapping.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optim::NelderMead;
use crate::qubo_ising::{self, IsingHamiltonian, QuboError};
use crate::seed::{derive_seed, stream_rng};
use crate::statevector::{GateOp, StateVector, StateVectorError};

pub const BETA_PERIOD: f64 = PI;
pub const GAMMA_PERIOD: f64 = TAU;
/// Default evaluation budget per restart: 200 per parameter, 2p parameters.
pub const BUDGET_PER_PARAM: usize = 200;
/// Default linear-ramp total time scales with depth.
pub const RAMP_TIME_PER_LAYER: f64 = 0.7;

#[derive(Debug, Error)]
pub enum QaoaError {
    #[error(transparent)]
    State(#[from] StateVectorError),
    #[error(transparent)]
    Encoding(#[from] QuboError),
    #[error("layer count must be >= 1")]
    NoLayers,
    #[error("restart count must be >= 1")]
    NoRestarts,
}

/// One angle pair per layer, wrapped into bounds on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Self {
        assert_eq!(betas.len(), gammas.len());
        QaoaParams {
            betas: betas.iter().map(|b| b.rem_euclid(BETA_PERIOD)).collect(),
            gammas: gammas.iter().map(|g| g.rem_euclid(GAMMA_PERIOD)).collect(),
        }
    }

    pub fn layers(&self) -> usize {
        self.betas.len()
    }

    /// Append zero-angle layers; the ansatz state is unchanged.
    pub fn padded(&self, extra_layers: usize) -> QaoaParams {
        let mut betas = self.betas.clone();
        let mut gammas = self.gammas.clone();
        betas.extend(std::iter::repeat_n(0.0, extra_layers));
        gammas.extend(std::iter::repeat_n(0.0, extra_layers));
        QaoaParams { betas, gammas }
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.betas.clone();
        flat.extend_from_slice(&self.gammas);
        flat
    }

    fn from_flat(flat: &[f64]) -> QaoaParams {
        let p = flat.len() / 2;
        QaoaParams::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    fn periods(layers: usize) -> Vec<f64> {
        let mut periods = vec![BETA_PERIOD; layers];
        periods.extend(std::iter::repeat_n(GAMMA_PERIOD, layers));
        periods
    }
}

/// Starting-point strategy for the restart set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// All restarts start from uniform random angles.
    Random,
    /// Restart 0 starts from the linear adiabatic ramp; the rest are random.
    LinearRamp,
}

#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub layers: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations per restart; defaults to `200 * 2p`.
    pub budget_per_restart: Option<usize>,
    pub init: InitStrategy,
    /// Additional deterministic starting points (warm starts), each run as
    /// an extra restart.
    pub extra_starts: Vec<QaoaParams>,
}

impl OptimizeConfig {
    pub fn new(layers: usize, restarts: usize, seed: u64) -> Self {
        OptimizeConfig {
            layers,
            restarts,
            seed,
            budget_per_restart: None,
            init: InitStrategy::LinearRamp,
            extra_starts: Vec::new(),
        }
    }
}

/// Per-restart outcome, kept for the two-best reporting statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub params: QaoaParams,
    pub energy: f64,
    pub ground_prob: f64,
    pub evals: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaoaResult {
    pub params: QaoaParams,
    /// Expectation of the cost Hamiltonian in the optimized state.
    pub energy: f64,
    pub state_probs: Vec<f64>,
    /// Probability of the exhaustive argmin bitstring.
    pub ground_prob: f64,
    pub ground_index: usize,
    pub ground_energy: f64,
    /// Total objective evaluations across restarts.
    pub evals: usize,
    pub restart_energies: Vec<f64>,
    /// Mean over the two lowest-energy restarts (the reporting statistic).
    pub energy_mean2: f64,
    pub ground_prob_mean2: f64,
    pub budget_exhausted: bool,
}

/// One row of a layer sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub layers: usize,
    pub energy_mean2: f64,
    pub ground_prob_mean2: f64,
    pub energy_best: f64,
    pub ground_prob_best: f64,
    pub evals: usize,
    /// `|F(padded params) - F(params)|` for the best restart; identity check
    /// for appended zero-angle layers.
    pub pad_residual: f64,
}

/// Uniform superposition: Hadamard on every qubit of `|0...0>`.
pub fn prepare_initial(n: usize) -> Result<StateVector, QaoaError> {
    let mut s = StateVector::init_zero(n)?;
    for q in 0..n {
        s.apply(&GateOp::H(q))?;
    }
    Ok(s)
}

fn ansatz_from_energies(
    n: usize,
    energies: &Arc<Vec<f64>>,
    params: &QaoaParams,
) -> Result<StateVector, QaoaError> {
    let mut s = prepare_initial(n)?;
    for (beta, gamma) in params.betas.iter().zip(&params.gammas) {
        s.apply(&GateOp::DiagPhase {
            gamma: *gamma,
            energies: Arc::clone(energies),
        })?;
        for q in 0..n {
            s.apply(&GateOp::RX {
                target: q,
                theta: 2.0 * beta,
            })?;
        }
    }
    Ok(s)
}

/// `U_B(beta_p) U_C(gamma_p) ... U_B(beta_1) U_C(gamma_1) |psi_ini>`.
pub fn ansatz_state(h: &IsingHamiltonian, params: &QaoaParams) -> Result<StateVector, QaoaError> {
    let energies = Arc::new(qubo_ising::diagonal_energies(h)?);
    ansatz_from_energies(h.n, &energies, params)
}

/// `<psi(beta, gamma)| H_C |psi(beta, gamma)>`.
pub fn evaluate_f(h: &IsingHamiltonian, params: &QaoaParams) -> Result<f64, QaoaError> {
    let energies = Arc::new(qubo_ising::diagonal_energies(h)?);
    let s = ansatz_from_energies(h.n, &energies, params)?;
    Ok(s.expectation_diagonal(&energies)?)
}

/// Trotterized linear schedule: `gamma_k = (k/p)(T/p)`,
/// `beta_k = -(1 - k/p)(T/p)` for `k = 1..p`. The mixer sign is negative
/// because `|+...+>` is the ground state of `-sum X_i`; wrapping folds the
/// angle back into `[0, pi)` without changing measurement probabilities.
pub fn linear_ramp_params(p: usize, total_time: f64) -> QaoaParams {
    let dt = total_time / p as f64;
    let mut betas = Vec::with_capacity(p);
    let mut gammas = Vec::with_capacity(p);
    for k in 1..=p {
        let frac = k as f64 / p as f64;
        gammas.push(frac * dt);
        betas.push(-(1.0 - frac) * dt);
    }
    QaoaParams::new(betas, gammas)
}

fn ground_of(energies: &[f64]) -> (usize, f64) {
    let mut idx = 0;
    let mut value = f64::INFINITY;
    for (i, &e) in energies.iter().enumerate() {
        if e < value {
            value = e;
            idx = i;
        }
    }
    (idx, value)
}

/// Multi-restart optimization of the 2p angles. Deterministic for a fixed
/// seed: every restart draws its start from its own counter-based stream and
/// the best/two-best reduction tie-breaks on restart index.
pub fn optimize(h: &IsingHamiltonian, cfg: &OptimizeConfig) -> Result<QaoaResult, QaoaError> {
    if cfg.layers == 0 {
        return Err(QaoaError::NoLayers);
    }
    if cfg.restarts == 0 {
        return Err(QaoaError::NoRestarts);
    }
    let energies = Arc::new(qubo_ising::diagonal_energies(h)?);
    let (ground_index, ground_energy) = ground_of(&energies);
    let budget = cfg
        .budget_per_restart
        .unwrap_or(BUDGET_PER_PARAM * 2 * cfg.layers);
    let restart_seed = derive_seed(cfg.seed, "qaoa-restart");
    let periods = QaoaParams::periods(cfg.layers);

    let mut starts: Vec<QaoaParams> = (0..cfg.restarts)
        .map(|r| {
            if r == 0 && cfg.init == InitStrategy::LinearRamp {
                linear_ramp_params(cfg.layers, RAMP_TIME_PER_LAYER * cfg.layers as f64)
            } else {
                let mut rng = stream_rng(restart_seed, r as u64);
                QaoaParams::new(
                    (0..cfg.layers)
                        .map(|_| rng.random_range(0.0..BETA_PERIOD))
                        .collect(),
                    (0..cfg.layers)
                        .map(|_| rng.random_range(0.0..GAMMA_PERIOD))
                        .collect(),
                )
            }
        })
        .collect();
    starts.extend(cfg.extra_starts.iter().cloned());

    let nm = NelderMead {
        max_evals: budget,
        ..Default::default()
    };
    let mut outcomes: Vec<RestartOutcome> = Vec::with_capacity(starts.len());
    for start in &starts {
        let result = nm.minimize(
            |flat| {
                let params = QaoaParams::from_flat(flat);
                let s =
                    ansatz_from_energies(h.n, &energies, &params).expect("valid ansatz dimensions");
                s.expectation_diagonal(&energies)
                    .expect("energies match state size")
            },
            &start.to_flat(),
            &periods,
        );
        let params = QaoaParams::from_flat(&result.x);
        let state = ansatz_from_energies(h.n, &energies, &params)?;
        outcomes.push(RestartOutcome {
            ground_prob: state.probabilities()[ground_index],
            params,
            energy: result.value,
            evals: result.evals,
            budget_exhausted: result.budget_exhausted,
        });
    }

    // Rank restarts by (energy, index); index keeps the reduction
    // deterministic under any execution order.
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    order.sort_by(|&a, &b| {
        outcomes[a]
            .energy
            .partial_cmp(&outcomes[b].energy)
            .unwrap()
            .then(a.cmp(&b))
    });
    let best = &outcomes[order[0]];
    let two_best = &order[..order.len().min(2)];
    let energy_mean2 =
        two_best.iter().map(|&i| outcomes[i].energy).sum::<f64>() / two_best.len() as f64;
    let ground_prob_mean2 = two_best
        .iter()
        .map(|&i| outcomes[i].ground_prob)
        .sum::<f64>()
        / two_best.len() as f64;

    let state = ansatz_from_energies(h.n, &energies, &best.params)?;
    Ok(QaoaResult {
        params: best.params.clone(),
        energy: best.energy,
        state_probs: state.probabilities(),
        ground_prob: best.ground_prob,
        ground_index,
        ground_energy,
        evals: outcomes.iter().map(|o| o.evals).sum(),
        restart_energies: outcomes.iter().map(|o| o.energy).collect(),
        energy_mean2,
        ground_prob_mean2,
        budget_exhausted: outcomes.iter().any(|o| o.budget_exhausted),
    })
}

/// Optimize at each depth in `p_range`, warm-starting every depth with the
/// previous best parameters padded by zero-angle layers.
pub fn layer_sweep(
    h: &IsingHamiltonian,
    p_range: &[usize],
    restarts: usize,
    seed: u64,
    budget_per_restart: Option<usize>,
) -> Result<Vec<SweepRow>, QaoaError> {
    let mut rows = Vec::with_capacity(p_range.len());
    let mut previous_best: Option<QaoaParams> = None;
    for &p in p_range {
        let mut cfg = OptimizeConfig::new(p, restarts, derive_seed(seed, &format!("sweep-p{p}")));
        cfg.budget_per_restart = budget_per_restart;
        if let Some(prev) = &previous_best {
            if prev.layers() <= p {
                cfg.extra_starts.push(prev.padded(p - prev.layers()));
            }
        }
        let result = optimize(h, &cfg)?;
        let padded = result.params.padded(2);
        let pad_residual = (evaluate_f(h, &padded)? - result.energy).abs();
        rows.push(SweepRow {
            layers: p,
            energy_mean2: result.energy_mean2,
            ground_prob_mean2: result.ground_prob_mean2,
            energy_best: result.energy,
            ground_prob_best: result.ground_prob,
            evals: result.evals,
            pad_residual,
        });
        previous_best = Some(result.params);
    }
    Ok(rows)
}
