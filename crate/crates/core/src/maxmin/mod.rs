//! Max-min fair joint AP/UE power control and LSFD design.
//!
//! For fixed LSFD vectors the SINR constraints are linear in the uplink powers,
//! and the energy and AP power constraints are linear in everything, so each
//! bisection step on the target `t` is an LP feasibility problem. Between steps
//! the LSFD vectors are replaced by their closed-form optimum, which can only
//! raise every SINR.

pub mod lp;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_solve};
use crate::setup::SetupModel;
use crate::wit::{sinr, spectral_efficiency, LsfdWeights, SeStatistics};
use crate::wpt::{ap_transmit_power, PowerAllocation};

pub use lp::{lp_feasible, LpOutcome, LpProblem, LpRow};

pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Tolerances used to certify a returned allocation.
pub const SINR_TOL: f64 = 1e-6;
pub const POWER_TOL: f64 = 1e-9;
pub const ENERGY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bisection stops once `t_max − t_min < ε·t_max` (or `< ε` when `absolute`).
    pub epsilon: f64,
    pub absolute: bool,
    pub max_iterations: usize,
    pub lp_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            absolute: false,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            lp_tol: lp::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    /// The iteration cap stopped the loop; the result is the best certified iterate.
    IterationCap,
    InfeasibleAtZero,
}

/// One bisection step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    pub feasible: bool,
    /// Minimum SINR of this step's iterate after the LSFD update.
    pub iterate_min_sinr: Option<f64>,
    /// Best certified minimum SINR so far.
    pub certified: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMinResult {
    pub status: SolveStatus,
    /// Certified minimum SINR (linear).
    pub t_star: f64,
    pub allocation: PowerAllocation,
    pub weights: LsfdWeights,
    pub per_ue_sinr: Vec<f64>,
    pub per_ue_se: Vec<f64>,
    pub trace: Vec<TraceStep>,
    pub iterations: usize,
    /// Initial upper end of the bracket.
    pub t_max_initial: f64,
    /// Final bracket.
    pub t_min: f64,
    pub t_max: f64,
}

impl MaxMinResult {
    pub fn min_se(&self) -> f64 {
        self.per_ue_se.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn infeasible(model: &SetupModel, t_max_initial: f64) -> Self {
        let (kk, ll) = (model.num_ues(), model.num_aps());
        Self {
            status: SolveStatus::InfeasibleAtZero,
            t_star: 0.0,
            allocation: PowerAllocation::zeros(kk, ll),
            weights: LsfdWeights::ones(kk, ll),
            per_ue_sinr: vec![0.0; kk],
            per_ue_se: vec![0.0; kk],
            trace: Vec::new(),
            iterations: 0,
            t_max_initial,
            t_min: 0.0,
            t_max: t_max_initial,
        }
    }
}

/// Largest violations of the SINR, AP power and energy constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `max_k (t − SINR_k)`.
    pub sinr_shortfall: f64,
    /// `max_l (P_l − ρ_d)`.
    pub power_excess: f64,
    /// `max_k (τ_uη_k + τ_pρ_p − E_k)/E_k`.
    pub energy_shortfall_rel: f64,
    pub min_eta: f64,
    pub min_p: f64,
}

impl ConstraintReport {
    pub fn holds(&self) -> bool {
        self.sinr_shortfall <= SINR_TOL
            && self.power_excess <= POWER_TOL
            && self.energy_shortfall_rel <= ENERGY_REL_TOL
            && self.min_eta >= 0.0
            && self.min_p >= 0.0
    }
}

pub fn check_constraints(
    t: f64,
    alloc: &PowerAllocation,
    weights: &LsfdWeights,
    model: &SetupModel,
    cfg: &ScenarioConfig,
) -> Result<ConstraintReport> {
    let mut sinr_shortfall = f64::NEG_INFINITY;
    let mut energy_shortfall_rel = f64::NEG_INFINITY;
    for k in 0..model.num_ues() {
        let s = sinr(k, &weights.a[k], &alloc.eta, &model.se)?;
        sinr_shortfall = sinr_shortfall.max(t - s);
        let e = model.harvest.energy(k, alloc);
        let need = cfg.tau_u as f64 * alloc.eta[k] + cfg.pilot_energy();
        let rel = if e > 0.0 {
            (need - e) / e
        } else {
            f64::INFINITY
        };
        energy_shortfall_rel = energy_shortfall_rel.max(rel);
    }
    let power_excess = (0..model.num_aps())
        .map(|l| ap_transmit_power(alloc, l, &model.cache) - cfg.rho_d)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConstraintReport {
        sinr_shortfall,
        power_excess,
        energy_shortfall_rel,
        min_eta: alloc.eta.iter().copied().fold(f64::INFINITY, f64::min),
        min_p: alloc.p.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// LP over `x = [p_kl (index k*L + l) …, η_k …]` encoding all constraints at target `t`.
pub fn build_feasibility_lp(
    t: f64,
    weights: &LsfdWeights,
    model: &SetupModel,
    cfg: &ScenarioConfig,
) -> LpProblem {
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let np = kk * ll;
    let se = &model.se;
    let mut lp = LpProblem::new(np + kk);

    // t(Σ η_k' aᴴC_kk'a + aᴴDa) − (1+t) η_k |aᴴb|² ≤ 0
    for k in 0..kk {
        let a = &weights.a[k];
        let mut row = vec![0.0; np + kk];
        for kp in 0..kk {
            row[np + kp] = t * se.c(k, kp).bilinear(a, a).re;
        }
        row[np + k] -= (1.0 + t) * dot(a, &se.b_complex(k)).norm_sqr();
        let noise: f64 = a.iter().zip(&se.d[k]).map(|(x, d)| x.norm_sqr() * d).sum();
        lp.push_row(row, -t * noise);
    }
    // Σ_k p_kl tr(R̂_kl) ≤ ρ_d
    for l in 0..ll {
        let mut row = vec![0.0; np + kk];
        for k in 0..kk {
            row[k * ll + l] = model.cache.tr_r_hat(k, l);
        }
        lp.push_row(row, cfg.rho_d);
    }
    // τ_u η_k − Σ ∂E_k/∂p · p ≤ −τ_pρ_p
    for k in 0..kk {
        let mut row: Vec<f64> = model.harvest.gradient(k).iter().map(|g| -g).collect();
        row.resize(np + kk, 0.0);
        row[np + k] = cfg.tau_u as f64;
        lp.push_row(row, -cfg.pilot_energy());
    }
    lp
}

/// `a_k = (Σ_k' η_k' C_kk' + D_k)⁻¹ b_k` for every UE.
pub fn optimal_lsfd(eta: &[f64], se: &SeStatistics) -> Result<LsfdWeights> {
    let a = (0..se.num_ues)
        .map(|k| hermitian_solve(&se.interference_plus_noise(k, eta), &se.b_complex(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LsfdWeights { a })
}

/// Closed-form SINR of UE `k` under optimal LSFD: `q/(1 − q)` with `q = η_k bᴴM⁻¹b`.
pub fn optimal_sinr(k: usize, eta: &[f64], se: &SeStatistics) -> Result<f64> {
    let b = se.b_complex(k);
    let x = hermitian_solve(&se.interference_plus_noise(k, eta), &b)?;
    let q = eta[k] * dot(&b, &x).re;
    if !(q < 1.0) {
        return Err(Error::NonPositiveDenominator(1.0 - q));
    }
    Ok(q / (1.0 - q))
}

fn evaluate(alloc: &PowerAllocation, se: &SeStatistics) -> Result<(LsfdWeights, Vec<f64>)> {
    let weights = optimal_lsfd(&alloc.eta, se)?;
    let sinrs = (0..se.num_ues)
        .map(|k| sinr(k, &weights.a[k], &alloc.eta, se))
        .collect::<Result<Vec<_>>>()?;
    Ok((weights, sinrs))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Bracket start: each UE alone with every AP at full power on it.
pub fn upper_bound_tmax(model: &SetupModel, cfg: &ScenarioConfig) -> Result<f64> {
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let mut t_max = f64::INFINITY;
    for k in 0..kk {
        let mut alloc = PowerAllocation::zeros(kk, ll);
        for l in 0..ll {
            alloc.set_p(k, l, cfg.rho_d / model.cache.tr_r_hat(k, l));
        }
        let e = model.harvest.energy(k, &alloc);
        alloc.eta[k] = ((e - cfg.pilot_energy()) / cfg.tau_u as f64).max(0.0);
        t_max = t_max.min(optimal_sinr(k, &alloc.eta, &model.se)?);
    }
    Ok(t_max)
}

/// Projects an LP point onto the constraint set: negatives to zero, AP
/// columns scaled into the power budget, then each η lowered to what the
/// harvested energy pays for.
fn repair(x: &[f64], model: &SetupModel, cfg: &ScenarioConfig) -> PowerAllocation {
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let np = kk * ll;
    let mut alloc = PowerAllocation {
        num_aps: ll,
        num_ues: kk,
        p: x[..np].iter().map(|v| v.max(0.0)).collect(),
        eta: x[np..].iter().map(|v| v.max(0.0)).collect(),
    };
    for l in 0..ll {
        let power = ap_transmit_power(&alloc, l, &model.cache);
        if power > cfg.rho_d {
            let s = cfg.rho_d / power;
            for k in 0..kk {
                let v = alloc.p(k, l) * s;
                alloc.set_p(k, l, v);
            }
        }
    }
    for k in 0..kk {
        let budget = (model.harvest.energy(k, &alloc) - cfg.pilot_energy()) / cfg.tau_u as f64;
        alloc.eta[k] = alloc.eta[k].min(budget.max(0.0));
    }
    alloc
}

struct Certified {
    t_star: f64,
    allocation: PowerAllocation,
    weights: LsfdWeights,
    sinrs: Vec<f64>,
}

/// Alternating bisection over the common SINR target.
///
/// A feasible step adopts the LP point, re-optimizes LSFD and re-brackets to
/// `[t⋆, 2t⋆]`; an infeasible step halves the bracket from above. The best
/// certified iterate is returned.
pub fn solve_maxmin(
    model: &SetupModel,
    cfg: &ScenarioConfig,
    opts: &SolverOptions,
) -> Result<MaxMinResult> {
    if !(opts.epsilon > 0.0) {
        return Err(Error::Invalid(format!(
            "epsilon must be positive, got {}",
            opts.epsilon
        )));
    }
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let t_max_initial = upper_bound_tmax(model, cfg)?;
    if !(t_max_initial > 0.0) {
        return Ok(MaxMinResult::infeasible(model, t_max_initial));
    }

    let mut a = LsfdWeights::ones(kk, ll);
    let LpOutcome::Feasible(x0) =
        lp_feasible(&build_feasibility_lp(0.0, &a, model, cfg), opts.lp_tol)?
    else {
        return Ok(MaxMinResult::infeasible(model, t_max_initial));
    };
    let alloc0 = repair(&x0, model, cfg);
    let (w0, s0) = evaluate(&alloc0, &model.se)?;
    let mut best = Certified {
        t_star: min_of(&s0),
        allocation: alloc0,
        weights: w0,
        sinrs: s0,
    };
    let mut trace = vec![TraceStep {
        t: 0.0,
        feasible: true,
        iterate_min_sinr: Some(best.t_star),
        certified: best.t_star,
    }];

    let (mut t_min, mut t_max) = (0.0_f64, t_max_initial);
    let mut iterations = 0;
    let mut status = SolveStatus::Solved;
    let width = |t_max: f64| {
        if opts.absolute {
            opts.epsilon
        } else {
            opts.epsilon * t_max
        }
    };
    while t_max - t_min >= width(t_max) {
        if iterations == opts.max_iterations {
            status = SolveStatus::IterationCap;
            break;
        }
        iterations += 1;
        let t = 0.5 * (t_min + t_max);
        match lp_feasible(&build_feasibility_lp(t, &a, model, cfg), opts.lp_tol)? {
            LpOutcome::Feasible(x) => {
                let alloc = repair(&x, model, cfg);
                let (weights, sinrs) = evaluate(&alloc, &model.se)?;
                let t_iter = min_of(&sinrs);
                if t_iter > t_min {
                    t_min = t_iter;
                    t_max = 2.0 * t_iter;
                    a = weights.clone();
                    if t_iter > best.t_star {
                        best = Certified {
                            t_star: t_iter,
                            allocation: alloc,
                            weights,
                            sinrs,
                        };
                    }
                } else {
                    // round-off left the iterate below the bracket; treat as a failed step
                    t_max = t;
                }
                trace.push(TraceStep {
                    t,
                    feasible: true,
                    iterate_min_sinr: Some(t_iter),
                    certified: best.t_star,
                });
            }
            LpOutcome::Infeasible => {
                t_max = t;
                trace.push(TraceStep {
                    t,
                    feasible: false,
                    iterate_min_sinr: None,
                    certified: best.t_star,
                });
            }
        }
    }

    let per_ue_se = best
        .sinrs
        .iter()
        .map(|&s| spectral_efficiency(s, cfg))
        .collect();
    Ok(MaxMinResult {
        status,
        t_star: best.t_star,
        allocation: best.allocation,
        weights: best.weights,
        per_ue_sinr: best.sinrs,
        per_ue_se,
        trace,
        iterations,
        t_max_initial,
        t_min,
        t_max,
    })
}

/// Fractional power control: `p_kl ∝ 1/√tr(R̂_kl)` at full AP power, UEs spend
/// all harvested energy beyond the pilot, optimal LSFD.
pub fn fpc_baseline(model: &SetupModel, cfg: &ScenarioConfig) -> Result<MaxMinResult> {
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let mut alloc = PowerAllocation::zeros(kk, ll);
    for l in 0..ll {
        let norm: f64 = (0..kk).map(|k| model.cache.tr_r_hat(k, l).sqrt()).sum();
        let c = if norm > 0.0 { cfg.rho_d / norm } else { 0.0 };
        for k in 0..kk {
            let tr = model.cache.tr_r_hat(k, l);
            alloc.set_p(k, l, if tr > 0.0 { c / tr.sqrt() } else { 0.0 });
        }
    }
    for k in 0..kk {
        let e = model.harvest.energy(k, &alloc);
        alloc.eta[k] = ((e - cfg.pilot_energy()) / cfg.tau_u as f64).max(0.0);
    }
    let (weights, sinrs) = evaluate(&alloc, &model.se)?;
    let t_star = min_of(&sinrs);
    Ok(MaxMinResult {
        status: SolveStatus::Solved,
        t_star,
        per_ue_se: sinrs.iter().map(|&s| spectral_efficiency(s, cfg)).collect(),
        allocation: alloc,
        weights,
        per_ue_sinr: sinrs,
        trace: Vec::new(),
        iterations: 0,
        t_max_initial: t_star,
        t_min: t_star,
        t_max: t_star,
    })
}

/// `(Σ η C − η_k b bᴴ + D)⁻¹ b`, the interference-only form of the optimal LSFD vector.
pub fn textbook_lsfd(k: usize, eta: &[f64], se: &SeStatistics) -> Result<Vec<Complex64>> {
    let mut m = se.interference_plus_noise(k, eta);
    let b = se.b_complex(k);
    for i in 0..b.len() {
        for j in 0..b.len() {
            m[(i, j)] -= b[i] * b[j].conj() * eta[k];
        }
    }
    hermitian_solve(&m, &b)
}
