//! Projected gradient descent driver: explicit Euler predictor, modified
//! Newton feasibility restoration with frozen saddle matrix, Armijo
//! backtracking, isotopy gating, and trace recording.
//!
//! One step from P: solve the saddle system at P for the projected gradient
//! g, predict Q0 = P − τ g, restore Q0 to the strain constraint manifold by
//! repeated solves against the same factorization, accept when the Armijo
//! decrease condition and (when enabled) the isotopy certificate hold, and
//! otherwise shrink τ. Restoration failure, insufficient decrease and
//! certification failure all route into the same backtracking loop.

use std::time::Instant;

use nalgebra::DVector;

use crate::constraints::{
    barycenter_jacobian, constraint_violation, log_strain, log_strain_jacobian, StrainVector,
};
use crate::energy::{energy_differential, total_energy, EnergyParams, EnergyReport};
use crate::error::{CurveError, Result};
use crate::geometry::Polyline;
use crate::isotopy::{certify_isotopy, self_intersection, HomotopyCertificate, IsotopyPolicy};
use crate::metric::assemble_gagliardo;
use crate::saddle::{assemble_saddle, SaddleSystem};

/// Projected gradients whose J-norm falls below this fraction of the
/// Euclidean differential norm are treated as numerically zero: the
/// constrained problem offers no descent direction. Measured constrained
/// critical points sit near 1e-10 of the differential norm while generic
/// configurations stay above 1e-3, so 1e-6 separates them cleanly.
const NO_DESCENT_RATIO: f64 = 1e-6;

/// Step acceptance and stopping parameters of the discrete flow.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Armijo sufficient-decrease parameter σ ∈ (0,1).
    pub sigma_armijo: f64,
    /// Step shrink factor in (0,1) used while backtracking.
    pub backtrack_factor: f64,
    /// Step growth factor > 1 applied after an accepted step.
    pub step_grow_factor: f64,
    /// First trial step size.
    pub tau_init: f64,
    /// Backtracking below this step size aborts the step.
    pub tau_min: f64,
    /// ℓ∞ strain violation threshold for feasibility restoration.
    pub tol_feas: f64,
    /// Maximal number of modified Newton iterations per restoration.
    pub max_newton: usize,
    /// Stop when the projected gradient J-norm falls below this fraction of
    /// its initial value.
    pub tol_grad: f64,
    /// Maximal number of accepted steps.
    pub max_iters: usize,
    /// Gate every accepted step on the isotopy certificate.
    pub isotopy_check: bool,
    pub isotopy_policy: IsotopyPolicy,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            sigma_armijo: 1e-4,
            backtrack_factor: 0.5,
            step_grow_factor: 2.0,
            tau_init: 1.0,
            tau_min: 1e-12,
            tol_feas: 1e-8,
            max_newton: 20,
            tol_grad: 1e-6,
            max_iters: 1000,
            isotopy_check: true,
            isotopy_policy: IsotopyPolicy::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CurveError::InvalidParams(msg));
        if !(self.sigma_armijo > 0.0 && self.sigma_armijo < 1.0) {
            return bad(format!(
                "sigma_armijo must be in (0,1): {}",
                self.sigma_armijo
            ));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!(
                "backtrack_factor must be in (0,1): {}",
                self.backtrack_factor
            ));
        }
        if !(self.step_grow_factor > 1.0) {
            return bad(format!(
                "step_grow_factor must exceed 1: {}",
                self.step_grow_factor
            ));
        }
        if !(self.tau_init > 0.0 && self.tau_min > 0.0 && self.tau_init >= self.tau_min) {
            return bad(format!(
                "step sizes must satisfy tau_init >= tau_min > 0: {} vs {}",
                self.tau_init, self.tau_min
            ));
        }
        if !(self.tol_feas > 0.0) {
            return bad(format!("tol_feas must be positive: {}", self.tol_feas));
        }
        if !(self.tol_grad > 0.0) {
            return bad(format!("tol_grad must be positive: {}", self.tol_grad));
        }
        Ok(())
    }
}

/// One record per trace row: the state after `iter` accepted steps plus the
/// step diagnostics that produced it.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm_j: f64,
    pub tau: f64,
    pub feas_violation: f64,
    pub newton_iters: usize,
    pub isotopy_pass: bool,
    /// Wall time spent since the previous row; not deterministic.
    pub wall_ms: f64,
    /// Backtracking diagnostics of the producing step (0 for the first row).
    pub restoration_failures: u32,
    pub armijo_failures: u32,
    pub certificate_failures: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Projected gradient norm fell below tol_grad times its initial value.
    GradientConverged,
    /// No numerically meaningful descent direction exists.
    CriticalPoint,
    /// max_iters accepted steps were taken.
    IterationBudget,
    /// Backtracking exhausted the step size.
    StepsizeUnderflow,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::GradientConverged => "gradient tolerance reached",
            StopReason::CriticalPoint => "critical point",
            StopReason::IterationBudget => "iteration budget",
            StopReason::StepsizeUnderflow => "step size underflow",
        };
        f.write_str(s)
    }
}

#[derive(Debug)]
pub struct FlowResult {
    pub polyline: Polyline,
    pub trace: Vec<TraceRow>,
    pub stop: StopReason,
}

/// Mutable driver state across accepted steps.
pub struct FlowState {
    pub polyline: Polyline,
    pub reference_strain: StrainVector,
    pub reference_barycenter: Vec<f64>,
    pub tau: f64,
    pub iter: usize,
    pub trace: Vec<TraceRow>,
}

/// Explicit Euler predictor: vertexwise P − τ g.
pub fn predictor(p: &Polyline, g: &DVector<f64>, tau: f64) -> Polyline {
    let points: Vec<f64> = p
        .points_flat()
        .iter()
        .zip(g.iter())
        .map(|(x, gi)| x - tau * gi)
        .collect();
    p.with_points(points).expect("same layout as input")
}

/// Modified Newton restoration: iterate Q ← Q − v with v solved from the
/// saddle system factorized at the step's base point (the matrix is not
/// updated). Returns the restored polyline and the number of iterations.
pub fn restore_feasibility(
    q0: &Polyline,
    sys: &SaddleSystem,
    reference: &StrainVector,
    cfg: &FlowConfig,
) -> Result<(Polyline, usize)> {
    let mut q = q0.clone();
    let mut violation = log_strain(&q)?.values() - reference.values();
    if violation.amax() <= cfg.tol_feas {
        return Ok((q, 0));
    }
    for k in 1..=cfg.max_newton {
        let (v, _, _) = sys.solve_restoration(&violation)?;
        let points: Vec<f64> = q
            .points_flat()
            .iter()
            .zip(v.iter())
            .map(|(x, vi)| x - vi)
            .collect();
        q = q.with_points(points)?;
        violation = log_strain(&q)?.values() - reference.values();
        let linf = violation.amax();
        if !linf.is_finite() {
            return Err(CurveError::RestorationDiverged {
                iters: k,
                violation: linf,
            });
        }
        if linf <= cfg.tol_feas {
            return Ok((q, k));
        }
    }
    Err(CurveError::RestorationDiverged {
        iters: cfg.max_newton,
        violation: violation.amax(),
    })
}

/// Result of one accepted step.
pub struct AcceptedStep {
    pub polyline: Polyline,
    pub tau: f64,
    pub energy: f64,
    pub newton_iters: usize,
    pub certificate: Option<HomotopyCertificate>,
    pub restoration_failures: u32,
    pub armijo_failures: u32,
    pub certificate_failures: u32,
}

/// Backtracking step: find the first τ (starting from the grown previous
/// step size, shrinking by the backtrack factor) for which restoration
/// succeeds, the Armijo condition φ(τ) ≤ φ(0) + σ τ φ'(0) holds with
/// φ'(0) = −⟨DE, g⟩ = −|g|²_J, and the isotopy certificate passes.
pub fn armijo_step(
    state: &mut FlowState,
    sys: &SaddleSystem,
    report: &EnergyReport,
    g: &DVector<f64>,
    params: &EnergyParams,
    cfg: &FlowConfig,
) -> Result<AcceptedStep> {
    let descent_rate = report.differential.dot(g);
    let grad_norm_j = descent_rate.max(0.0).sqrt();
    if !(descent_rate > 0.0) || grad_norm_j <= NO_DESCENT_RATIO * report.differential.norm() {
        return Err(CurveError::NoDescent);
    }

    let mut restoration_failures = 0u32;
    let mut armijo_failures = 0u32;
    let mut certificate_failures = 0u32;
    let mut tau = if state.iter == 0 {
        cfg.tau_init
    } else {
        state.tau * cfg.step_grow_factor
    };

    loop {
        if tau < cfg.tau_min {
            return Err(CurveError::StepsizeUnderflow {
                tau,
                tau_min: cfg.tau_min,
            });
        }
        let q0 = predictor(&state.polyline, g, tau);
        let restored = match restore_feasibility(&q0, sys, &state.reference_strain, cfg) {
            Ok(r) => r,
            Err(CurveError::RestorationDiverged { .. })
            | Err(CurveError::DegenerateEdge { .. }) => {
                restoration_failures += 1;
                tau *= cfg.backtrack_factor;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (q, newton_iters) = restored;

        let energy_new = match total_energy(&q, params) {
            Ok(e) => e,
            Err(CurveError::MidpointCollision { .. }) => {
                armijo_failures += 1;
                tau *= cfg.backtrack_factor;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !(energy_new <= report.value - cfg.sigma_armijo * tau * descent_rate) {
            armijo_failures += 1;
            tau *= cfg.backtrack_factor;
            continue;
        }

        let certificate = if cfg.isotopy_check {
            let cert = certify_isotopy(&state.polyline, &q, &cfg.isotopy_policy)?;
            if !cert.passed {
                certificate_failures += 1;
                tau *= cfg.backtrack_factor;
                continue;
            }
            Some(cert)
        } else {
            None
        };

        state.tau = tau;
        return Ok(AcceptedStep {
            polyline: q,
            tau,
            energy: energy_new,
            newton_iters,
            certificate,
            restoration_failures,
            armijo_failures,
            certificate_failures,
        });
    }
}

/// Run the discrete flow from `p0` until the gradient tolerance, a critical
/// point, step-size underflow, or the iteration budget is reached.
pub fn run_flow(p0: &Polyline, params: &EnergyParams, cfg: &FlowConfig) -> Result<FlowResult> {
    run_flow_with_observer(p0, params, cfg, |_, _| {})
}

/// Like [`run_flow`], invoking `observe` with the current polyline right
/// after each trace row is recorded (used for frame export).
pub fn run_flow_with_observer<F>(
    p0: &Polyline,
    params: &EnergyParams,
    cfg: &FlowConfig,
    mut observe: F,
) -> Result<FlowResult>
where
    F: FnMut(&Polyline, &TraceRow),
{
    cfg.validate()?;
    let contact_tol = cfg.isotopy_policy.contact_tol_rel * p0.diameter();
    if let Some((a, b)) = self_intersection(p0, contact_tol) {
        return Err(CurveError::InvalidInitialCurve(a, b));
    }
    let reference_strain = log_strain(p0)?;
    let reference_barycenter = p0.barycenter();
    // The Gagliardo matrix depends only on the partition, which the flow
    // never changes, so it is assembled once up front.
    let gagliardo = assemble_gagliardo(p0, params)?;

    let mut state = FlowState {
        polyline: p0.clone(),
        reference_strain,
        reference_barycenter,
        tau: cfg.tau_init,
        iter: 0,
        trace: Vec::new(),
    };
    let mut mark = Instant::now();
    let mut elapsed_ms = || {
        let ms = mark.elapsed().as_secs_f64() * 1e3;
        mark = Instant::now();
        ms
    };

    if cfg.max_iters == 0 {
        let energy = total_energy(&state.polyline, params)?;
        state.trace.push(TraceRow {
            iter: 0,
            energy,
            grad_norm_j: 0.0,
            tau: state.tau,
            feas_violation: 0.0,
            newton_iters: 0,
            isotopy_pass: true,
            wall_ms: elapsed_ms(),
            restoration_failures: 0,
            armijo_failures: 0,
            certificate_failures: 0,
        });
        observe(&state.polyline, state.trace.last().expect("row pushed"));
        return Ok(FlowResult {
            polyline: state.polyline,
            trace: state.trace,
            stop: StopReason::IterationBudget,
        });
    }

    let mut initial_grad_norm = f64::INFINITY;
    // diagnostics of the step that produced the current state
    let mut last_step: Option<AcceptedStep> = None;

    let stop = loop {
        let report = energy_differential(&state.polyline, params)?;
        let strain_jac = log_strain_jacobian(&state.polyline)?;
        let bary_jac = barycenter_jacobian(state.polyline.partition(), state.polyline.dim());
        let mut sys = assemble_saddle(&gagliardo, &strain_jac, &bary_jac)?;
        sys.factorize()?;
        let (g, _, _) = sys.solve_projected_gradient(&report.differential)?;
        let grad_norm_j = report.differential.dot(&g).max(0.0).sqrt();
        if state.iter == 0 {
            initial_grad_norm = grad_norm_j;
        }

        let feas_violation = constraint_violation(&state.polyline, &state.reference_strain)?;
        state.trace.push(TraceRow {
            iter: state.iter,
            energy: report.value,
            grad_norm_j,
            tau: state.tau,
            feas_violation,
            newton_iters: last_step.as_ref().map_or(0, |s| s.newton_iters),
            isotopy_pass: last_step
                .as_ref()
                .and_then(|s| s.certificate.as_ref())
                .is_none_or(|c| c.passed),
            wall_ms: elapsed_ms(),
            restoration_failures: last_step.as_ref().map_or(0, |s| s.restoration_failures),
            armijo_failures: last_step.as_ref().map_or(0, |s| s.armijo_failures),
            certificate_failures: last_step.as_ref().map_or(0, |s| s.certificate_failures),
        });
        observe(&state.polyline, state.trace.last().expect("row pushed"));

        if grad_norm_j <= cfg.tol_grad * initial_grad_norm {
            break StopReason::GradientConverged;
        }
        if state.iter >= cfg.max_iters {
            break StopReason::IterationBudget;
        }

        match armijo_step(&mut state, &sys, &report, &g, params, cfg) {
            Ok(step) => {
                state.polyline = step.polyline.clone();
                state.iter += 1;
                last_step = Some(step);
            }
            Err(CurveError::NoDescent) => break StopReason::CriticalPoint,
            Err(CurveError::StepsizeUnderflow { .. }) => break StopReason::StepsizeUnderflow,
            Err(e) => return Err(e),
        }
    };

    Ok(FlowResult {
        polyline: state.polyline,
        trace: state.trace,
        stop,
    })
}
