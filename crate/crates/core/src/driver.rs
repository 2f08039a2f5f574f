//! Explicit time-stepping driver shared by both schemes: CFL-limited
//! forward-Euler steps, exact landing on snapshot times and the final time,
//! per-step diagnostics, and a dt-halving retry when a step loses
//! positivity.

use crate::error::{Error, Result};
use crate::field::ConservedField;
use crate::flm::{entropy_diagnostic, flm_step, stable_dt, FlmParams, SchemeVariant};
use crate::gas::GasModel;
use crate::grp::{grp_step, GrpParams};
use crate::scalar::Scalar;

/// Which scheme advances the state.
#[derive(Clone, Copy, Debug)]
pub enum Scheme<S> {
    Flm(FlmParams<S>),
    Grp(GrpParams<S>),
}

impl<S: Scalar> Scheme<S> {
    pub fn cfl(&self) -> S {
        match self {
            Scheme::Flm(p) => p.cfl,
            Scheme::Grp(p) => p.cfl,
        }
    }

    /// Stable identifier used in configs and output headers.
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Flm(p) => match p.variant {
                SchemeVariant::Flm => "flm",
                SchemeVariant::PlainUpwind => "upwind",
            },
            Scheme::Grp(_) => "grp",
        }
    }

    pub fn step(
        &self,
        state: &ConservedField<S>,
        gas: &GasModel<S>,
        dt: S,
    ) -> Result<ConservedField<S>> {
        match self {
            Scheme::Flm(p) => flm_step(state, p, gas, dt),
            Scheme::Grp(p) => grp_step(state, p, gas, dt),
        }
    }
}

/// One row of the diagnostics trace (the diagnostics-CSV schema).
#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub step: u64,
    /// Time after the step.
    pub time: f64,
    pub dt: f64,
    pub total_mass: f64,
    pub total_energy: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub min_s: f64,
    pub entropy_residual: f64,
}

/// Observation hooks for a run. Snapshot times outside [0, t_end] are
/// ignored; time 0 snapshots fire on the initial state.
pub struct Observers<'a, S> {
    pub snapshot_times: Vec<S>,
    /// Cap for χ(s) = min(s, chi_cap) in the per-step entropy residual.
    pub chi_cap: S,
    pub on_snapshot: Option<Box<dyn FnMut(&ConservedField<S>, S) -> Result<()> + 'a>>,
    pub on_step: Option<Box<dyn FnMut(&StepRecord) -> Result<()> + 'a>>,
}

impl<S: Scalar> Observers<'_, S> {
    pub fn none() -> Self {
        Self {
            snapshot_times: Vec::new(),
            chi_cap: S::infinity(),
            on_snapshot: None,
            on_step: None,
        }
    }
}

impl<S: Scalar> Default for Observers<'_, S> {
    fn default() -> Self {
        Self::none()
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutput<S> {
    pub state: ConservedField<S>,
    pub records: Vec<StepRecord>,
    pub time: S,
}

/// How many times one step may halve dt after a positivity rejection.
pub const RETRY_BUDGET: u32 = 8;

/// Advances `initial` to `t_end`.
///
/// Each step uses the CFL-stable dt, clipped so the run lands exactly on
/// the next snapshot time and on t_end (the target time is assigned, not
/// accumulated). A rejected step retries with halved dt up to
/// [`RETRY_BUDGET`] times before giving up.
pub fn run<S: Scalar>(
    initial: &ConservedField<S>,
    scheme: &Scheme<S>,
    gas: &GasModel<S>,
    t_end: S,
    observers: &mut Observers<'_, S>,
) -> Result<RunOutput<S>> {
    if !(t_end > S::zero()) || !t_end.is_finite() {
        return Err(Error::Param(format!(
            "t_end must be positive, got {}",
            t_end.to_f64_lossy()
        )));
    }
    initial.validate(gas)?;

    let mut snap_times: Vec<S> = observers
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= S::zero() && s <= t_end)
        .collect();
    snap_times.sort_by(|a, b| a.partial_cmp(b).expect("snapshot times are finite"));
    snap_times.dedup();
    let mut snap_idx = 0;

    let mut state = initial.clone();
    let mut t = S::zero();
    let mut step: u64 = 0;
    let mut records = Vec::new();

    emit_due(&snap_times, &mut snap_idx, &state, t, observers)?;

    while t < t_end {
        let dt_stable = stable_dt(&state, scheme.cfl(), gas)?;
        // Aim at the nearest of (next snapshot, t_end).
        let aim = if snap_idx < snap_times.len() {
            snap_times[snap_idx].min(t_end)
        } else {
            t_end
        };
        let remaining = aim - t;
        let mut dt = dt_stable.min(remaining);
        let mut lands = dt >= remaining;

        let mut attempts = 0;
        let next = loop {
            match scheme.step(&state, gas, dt) {
                Ok(next) => break next,
                Err(Error::StepRejected { .. }) if attempts < RETRY_BUDGET => {
                    attempts += 1;
                    dt = S::half() * dt;
                    lands = false;
                }
                Err(Error::StepRejected { .. }) => {
                    return Err(Error::RetryBudgetExhausted {
                        time: t.to_f64_lossy(),
                    });
                }
                Err(other) => return Err(other),
            }
        };

        let new_t = if lands { aim } else { t + dt };
        if !(new_t > t) {
            return Err(Error::Param(format!(
                "time step underflow at t = {}",
                t.to_f64_lossy()
            )));
        }
        step += 1;

        let residual = entropy_diagnostic(&state, &next, dt, gas, observers.chi_cap)?;
        let totals = next.totals();
        let record = StepRecord {
            step,
            time: new_t.to_f64_lossy(),
            dt: dt.to_f64_lossy(),
            total_mass: totals.mass.to_f64_lossy(),
            total_energy: totals.energy.to_f64_lossy(),
            min_rho: next.min_density().to_f64_lossy(),
            min_p: next.min_pressure(gas).to_f64_lossy(),
            min_s: next.min_specific_entropy(gas)?.to_f64_lossy(),
            entropy_residual: residual.to_f64_lossy(),
        };
        if let Some(cb) = observers.on_step.as_mut() {
            cb(&record)?;
        }
        records.push(record);

        state = next;
        t = new_t;
        emit_due(&snap_times, &mut snap_idx, &state, t, observers)?;
    }

    Ok(RunOutput {
        state,
        records,
        time: t,
    })
}

fn emit_due<S: Scalar>(
    snap_times: &[S],
    snap_idx: &mut usize,
    state: &ConservedField<S>,
    t: S,
    observers: &mut Observers<'_, S>,
) -> Result<()> {
    while *snap_idx < snap_times.len() && snap_times[*snap_idx] <= t {
        if let Some(cb) = observers.on_snapshot.as_mut() {
            cb(state, snap_times[*snap_idx])?;
        }
        *snap_idx += 1;
    }
    Ok(())
}

/// Runs the first-order scheme (full or plain-upwind variant).
pub fn run_flm<S: Scalar>(
    initial: &ConservedField<S>,
    params: &FlmParams<S>,
    gas: &GasModel<S>,
    t_end: S,
    observers: &mut Observers<'_, S>,
) -> Result<RunOutput<S>> {
    run(initial, &Scheme::Flm(*params), gas, t_end, observers)
}

/// Runs the second-order scheme.
pub fn run_grp<S: Scalar>(
    initial: &ConservedField<S>,
    params: &GrpParams<S>,
    gas: &GasModel<S>,
    t_end: S,
    observers: &mut Observers<'_, S>,
) -> Result<RunOutput<S>> {
    run(initial, &Scheme::Grp(*params), gas, t_end, observers)
}
