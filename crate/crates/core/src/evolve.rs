//! Time stepping of `∂₀ M0 u + M1 u + A u = F` with energy and causality
//! diagnostics.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{OpError, Result};
use crate::linops::{is_skew_selfadjoint, DenseLu, MatrixOperator, SpaceTag};
use crate::matlaw::{check_wellposed, implicit_step_matrix, schur_reduce, MaterialLaw};
use crate::subspaces::{range_kernel_split, ProjectionPair};

type ForcingFn = dyn Fn(f64) -> DVector<f64> + Send + Sync;

/// Right-hand side `t ↦ F(t)`.
#[derive(Clone)]
pub struct Forcing(Option<Arc<ForcingFn>>);

impl Forcing {
    pub fn zero() -> Self {
        Self(None)
    }

    pub fn from_fn(f: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        Self(Some(Arc::new(f)))
    }

    /// `profile` switched on at `onset`, zero before.
    pub fn switched_on(onset: f64, profile: DVector<f64>) -> Self {
        let zero = DVector::zeros(profile.len());
        Self::from_fn(move |t| {
            if t >= onset {
                profile.clone()
            } else {
                zero.clone()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_none()
    }

    pub fn eval(&self, t: f64, dim: usize) -> DVector<f64> {
        match &self.0 {
            None => DVector::zeros(dim),
            Some(f) => f(t),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.is_some() {
            "Forcing(fn)"
        } else {
            "Forcing(0)"
        })
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionaryProblem {
    pub law: MaterialLaw,
    pub a: MatrixOperator,
    pub forcing: Forcing,
    pub initial: DVector<f64>,
}

impl EvolutionaryProblem {
    pub fn new(
        law: MaterialLaw,
        a: MatrixOperator,
        forcing: Forcing,
        initial: DVector<f64>,
    ) -> Result<Self> {
        law.space()
            .ensure_same(a.domain(), "evolutionary problem (A and law)")?;
        if initial.len() != a.ncols() {
            return Err(OpError::Shape(format!(
                "initial state has length {}, space has dimension {}",
                initial.len(),
                a.ncols()
            )));
        }
        if !is_skew_selfadjoint(&a, 1e-12 * a.max_abs().max(1.0))? {
            return Err(OpError::Structural("A is not skew-selfadjoint".into()));
        }
        Ok(Self {
            law,
            a,
            forcing,
            initial,
        })
    }

    pub fn space(&self) -> &SpaceTag {
        self.law.space()
    }

    pub fn with_initial(mut self, u0: DVector<f64>) -> Result<Self> {
        if u0.len() != self.initial.len() {
            return Err(OpError::Shape("initial state has the wrong length".into()));
        }
        self.initial = u0;
        Ok(self)
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Exponential weight of the diagnostic norm.
    pub nu: f64,
    /// Skip the structural well-posedness gate (used for laws known good).
    pub skip_wellposed_check: bool,
}

impl SolverConfig {
    pub fn new(tau: f64, t_end: f64, scheme: Scheme) -> Self {
        Self {
            tau,
            t_end,
            scheme,
            nu: 0.0,
            skip_wellposed_check: false,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.tau - 1e-9).ceil().max(0.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(OpError::InvalidArgument(format!(
                "time step must be positive, got {}",
                self.tau
            )));
        }
        if !(self.t_end >= 0.0) || !(self.nu >= 0.0) {
            return Err(OpError::InvalidArgument(
                "t_end and nu must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub energies: Vec<f64>,
    pub scheme: Scheme,
    pub tau: f64,
}

/// `½ <M0 u, u>`.
pub fn energy(m0: &MatrixOperator, u: &DVector<f64>) -> f64 {
    0.5 * m0
        .domain()
        .inner(&m0.apply(u).expect("state matches law"), u)
}

pub fn energy_series(traj: &Trajectory, m0: &MatrixOperator) -> Vec<f64> {
    traj.states.iter().map(|u| energy(m0, u)).collect()
}

/// The two matrices of one step: `lhs u⁺ = rhs u + F`.
struct Stepper {
    lhs: MatrixOperator,
    rhs: DMatrix<f64>,
    scheme: Scheme,
    tau: f64,
}

impl Stepper {
    fn new(law: &MaterialLaw, a: &MatrixOperator, tau: f64, scheme: Scheme) -> Result<Self> {
        let m0t = law.m0.scale(1.0 / tau);
        let (lhs, rhs) = match scheme {
            Scheme::ImplicitEuler => (implicit_step_matrix(law, a, tau)?, m0t),
            Scheme::CrankNicolson => {
                let half = law.m1.add(a)?.scale(0.5);
                (m0t.add(&half)?, m0t.sub(&half)?)
            }
        };
        Ok(Self {
            lhs,
            rhs: rhs.to_dense(),
            scheme,
            tau,
        })
    }

    fn forcing_time(&self, t: f64) -> f64 {
        match self.scheme {
            Scheme::ImplicitEuler => t + self.tau,
            Scheme::CrankNicolson => t + 0.5 * self.tau,
        }
    }
}

fn gate(problem: &EvolutionaryProblem, config: &SolverConfig) -> Result<()> {
    config.validate()?;
    if !config.skip_wellposed_check {
        let report = check_wellposed(&problem.law, 1e-12)?;
        if !report.passed() {
            return Err(OpError::NotWellPosed(format!("{report:?}")));
        }
    }
    Ok(())
}

fn run(
    problem: &EvolutionaryProblem,
    config: &SolverConfig,
    mut advance: impl FnMut(&DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>,
    stepper: &Stepper,
) -> Result<Trajectory> {
    let n = problem.initial.len();
    let steps = config.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut u = problem.initial.clone();
    times.push(0.0);
    states.push(u.clone());
    for k in 0..steps {
        let t = k as f64 * config.tau;
        let b = &stepper.rhs * &u + problem.forcing.eval(stepper.forcing_time(t), n);
        u = advance(&u, &b)?;
        times.push((k + 1) as f64 * config.tau);
        states.push(u.clone());
    }
    let energies = states.iter().map(|s| energy(&problem.law.m0, s)).collect();
    Ok(Trajectory {
        times,
        states,
        energies,
        scheme: config.scheme,
        tau: config.tau,
    })
}

/// Steps the full system; the step matrix is factored once.
pub fn solve(problem: &EvolutionaryProblem, config: &SolverConfig) -> Result<Trajectory> {
    gate(problem, config)?;
    let stepper = Stepper::new(&problem.law, &problem.a, config.tau, config.scheme)?;
    let lu = DenseLu::new(stepper.lhs.to_dense(), "step matrix")?;
    run(problem, config, |_, b| Ok(lu.solve(b)), &stepper)
}

/// Steps the Schur complement on `range(A)` and recovers the kernel part
/// each step. `split` defaults to the singular value split of `A`.
pub fn solve_reduced(
    problem: &EvolutionaryProblem,
    config: &SolverConfig,
    split: Option<(ProjectionPair, ProjectionPair)>,
) -> Result<Trajectory> {
    gate(problem, config)?;
    let (range, kernel) = match split {
        Some(s) => s,
        None => match range_kernel_split(&problem.a, None)? {
            (Some(r), Some(k)) => (r, k),
            _ => return solve(problem, config),
        },
    };
    let stepper = Stepper::new(&problem.law, &problem.a, config.tau, config.scheme)?;
    let (reduced, recipe) = schur_reduce(&stepper.lhs, &range, &kernel)?;
    let lu = DenseLu::new(reduced.to_dense(), "reduced step matrix")?;
    run(
        problem,
        config,
        |_, b| {
            let (f_r, f_k) = recipe.split(b)?;
            let x_r = lu.solve(&recipe.reduce_rhs(&f_r, &f_k));
            let x_k = recipe.reconstruct(&f_k, &x_r);
            recipe.assemble(&x_r, &x_k)
        },
        &stepper,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipationReport {
    /// Largest `|E_{n+1} - E_n + τ <sym(M1) u_{n+½}, u_{n+½}>|`, relative to `max E`.
    pub max_identity_residual: f64,
    pub nonincreasing: bool,
    pub strictly_decreasing: bool,
    /// `max |E_n - E_0| / E_0`.
    pub max_relative_drift: f64,
}

/// Checks the discrete energy balance of a Crank–Nicolson run without forcing.
pub fn dissipation_check(traj: &Trajectory, law: &MaterialLaw) -> Result<DissipationReport> {
    if traj.scheme != Scheme::CrankNicolson {
        return Err(OpError::InvalidArgument(
            "the energy balance is exact only for Crank–Nicolson".into(),
        ));
    }
    let e = energy_series(traj, &law.m0);
    let scale = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut residual: f64 = 0.0;
    for (k, w) in traj.states.windows(2).enumerate() {
        let mid = (&w[0] + &w[1]) * 0.5;
        let diss = law.space().inner(&law.m1.apply(&mid)?, &mid);
        residual = residual.max((e[k + 1] - e[k] + traj.tau * diss).abs());
    }
    let e0 = e[0];
    Ok(DissipationReport {
        max_identity_residual: if scale > 0.0 {
            residual / scale
        } else {
            residual
        },
        nonincreasing: e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)),
        strictly_decreasing: e.windows(2).all(|w| w[1] < w[0]),
        max_relative_drift: if e0 > 0.0 {
            e.iter().map(|v| (v - e0).abs()).fold(0.0, f64::max) / e0
        } else {
            e.iter().map(|v| v.abs()).fold(0.0, f64::max)
        },
    })
}

/// Runs from zero data with forcing that vanishes before `t0`; true iff every
/// state strictly before `t0` is at most `1e-13 · max |F|`.
pub fn causality_check(
    problem: &EvolutionaryProblem,
    config: &SolverConfig,
    t0: f64,
) -> Result<bool> {
    if problem.initial.amax() != 0.0 {
        return Err(OpError::Precondition(
            "causality check needs zero initial data".into(),
        ));
    }
    let n = problem.initial.len();
    let space = problem.space();
    let samples: Vec<f64> = (0..=2 * config.steps())
        .map(|k| 0.5 * k as f64 * config.tau)
        .collect();
    let mut fmax: f64 = 0.0;
    for &t in &samples {
        let f = problem.forcing.eval(t, n);
        let nf = space.norm(&f);
        if t < t0 && nf != 0.0 {
            return Err(OpError::Precondition(format!(
                "forcing is nonzero at t = {t} < t0 = {t0}"
            )));
        }
        fmax = fmax.max(nf);
    }
    let traj = solve(problem, config)?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t < t0)
        .all(|(_, u)| space.norm(u) <= 1e-13 * fmax))
}

/// Trapezoidal `(∫ |u(t)|² e^{-2νt} dt)^{1/2}` over the trajectory.
pub fn weighted_norm(traj: &Trajectory, space: &SpaceTag, nu: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(OpError::InvalidArgument("nu must be nonnegative".into()));
    }
    Ok(weighted_partial_norms(traj, space, nu)
        .last()
        .copied()
        .unwrap_or(0.0))
}

/// Running values of [`weighted_norm`] up to each time.
pub fn weighted_partial_norms(traj: &Trajectory, space: &SpaceTag, nu: f64) -> Vec<f64> {
    let density: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, u)| space.inner(u, u) * (-2.0 * nu * t).exp())
        .collect();
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for k in 1..density.len() {
        acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (density[k] + density[k - 1]);
        out.push(acc.sqrt());
    }
    out
}
