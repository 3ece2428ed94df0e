//! Explicit time stepping of the cross-diffusion system
//!
//! ```text
//! U' = U + Δt ∇_h·(G (d11 ∇_h U + d12 ∇_h V))
//! V' = V + Δt ∇_h·(G (d21 ∇_h U + d22 ∇_h V))
//! ```
//!
//! with `G = g(w)` evaluated on the edge variable `w`.
//!
//! Two differencing rules are provided. [`Scheme::FluxForm`] forms fluxes on
//! cell edges from forward differences, averages `G` onto the edge and takes
//! the staggered divergence; with reflecting boundaries the boundary fluxes
//! vanish and channel sums are conserved to rounding. [`Scheme::CentralLiteral`]
//! composes two node-centred central differences exactly as written above.

use std::fmt::Write as _;
use std::str::FromStr;

use log::warn;

use crate::diffusion::{symmetric_eigenvalues, DiffusionMatrix, EdgeStopping};
use crate::error::{Error, Result};
use crate::field::{BoundaryMode, ChannelPair, ImageGrid, ScalarField};
use crate::regularize::{edge_variable, EdgeVariableStrategy};

/// Differencing rule for the divergence-of-flux operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    FluxForm,
    CentralLiteral,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fluxform" | "flux" => Ok(Scheme::FluxForm),
            "central" | "centralliteral" => Ok(Scheme::CentralLiteral),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub matrix: DiffusionMatrix,
    pub edge_stopping: EdgeStopping,
    pub strategy: EdgeVariableStrategy,
    pub boundary: BoundaryMode,
    pub dt: f64,
    pub scheme: Scheme,
}

impl SolverConfig {
    /// Raw edge variable, reflecting boundaries, flux form, Δt = 0.05.
    pub fn new(matrix: DiffusionMatrix, edge_stopping: EdgeStopping) -> Self {
        Self {
            matrix,
            edge_stopping,
            strategy: EdgeVariableStrategy::Raw,
            boundary: BoundaryMode::Reflect,
            dt: 0.05,
            scheme: Scheme::FluxForm,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_strategy(mut self, strategy: EdgeVariableStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        self.matrix.validated()?;
        self.strategy.validate()
    }
}

/// Two components per pixel, node-centred.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: ImageGrid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Fluxes on cell edges. `x[index(i, j)]` sits on the edge between `(i, j)`
/// and `(i + 1, j)`, `y[index(i, j)]` between `(i, j)` and `(i, j + 1)`. The
/// last column (row) holds the edge that leaves the grid: it wraps under
/// periodic boundaries and carries no flux under reflecting ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFlux {
    pub grid: ImageGrid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Flux handed to [`discrete_divergence`].
#[derive(Debug, Clone, PartialEq)]
pub enum Flux {
    Nodal(VectorField),
    Staggered(EdgeFlux),
}

#[inline]
fn neighbour(k: usize, n: usize, mode: BoundaryMode, forward: bool) -> usize {
    let k = k as isize + if forward { 1 } else { -1 };
    mode.resolve(k, n).expect("one ghost layer")
}

/// Central differences `((W[i+1] − W[i−1]) / 2h, (W[j+1] − W[j−1]) / 2h)`
/// with ghost values taken from `mode`.
pub fn discrete_gradient(field: &ScalarField, mode: BoundaryMode) -> VectorField {
    let grid = *field.grid();
    let (w, hgt) = (grid.width(), grid.height());
    let inv = 1.0 / (2.0 * grid.h());
    let mut x = vec![0.0; grid.len()];
    let mut y = vec![0.0; grid.len()];
    for j in 0..hgt {
        let (jm, jp) = (neighbour(j, hgt, mode, false), neighbour(j, hgt, mode, true));
        for i in 0..w {
            let (im, ip) = (neighbour(i, w, mode, false), neighbour(i, w, mode, true));
            let k = grid.index(i, j);
            x[k] = (field.get(ip, j) - field.get(im, j)) * inv;
            y[k] = (field.get(i, jp) - field.get(i, jm)) * inv;
        }
    }
    VectorField { grid, x, y }
}

/// Forward differences across every edge, `(W[i+1] − W[i]) / h`.
pub fn edge_gradient(field: &ScalarField, mode: BoundaryMode) -> EdgeFlux {
    let grid = *field.grid();
    let (w, hgt) = (grid.width(), grid.height());
    let inv = 1.0 / grid.h();
    let mut x = vec![0.0; grid.len()];
    let mut y = vec![0.0; grid.len()];
    for j in 0..hgt {
        let jp = neighbour(j, hgt, mode, true);
        for i in 0..w {
            let ip = neighbour(i, w, mode, true);
            let k = grid.index(i, j);
            let c = field.get(i, j);
            x[k] = (field.get(ip, j) - c) * inv;
            y[k] = (field.get(i, jp) - c) * inv;
        }
    }
    EdgeFlux { grid, x, y }
}

/// Arithmetic mean of the two nodal values adjacent to each edge.
pub fn edge_average(field: &ScalarField, mode: BoundaryMode) -> EdgeFlux {
    let grid = *field.grid();
    let (w, hgt) = (grid.width(), grid.height());
    let mut x = vec![0.0; grid.len()];
    let mut y = vec![0.0; grid.len()];
    for j in 0..hgt {
        let jp = neighbour(j, hgt, mode, true);
        for i in 0..w {
            let ip = neighbour(i, w, mode, true);
            let k = grid.index(i, j);
            let c = field.get(i, j);
            x[k] = 0.5 * (c + field.get(ip, j));
            y[k] = 0.5 * (c + field.get(i, jp));
        }
    }
    EdgeFlux { grid, x, y }
}

/// Staggered divergence `(Fx[i+½] − Fx[i−½]) / h + (Fy[j+½] − Fy[j−½]) / h`.
pub fn divergence_staggered(flux: &EdgeFlux, mode: BoundaryMode) -> ScalarField {
    let grid = flux.grid;
    let (w, hgt) = (grid.width(), grid.height());
    let inv = 1.0 / grid.h();
    let reflect = mode == BoundaryMode::Reflect;
    let mut out = vec![0.0; grid.len()];
    for j in 0..hgt {
        for i in 0..w {
            let k = grid.index(i, j);
            let east = if reflect && i == w - 1 { 0.0 } else { flux.x[k] };
            let west = match (i, reflect) {
                (0, true) => 0.0,
                (0, false) => flux.x[grid.index(w - 1, j)],
                _ => flux.x[k - 1],
            };
            let south = if reflect && j == hgt - 1 { 0.0 } else { flux.y[k] };
            let north = match (j, reflect) {
                (0, true) => 0.0,
                (0, false) => flux.y[grid.index(i, hgt - 1)],
                _ => flux.y[k - w],
            };
            out[k] = (east - west) * inv + (south - north) * inv;
        }
    }
    ScalarField::from_raw(grid, out)
}

/// Central differences of node-centred flux components.
pub fn divergence_central(flux: &VectorField, mode: BoundaryMode) -> ScalarField {
    let grid = flux.grid;
    let fx = ScalarField::from_raw(grid, flux.x.clone());
    let fy = ScalarField::from_raw(grid, flux.y.clone());
    let gx = discrete_gradient(&fx, mode);
    let gy = discrete_gradient(&fy, mode);
    ScalarField::from_raw(grid, gx.x.iter().zip(&gy.y).map(|(a, b)| a + b).collect())
}

pub fn discrete_divergence(flux: &Flux, mode: BoundaryMode) -> ScalarField {
    match flux {
        Flux::Nodal(f) => divergence_central(f, mode),
        Flux::Staggered(f) => divergence_staggered(f, mode),
    }
}

/// `G·d` applied to the gradient pair, component by component.
fn mix(g: &[f64], a: &[f64], b: &[f64], c1: f64, c2: f64) -> Vec<f64> {
    g.iter()
        .zip(a.iter().zip(b))
        .map(|(&g, (&a, &b))| g * (c1 * a + c2 * b))
        .collect()
}

/// Right-hand sides `(∇·(G(d11∇U + d12∇V)), ∇·(G(d21∇U + d22∇V)))`.
fn rhs(pair: &ChannelPair, config: &SolverConfig) -> Result<(ScalarField, ScalarField)> {
    let d = &config.matrix;
    let mode = config.boundary;
    let w = edge_variable(pair, &config.strategy, d)?;
    let g = w.map(|x| config.edge_stopping.eval(x));
    let out = match config.scheme {
        Scheme::FluxForm => {
            let ge = edge_average(&g, mode);
            let du = edge_gradient(pair.u(), mode);
            let dv = edge_gradient(pair.v(), mode);
            let grid = ge.grid;
            let fu = EdgeFlux {
                grid,
                x: mix(&ge.x, &du.x, &dv.x, d.d11, d.d12),
                y: mix(&ge.y, &du.y, &dv.y, d.d11, d.d12),
            };
            let fv = EdgeFlux {
                grid,
                x: mix(&ge.x, &du.x, &dv.x, d.d21, d.d22),
                y: mix(&ge.y, &du.y, &dv.y, d.d21, d.d22),
            };
            (divergence_staggered(&fu, mode), divergence_staggered(&fv, mode))
        }
        Scheme::CentralLiteral => {
            let gv = g.values();
            let du = discrete_gradient(pair.u(), mode);
            let dv = discrete_gradient(pair.v(), mode);
            let grid = du.grid;
            let fu = VectorField {
                grid,
                x: mix(gv, &du.x, &dv.x, d.d11, d.d12),
                y: mix(gv, &du.y, &dv.y, d.d11, d.d12),
            };
            let fv = VectorField {
                grid,
                x: mix(gv, &du.x, &dv.x, d.d21, d.d22),
                y: mix(gv, &du.y, &dv.y, d.d21, d.d22),
            };
            (divergence_central(&fu, mode), divergence_central(&fv, mode))
        }
    };
    Ok(out)
}

fn advance(pair: &ChannelPair, config: &SolverConfig, step_index: usize) -> Result<ChannelPair> {
    let (ru, rv) = rhs(pair, config)?;
    let dt = config.dt;
    let update = |field: &ScalarField, rate: &ScalarField| {
        let mut next = field.clone();
        for (x, r) in next.values_mut().iter_mut().zip(rate.values()) {
            *x += dt * r;
        }
        next
    };
    let next = ChannelPair::new(update(pair.u(), &ru), update(pair.v(), &rv))?;
    if !next.is_finite() {
        return Err(Error::NonFiniteState { step: step_index });
    }
    Ok(next)
}

/// One explicit step.
pub fn step(pair: &ChannelPair, config: &SolverConfig) -> Result<ChannelPair> {
    config.validate()?;
    advance(pair, config, 1)
}

/// Largest generalized eigenvalue of `dᵀd` relative to `d + dᵀ`.
fn energy_ratio(d: &DiffusionMatrix) -> f64 {
    let (s11, s12, s22) = (2.0 * d.d11, d.d12 + d.d21, 2.0 * d.d22);
    let p11 = d.d11 * d.d11 + d.d21 * d.d21;
    let p12 = d.d11 * d.d12 + d.d21 * d.d22;
    let p22 = d.d12 * d.d12 + d.d22 * d.d22;
    let det_s = s11 * s22 - s12 * s12;
    let det_p = p11 * p22 - p12 * p12;
    let b = p11 * s22 + p22 * s11 - 2.0 * p12 * s12;
    let disc = (b * b - 4.0 * det_s * det_p).max(0.0);
    (b + disc.sqrt()) / (2.0 * det_s)
}

/// Time-step bound for a constant matrix with `g ≤ 1`.
///
/// Sufficient for the discrete energy to be non-increasing under the flux
/// form: `8 Δt / h² · dᵀd ≼ d + dᵀ`. For symmetric `d` this is the classical
/// `h² / (4 ρ(d))`.
pub fn generic_stable_dt(d: &DiffusionMatrix, h: f64) -> f64 {
    h * h / (8.0 * energy_ratio(d))
}

/// `(cos θ / 4)(1 + min V² / κ_eff²)` for the complex-diffusion matrix, with
/// `κ_eff` the threshold of `g` (κθ in the complex-diffusion reading).
pub fn rotation_stable_dt(theta: f64, kappa_eff: f64, v: &ScalarField, h: f64) -> f64 {
    let min_v2 = v.values().iter().map(|x| x * x).fold(f64::INFINITY, f64::min);
    h * h * theta.cos() / 4.0 * (1.0 + min_v2 / (kappa_eff * kappa_eff))
}

/// Upper bound on Δt for `config` at the current state.
pub fn max_stable_dt(config: &SolverConfig, pair: &ChannelPair) -> f64 {
    let h = pair.grid().h();
    let generic = generic_stable_dt(&config.matrix, h);
    match config.matrix.rotation_angle() {
        Some(theta) => {
            rotation_stable_dt(theta, config.edge_stopping.kappa(), pair.v(), h).min(generic)
        }
        None => generic,
    }
}

/// Spectral radius of the symmetric part of `d`, for reference.
pub fn symmetric_radius(d: &DiffusionMatrix) -> f64 {
    let (a, b, c) = d.symmetric_part();
    let (lo, hi) = symmetric_eigenvalues(a, b, c);
    lo.abs().max(hi.abs())
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    /// `½ Σ (u² + v²) h²`.
    pub energy: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// L² distance of the pair to its channel means.
    pub dist_to_mean: f64,
    pub l2: f64,
    pub l4: f64,
}

impl MonitorSample {
    pub fn measure(pair: &ChannelPair, t: f64) -> Self {
        let area = pair.grid().cell_area();
        let (u, v) = (pair.u(), pair.v());
        let (mean_u, mean_v) = (u.mean(), v.mean());
        let mut sq = 0.0;
        let mut quart = 0.0;
        let mut dev = 0.0;
        for (&a, &b) in u.values().iter().zip(v.values()) {
            let s = a * a + b * b;
            sq += s;
            quart += a * a * a * a + b * b * b * b;
            dev += (a - mean_u) * (a - mean_u) + (b - mean_v) * (b - mean_v);
        }
        Self {
            t,
            mass_u: u.sum() * area,
            mass_v: v.sum() * area,
            energy: 0.5 * sq * area,
            min_u: u.min(),
            max_u: u.max(),
            min_v: v.min(),
            max_v: v.max(),
            dist_to_mean: (dev * area).sqrt(),
            l2: (sq * area).sqrt(),
            l4: (quart * area).powf(0.25),
        }
    }
}

pub const MONITOR_CSV_HEADER: &str =
    "t,mass_u,mass_v,energy,min_u,max_u,min_v,max_v,dist_to_mean,l2,l4";

/// Renders monitor samples as CSV with a header row.
pub fn monitors_to_csv(samples: &[MonitorSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(MONITOR_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.mass_u,
            s.mass_v,
            s.energy,
            s.min_u,
            s.max_u,
            s.min_v,
            s.max_v,
            s.dist_to_mean,
            s.l2,
            s.l4
        );
    }
    out
}

/// State recorded at (the step nearest to) a requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub step: usize,
    pub t: f64,
    pub state: ChannelPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// One sample at t = 0 and one after every completed step.
    pub monitors: Vec<MonitorSample>,
    /// Last finite state reached.
    pub final_state: ChannelPair,
    pub steps_completed: usize,
    pub stability_bound: f64,
    pub stability_warning: bool,
    /// Step at which the state became non-finite, if it did.
    pub instability: Option<usize>,
}

impl Trajectory {
    pub fn check(&self) -> Result<()> {
        match self.instability {
            Some(step) => Err(Error::NonFiniteState { step }),
            None => Ok(()),
        }
    }

    pub fn final_time(&self) -> f64 {
        self.monitors.last().map_or(0.0, |m| m.t)
    }
}

/// Advances `n_steps` steps, calling `observe(step, t, state)` at t = 0 and
/// after each step.
///
/// A non-finite update stops the loop; the trajectory up to the last finite
/// state is returned with [`Trajectory::instability`] set. Configuration
/// errors are returned as `Err`.
pub fn run_observed(
    pair: &ChannelPair,
    config: &SolverConfig,
    n_steps: usize,
    snapshot_times: &[f64],
    mut observe: impl FnMut(usize, f64, &ChannelPair),
) -> Result<Trajectory> {
    config.validate()?;
    let bound = max_stable_dt(config, pair);
    let stability_warning = config.dt > bound;
    if stability_warning {
        warn!(
            "dt = {} exceeds the stability bound {bound}; the run may diverge",
            config.dt
        );
    }

    let targets: Vec<(f64, usize)> = snapshot_times
        .iter()
        .map(|&t| {
            let k = (t / config.dt).round();
            let k = if k.is_finite() && k > 0.0 { (k as usize).min(n_steps) } else { 0 };
            (t, k)
        })
        .collect();
    let mut snapshots = Vec::new();
    let take = |step: usize, state: &ChannelPair, snapshots: &mut Vec<Snapshot>| {
        for &(requested, k) in &targets {
            if k == step {
                snapshots.push(Snapshot {
                    requested,
                    step,
                    t: step as f64 * config.dt,
                    state: state.clone(),
                });
            }
        }
    };

    let mut monitors = Vec::with_capacity(n_steps + 1);
    let mut state = pair.clone();
    monitors.push(MonitorSample::measure(&state, 0.0));
    observe(0, 0.0, &state);
    take(0, &state, &mut snapshots);

    let mut instability = None;
    let mut completed = 0;
    for m in 1..=n_steps {
        match advance(&state, config, m) {
            Ok(next) => state = next,
            Err(Error::NonFiniteState { step }) => {
                instability = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
        completed = m;
        let t = m as f64 * config.dt;
        monitors.push(MonitorSample::measure(&state, t));
        observe(m, t, &state);
        take(m, &state, &mut snapshots);
    }

    Ok(Trajectory {
        snapshots,
        monitors,
        final_state: state,
        steps_completed: completed,
        stability_bound: bound,
        stability_warning,
        instability,
    })
}

pub fn run(
    pair: &ChannelPair,
    config: &SolverConfig,
    n_steps: usize,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    run_observed(pair, config, n_steps, snapshot_times, |_, _, _| {})
}
