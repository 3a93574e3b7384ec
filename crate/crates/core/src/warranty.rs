//! Parametric protocols: Skeptic's final capital as a function of the
//! unknown parameter, and the warranty sets cut from it.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionModel, Outcome};
use crate::error::{domain, Error, Result};
use crate::neyman_pearson::{all_or_nothing_bet, RejectionRegion};
use crate::protocol::{CapitalProcess, ConditionalModel, Iid, RepeatedBet, SkepticStrategy};

/// Grid resolution used when none is given.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Allowed gap between a rejection region's null probability and alpha.
pub const REGION_SIZE_TOLERANCE: f64 = 1e-6;

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || points == 0 {
        return Err(domain(format!("bad grid [{lo}, {hi}] with {points} points")));
    }
    if points == 1 {
        if lo != hi {
            return Err(domain("a one-point grid needs lo == hi"));
        }
        return Ok(vec![lo]);
    }
    if !(lo < hi) {
        return Err(domain(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { hi } else { lo + i as f64 * step })
        .collect())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("parameter grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(domain(format!("grid value {x} is not finite")));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(domain(format!(
            "grid must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

type StrategyFactory = dyn Fn(f64) -> Result<Box<dyn SkepticStrategy>> + Send + Sync;
type ModelFactory = dyn Fn(f64) -> Result<Box<dyn ConditionalModel>> + Send + Sync;

/// One Skeptic strategy per parameter value.
#[derive(Clone)]
pub struct ParametricStrategy {
    grid: Vec<f64>,
    per_theta: Arc<StrategyFactory>,
}

impl std::fmt::Debug for ParametricStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricStrategy")
            .field("grid_points", &self.grid.len())
            .finish_non_exhaustive()
    }
}

impl ParametricStrategy {
    pub fn new<S, F>(grid: Vec<f64>, per_theta: F) -> Result<Self>
    where
        S: SkepticStrategy + 'static,
        F: Fn(f64) -> Result<S> + Send + Sync + 'static,
    {
        check_grid(&grid)?;
        Ok(Self {
            grid,
            per_theta: Arc::new(move |theta| {
                per_theta(theta).map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            }),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn strategy_at(&self, theta: f64) -> Result<Box<dyn SkepticStrategy>> {
        (self.per_theta)(theta)
    }
}

/// The null `P_theta` for each parameter value.
#[derive(Clone)]
pub struct ModelFamily {
    at: Arc<ModelFactory>,
}

impl std::fmt::Debug for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelFamily").finish_non_exhaustive()
    }
}

impl ModelFamily {
    pub fn new<M, F>(at: F) -> Self
    where
        M: ConditionalModel + 'static,
        F: Fn(f64) -> Result<M> + Send + Sync + 'static,
    {
        Self {
            at: Arc::new(move |theta| at(theta).map(|m| Box::new(m) as Box<dyn ConditionalModel>)),
        }
    }

    /// Outcomes i.i.d. from `at(theta)`.
    pub fn iid(at: impl Fn(f64) -> Result<DistributionModel> + Send + Sync + 'static) -> Self {
        Self::new(move |theta| at(theta).map(Iid))
    }

    pub fn model_at(&self, theta: f64) -> Result<Box<dyn ConditionalModel>> {
        (self.at)(theta)
    }
}

fn at_theta(theta: f64) -> impl Fn(Error) -> Error {
    move |e| Error::AtParameter {
        theta,
        source: Box::new(e),
    }
}

/// The per-parameter capital processes of a parametric protocol, which can
/// be continued as more outcomes arrive.
#[derive(Debug, Clone)]
pub struct ParametricRun {
    strategy: ParametricStrategy,
    family: ModelFamily,
    processes: Vec<CapitalProcess>,
    observations: Vec<Outcome>,
}

impl ParametricRun {
    pub fn new(strategy: ParametricStrategy, family: ModelFamily) -> Self {
        let processes = vec![CapitalProcess::new(); strategy.grid.len()];
        Self {
            strategy,
            family,
            processes,
            observations: Vec::new(),
        }
    }

    /// Plays `outcomes` at every grid point, in parallel.
    pub fn extend(&mut self, outcomes: &[Outcome]) -> Result<()> {
        let strategy = &self.strategy;
        let family = &self.family;
        let results: Vec<Result<CapitalProcess>> = strategy
            .grid
            .par_iter()
            .zip(self.processes.par_iter())
            .map(|(&theta, process)| {
                let mut process = process.clone();
                let model = family.model_at(theta)?;
                let skeptic = strategy.strategy_at(theta)?;
                process.extend(model.as_ref(), skeptic.as_ref(), outcomes)?;
                Ok(process)
            })
            .collect();
        let mut updated = Vec::with_capacity(results.len());
        for (theta, r) in strategy.grid.iter().zip(results) {
            updated.push(r.map_err(at_theta(*theta))?);
        }
        self.processes = updated;
        self.observations.extend_from_slice(outcomes);
        Ok(())
    }

    pub fn processes(&self) -> &[CapitalProcess] {
        &self.processes
    }

    pub fn curve(&self) -> WarrantyCurve {
        WarrantyCurve {
            grid: self.strategy.grid.clone(),
            capital: self.processes.iter().map(CapitalProcess::final_capital).collect(),
            observations: self.observations.clone(),
        }
    }
}

/// `K(theta)`: the final capital of the strategy for `theta` on the
/// observed outcomes, at every grid point.
pub fn capital_curve(
    strategy: &ParametricStrategy,
    family: &ModelFamily,
    outcomes: &[Outcome],
) -> Result<WarrantyCurve> {
    let mut run = ParametricRun::new(strategy.clone(), family.clone());
    run.extend(outcomes)?;
    Ok(run.curve())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarrantyCurve {
    pub grid: Vec<f64>,
    pub capital: Vec<f64>,
    pub observations: Vec<Outcome>,
}

impl WarrantyCurve {
    pub fn new(grid: Vec<f64>, capital: Vec<f64>, observations: Vec<Outcome>) -> Result<Self> {
        check_grid(&grid)?;
        if grid.len() != capital.len() {
            return Err(domain(format!(
                "{} grid points but {} capitals",
                grid.len(),
                capital.len()
            )));
        }
        if let Some(k) = capital.iter().find(|k| !(**k >= 0.0) || k.is_infinite()) {
            return Err(domain(format!("capital {k} is not a finite nonnegative number")));
        }
        Ok(Self {
            grid,
            capital,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.capital.iter().copied())
    }
}

/// A closed interval of grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `{theta : K(theta) < 1/alpha}` on the grid, as maximal runs of
/// consecutive grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarrantySet {
    pub alpha: f64,
    pub intervals: Vec<Interval>,
    pub grid_points: usize,
}

impl WarrantySet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(theta))
    }

    /// Valid for sets cut from curves on the same grid.
    pub fn is_subset_of(&self, other: &WarrantySet) -> bool {
        self.intervals
            .iter()
            .all(|i| other.intervals.iter().any(|o| o.lo <= i.lo && i.hi <= o.hi))
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.intervals.first()?.lo,
            hi: self.intervals.last()?.hi,
        })
    }
}

pub fn warranty_set(curve: &WarrantyCurve, alpha: f64) -> Result<WarrantySet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let bar = 1.0 / alpha;
    let mut intervals: Vec<Interval> = Vec::new();
    let mut open = false;
    let mut grid_points = 0;
    for (theta, k) in curve.iter() {
        if k < bar {
            grid_points += 1;
            match intervals.last_mut() {
                Some(last) if open => last.hi = theta,
                _ => intervals.push(Interval { lo: theta, hi: theta }),
            }
            open = true;
        } else {
            open = false;
        }
    }
    Ok(WarrantySet {
        alpha,
        intervals,
        grid_points,
    })
}

/// `inf K(theta)` over the selected grid points: the score against the
/// composite hypothesis they make up.
pub fn composite_score(curve: &WarrantyCurve, subset: impl Fn(f64) -> bool) -> Result<f64> {
    curve
        .iter()
        .filter(|(theta, _)| subset(*theta))
        .map(|(_, k)| k)
        .reduce(f64::min)
        .ok_or_else(|| Error::EmptySelection("no grid point satisfies the subset".into()))
}

/// Capital curve of the all-or-nothing strategies built from a family of
/// level-alpha tests of a single statistic.
///
/// `K(theta)` is `1/alpha` where `E_theta` rejects `statistic` and 0
/// elsewhere, so the `(1/alpha)`-warranty set is the `(1 - alpha)`
/// confidence set.
pub fn confidence_to_warranty(
    grid: &[f64],
    null_at: impl Fn(f64) -> Result<DistributionModel> + Send + Sync,
    region_at: impl Fn(f64) -> Result<RejectionRegion> + Send + Sync,
    alpha: f64,
    statistic: &Outcome,
) -> Result<WarrantyCurve> {
    check_grid(grid)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let capital: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&theta| {
            let null = null_at(theta)?;
            let region = region_at(theta)?;
            let size = region.probability(&null)?;
            if (size - alpha).abs() > REGION_SIZE_TOLERANCE {
                return Err(Error::Calibration(format!(
                    "rejection region {region:?} has null probability {size}, not {alpha}"
                )));
            }
            let bet = all_or_nothing_bet(&null, &region, alpha)?;
            let process = crate::protocol::run_protocol(
                &Iid(null),
                &RepeatedBet(bet),
                std::slice::from_ref(statistic),
            )?;
            Ok(process.final_capital())
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for (&theta, k) in grid.iter().zip(capital) {
        values.push(k.map_err(at_theta(theta))?);
    }
    WarrantyCurve::new(grid.to_vec(), values, vec![statistic.clone()])
}
