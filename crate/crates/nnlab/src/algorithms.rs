//! Sampling algorithms and the error-evaluation contract.
//!
//! An algorithm sees the target only through a [`Probe`], which counts (and
//! can record) sample requests and enforces the budget. Deterministic
//! algorithms use fixed, seed-reproducible point sets; Monte Carlo algorithms
//! are bit-identical per trial seed. Reconstruction outputs are either reals
//! (integration) or certified dictionary elements (function recovery).

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx_space::{Problem, SpaceParams};
use crate::error::{Error, Result};
use crate::hats::{self, BumpFn, HatSumFn, UnitBallFamilyParams};
use crate::pwl::Pwl;

/// A function the lab can hand to algorithms and measure errors against.
#[derive(Debug, Clone)]
pub enum LabFn {
    Zero { d: usize },
    Const { d: usize, value: f64 },
    Hat(HatSumFn),
    Bump(BumpFn),
}

impl LabFn {
    pub fn d(&self) -> usize {
        match self {
            LabFn::Zero { d } | LabFn::Const { d, .. } => *d,
            LabFn::Hat(_) => 1,
            LabFn::Bump(b) => b.bump.d(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            LabFn::Zero { .. } => 0.0,
            LabFn::Const { value, .. } => *value,
            LabFn::Hat(h) => h.eval1(x[0]),
            LabFn::Bump(b) => b.eval(x),
        }
    }

    /// Exact integral over `[0,1]^d` (quadrature only for bumps with d >= 2).
    pub fn integral(&self) -> f64 {
        match self {
            LabFn::Zero { .. } => 0.0,
            LabFn::Const { value, .. } => *value,
            LabFn::Hat(h) => h.exact_integral(),
            LabFn::Bump(b) => {
                if b.bump.d() == 1 {
                    b.to_pwl().integral()
                } else {
                    b.scale * hats::bump_lp_norm(&b.bump, 1.0, true)
                }
            }
        }
    }

    pub fn linf(&self) -> f64 {
        match self {
            LabFn::Zero { .. } => 0.0,
            LabFn::Const { value, .. } => value.abs(),
            LabFn::Hat(h) => h.linf(),
            LabFn::Bump(b) => b.linf_on_unit_cube(),
        }
    }

    /// Piecewise-linear form; only for one-dimensional functions.
    pub fn to_pwl(&self) -> Pwl {
        assert_eq!(self.d(), 1, "piecewise-linear form needs d = 1");
        match self {
            LabFn::Zero { .. } => Pwl::zero(),
            LabFn::Const { value, .. } => Pwl::new(vec![0.0, 1.0], vec![*value, *value]),
            LabFn::Hat(h) => h.to_pwl(),
            LabFn::Bump(b) => b.to_pwl(),
        }
    }

    /// Slope parameter governing the kink spacing, for grid-based sups.
    fn slope(&self) -> f64 {
        match self {
            LabFn::Zero { .. } | LabFn::Const { .. } => 1.0,
            LabFn::Hat(h) => h.big_m,
            LabFn::Bump(b) => b.bump.m,
        }
    }
}

/// Counting (optionally recording) view of a target function.
pub struct Probe<'a> {
    f: &'a LabFn,
    budget: usize,
    used: Cell<usize>,
    record: Option<RefCell<Vec<Vec<f64>>>>,
}

impl<'a> Probe<'a> {
    pub fn new(f: &'a LabFn, budget: usize) -> Self {
        Probe { f, budget, used: Cell::new(0), record: None }
    }

    pub fn recording(f: &'a LabFn, budget: usize) -> Self {
        Probe { f, budget, used: Cell::new(0), record: Some(RefCell::new(Vec::new())) }
    }

    pub fn d(&self) -> usize {
        self.f.d()
    }

    /// Reveals one sample; fails once the budget is exhausted.
    pub fn sample(&self, x: &[f64]) -> Result<f64> {
        let used = self.used.get() + 1;
        if used > self.budget {
            return Err(Error::BudgetViolation { used, budget: self.budget });
        }
        self.used.set(used);
        if let Some(rec) = &self.record {
            rec.borrow_mut().push(x.to_vec());
        }
        Ok(self.f.eval(x))
    }

    pub fn used(&self) -> usize {
        self.used.get()
    }

    pub fn recorded(&self) -> Vec<Vec<f64>> {
        self.record.as_ref().map(|r| r.borrow().clone()).unwrap_or_default()
    }
}

/// Reconstruction output: a real (integration) or a function (recovery).
#[derive(Debug, Clone)]
pub enum Output {
    Scalar(f64),
    Func(LabFn),
}

/// Which solution map the error is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionMap {
    /// Embedding into `C([0,1]^d)`: sup-norm error.
    UniformEmbed,
    /// Embedding into `L^2([0,1]^d)`.
    L2Embed,
    /// The definite integral.
    Integral,
}

impl SolutionMap {
    pub fn for_problem(p: Problem) -> Self {
        match p {
            Problem::Uniform => SolutionMap::UniformEmbed,
            Problem::L2 => SolutionMap::L2Embed,
            Problem::Integral => SolutionMap::Integral,
        }
    }
}

/// Sup of `|f - g|` over a kink-aligned grid of step `1/(8 M)` per axis.
fn sup_diff_grid(f: &LabFn, g: &LabFn, d: usize) -> f64 {
    let m = f.slope().max(g.slope());
    let steps = ((8.0 * m).ceil() as usize).clamp(8, 4096);
    let mut worst = 0.0f64;
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 / steps as f64).collect();
        worst = worst.max((f.eval(&x) - g.eval(&x)).abs());
        let mut j = 0;
        loop {
            if j == d {
                return worst;
            }
            idx[j] += 1;
            if idx[j] <= steps {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Per-function error `||A(f) - S(f)||` for the given solution map.
///
/// Piecewise-linear pairs in one dimension are evaluated exactly (breakpoint
/// sup, per-interval quadratic integration, exact integrals); other shapes
/// fall back to kink-aligned grids.
pub fn evaluate_error(out: &Output, target: &LabFn, smap: SolutionMap) -> f64 {
    match smap {
        SolutionMap::Integral => {
            let want = target.integral();
            let got = match out {
                Output::Scalar(v) => *v,
                Output::Func(g) => g.integral(),
            };
            (got - want).abs()
        }
        SolutionMap::UniformEmbed => {
            let g = match out {
                Output::Func(g) => g,
                Output::Scalar(_) => panic!("uniform error needs a function output"),
            };
            if target.d() == 1 {
                target.to_pwl().sup_abs_diff(&g.to_pwl())
            } else {
                sup_diff_grid(target, g, target.d())
            }
        }
        SolutionMap::L2Embed => {
            let g = match out {
                Output::Func(g) => g,
                Output::Scalar(_) => panic!("L2 error needs a function output"),
            };
            if target.d() == 1 {
                target.to_pwl().l2_diff(&g.to_pwl())
            } else {
                l2_diff_grid(target, g, target.d())
            }
        }
    }
}

/// Refining product-Simpson `L^2` distance for d >= 2; tolerance 1e-8.
fn l2_diff_grid(f: &LabFn, g: &LabFn, d: usize) -> f64 {
    let mut steps = 32usize;
    let mut prev = f64::NAN;
    loop {
        let mut acc = 0.0;
        let h = 1.0 / steps as f64;
        let mut idx = vec![0usize; d];
        'cells: loop {
            // Midpoint rule per cell.
            let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * h).collect();
            let diff = f.eval(&x) - g.eval(&x);
            acc += diff * diff * h.powi(d as i32);
            for j in 0..d {
                idx[j] += 1;
                if idx[j] < steps {
                    continue 'cells;
                }
                idx[j] = 0;
            }
            break;
        }
        let val = acc.sqrt();
        if !prev.is_nan() && (val - prev).abs() < 1e-8 || steps >= 1024 {
            return val;
        }
        prev = val;
        steps *= 2;
    }
}

// ---------------------------------------------------------------------------
// Hypothesis dictionary
// ---------------------------------------------------------------------------

/// A certified dictionary element: unit sup norm bound plus the budget of the
/// network construction behind it.
#[derive(Debug, Clone)]
pub struct DictElement {
    pub id: String,
    pub f: LabFn,
    /// Budget of the realizing network set.
    pub cert_n: u64,
}

/// Finite certified hypothesis collection.
#[derive(Debug)]
pub struct Dictionary {
    pub id: String,
    pub d: usize,
    pub elements: Vec<DictElement>,
}

impl Dictionary {
    /// Builds a named dictionary certified against the given space.
    ///
    /// `hats_v1`: zero plus signed unit-ball hats at scales `m = 1, 2, 4`
    /// (one-dimensional). `bumps_v1`: zero plus signed scaled bumps on coarse
    /// center grids (any dimension, needs depth >= 3).
    pub fn build(id: &str, space: &SpaceParams, gamma: f64) -> Result<Dictionary> {
        let mut elements =
            vec![DictElement { id: "zero".into(), f: LabFn::Zero { d: space.d }, cert_n: 0 }];
        match id {
            "hats_v1" => {
                if space.d != 1 {
                    return Err(Error::Config("hats_v1 dictionary is one-dimensional".into()));
                }
                for m in [1usize, 2, 4] {
                    let params = UnitBallFamilyParams::derive(
                        1,
                        space.alpha,
                        gamma,
                        1.0,
                        1.0_f64.min(1.0),
                        2.0,
                        m,
                        space.growths,
                    )?;
                    for j in 0..2 * m {
                        for sign in [1.0, -1.0] {
                            let mut nu = vec![0.0; 2 * m];
                            nu[j] = sign;
                            let f = hats::build_unit_ball_family(&params, &nu, &[j])?;
                            let w = params.consts.witness;
                            let cert_n = (2 * w.l + 8) * (w.n0 * m as u64);
                            elements.push(DictElement {
                                id: format!("hat_m{m}_j{j}_{}", if sign > 0.0 { "p" } else { "n" }),
                                f: LabFn::Hat(f),
                                cert_n,
                            });
                        }
                    }
                }
            }
            "bumps_v1" => {
                for big_m in [1.0, 2.0, 4.0] {
                    let centers = [0.25, 0.75];
                    let mut idx = vec![0usize; space.d];
                    loop {
                        let y: Vec<f64> = idx.iter().map(|&i| centers[i]).collect();
                        let (f, consts) =
                            hats::build_gmy(big_m, &y, space.alpha, gamma, &space.growths)?;
                        let n = (consts.witness.n0 as f64
                            * big_m.powf(1.0 / (space.alpha + gamma)).ceil())
                            as u64;
                        let cert_n = 15 * (space.d as u64 + consts.witness.l) * n;
                        for sign in [1.0, -1.0] {
                            let mut g = f.clone();
                            g.scale *= sign;
                            elements.push(DictElement {
                                id: format!(
                                    "bump_M{big_m}_{}_{}",
                                    idx.iter().map(usize::to_string).collect::<Vec<_>>().join(""),
                                    if sign > 0.0 { "p" } else { "n" }
                                ),
                                f: LabFn::Bump(g),
                                cert_n,
                            });
                        }
                        let mut j = 0;
                        loop {
                            if j == space.d {
                                break;
                            }
                            idx[j] += 1;
                            if idx[j] < centers.len() {
                                break;
                            }
                            idx[j] = 0;
                            j += 1;
                        }
                        if idx.iter().all(|&i| i == 0) {
                            break;
                        }
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown dictionary id: {other}"))),
        }
        debug_assert!(elements.iter().all(|e| e.f.linf() <= 1.0 + 1e-12));
        Ok(Dictionary { id: id.to_string(), d: space.d, elements })
    }

    /// Max certificate budget over the elements.
    pub fn max_cert_n(&self) -> u64 {
        self.elements.iter().map(|e| e.cert_n).max().unwrap_or(0)
    }
}

/// Empirical-risk minimizer over the dictionary; ties break to the lowest
/// index.
pub fn erm_fit<'d>(
    samples: &[(Vec<f64>, f64)],
    dict: &'d Dictionary,
) -> Result<(usize, &'d DictElement)> {
    if dict.elements.is_empty() {
        return Err(Error::Config("empty dictionary".into()));
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, e) in dict.elements.iter().enumerate() {
        let loss: f64 =
            samples.iter().map(|(x, y)| (e.f.eval(x) - y) * (e.f.eval(x) - y)).sum();
        if loss < best.1 {
            best = (i, loss);
        }
    }
    Ok((best.0, &dict.elements[best.0]))
}

/// The uniform sampling grid `{0, 1/N, ..., (N-1)/N}^d` with `N = floor(m^(1/d))`.
pub fn uniform_grid(m: usize, d: usize) -> Vec<Vec<f64>> {
    let n = (m as f64).powf(1.0 / d as f64).floor() as usize;
    let n = n.max(1);
    let mut pts = Vec::with_capacity(n.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        pts.push(idx.iter().map(|&i| i as f64 / n as f64).collect());
        let mut j = 0;
        loop {
            if j == d {
                return pts;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Samples the probe on the uniform grid and returns the dictionary element
/// minimizing the max grid deviation (ties to the lowest index).
pub fn grid_uniform_approximate<'d>(
    probe: &Probe<'_>,
    m: usize,
    dict: &'d Dictionary,
) -> Result<(usize, &'d DictElement)> {
    if dict.elements.is_empty() {
        return Err(Error::Config("empty dictionary".into()));
    }
    let pts = uniform_grid(m, probe.d());
    let values: Vec<f64> = pts.iter().map(|x| probe.sample(x)).collect::<Result<_>>()?;
    let mut best = (0usize, f64::INFINITY);
    for (i, e) in dict.elements.iter().enumerate() {
        let mut dev = 0.0f64;
        for (x, y) in pts.iter().zip(values.iter()) {
            dev = dev.max((e.f.eval(x) - y).abs());
            if dev >= best.1 {
                break;
            }
        }
        if dev < best.1 {
            best = (i, dev);
        }
    }
    Ok((best.0, &dict.elements[best.0]))
}

// Cached per-(m, element) grid data for the fast path of the grid algorithm
// on sparse targets: values plus indices sorted by decreasing magnitude.
pub struct GridCache {
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    by_magnitude: Vec<Vec<u32>>,
}

fn grid_cache(dict: &Dictionary, m: usize, store: &Mutex<HashMap<usize, Arc<GridCache>>>) -> Arc<GridCache> {
    if let Some(c) = store.lock().unwrap().get(&m) {
        return c.clone();
    }
    let points = uniform_grid(m, dict.d);
    let mut values = Vec::with_capacity(dict.elements.len());
    let mut by_magnitude = Vec::with_capacity(dict.elements.len());
    for e in &dict.elements {
        let vals: Vec<f64> = points.iter().map(|x| e.f.eval(x)).collect();
        let mut order: Vec<u32> = (0..vals.len() as u32).collect();
        order.sort_by(|&a, &b| {
            vals[b as usize].abs().partial_cmp(&vals[a as usize].abs()).unwrap()
        });
        order.truncate(64);
        values.push(vals);
        by_magnitude.push(order);
    }
    let cache = Arc::new(GridCache { points, values, by_magnitude });
    store.lock().unwrap().insert(m, cache.clone());
    cache
}

// Cached data for the least-squares fit on the fixed point set: element
// values plus their total squared mass.
pub struct ErmCache {
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    sum_sq: Vec<f64>,
}

fn erm_cache(
    dict: &Dictionary,
    m: usize,
    store: &Mutex<HashMap<usize, Arc<ErmCache>>>,
) -> Arc<ErmCache> {
    if let Some(c) = store.lock().unwrap().get(&m) {
        return c.clone();
    }
    let points = fixed_points(FIT_POINT_SEED, m, dict.d, m);
    let mut values = Vec::with_capacity(dict.elements.len());
    let mut sum_sq = Vec::with_capacity(dict.elements.len());
    for e in &dict.elements {
        let vals: Vec<f64> = points.iter().map(|x| e.f.eval(x)).collect();
        sum_sq.push(vals.iter().map(|v| v * v).sum());
        values.push(vals);
    }
    let cache = Arc::new(ErmCache { points, values, sum_sq });
    store.lock().unwrap().insert(m, cache.clone());
    cache
}

/// Least-squares fit using the cache. On targets that vanish at most fit
/// points, each element's loss is its cached squared mass corrected on the
/// support: `(e - y)^2 = e^2 + y^2 - 2 e y`.
fn erm_fit_cached<'d>(
    probe: &Probe<'_>,
    dict: &'d Dictionary,
    cache: &ErmCache,
) -> Result<(usize, &'d DictElement)> {
    if dict.elements.is_empty() {
        return Err(Error::Config("empty dictionary".into()));
    }
    let values: Vec<f64> =
        cache.points.iter().map(|x| probe.sample(x)).collect::<Result<_>>()?;
    let support: Vec<u32> =
        values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i as u32).collect();
    let mut best = (0usize, f64::INFINITY);
    if support.len() > 32 {
        for (i, ev) in cache.values.iter().enumerate() {
            let loss: f64 =
                ev.iter().zip(values.iter()).map(|(e, y)| (e - y) * (e - y)).sum();
            if loss < best.1 {
                best = (i, loss);
            }
        }
    } else {
        for i in 0..cache.values.len() {
            let mut loss = cache.sum_sq[i];
            for &s in &support {
                let e = cache.values[i][s as usize];
                let y = values[s as usize];
                loss += y * y - 2.0 * e * y;
            }
            if loss < best.1 {
                best = (i, loss);
            }
        }
    }
    Ok((best.0, &dict.elements[best.0]))
}

/// Grid fit using the cache; identical argmin to [`grid_uniform_approximate`]
/// when the target is zero outside a few grid points.
fn grid_fit_cached<'d>(
    probe: &Probe<'_>,
    dict: &'d Dictionary,
    cache: &GridCache,
) -> Result<(usize, &'d DictElement)> {
    let values: Vec<f64> =
        cache.points.iter().map(|x| probe.sample(x)).collect::<Result<_>>()?;
    let support: Vec<u32> =
        values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i as u32).collect();
    // Fall back to the direct scan when the target is dense on the grid.
    if support.len() > 16 {
        let mut best = (0usize, f64::INFINITY);
        for (i, ev) in cache.values.iter().enumerate() {
            let dev = ev
                .iter()
                .zip(values.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dev < best.1 {
                best = (i, dev);
            }
        }
        return Ok((best.0, &dict.elements[best.0]));
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, ev) in cache.values.iter().enumerate() {
        // Max deviation off the support: largest |e| at an index outside S.
        let mut off = 0.0;
        for &idx in &cache.by_magnitude[i] {
            if !support.contains(&idx) {
                off = ev[idx as usize].abs();
                break;
            }
        }
        let mut dev = off;
        for &s in &support {
            dev = dev.max((ev[s as usize] - values[s as usize]).abs());
        }
        if dev < best.1 {
            best = (i, dev);
        }
    }
    Ok((best.0, &dict.elements[best.0]))
}

// ---------------------------------------------------------------------------
// The algorithms
// ---------------------------------------------------------------------------

/// Deterministic or Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgKind {
    Deterministic,
    MonteCarlo,
}

/// Seed stream for fixed (algorithm-identity) point sets.
const FIT_POINT_SEED: u64 = 0xF17_0001;
const VC_POINT_SEED: u64 = 0xDE7_0002;

/// A registered sampling algorithm.
pub enum Algorithm {
    /// Ignores the samples; outputs the zero function.
    Zero,
    /// Uniform-grid sampling plus sup-deviation dictionary fit.
    GridRecon { dict: Arc<Dictionary>, cache: Mutex<HashMap<usize, Arc<GridCache>>> },
    /// Least-squares dictionary fit on a fixed seeded point set.
    ErmRecon { dict: Arc<Dictionary>, cache: Mutex<HashMap<usize, Arc<ErmCache>>> },
    /// Composite midpoint quadrature on the product lattice.
    Midpoint,
    /// Plain Monte Carlo mean.
    StandardMc,
    /// Control variate: ERM fit on fixed points, Monte Carlo residual.
    ControlVariate { dict: Arc<Dictionary> },
    /// Seeded point-set search minimizing dictionary discrepancy, then the
    /// empirical mean.
    VcQuadrature { dict: Arc<Dictionary>, candidates: usize, cache: Mutex<HashMap<usize, Arc<Vec<Vec<f64>>>>> },
}

/// All registered algorithm ids.
pub const ALGORITHM_IDS: [&str; 7] =
    ["zero", "grid", "erm", "midpoint", "standard_mc", "control_variate_mc", "vc_quadrature"];

/// Instantiates a registered algorithm.
pub fn make_algorithm(id: &str, dict: &Arc<Dictionary>) -> Result<Algorithm> {
    Ok(match id {
        "zero" => Algorithm::Zero,
        "grid" => Algorithm::GridRecon { dict: dict.clone(), cache: Mutex::new(HashMap::new()) },
        "erm" => Algorithm::ErmRecon { dict: dict.clone(), cache: Mutex::new(HashMap::new()) },
        "midpoint" => Algorithm::Midpoint,
        "standard_mc" => Algorithm::StandardMc,
        "control_variate_mc" => Algorithm::ControlVariate { dict: dict.clone() },
        "vc_quadrature" => Algorithm::VcQuadrature {
            dict: dict.clone(),
            candidates: 64,
            cache: Mutex::new(HashMap::new()),
        },
        other => return Err(Error::UnknownAlgorithm(other.to_string())),
    })
}

impl Algorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Zero => "zero",
            Algorithm::GridRecon { .. } => "grid",
            Algorithm::ErmRecon { .. } => "erm",
            Algorithm::Midpoint => "midpoint",
            Algorithm::StandardMc => "standard_mc",
            Algorithm::ControlVariate { .. } => "control_variate_mc",
            Algorithm::VcQuadrature { .. } => "vc_quadrature",
        }
    }

    pub fn kind(&self) -> AlgKind {
        match self {
            Algorithm::StandardMc | Algorithm::ControlVariate { .. } => AlgKind::MonteCarlo,
            _ => AlgKind::Deterministic,
        }
    }

    /// Which problems the output type fits.
    pub fn applicable(&self, problem: Problem) -> bool {
        match self {
            Algorithm::Zero => true,
            Algorithm::GridRecon { .. } | Algorithm::ErmRecon { .. } => true,
            Algorithm::Midpoint
            | Algorithm::StandardMc
            | Algorithm::ControlVariate { .. }
            | Algorithm::VcQuadrature { .. } => problem == Problem::Integral,
        }
    }

    /// Runs the algorithm with budget `m`. Monte Carlo algorithms draw their
    /// randomness from `trial_seed`; deterministic ones ignore it.
    pub fn run(&self, probe: &Probe<'_>, m: usize, trial_seed: u64) -> Result<Output> {
        match self {
            Algorithm::Zero => Ok(Output::Func(LabFn::Zero { d: probe.d() })),
            Algorithm::GridRecon { dict, cache } => {
                let c = grid_cache(dict, m, cache);
                let (_, e) = grid_fit_cached(probe, dict, &c)?;
                Ok(Output::Func(e.f.clone()))
            }
            Algorithm::ErmRecon { dict, cache } => {
                let c = {
                    let cached = cache.lock().unwrap().get(&m).cloned();
                    match cached {
                        Some(c) => c,
                        None => erm_cache(dict, m, cache),
                    }
                };
                let (_, e) = erm_fit_cached(probe, dict, &c)?;
                Ok(Output::Func(e.f.clone()))
            }
            Algorithm::Midpoint => {
                let d = probe.d();
                let n = ((m as f64).powf(1.0 / d as f64).floor() as usize).max(1);
                let mut sum = 0.0;
                let mut idx = vec![0usize; d];
                let total = n.pow(d as u32);
                for _ in 0..total {
                    let x: Vec<f64> =
                        idx.iter().map(|&i| (i as f64 + 0.5) / n as f64).collect();
                    sum += probe.sample(&x)?;
                    for j in 0..d {
                        idx[j] += 1;
                        if idx[j] < n {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
                Ok(Output::Scalar(sum / total as f64))
            }
            Algorithm::StandardMc => {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
                let d = probe.d();
                let mut sum = 0.0;
                for _ in 0..m {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
                    sum += probe.sample(&x)?;
                }
                Ok(Output::Scalar(sum / m as f64))
            }
            Algorithm::ControlVariate { dict } => {
                if m < 2 {
                    return Err(Error::BudgetViolation { used: 2, budget: m });
                }
                let half = m / 2;
                let d = probe.d();
                // Fixed fit points, fresh residual points.
                let fit_pts = fixed_points(FIT_POINT_SEED, m, d, half);
                let samples: Vec<(Vec<f64>, f64)> = fit_pts
                    .into_iter()
                    .map(|x| probe.sample(&x).map(|y| (x, y)))
                    .collect::<Result<_>>()?;
                let (_, e) = erm_fit(&samples, dict)?;
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
                let mut resid = 0.0;
                for _ in 0..half {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
                    resid += probe.sample(&x)? - e.f.eval(&x);
                }
                Ok(Output::Scalar(resid / half as f64 + e.f.integral()))
            }
            Algorithm::VcQuadrature { dict, candidates, cache } => {
                let cached = cache.lock().unwrap().get(&m).cloned();
                let pts = match cached {
                    Some(p) => p,
                    None => {
                        let p = Arc::new(select_low_discrepancy_points(
                            dict,
                            m,
                            probe.d(),
                            *candidates,
                        ));
                        cache.lock().unwrap().insert(m, p.clone());
                        p
                    }
                };
                let mut sum = 0.0;
                for x in pts.iter() {
                    sum += probe.sample(x)?;
                }
                Ok(Output::Scalar(sum / pts.len() as f64))
            }
        }
    }
}

/// Fixed seeded point set shared by all runs with the same `(stream, count)`.
fn fixed_points(seed: u64, stream: usize, d: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    (0..count).map(|_| (0..d).map(|_| rng.gen()).collect()).collect()
}

/// Worst-case quadrature deviation of a point set over the dictionary.
pub fn dict_discrepancy(dict: &Dictionary, pts: &[Vec<f64>]) -> f64 {
    dict.elements
        .iter()
        .map(|e| {
            let mean: f64 = pts.iter().map(|x| e.f.eval(x)).sum::<f64>() / pts.len() as f64;
            (e.f.integral() - mean).abs()
        })
        .fold(0.0, f64::max)
}

fn select_low_discrepancy_points(
    dict: &Dictionary,
    m: usize,
    d: usize,
    candidates: usize,
) -> Vec<Vec<f64>> {
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for cand in 0..candidates {
        let mut rng = ChaCha8Rng::seed_from_u64(VC_POINT_SEED);
        rng.set_stream((m as u64) << 16 | cand as u64);
        let pts: Vec<Vec<f64>> =
            (0..m).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
        let disc = dict_discrepancy(dict, &pts);
        if best.as_ref().is_none_or(|(b, _)| disc < *b) {
            best = Some((disc, pts));
        }
    }
    best.unwrap().1
}

/// Algorithm configuration as serialized by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AlgorithmConfig {
    pub kind: String,
    pub m: usize,
    pub seed: u64,
    pub dict: String,
}
