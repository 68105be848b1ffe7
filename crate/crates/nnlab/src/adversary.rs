//! Adversarial function families and the average-case hardness evaluation.
//!
//! Each family is a finite set of certified unit-ball functions indexed the
//! way the hardness arguments index them: grid cells times a sign for the
//! uniform problem, signs times a k-subset of the `2m` hat slots for `L^2`
//! and integration. Averaging any sampling algorithm's error over a family
//! is bounded below by `kappa * m^(-lambda)` with fully derived constants;
//! the deterministic integration bound instead uses the adversarial
//! `(+f, -f)` pair built from the algorithm's own annihilation set.

use num_bigint::BigUint;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{evaluate_error, Algorithm, LabFn, Output, Probe, SolutionMap};
use crate::approx_space::{Problem, Regime, SpaceParams};
use crate::complexity_checks::CheckConstants;
use crate::error::{Error, Result};
use crate::hats::{self, BumpD, BumpFn, UnitBallFamilyParams};
use crate::real::pairwise_sum;

/// Indices of hat slots whose supports avoid every sample point (first
/// coordinate test, exact zeros).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnihilationIndex {
    /// 0-based indices into the `2m` slots.
    pub indices: Vec<usize>,
}

/// Computes the annihilation set for `M = 4m` and centers
/// `z_j = 1/(4m) + (j-1)/(2m)`; its size is at least `m`.
pub fn annihilation_set(points: &[Vec<f64>], m: usize) -> AnnihilationIndex {
    let big_m = 4.0 * m as f64;
    let indices: Vec<usize> = (0..2 * m)
        .filter(|&j| {
            let z = 1.0 / (4.0 * m as f64) + j as f64 / (2.0 * m as f64);
            points.iter().all(|x| hats::lambda_eval(big_m, z, x[0]) == 0.0)
        })
        .collect();
    debug_assert!(indices.len() >= m, "annihilation set smaller than m");
    AnnihilationIndex { indices }
}

/// Family configuration: space, probe exponents, admissibility constants.
#[derive(Debug, Clone, Copy)]
pub struct FamilyConfig {
    pub problem: Problem,
    pub space: SpaceParams,
    /// `gamma < gamma_flat`.
    pub gamma: f64,
    /// Probe exponent `theta > 0` (hat families only).
    pub theta: f64,
    /// Probe exponent `lambda in [0,1]` with `theta lambda <= 1`.
    pub lambda: f64,
    pub sigma: f64,
    pub consts: CheckConstants,
}

/// The two index structures used by the hardness arguments.
#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// Cells `[2k]^d` times a sign; members are scaled bumps on a grid.
    Uniform { k: usize, scale: f64 },
    /// Signs on a k-subset of the `2m` hat slots.
    HatSigns { params: UnitBallFamilyParams, k: usize },
}

/// A finite adversarial family at sample budget `m`.
#[derive(Debug, Clone)]
pub struct HardnessFamily {
    pub problem: Problem,
    pub m: usize,
    pub d: usize,
    pub kind: FamilyKind,
    /// Exact formal member count.
    pub count: BigUint,
    pub bound_kappa: f64,
    pub bound_lambda: f64,
}

impl HardnessFamily {
    /// The average-case lower bound `kappa * m^(-lambda)`.
    pub fn bound(&self) -> f64 {
        self.bound_kappa * (self.m as f64).powf(-self.bound_lambda)
    }
}

/// Derived `(kappa, lambda)` of the bound `kappa * m^(-lambda)` per problem
/// and regime.
pub fn hardness_bound(cfg: &FamilyConfig, regime: Regime) -> Result<(f64, f64)> {
    let p = &cfg.space;
    match cfg.problem {
        Problem::Uniform => {
            let consts = hats::derive_gmy_constants(p.d, p.alpha, cfg.gamma, &p.growths)?;
            let kappa = (consts.kappa / 8.0) / 4f64.powi(p.d as i32);
            let lambda = (1.0 / p.d as f64) * p.alpha / (p.alpha + cfg.gamma);
            Ok((kappa, lambda))
        }
        Problem::L2 => {
            let c = hats::derive_unit_ball_constants(
                p.alpha, cfg.gamma, cfg.theta, cfg.lambda, cfg.sigma, &p.growths,
            )?;
            Ok((c.kappa / 32.0, 0.5 - c.omega - cfg.theta * cfg.lambda / 2.0))
        }
        Problem::Integral => {
            let c = hats::derive_unit_ball_constants(
                p.alpha, cfg.gamma, cfg.theta, cfg.lambda, cfg.sigma, &p.growths,
            )?;
            match regime {
                Regime::Det => Ok((c.kappa / 4.0, 1.0 - c.omega - cfg.theta * cfg.lambda)),
                Regime::Mc => Ok((
                    c.kappa * cfg.consts.khintchine_a1 / 16.0,
                    1.0 - cfg.theta * cfg.lambda / 2.0 - c.omega,
                )),
            }
        }
    }
}

/// Builds the family for sample budget `m`. Integration families carry the
/// Monte Carlo (average-case) bound; the deterministic pair bound is checked
/// by [`det_integration_pair`].
pub fn build_family(cfg: &FamilyConfig, m: usize) -> Result<HardnessFamily> {
    let p = &cfg.space;
    match cfg.problem {
        Problem::Uniform => {
            let k = (m as f64).powf(1.0 / p.d as f64).ceil() as usize;
            let big_m = 4.0 * k as f64;
            let consts = hats::derive_gmy_constants(p.d, p.alpha, cfg.gamma, &p.growths)?;
            let scale = consts.kappa * big_m.powf(-p.alpha / (p.alpha + cfg.gamma));
            let (bound_kappa, bound_lambda) = hardness_bound(cfg, Regime::Det)?;
            let count = BigUint::from(2usize) * BigUint::from(2 * k).pow(p.d as u32);
            Ok(HardnessFamily {
                problem: cfg.problem,
                m,
                d: p.d,
                kind: FamilyKind::Uniform { k, scale },
                count,
                bound_kappa,
                bound_lambda,
            })
        }
        Problem::L2 | Problem::Integral => {
            let params = UnitBallFamilyParams::derive(
                p.d, p.alpha, cfg.gamma, cfg.theta, cfg.lambda, cfg.sigma, m, p.growths,
            )?;
            let k = (m as f64).powf(cfg.theta * cfg.lambda).ceil() as usize;
            debug_assert!(k as f64 <= 2.0 * (m as f64).powf(cfg.theta * cfg.lambda));
            let regime =
                if cfg.problem == Problem::Integral { Regime::Mc } else { Regime::Det };
            let (bound_kappa, bound_lambda) = hardness_bound(cfg, regime)?;
            let count = BigUint::from(2usize).pow(2 * m as u32) * binomial_big(2 * m, k);
            Ok(HardnessFamily {
                problem: cfg.problem,
                m,
                d: p.d,
                kind: FamilyKind::HatSigns { params, k },
                count,
                bound_kappa,
                bound_lambda,
            })
        }
    }
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::from(1usize);
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

impl HardnessFamily {
    fn uniform_member(&self, cell: &[usize], sign: f64) -> LabFn {
        let (k, scale) = match &self.kind {
            FamilyKind::Uniform { k, scale } => (*k, *scale),
            _ => unreachable!(),
        };
        let y: Vec<f64> = cell
            .iter()
            .map(|&c| 1.0 / (4.0 * k as f64) + c as f64 / (2.0 * k as f64))
            .collect();
        LabFn::Bump(BumpFn { bump: BumpD { m: 4.0 * k as f64, y }, scale: sign * scale })
    }

    fn hat_member(&self, j_set: &[usize], signs: &[f64]) -> Result<LabFn> {
        let params = match &self.kind {
            FamilyKind::HatSigns { params, .. } => params,
            _ => unreachable!(),
        };
        let mut nu = vec![0.0; 2 * self.m];
        for (j, s) in j_set.iter().zip(signs.iter()) {
            nu[*j] = *s;
        }
        Ok(LabFn::Hat(hats::build_unit_ball_family(params, &nu, j_set)?))
    }

    /// Full enumeration of the distinct member functions with multiplicity-
    /// correct weighting (uniform: every formal member appears once; hat
    /// signs: the signs off `J` never affect the function, and every
    /// `(J, nu|_J)` carries the same formal multiplicity `2^(2m-k)`).
    pub fn enumerate_members(&self) -> Result<Vec<LabFn>> {
        match &self.kind {
            FamilyKind::Uniform { k, .. } => {
                let d = self.d;
                let mut members = Vec::new();
                let mut cell = vec![0usize; d];
                loop {
                    for sign in [1.0, -1.0] {
                        members.push(self.uniform_member(&cell, sign));
                    }
                    let mut j = 0;
                    loop {
                        if j == d {
                            return Ok(members);
                        }
                        cell[j] += 1;
                        if cell[j] < 2 * k {
                            break;
                        }
                        cell[j] = 0;
                        j += 1;
                    }
                }
            }
            FamilyKind::HatSigns { k, .. } => {
                let mut members = Vec::new();
                let k = *k;
                let n = 2 * self.m;
                let mut j_set: Vec<usize> = (0..k).collect();
                loop {
                    let mut signs = vec![1.0; k];
                    for bits in 0u64..(1 << k) {
                        for (t, s) in signs.iter_mut().enumerate() {
                            *s = if bits >> t & 1 == 1 { -1.0 } else { 1.0 };
                        }
                        members.push(self.hat_member(&j_set, &signs)?);
                    }
                    if !next_combination(&mut j_set, n) {
                        return Ok(members);
                    }
                }
            }
        }
    }

    /// Uniform draw from the formal index set.
    pub fn sample_member(&self, rng: &mut ChaCha8Rng) -> Result<LabFn> {
        match &self.kind {
            FamilyKind::Uniform { k, .. } => {
                let d = self.d;
                let cell: Vec<usize> = (0..d).map(|_| rng.gen_range(0..2 * k)).collect();
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                Ok(self.uniform_member(&cell, sign))
            }
            FamilyKind::HatSigns { k, .. } => {
                let mut pool: Vec<usize> = (0..2 * self.m).collect();
                // Partial Fisher-Yates for a uniform k-subset.
                for i in 0..*k {
                    let j = rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
                let mut j_set = pool[..*k].to_vec();
                j_set.sort_unstable();
                let signs: Vec<f64> =
                    (0..*k).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
                self.hat_member(&j_set, &signs)
            }
        }
    }
}

/// Lexicographically next k-combination of `0..n`; false when exhausted.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] != i + n - k {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Options for the average-case evaluation.
#[derive(Debug, Clone, Copy)]
pub struct AvgCaseOpts {
    /// Exact enumeration whenever the formal count is at most this.
    pub enumerate_threshold: u64,
    /// Subsample size otherwise.
    pub draws: usize,
}

impl Default for AvgCaseOpts {
    fn default() -> Self {
        AvgCaseOpts { enumerate_threshold: 100_000, draws: 10_000 }
    }
}

/// Result of one average-case hardness measurement.
#[derive(Debug, Clone, Serialize)]
pub struct HardnessReport {
    pub problem: Problem,
    pub algorithm: String,
    pub m: usize,
    pub measured: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
    pub exact: bool,
    pub members: usize,
    pub bound_kappa: f64,
    pub bound_lambda: f64,
    pub seed: u64,
}

impl HardnessReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{}",
            self.problem, self.algorithm, self.m, self.measured, self.bound, self.stderr, self.pass
        )
    }
}

/// Average error of `alg` over the family, exact or subsampled, with the
/// deterministic pairwise-summation reduction.
pub fn average_case_error(
    alg: &Algorithm,
    fam: &HardnessFamily,
    smap: SolutionMap,
    opts: &AvgCaseOpts,
    seed: u64,
) -> Result<HardnessReport> {
    let exact = fam.count <= BigUint::from(opts.enumerate_threshold);
    let members: Vec<LabFn> = if exact {
        fam.enumerate_members()?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..opts.draws).map(|_| fam.sample_member(&mut rng)).collect::<Result<_>>()?
    };
    let m = fam.m;
    let errors: Vec<f64> = members
        .par_iter()
        .map(|f| -> Result<f64> {
            let probe = Probe::new(f, m);
            let out = alg.run(&probe, m, seed)?;
            Ok(evaluate_error(&out, f, smap))
        })
        .collect::<Result<_>>()?;
    let measured = pairwise_sum(&errors) / errors.len() as f64;
    let stderr = if exact {
        0.0
    } else {
        let var = errors.iter().map(|e| (e - measured) * (e - measured)).sum::<f64>()
            / errors.len() as f64;
        (var / errors.len() as f64).sqrt()
    };
    let bound = fam.bound();
    Ok(HardnessReport {
        problem: fam.problem,
        algorithm: alg.id().to_string(),
        m,
        measured,
        bound,
        stderr,
        pass: measured >= bound - 3.0 * stderr,
        exact,
        members: errors.len(),
        bound_kappa: fam.bound_kappa,
        bound_lambda: fam.bound_lambda,
        seed,
    })
}

/// Deterministic integration hardness: builds the adversarial pair
/// `(+f, -f)` from the algorithm's own annihilation set and returns
/// `(max error over the pair, kappa_2 m^(omega - 1 + theta lambda))`.
pub fn det_integration_pair(
    alg: &Algorithm,
    cfg: &FamilyConfig,
    m: usize,
) -> Result<(f64, f64)> {
    if alg.kind() != crate::algorithms::AlgKind::Deterministic {
        return Err(Error::Config("the pair bound applies to deterministic algorithms".into()));
    }
    let p = &cfg.space;
    // Record the algorithm's sample points on the zero target.
    let zero = LabFn::Zero { d: p.d };
    let probe = Probe::recording(&zero, m);
    let mu = match alg.run(&probe, m, 0)? {
        Output::Scalar(v) => v,
        Output::Func(g) => g.integral(),
    };
    let points = probe.recorded();
    let ann = annihilation_set(&points, m);
    let k = (m as f64).powf(cfg.theta * cfg.lambda).ceil() as usize;
    assert!(ann.indices.len() >= k);
    let j_set: Vec<usize> = ann.indices[..k].to_vec();
    let params = UnitBallFamilyParams::derive(
        p.d, p.alpha, cfg.gamma, cfg.theta, cfg.lambda, cfg.sigma, m, p.growths,
    )?;
    let nu = vec![1.0; 2 * m];
    let f = hats::build_unit_ball_family(&params, &nu, &j_set)?;
    // The members vanish at every sample point, so the algorithm returns the
    // same output mu for both; checked via real runs.
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let mut g = f.clone();
        for t in g.terms.iter_mut() {
            t.1 *= sign;
        }
        let target = LabFn::Hat(g);
        let probe = Probe::new(&target, m);
        let out = alg.run(&probe, m, 0)?;
        let got = match out {
            Output::Scalar(v) => v,
            Output::Func(h) => h.integral(),
        };
        debug_assert!((got - mu).abs() < 1e-12);
        worst = worst.max((got - target.integral()).abs());
    }
    let c = params.consts;
    let bound = c.kappa / 4.0
        * (m as f64).powf(c.omega - 1.0 + cfg.theta * cfg.lambda);
    Ok((worst, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{make_algorithm, Dictionary};
    use crate::approx_space::{CoeffGrowth, DepthGrowth, GrowthPair};
    use std::sync::Arc;

    fn space(d: usize, alpha: f64, l: u64) -> SpaceParams {
        SpaceParams {
            d,
            alpha,
            growths: GrowthPair {
                depth: DepthGrowth::Constant { l },
                coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
            },
        }
    }

    fn cfg(problem: Problem, d: usize, alpha: f64) -> FamilyConfig {
        FamilyConfig {
            problem,
            space: space(d, alpha, 3),
            gamma: 0.5,
            theta: 1.0,
            lambda: 0.5,
            sigma: 2.0,
            consts: CheckConstants::default(),
        }
    }

    #[test]
    fn annihilation_frozen_examples() {
        // m=1: x_1 = z_1 kills only hat 1, leaving I = {2} (1-based).
        let z1 = 0.25;
        let i = annihilation_set(&[vec![z1]], 1);
        assert_eq!(i.indices, vec![1]);
        // m=2: all points inside hat 1's support leave {2,3,4}.
        let pts = vec![vec![0.10], vec![0.12]];
        let i = annihilation_set(&pts, 2);
        assert_eq!(i.indices, vec![1, 2, 3]);
        // Points outside [0,1] leave everything.
        let i = annihilation_set(&[vec![1.5], vec![2.0]], 2);
        assert_eq!(i.indices.len(), 4);
    }

    #[test]
    fn annihilation_size_at_least_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for m in [1usize, 2, 4, 8, 16, 32] {
            for _ in 0..200 {
                let pts: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen()]).collect();
                assert!(annihilation_set(&pts, m).indices.len() >= m);
            }
        }
    }

    #[test]
    fn uniform_family_structure() {
        let c = cfg(Problem::Uniform, 1, 1.0);
        let fam = build_family(&c, 1).unwrap();
        // d=1, m=1: k=1, 2 centers, 4 members.
        assert_eq!(fam.count, BigUint::from(4usize));
        let members = fam.enumerate_members().unwrap();
        assert_eq!(members.len(), 4);
        for f in &members {
            if let LabFn::Bump(b) = f {
                // Open support cube contained in (0,1)^d.
                let inv = 1.0 / b.bump.m;
                for yj in &b.bump.y {
                    assert!(yj - inv >= 0.0 && yj + inv <= 1.0);
                }
            } else {
                panic!("uniform members are bumps");
            }
        }
        // Disjoint supports: products vanish on a fine grid.
        for t in 0..=200 {
            let x = [t as f64 / 200.0];
            let v0 = members[0].eval(&x);
            let v2 = members[2].eval(&x);
            assert_eq!(v0 * v2, 0.0);
        }
    }

    #[test]
    fn hat_family_structure() {
        // m=1 with theta*lambda -> 0: k=1, |Gamma| = 2^2 * C(2,1) = 8.
        let mut c = cfg(Problem::L2, 1, 1.0);
        c.lambda = 0.0;
        let fam = build_family(&c, 1).unwrap();
        assert_eq!(fam.count, BigUint::from(8usize));
        // Members bounded by kappa m^omega <= 1.
        let members = fam.enumerate_members().unwrap();
        for f in &members {
            assert!(f.linf() <= 1.0 + 1e-12);
        }
        // k <= 2 m^(theta lambda).
        let c = cfg(Problem::L2, 1, 1.0);
        for m in [1usize, 3, 7, 16] {
            let fam = build_family(&c, m).unwrap();
            if let FamilyKind::HatSigns { k, .. } = fam.kind {
                assert!(k as f64 <= 2.0 * (m as f64).powf(c.theta * c.lambda));
            }
        }
    }

    #[test]
    fn hardness_bound_frozen_exponents() {
        // L2: lambda = 1/2 - omega - theta lambda / 2.
        let c = cfg(Problem::L2, 1, 1.0);
        let (_, lam) = hardness_bound(&c, Regime::Det).unwrap();
        let omega = (-1.0f64).min(1.0 * (0.5 - 0.5) - 1.0);
        assert!((lam - (0.5 - omega - 0.25)).abs() < 1e-15);
        // Integration det: lambda = 1 - omega - theta lambda.
        let c = cfg(Problem::Integral, 1, 1.0);
        let (_, lam) = hardness_bound(&c, Regime::Det).unwrap();
        assert!((lam - (1.0 - omega - 0.5)).abs() < 1e-15);
        // Integration mc with theta=1, lambda=1, gamma=0.9, alpha=1:
        // omega = min(-1, -1.1) = -1.1, exponent = 1 + 1.1 - 0.5 = 1.6.
        let mut c = cfg(Problem::Integral, 1, 1.0);
        c.gamma = 0.9;
        c.lambda = 1.0;
        let (_, lam) = hardness_bound(&c, Regime::Mc).unwrap();
        assert!((lam - 1.6).abs() < 1e-12, "{lam}");
    }

    #[test]
    fn zero_algorithm_integral_error_on_positive_slice() {
        // For nu = +1 on J: |T(f)| = kappa m^omega k / (4m) for every J.
        let c = cfg(Problem::Integral, 1, 1.0);
        let m = 4usize;
        let fam = build_family(&c, m).unwrap();
        let (params, k) = match &fam.kind {
            FamilyKind::HatSigns { params, k } => (params.clone(), *k),
            _ => unreachable!(),
        };
        let nu = vec![1.0; 2 * m];
        let j_set: Vec<usize> = (0..k).collect();
        let f = hats::build_unit_ball_family(&params, &nu, &j_set).unwrap();
        let want = params.member_scale() * k as f64 / (4.0 * m as f64);
        assert!((LabFn::Hat(f).integral() - want).abs() < 1e-15);
    }

    #[test]
    fn exact_average_beats_bound_for_zero_and_midpoint() {
        let dict = Arc::new(
            Dictionary::build("hats_v1", &space(1, 1.0, 3), 0.5).unwrap(),
        );
        let opts = AvgCaseOpts::default();
        for problem in [Problem::L2, Problem::Integral] {
            // lambda = 0.5 gives k = ceil(sqrt(m)); lambda = 0 the k = 1 slice.
            for lambda in [0.5, 0.0] {
            let mut c = cfg(problem, 1, 1.0);
            c.lambda = lambda;
            let smap = SolutionMap::for_problem(problem);
            for m in [1usize, 2, 4] {
                let fam = build_family(&c, m).unwrap();
                for id in ["zero", "midpoint"] {
                    if id == "midpoint" && problem != Problem::Integral {
                        continue;
                    }
                    let alg = make_algorithm(id, &dict).unwrap();
                    let rep = average_case_error(&alg, &fam, smap, &opts, 7).unwrap();
                    assert!(rep.exact);
                    assert!(
                        rep.measured >= rep.bound,
                        "{problem} {id} m={m}: {} < {}",
                        rep.measured,
                        rep.bound
                    );
                }
            }
            }
        }
    }

    #[test]
    fn subsampled_estimator_is_unbiased_at_m2() {
        let dict = Arc::new(
            Dictionary::build("hats_v1", &space(1, 1.0, 3), 0.5).unwrap(),
        );
        let c = cfg(Problem::Integral, 1, 1.0);
        let fam = build_family(&c, 2).unwrap();
        let alg = make_algorithm("zero", &dict).unwrap();
        let exact =
            average_case_error(&alg, &fam, SolutionMap::Integral, &AvgCaseOpts::default(), 1)
                .unwrap();
        assert!(exact.exact);
        // Force subsampling and average the estimates.
        let opts = AvgCaseOpts { enumerate_threshold: 0, draws: 400 };
        let mut means = Vec::new();
        for seed in 0..40u64 {
            let rep =
                average_case_error(&alg, &fam, SolutionMap::Integral, &opts, seed).unwrap();
            assert!(!rep.exact);
            means.push(rep.measured);
        }
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        let var =
            means.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>() / means.len() as f64;
        let sigma = (var / means.len() as f64).sqrt();
        assert!(
            (grand - exact.measured).abs() <= 3.0 * sigma.max(1e-12),
            "grand mean {grand} vs exact {}",
            exact.measured
        );
    }

    #[test]
    fn sign_symmetrization_inequality() {
        // max(|x - mu|, |-x - mu|) >= |x| for the midpoint rule outputs.
        let dict = Arc::new(
            Dictionary::build("hats_v1", &space(1, 1.0, 3), 0.5).unwrap(),
        );
        let c = cfg(Problem::Integral, 1, 1.0);
        let m = 4;
        let fam = build_family(&c, m).unwrap();
        let alg = make_algorithm("midpoint", &dict).unwrap();
        let (params, k) = match &fam.kind {
            FamilyKind::HatSigns { params, k } => (params.clone(), *k),
            _ => unreachable!(),
        };
        let nu = vec![1.0; 2 * m];
        for j in 0..2 * m - k + 1 {
            let j_set: Vec<usize> = (j..j + k).collect();
            let f = hats::build_unit_ball_family(&params, &nu, &j_set).unwrap();
            let tf = LabFn::Hat(f.clone());
            let mut neg = f.clone();
            for t in neg.terms.iter_mut() {
                t.1 = -t.1;
            }
            let tneg = LabFn::Hat(neg);
            let err = |t: &LabFn| {
                let probe = Probe::new(t, m);
                match alg.run(&probe, m, 0).unwrap() {
                    Output::Scalar(v) => (v - t.integral()).abs(),
                    _ => unreachable!(),
                }
            };
            assert!(err(&tf).max(err(&tneg)) >= tf.integral().abs() - 1e-15);
        }
    }

    #[test]
    fn det_pair_bound_holds_for_registered_algorithms() {
        let dict = Arc::new(
            Dictionary::build("hats_v1", &space(1, 1.0, 3), 0.5).unwrap(),
        );
        let c = cfg(Problem::Integral, 1, 1.0);
        for id in ["zero", "midpoint", "grid", "vc_quadrature"] {
            let alg = make_algorithm(id, &dict).unwrap();
            for m in [1usize, 2, 4, 8] {
                let (worst, bound) = det_integration_pair(&alg, &c, m).unwrap();
                assert!(worst >= bound, "{id} m={m}: {worst} < {bound}");
            }
        }
    }

    #[test]
    fn uniform_family_average_beats_bound() {
        let dict = Arc::new(
            Dictionary::build("hats_v1", &space(1, 2.0, 3), 0.95).unwrap(),
        );
        let mut c = cfg(Problem::Uniform, 1, 2.0);
        c.gamma = 0.95;
        for m in [1usize, 2, 4, 16] {
            let fam = build_family(&c, m).unwrap();
            for id in ["zero", "grid"] {
                let alg = make_algorithm(id, &dict).unwrap();
                let rep = average_case_error(
                    &alg,
                    &fam,
                    SolutionMap::UniformEmbed,
                    &AvgCaseOpts::default(),
                    3,
                )
                .unwrap();
                assert!(rep.measured >= rep.bound, "{id} m={m}");
            }
        }
    }
}
