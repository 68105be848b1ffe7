//! Rate experiments: error curves over a geometric sample grid and the
//! log-log slope fit against the theory intervals.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{average_case_error, build_family, AvgCaseOpts, FamilyConfig};
use crate::algorithms::{evaluate_error, Algorithm, LabFn, Probe, SolutionMap};
use crate::approx_space::RateInterval;
use crate::error::{Error, Result};
use crate::real::pairwise_sum;

/// Floor applied to measured errors before the log transform; exact hits
/// would otherwise break the fit.
pub const ERROR_FLOOR: f64 = 1e-13;

/// One measured point of an error curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub m: usize,
    pub error: f64,
    pub stderr: f64,
}

/// Measured error curve with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorCurve {
    pub algorithm: String,
    pub problem: String,
    pub target: String,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn csv(&self) -> String {
        let mut out = String::from("m,error,stderr\n");
        for p in &self.points {
            out.push_str(&format!("{},{:.12e},{:.12e}\n", p.m, p.error, p.stderr));
        }
        out
    }
}

/// What a rate experiment runs against.
pub enum RateTarget {
    /// Average-case error over the adversarial family at each `m`.
    Family(FamilyConfig),
    /// A single fixed function (Monte Carlo algorithms average over trials).
    Single { name: String, f: LabFn },
}

/// Runs `algorithm x target x m_grid`, producing one curve.
///
/// Needs a geometric grid with at least 4 points. For Monte Carlo algorithms
/// on single targets the per-m error is the mean over `trials` runs with
/// trial seeds split off the master seed.
pub fn run_rate_experiment(
    alg: &Algorithm,
    target: &RateTarget,
    smap: SolutionMap,
    m_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ErrorCurve> {
    if m_grid.len() < 4 {
        return Err(Error::Config("m grid needs at least 4 points".into()));
    }
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("m grid must increase".into()));
    }
    let mut points = Vec::with_capacity(m_grid.len());
    let (problem, target_name) = match target {
        RateTarget::Family(cfg) => (format!("{}", cfg.problem), "family".to_string()),
        RateTarget::Single { name, .. } => (format!("{smap:?}"), name.clone()),
    };
    for (mi, &m) in m_grid.iter().enumerate() {
        match target {
            RateTarget::Family(cfg) => {
                let fam = build_family(cfg, m)?;
                let rep =
                    average_case_error(alg, &fam, smap, &AvgCaseOpts::default(), seed + mi as u64)?;
                points.push(CurvePoint { m, error: rep.measured, stderr: rep.stderr });
            }
            RateTarget::Single { f, .. } => {
                let runs = match alg.kind() {
                    crate::algorithms::AlgKind::Deterministic => 1,
                    crate::algorithms::AlgKind::MonteCarlo => trials.max(1),
                };
                let mut errs = Vec::with_capacity(runs);
                for t in 0..runs {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((mi as u64) << 32) | t as u64);
                    let trial_seed = rng.gen();
                    let probe = Probe::new(f, m);
                    let out = alg.run(&probe, m, trial_seed)?;
                    errs.push(evaluate_error(&out, f, smap));
                }
                let mean = pairwise_sum(&errs) / errs.len() as f64;
                let stderr = if errs.len() > 1 {
                    let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                        / errs.len() as f64;
                    (var / errs.len() as f64).sqrt()
                } else {
                    0.0
                };
                points.push(CurvePoint { m, error: mean, stderr });
            }
        }
    }
    Ok(ErrorCurve {
        algorithm: alg.id().to_string(),
        problem,
        target: target_name,
        seed,
        points,
    })
}

/// Fitted exponent with the theory verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub beta_hat: f64,
    /// RMS residual of the log-log least-squares fit.
    pub residual: f64,
    /// How many errors were floored at [`ERROR_FLOOR`].
    pub floored: usize,
    pub theory: Option<RateInterval>,
    /// `beta_hat <= upper + slack`.
    pub upper_respected: Option<bool>,
    /// `beta_hat >= lower - slack`.
    pub lower_witnessed: Option<bool>,
    pub slack: f64,
}

/// Least-squares slope on `(ln m, ln error)`; `beta_hat` is its negative.
pub fn fit_rate(curve: &ErrorCurve, theory: Option<RateInterval>, slack: f64) -> Result<RateReport> {
    let mut floored = 0usize;
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| {
            let e = if p.error < ERROR_FLOOR {
                floored += 1;
                ERROR_FLOOR
            } else {
                p.error
            };
            ((p.m as f64).ln(), e.ln())
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { usable: pts.len(), needed: 3 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let beta_hat = -slope;
    Ok(RateReport {
        beta_hat,
        residual,
        floored,
        theory,
        upper_respected: theory.map(|t| beta_hat <= t.upper + slack),
        lower_witnessed: theory.map(|t| beta_hat >= t.lower - slack),
        slack,
    })
}

/// Parses a geometric grid spec `a:b:geometric` into doubling values.
pub fn parse_m_grid(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 || parts[2] != "geometric" {
        return Err(Error::Config(format!("bad m-grid spec: {spec} (want a:b:geometric)")));
    }
    let a: usize =
        parts[0].parse().map_err(|_| Error::Config(format!("bad m-grid start: {}", parts[0])))?;
    let b: usize =
        parts[1].parse().map_err(|_| Error::Config(format!("bad m-grid end: {}", parts[1])))?;
    if a == 0 || b < a {
        return Err(Error::Config(format!("bad m-grid range: {spec}")));
    }
    let mut grid = Vec::new();
    let mut m = a;
    while m <= b {
        grid.push(m);
        m *= 2;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{make_algorithm, Dictionary};
    use crate::approx_space::{CoeffGrowth, DepthGrowth, GrowthPair, Problem, SpaceParams};
    use crate::complexity_checks::CheckConstants;
    use std::sync::Arc;

    fn synthetic(errors: &[(usize, f64)]) -> ErrorCurve {
        ErrorCurve {
            algorithm: "test".into(),
            problem: "integral".into(),
            target: "synthetic".into(),
            seed: 0,
            points: errors
                .iter()
                .map(|&(m, error)| CurvePoint { m, error, stderr: 0.0 })
                .collect(),
        }
    }

    #[test]
    fn fit_rate_recovers_exact_power_laws() {
        let curve =
            synthetic(&[(16, 1.0 / 16.0), (32, 1.0 / 32.0), (64, 1.0 / 64.0), (128, 1.0 / 128.0)]);
        let rep = fit_rate(&curve, None, 0.15).unwrap();
        assert!((rep.beta_hat - 1.0).abs() < 1e-12);
        assert!(rep.residual < 1e-12);
        // Constants do not move the slope.
        let curve = synthetic(
            &[(16, 3.0 / 4.0), (32, 3.0 / 32f64.sqrt()), (64, 3.0 / 8.0), (256, 3.0 / 16.0)],
        );
        let rep = fit_rate(&curve, None, 0.15).unwrap();
        assert!((rep.beta_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_is_scale_invariant() {
        let base = synthetic(&[(16, 0.9), (32, 0.52), (64, 0.33), (128, 0.19)]);
        let rep1 = fit_rate(&base, None, 0.15).unwrap();
        let mut scaled = base.clone();
        for p in scaled.points.iter_mut() {
            p.error *= 17.5;
        }
        let rep2 = fit_rate(&scaled, None, 0.15).unwrap();
        assert!((rep1.beta_hat - rep2.beta_hat).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_floors_zero_errors_and_flags() {
        let curve = synthetic(&[(16, 1e-2), (32, 0.0), (64, 0.0), (128, 0.0)]);
        let rep = fit_rate(&curve, None, 0.15).unwrap();
        assert_eq!(rep.floored, 3);
        assert!(rep.beta_hat > 0.0);
    }

    #[test]
    fn fit_rate_needs_three_points() {
        let curve = synthetic(&[(16, 1.0), (32, 0.5)]);
        assert!(matches!(
            fit_rate(&curve, None, 0.15),
            Err(Error::InsufficientData { usable: 2, needed: 3 })
        ));
    }

    #[test]
    fn parse_m_grid_examples() {
        assert_eq!(parse_m_grid("16:128:geometric").unwrap(), vec![16, 32, 64, 128]);
        assert!(parse_m_grid("16:8:geometric").is_err());
        assert!(parse_m_grid("16:128:linear").is_err());
    }

    #[test]
    fn zero_algorithm_on_constant_one_has_unit_error() {
        let dict = Arc::new(
            Dictionary::build(
                "hats_v1",
                &SpaceParams {
                    d: 1,
                    alpha: 1.0,
                    growths: GrowthPair {
                        depth: DepthGrowth::Constant { l: 3 },
                        coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
                    },
                },
                0.5,
            )
            .unwrap(),
        );
        let alg = make_algorithm("zero", &dict).unwrap();
        let target =
            RateTarget::Single { name: "one".into(), f: LabFn::Const { d: 1, value: 1.0 } };
        let curve = run_rate_experiment(
            &alg,
            &target,
            SolutionMap::Integral,
            &[4, 8, 16, 32],
            1,
            0,
        )
        .unwrap();
        assert!(curve.points.iter().all(|p| (p.error - 1.0).abs() < 1e-15));
    }

    #[test]
    fn standard_mc_curve_decreases_and_fits_half() {
        let dict = Arc::new(
            Dictionary::build(
                "hats_v1",
                &SpaceParams {
                    d: 1,
                    alpha: 1.0,
                    growths: GrowthPair {
                        depth: DepthGrowth::Constant { l: 3 },
                        coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
                    },
                },
                0.5,
            )
            .unwrap(),
        );
        let alg = make_algorithm("standard_mc", &dict).unwrap();
        let f = dict.elements[1].f.clone();
        let target = RateTarget::Single { name: "hat".into(), f };
        let grid = parse_m_grid("4:16384:geometric").unwrap();
        let curve =
            run_rate_experiment(&alg, &target, SolutionMap::Integral, &grid, 200, 11).unwrap();
        assert!(curve.points.last().unwrap().error < curve.points[0].error);
        let rep = fit_rate(&curve, None, 0.15).unwrap();
        assert!(
            (0.4..=0.6).contains(&rep.beta_hat),
            "Monte Carlo slope {} outside [0.4, 0.6]",
            rep.beta_hat
        );
    }

    #[test]
    fn midpoint_curve_stays_above_family_bound() {
        let space = SpaceParams {
            d: 1,
            alpha: 1.0,
            growths: GrowthPair {
                depth: DepthGrowth::Constant { l: 3 },
                coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
            },
        };
        let dict = Arc::new(Dictionary::build("hats_v1", &space, 0.5).unwrap());
        let cfg = FamilyConfig {
            problem: Problem::Integral,
            space,
            gamma: 0.5,
            theta: 1.0,
            lambda: 0.5,
            sigma: 2.0,
            consts: CheckConstants::default(),
        };
        let alg = make_algorithm("midpoint", &dict).unwrap();
        let target = RateTarget::Family(cfg);
        let curve = run_rate_experiment(
            &alg,
            &target,
            SolutionMap::Integral,
            &[1, 2, 4, 8, 16],
            1,
            5,
        )
        .unwrap();
        for p in &curve.points {
            let fam = build_family(&cfg, p.m).unwrap();
            assert!(p.error >= fam.bound() - 3.0 * p.stderr);
        }
    }
}
