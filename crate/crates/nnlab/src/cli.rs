//! Command-line entry point: wires a JSON config to the check suite, the
//! hardness sweeps and the rates table, and writes CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or config error. Reruns
//! with the same config and seed are byte-identical apart from the
//! `# generated_unix` header line.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::adversary::{
    average_case_error, build_family, det_integration_pair, AvgCaseOpts, FamilyConfig,
};
use crate::algorithms::{make_algorithm, Dictionary, SolutionMap, ALGORITHM_IDS};
use crate::approx_space::{
    beta_star_integration, beta_star_l2, beta_star_uniform, CoeffGrowth, DepthGrowth, GrowthPair,
    Problem, Regime, SpaceParams,
};
use crate::checks::{self, CheckSettings, CHECK_IDS};
use crate::complexity_checks::CheckConstants;
use crate::error::{Error, Result};
use crate::rates::{fit_rate, parse_m_grid};

/// Rates-table parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RatesGrid {
    pub ds: Vec<usize>,
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Depth suprema as strings; `"inf"` selects unbounded depth.
    pub ell_stars: Vec<String>,
}

/// Serializable lab configuration; all commands read it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct LabConfig {
    pub d: usize,
    pub alpha: f64,
    pub depth: DepthGrowth,
    pub coeff: CoeffGrowth,
    /// Hardness-family exponent, strictly below gamma_flat.
    pub gamma: f64,
    pub theta: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub dict: String,
    pub seed: u64,
    pub m_grid: String,
    pub trials: usize,
    pub fidelity_tol: f64,
    pub slope_slack: f64,
    pub enumerate_threshold: u64,
    pub subsample_draws: usize,
    /// Subset of check ids for `verify`; `null` means all.
    pub checks: Option<Vec<String>>,
    pub constants: CheckConstants,
    pub rates: RatesGrid,
    pub out_dir: String,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            d: 1,
            alpha: 2.0,
            depth: DepthGrowth::Constant { l: 3 },
            coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
            gamma: 0.95,
            theta: 1.0,
            lambda: 1.0,
            sigma: 2.0,
            dict: "hats_v1".into(),
            seed: 7,
            m_grid: "16:8192:geometric".into(),
            trials: 100,
            fidelity_tol: 1e-9,
            slope_slack: 0.15,
            enumerate_threshold: 100_000,
            subsample_draws: 10_000,
            checks: None,
            constants: CheckConstants::default(),
            rates: RatesGrid {
                ds: vec![1, 2],
                alphas: vec![0.25, 0.5, 1.0, 2.0, 4.0, 1e6],
                thetas: vec![0.0, 1.0],
                ell_stars: vec!["2".into(), "3".into(), "5".into(), "inf".into()],
            },
            out_dir: "out".into(),
        }
    }
}

impl LabConfig {
    pub fn load(path: Option<&Path>) -> Result<LabConfig> {
        match path {
            None => Ok(LabConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let cfg: LabConfig = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                Ok(cfg)
            }
        }
    }

    pub fn space(&self) -> SpaceParams {
        SpaceParams {
            d: self.d,
            alpha: self.alpha,
            growths: GrowthPair { depth: self.depth, coeff: self.coeff },
        }
    }

    pub fn check_settings(&self) -> CheckSettings {
        CheckSettings {
            tol: self.fidelity_tol,
            seed: self.seed,
            space: self.space(),
            gamma: self.gamma,
            theta: self.theta,
            lambda: self.lambda,
            consts: self.constants,
        }
    }

    pub fn family_config(&self, problem: Problem) -> FamilyConfig {
        FamilyConfig {
            problem,
            space: self.space(),
            gamma: self.gamma,
            theta: self.theta,
            lambda: self.lambda,
            sigma: self.sigma,
            consts: self.constants,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nnlab", version, about = "Sampling-complexity laboratory for ReLU approximation spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the construction-fidelity and lemma-oracle suites.
    Verify {
        /// Comma-separated check ids (default: all).
        #[arg(long)]
        checks: Option<String>,
    },
    /// Average-case hardness sweep of one algorithm on one problem.
    Hardness {
        #[arg(long, value_parser = ["uniform", "l2", "integral"])]
        problem: String,
        #[arg(long)]
        algorithm: String,
        #[arg(long, value_parser = ["det", "mc"])]
        regime: Option<String>,
        /// Geometric grid `a:b:geometric` (overrides the config).
        #[arg(long = "m-grid")]
        m_grid: Option<String>,
    },
    /// Closed-form optimal-rate table over the configured parameter grid.
    RatesTable,
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let mut cfg = match LabConfig::load(cli.common.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    let out_dir = cli.common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let result = match &cli.cmd {
        Cmd::Verify { checks } => {
            let selected = checks
                .as_ref()
                .map(|s| s.split(',').map(str::trim).map(String::from).collect::<Vec<_>>());
            cmd_verify(&cfg, selected.as_deref(), &out_dir)
        }
        Cmd::Hardness { problem, algorithm, regime, m_grid } => {
            let problem = match problem.as_str() {
                "uniform" => Problem::Uniform,
                "l2" => Problem::L2,
                _ => Problem::Integral,
            };
            let regime = match regime.as_deref() {
                Some("det") => Regime::Det,
                _ => Regime::Mc,
            };
            let grid_spec = m_grid.clone().unwrap_or_else(|| cfg.m_grid.clone());
            cmd_hardness(&cfg, problem, algorithm, regime, &grid_spec, &out_dir)
        }
        Cmd::RatesTable => cmd_rates_table(&cfg, &out_dir),
    };
    match result {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::UnknownAlgorithm(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn timestamp_header() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated_unix: {secs}\n")
}

fn write_artifact(out_dir: &Path, name: &str, header: &str, body: &str) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut text = timestamp_header();
    text.push_str(header);
    text.push_str(body);
    fs::write(out_dir.join(name), text)?;
    Ok(())
}

/// Runs the selected checks, writes `verify.csv`, exits 0 iff all rows pass.
pub fn cmd_verify(cfg: &LabConfig, selected: Option<&[String]>, out_dir: &Path) -> Result<i32> {
    let settings = cfg.check_settings();
    settings.space.growths.validate()?;
    let ids: Vec<&str> = match selected.or(cfg.checks.as_deref()) {
        None => CHECK_IDS.to_vec(),
        Some(list) => {
            let mut ids = Vec::new();
            for want in list {
                if !CHECK_IDS.contains(&want.as_str()) {
                    return Err(Error::Config(format!("unknown check id: {want}")));
                }
                ids.push(CHECK_IDS.iter().find(|i| **i == want.as_str()).copied().unwrap());
            }
            ids
        }
    };
    let mut body = String::new();
    let mut all_pass = true;
    for id in ids {
        let rows = checks::run_check(id, &settings)?;
        let failed = rows.iter().filter(|r| !r.pass).count();
        all_pass &= failed == 0;
        println!(
            "[verify] {id}: {} rows, {} failed -> {}",
            rows.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        );
        for row in rows {
            body.push_str(&row.csv());
            body.push('\n');
        }
    }
    write_artifact(out_dir, "verify.csv", "check,params,value,bound,pass\n", &body)?;
    Ok(if all_pass { 0 } else { 1 })
}

/// Hardness sweep: one HardnessReport JSON per m plus a summary CSV, then a
/// slope fit of the measured curve.
pub fn cmd_hardness(
    cfg: &LabConfig,
    problem: Problem,
    algorithm: &str,
    regime: Regime,
    grid_spec: &str,
    out_dir: &Path,
) -> Result<i32> {
    if !ALGORITHM_IDS.contains(&algorithm) {
        return Err(Error::UnknownAlgorithm(algorithm.to_string()));
    }
    let space = cfg.space();
    let dict = Arc::new(Dictionary::build(&cfg.dict, &space, cfg.gamma)?);
    let alg = make_algorithm(algorithm, &dict)?;
    if !alg.applicable(problem) {
        return Err(Error::Config(format!(
            "algorithm {algorithm} does not produce outputs for problem {problem}"
        )));
    }
    let fam_cfg = cfg.family_config(problem);
    let m_grid = parse_m_grid(grid_spec)?;
    let smap = SolutionMap::for_problem(problem);
    let opts = AvgCaseOpts {
        enumerate_threshold: cfg.enumerate_threshold,
        draws: cfg.subsample_draws,
    };
    let mut body = String::new();
    let mut all_pass = true;
    let mut curve_points = Vec::new();
    for (i, &m) in m_grid.iter().enumerate() {
        if problem == Problem::Integral && regime == Regime::Det {
            let (worst, bound) = det_integration_pair(&alg, &fam_cfg, m)?;
            let pass = worst >= bound;
            all_pass &= pass;
            body.push_str(&format!(
                "{problem},{algorithm},{m},{worst:.12e},{bound:.12e},0.000000000000e0,{pass}\n"
            ));
            curve_points.push(crate::rates::CurvePoint { m, error: worst, stderr: 0.0 });
            write_artifact(
                out_dir,
                &format!("hardness_{problem}_{algorithm}_m{m}.json"),
                "",
                &serde_json::to_string_pretty(&serde_json::json!({
                    "problem": format!("{problem}"),
                    "regime": "det",
                    "algorithm": algorithm,
                    "m": m,
                    "measured": worst,
                    "bound": bound,
                    "pass": pass,
                }))?,
            )?;
        } else {
            let fam = build_family(&fam_cfg, m)?;
            let rep = average_case_error(&alg, &fam, smap, &opts, cfg.seed + i as u64)?;
            all_pass &= rep.pass;
            body.push_str(&rep.csv_row());
            body.push('\n');
            curve_points.push(crate::rates::CurvePoint {
                m,
                error: rep.measured,
                stderr: rep.stderr,
            });
            write_artifact(
                out_dir,
                &format!("hardness_{problem}_{algorithm}_m{m}.json"),
                "",
                &serde_json::to_string_pretty(&rep)?,
            )?;
        }
    }
    write_artifact(
        out_dir,
        &format!("hardness_{problem}_{algorithm}.csv"),
        "problem,algorithm,m,measured,bound,stderr,pass\n",
        &body,
    )?;
    // Slope fit against the theory interval for the problem.
    let theory = match (problem, regime) {
        (Problem::Uniform, _) => beta_star_uniform(&space),
        (Problem::L2, _) => beta_star_l2(&space),
        (Problem::Integral, r) => beta_star_integration(&space, r),
    };
    let curve = crate::rates::ErrorCurve {
        algorithm: algorithm.to_string(),
        problem: format!("{problem}"),
        target: "family".into(),
        seed: cfg.seed,
        points: curve_points,
    };
    write_artifact(out_dir, &format!("curve_{problem}_{algorithm}.csv"), "", &curve.csv())?;
    if curve.points.len() >= 3 {
        let fit = fit_rate(&curve, Some(theory), cfg.slope_slack)?;
        write_artifact(
            out_dir,
            &format!("hardness_{problem}_{algorithm}_fit.json"),
            "",
            &serde_json::to_string_pretty(&fit)?,
        )?;
        println!(
            "[hardness] {problem}/{algorithm}: beta_hat = {:.4}, bound exponent respected: {}",
            fit.beta_hat,
            if all_pass { "yes" } else { "no" }
        );
    }
    Ok(if all_pass { 0 } else { 1 })
}

/// Emits the closed-form rate table over the configured grid.
pub fn cmd_rates_table(cfg: &LabConfig, out_dir: &Path) -> Result<i32> {
    let mut body = String::new();
    for &d in &cfg.rates.ds {
        for &alpha in &cfg.rates.alphas {
            for &theta in &cfg.rates.thetas {
                for ell in &cfg.rates.ell_stars {
                    let depth = if ell == "inf" {
                        DepthGrowth::Unbounded
                    } else {
                        let l: u64 = ell
                            .parse()
                            .map_err(|_| Error::Config(format!("bad ell_star: {ell}")))?;
                        DepthGrowth::Constant { l }
                    };
                    let space = SpaceParams {
                        d,
                        alpha,
                        growths: GrowthPair {
                            depth,
                            coeff: CoeffGrowth::PolyLog { s: 1.0, theta, kappa: 0.0 },
                        },
                    };
                    let gamma = space.gamma_flat();
                    let rows = [
                        (beta_star_uniform(&space), Regime::Det),
                        (beta_star_uniform(&space), Regime::Mc),
                        (beta_star_l2(&space), Regime::Det),
                        (beta_star_l2(&space), Regime::Mc),
                        (beta_star_integration(&space, Regime::Det), Regime::Det),
                        (beta_star_integration(&space, Regime::Mc), Regime::Mc),
                    ];
                    for (interval, regime) in rows {
                        body.push_str(&format!(
                            "{d},{alpha},{theta},0,{ell},{gamma},{},{regime},{:.12e},{:.12e}\n",
                            interval.problem, interval.lower, interval.upper
                        ));
                    }
                }
            }
        }
    }
    write_artifact(
        out_dir,
        "rates_table.csv",
        "d,alpha,theta,kappa,ell_star,gamma,problem,regime,lower,upper\n",
        &body,
    )?;
    println!("[rates-table] written to {}", out_dir.join("rates_table.csv").display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_losslessly() {
        let cfg = LabConfig::default();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: LabConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn khintchine_only_verify_writes_24_rows() {
        let cfg = LabConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let code =
            cmd_verify(&cfg, Some(&["khintchine".to_string()]), dir.path()).unwrap();
        assert_eq!(code, 0);
        let text = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("check,"))
            .collect();
        assert_eq!(rows.len(), 24);
    }

    #[test]
    fn unknown_algorithm_is_a_usage_error() {
        let code = run([
            "nnlab",
            "hardness",
            "--problem",
            "integral",
            "--algorithm",
            "nope",
            "--m-grid",
            "1:4:geometric",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn unknown_check_is_a_usage_error() {
        let cfg = LabConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_verify(&cfg, Some(&["nope".to_string()]), dir.path()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn rates_table_rows_and_caps() {
        let cfg = LabConfig::default();
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd_rates_table(&cfg, dir.path()).unwrap(), 0);
        let text = fs::read_to_string(dir.path().join("rates_table.csv")).unwrap();
        let mut rows = 0usize;
        for line in text.lines().skip(2) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 10);
            let d: f64 = cols[0].parse().unwrap();
            let lower: f64 = cols[8].parse().unwrap();
            let upper: f64 = cols[9].parse().unwrap();
            assert!(lower <= upper + 1e-12, "{line}");
            match cols[6] {
                "uniform" => {
                    assert!(upper <= 1.0 / d + 1e-12);
                    if cols[4] == "inf" {
                        assert_eq!(upper, 0.0);
                    }
                }
                "l2" => assert!(upper <= 1.5 + 1e-12),
                "integral" => assert!(upper <= 2.0 + 1e-12),
                other => panic!("unexpected problem {other}"),
            }
            rows += 1;
        }
        // 2 d * 6 alphas * 2 thetas * 4 ell_stars * 6 rows each.
        assert_eq!(rows, 2 * 6 * 2 * 4 * 6);
        // Spot value: d=1, alpha=1, theta=0, ell_star=3, uniform -> 0.5.
        let spot = text
            .lines()
            .find(|l| l.starts_with("1,1,0,0,3,1,uniform,det"))
            .expect("spot row present");
        let cols: Vec<&str> = spot.split(',').collect();
        assert_eq!(cols[8].parse::<f64>().unwrap(), 0.5);
        assert_eq!(cols[9].parse::<f64>().unwrap(), 0.5);
    }
}
