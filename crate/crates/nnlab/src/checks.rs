//! The construction-fidelity and lemma-oracle check suite behind
//! `nnlab verify`. Each check emits one CSV-ready row per verified unit.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx_space::{
    self, optimization_lemma_closed_form, optimization_lemma_oracle, OptObjective, SpaceParams,
};
use crate::complexity_checks as cc;
use crate::error::{Error, Result};
use crate::hats::{self, BumpD, HatSumSpec, UnitBallFamilyParams};

/// One check result: `(check, params, value, bound, pass)`.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check: String,
    pub params: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn csv(&self) -> String {
        format!("{},{},{:.12e},{:.12e},{}", self.check, self.params, self.value, self.bound, self.pass)
    }
}

/// Knobs shared by the checks; defaults follow the acceptance scales.
#[derive(Debug, Clone, Copy)]
pub struct CheckSettings {
    pub tol: f64,
    pub seed: u64,
    pub space: SpaceParams,
    pub gamma: f64,
    pub theta: f64,
    pub lambda: f64,
    pub consts: cc::CheckConstants,
}

pub const CHECK_IDS: [&str; 12] = [
    "hat_sum_fidelity",
    "multihat_fidelity",
    "theta_norms",
    "annihilation",
    "lipschitz",
    "khintchine",
    "subset_avg",
    "cube_volume",
    "opt_lemma",
    "covering",
    "vc_dim",
    "unit_ball_cert",
];

/// Runs one named check.
pub fn run_check(id: &str, s: &CheckSettings) -> Result<Vec<CheckRow>> {
    match id {
        "hat_sum_fidelity" => Ok(hat_sum_fidelity(s, 200)),
        "multihat_fidelity" => Ok(multihat_fidelity(s, 100, 10_000)),
        "theta_norms" => Ok(theta_norms(s)),
        "annihilation" => Ok(annihilation(s, 1000)),
        "lipschitz" => lipschitz(s, 1000),
        "khintchine" => Ok(khintchine(s)),
        "subset_avg" => Ok(subset_avg(s)),
        "cube_volume" => Ok(cube_volume(s, 1000)),
        "opt_lemma" => Ok(opt_lemma(s, 50)),
        "covering" => covering(s),
        "vc_dim" => Ok(vc_dim(s)),
        "unit_ball_cert" => unit_ball_cert(s),
        other => Err(Error::Config(format!("unknown check id: {other}"))),
    }
}

fn dyadic(rng: &mut ChaCha8Rng, denom: u64) -> f64 {
    rng.gen_range(0..=denom) as f64 / denom as f64
}

/// 1-D construction fidelity: network realization against the scaled
/// analytic hat sum on a slope-adapted grid, plus the exact weight budget.
pub fn hat_sum_fidelity(s: &CheckSettings, count: usize) -> Vec<CheckRow> {
    let depths = [2usize, 3, 4, 5, 7, 8];
    let specs: Vec<HatSumSpec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        (0..count)
            .map(|i| {
                let l = depths[i % depths.len()];
                let n = rng.gen_range(1..=8);
                HatSumSpec {
                    d: 1,
                    m: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0][rng.gen_range(0..6)],
                    l,
                    c: rng.gen_range(0.25..2.0),
                    signs: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    centers: (0..n).map(|_| rng.gen()).collect(),
                }
            })
            .collect()
    };
    specs
        .par_iter()
        .map(|spec| {
            let net = hats::build_hat_sum_network(spec).expect("depth >= 2");
            let stats = net.stats();
            let budget = (2 * spec.l as u64 + 8) * spec.n() as u64;
            // Grid: hat kinks, their midpoints, endpoints, slope-adapted mesh.
            let mut xs = vec![0.0, 1.0, -0.125, 1.125];
            for (y, _) in spec.centers.iter().zip(spec.signs.iter()) {
                let inv = 1.0 / spec.m;
                xs.extend([y - inv, *y, y + inv]);
            }
            let mesh = (4.0 * spec.m).max(51.0) as usize;
            xs.extend((0..=mesh).map(|i| i as f64 / mesh as f64));
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mids: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            xs.extend(mids);
            let dev = xs
                .iter()
                .map(|&x| {
                    (net.realize_scalar(&[x]).unwrap() - spec.analytic_eval(x)).abs()
                })
                .fold(0.0, f64::max);
            let pass = dev <= s.tol
                && stats.weights as u64 <= budget
                && stats.layers == spec.l
                && stats.weight_sup <= spec.c + 1e-15;
            CheckRow {
                check: "hat_sum_fidelity".into(),
                params: format!("L={};n={};M={};C={:.3}", spec.l, spec.n(), spec.m, spec.c),
                value: dev,
                bound: s.tol,
                pass,
            }
        })
        .collect()
}

/// d-dimensional construction fidelity plus exact support containment.
///
/// Parameters and probes sit on dyadic grids, which keeps the affine layer
/// arithmetic exact; outside the support cube the realization must be 0.0
/// bitwise. Probes keep an analytic margin below the plateau threshold so
/// rounding in the non-dyadic `(d-1)/d` coefficient cannot flip the sign.
pub fn multihat_fidelity(s: &CheckSettings, count: usize, probes: usize) -> Vec<CheckRow> {
    let cases: Vec<(usize, usize, usize, f64, f64, Vec<f64>, u64)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x11);
        (0..count)
            .map(|i| {
                let d = 1 + i % 3;
                let l = 3 + (i / 3) % 4;
                let n = rng.gen_range(1..=3);
                let m = [1.0, 2.0, 4.0, 8.0, 16.0][rng.gen_range(0..5)];
                let c = [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)];
                let y: Vec<f64> = (0..d).map(|_| dyadic(&mut rng, 64)).collect();
                (d, l, n, m, c, y, rng.gen())
            })
            .collect()
    };
    cases
        .par_iter()
        .map(|(d, l, n, m, c, y, probe_seed)| {
            let (d, l, n, m, c) = (*d, *l, *n, *m, *c);
            let net = hats::build_multihat_network(m, y, n, l, c).expect("depth >= 3");
            let stats = net.stats();
            let budget = 15 * (d as u64 + l as u64) * n as u64;
            let bump = BumpD { m, y: y.clone() };
            let scale = hats::multihat_scale(m, n, l, c);
            // Fidelity on the tensor grid of per-axis kinks plus a mesh.
            let mut axes = Vec::with_capacity(d);
            for yj in y {
                let mut xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
                xs.extend([yj - 1.0 / m, *yj, yj + 1.0 / m, yj - 0.5 / m, yj + 0.5 / m]);
                axes.push(xs);
            }
            let mut dev = 0.0f64;
            let mut idx = vec![0usize; d];
            'grid: loop {
                let x: Vec<f64> = idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect();
                let got = net.realize_scalar(&x).unwrap();
                let want = scale * bump.eval(&x).unwrap();
                dev = dev.max((got - want).abs());
                for j in 0..d {
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        continue 'grid;
                    }
                    idx[j] = 0;
                }
                break;
            }
            // Support containment: exact zeros at dyadic probes outside the cube.
            let mut rng = ChaCha8Rng::seed_from_u64(*probe_seed);
            let mut zero_failures = 0usize;
            let mut checked = 0usize;
            while checked < probes {
                let x: Vec<f64> = (0..d)
                    .map(|_| (rng.gen_range(0..=1u64 << 20) as f64 - (1u64 << 19) as f64) / (1u64 << 18) as f64)
                    .collect();
                if bump.in_support(&x) {
                    continue;
                }
                if d > 1 {
                    // Keep an analytic margin below the plateau threshold.
                    let delta: f64 = x
                        .iter()
                        .zip(y.iter())
                        .map(|(xj, yj)| hats::lambda_eval(m, *yj, *xj))
                        .sum::<f64>()
                        - (d as f64 - 1.0);
                    if delta > -1e-6 {
                        continue;
                    }
                }
                checked += 1;
                if net.realize_scalar(&x).unwrap() != 0.0 {
                    zero_failures += 1;
                }
            }
            let pass = dev <= s.tol
                && stats.weights as u64 <= budget
                && stats.layers == l
                && zero_failures == 0;
            CheckRow {
                check: "multihat_fidelity".into(),
                params: format!("d={d};L={l};n={n};M={m};C={c}"),
                value: dev,
                bound: s.tol,
                pass,
            }
        })
        .collect()
}

/// `L^p` norms of the plateau bump against the support-volume upper bound
/// and the half-value lower bound on the inner cube.
pub fn theta_norms(s: &CheckSettings) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x22);
    let mut rows = Vec::new();
    for d in 1..=3usize {
        for &m in &[1.0, 4.0, 16.0, 64.0] {
            let y: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            let bump = BumpD { m, y };
            for &p in &[1.0, 2.0] {
                let norm = hats::bump_lp_norm(&bump, p, true);
                let upper = (2.0 / m).powf(d as f64 / p);
                let lower = 0.5 * (4.0 * d as f64).powf(-(d as f64) / p) * m.powf(-(d as f64) / p);
                rows.push(CheckRow {
                    check: "theta_norms".into(),
                    params: format!("d={d};M={m};p={p};side=upper"),
                    value: norm,
                    bound: upper,
                    pass: norm <= upper + 1e-6,
                });
                rows.push(CheckRow {
                    check: "theta_norms".into(),
                    params: format!("d={d};M={m};p={p};side=lower"),
                    value: norm,
                    bound: lower,
                    pass: norm >= lower - 1e-9,
                });
            }
            // p = infinity: sup over the unit cube.
            let sup = bump.sup_on_unit_cube();
            rows.push(CheckRow {
                check: "theta_norms".into(),
                params: format!("d={d};M={m};p=inf;side=upper"),
                value: sup,
                bound: 1.0,
                pass: sup <= 1.0 + 1e-12,
            });
            rows.push(CheckRow {
                check: "theta_norms".into(),
                params: format!("d={d};M={m};p=inf;side=lower"),
                value: sup,
                bound: 0.5,
                pass: sup >= 0.5,
            });
        }
    }
    rows
}

/// `|I_x| >= m` over random sample configurations.
pub fn annihilation(s: &CheckSettings, configs: usize) -> Vec<CheckRow> {
    (1..=32usize)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ (m as u64) << 8);
            let mut min_size = usize::MAX;
            for _ in 0..configs {
                let pts: Vec<Vec<f64>> =
                    (0..m).map(|_| vec![rng.gen_range(-0.1..1.1)]).collect();
                min_size = min_size.min(crate::adversary::annihilation_set(&pts, m).indices.len());
            }
            CheckRow {
                check: "annihilation".into(),
                params: format!("m={m};configs={configs}"),
                value: min_size as f64,
                bound: m as f64,
                pass: min_size >= m,
            }
        })
        .collect()
}

/// Empirical Lipschitz constants of random budget networks against
/// `C^L n^(floor(L/2))` (l1) and `d C^L n^(floor(L/2))` (l_inf).
pub fn lipschitz(s: &CheckSettings, nets: usize) -> Result<Vec<CheckRow>> {
    let growths = s.space.growths;
    let seeds: Vec<u64> = (0..nets as u64).collect();
    Ok(seeds
        .par_iter()
        .map(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ (0x5A00 + i));
            let n = rng.gen_range(1..=16u64);
            let d = rng.gen_range(1..=3usize);
            let net = cc::random_budget_network(n, &growths, d, &mut rng);
            let (l1, linf) = cc::empirical_lipschitz(&net, 200, s.seed ^ i);
            let (b1, binf) = approx_space::lipschitz_bound(n, &growths, d);
            CheckRow {
                check: "lipschitz".into(),
                params: format!("n={n};d={d}"),
                value: linf,
                bound: binf,
                pass: linf <= binf + 1e-9 && l1 <= b1 + 1e-9,
            }
        })
        .collect())
}

/// Exact Khintchine sign averages against `A_1 sqrt(n)` and `B_1 sqrt(n)`.
pub fn khintchine(s: &CheckSettings) -> Vec<CheckRow> {
    (1..=24u32)
        .map(|n| {
            let v = cc::khintchine_average(n);
            let root = (n as f64).sqrt();
            let lower = s.consts.khintchine_a1 * root;
            CheckRow {
                check: "khintchine".into(),
                params: format!("n={n}"),
                value: v,
                bound: lower,
                pass: v >= lower - 1e-12 && v <= s.consts.khintchine_b1 * root + 1e-12,
            }
        })
        .collect()
}

/// Exhaustive subset averages against `sqrt(k)/4`, cross-checked against the
/// hypergeometric summation.
pub fn subset_avg(s: &CheckSettings) -> Vec<CheckRow> {
    let _ = s;
    let mut rows = Vec::new();
    for m in 1..=8u64 {
        for k in 1..=2 * m {
            let brute = cc::subset_average_bruteforce(m, k, (1u32 << m) - 1);
            let hyper = cc::subset_average(m, k, m, 0);
            let bound = (k as f64).sqrt() / 4.0;
            rows.push(CheckRow {
                check: "subset_avg".into(),
                params: format!("m={m};k={k}"),
                value: brute,
                bound,
                pass: brute >= bound && (brute - hyper.value).abs() <= 1e-12,
            });
        }
    }
    rows
}

/// Cube intersection volumes: closed form against `2^-d T^d` and the Monte
/// Carlo estimate against the closed form at four sigma.
pub fn cube_volume(s: &CheckSettings, draws: usize) -> Vec<CheckRow> {
    let cases: Vec<(usize, f64, Vec<f64>, u64)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x33);
        (0..draws)
            .map(|i| {
                let d = rng.gen_range(1..=4usize);
                let t = rng.gen_range(0.25..1.0);
                let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
                (d, t, x, s.seed ^ (i as u64))
            })
            .collect()
    };
    cases
        .par_iter()
        .map(|(d, t, x, seed)| {
            let v = cc::cube_intersection_volume(*d, *t, x, 100_000, *seed);
            let bound = 0.5f64.powi(*d as i32) * t.powi(*d as i32);
            CheckRow {
                check: "cube_volume".into(),
                params: format!("d={d};T={t:.3}"),
                value: v.exact,
                bound,
                pass: v.exact >= bound - 1e-15 && (v.mc - v.exact).abs() <= 4.0 * v.sigma.max(1e-4),
            }
        })
        .collect()
}

/// Grid minima of the two optimization objectives within
/// `[closed_form - 1e-3, closed_form + 1e-6]`.
pub fn opt_lemma(s: &CheckSettings, pairs: usize) -> Vec<CheckRow> {
    let cases: Vec<(f64, f64)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x44);
        (0..pairs)
            .map(|_| (rng.gen_range(0.3..5.0), rng.gen_range(1.0..8.0)))
            .collect()
    };
    cases
        .par_iter()
        .flat_map(|&(alpha, gamma_flat)| {
            [OptObjective::Lemma1, OptObjective::Lemma2]
                .into_iter()
                .map(|obj| {
                    let cf = optimization_lemma_closed_form(gamma_flat, alpha, obj);
                    let v = optimization_lemma_oracle(gamma_flat, alpha, obj);
                    CheckRow {
                        check: "opt_lemma".into(),
                        params: format!(
                            "obj={};alpha={alpha:.3};gamma={gamma_flat:.3}",
                            match obj {
                                OptObjective::Lemma1 => "lemma1",
                                OptObjective::Lemma2 => "lemma2",
                            }
                        ),
                        value: v,
                        bound: cf,
                        pass: v <= cf + 1e-6 && v >= cf - 1e-3,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Greedy covering count of a sampled budget class against the theoretical
/// covering bound (in logs; the bound is astronomically larger).
pub fn covering(s: &CheckSettings) -> Result<Vec<CheckRow>> {
    let growths = s.space.growths;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x55);
    let grid: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let mut rows = Vec::new();
    for (n, eps) in [(2u64, 0.25), (3u64, 0.25), (3u64, 0.1)] {
        let class: Vec<Vec<f64>> = (0..300)
            .map(|_| {
                let net = cc::random_budget_network(n, &growths, 1, &mut rng);
                grid.iter().map(|&x| net.realize_scalar(&[x]).unwrap()).collect()
            })
            .collect();
        let count = cc::empirical_covering(&class, eps);
        let bound_ln = cc::covering_bound_ln(n, &growths, 1, eps);
        rows.push(CheckRow {
            check: "covering".into(),
            params: format!("n={n};eps={eps}"),
            value: (count as f64).ln(),
            bound: bound_ln,
            pass: (count as f64).ln() <= bound_ln,
        });
    }
    Ok(rows)
}

/// Brute-force VC dimensions of tiny thresholded classes.
pub fn vc_dim(s: &CheckSettings) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    // Threshold class shatters exactly one point.
    let pool: Vec<f64> = (0..10).map(|i| 0.05 + i as f64 / 10.0).collect();
    let thresholds: Vec<_> = (0..=20)
        .map(|i| {
            let t = i as f64 / 20.0;
            move |x: f64| if x > t { 1.0 } else { 0.0 }
        })
        .collect();
    let masks = cc::dichotomy_masks(&thresholds, &pool, 0.5);
    let v = cc::vc_bruteforce(&masks, pool.len());
    rows.push(CheckRow {
        check: "vc_dim".into(),
        params: "class=thresholds".into(),
        value: v as f64,
        bound: 1.0,
        pass: v == 1,
    });
    // Tiny enumerated networks stay below the configured bound.
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    for n in 1..=3u64 {
        let class = cc::enumerate_tiny_networks(n, &grid);
        let pool: Vec<f64> = (0..10).map(|i| 0.03 + i as f64 * 0.097).collect();
        let masks = cc::dichotomy_masks(&class, &pool, 0.25);
        let v = cc::vc_bruteforce(&masks, pool.len());
        let bound = cc::vc_bound(n, 1.0, &s.consts);
        rows.push(CheckRow {
            check: "vc_dim".into(),
            params: format!("class=tiny_nets;n={n}"),
            value: v as f64,
            bound,
            pass: (v as f64) <= bound,
        });
    }
    rows
}

/// Unit-ball certificates: built members and bumps realize their formulas,
/// their networks pass the membership check, and the threshold inequality
/// holds.
pub fn unit_ball_cert(s: &CheckSettings) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let p = &s.space;
    for m in [1usize, 2, 4, 8] {
        let params = UnitBallFamilyParams::derive(
            p.d, p.alpha, s.gamma, s.theta, s.lambda, 2.0, m, p.growths,
        )?;
        let k = (m as f64).powf(s.theta * s.lambda).ceil() as usize;
        let nu: Vec<f64> = (0..2 * m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let j_set: Vec<usize> = (0..k).collect();
        let f = hats::build_unit_ball_family(&params, &nu, &j_set)?;
        let (net, budget) = hats::hat_sum_member_network(&params, &f)?;
        let mut dev = 0.0f64;
        for t in 0..=200 {
            let x = t as f64 / 200.0;
            dev = dev.max((net.realize_scalar(&[x])? - f.eval1(x)).abs());
        }
        let member = net.check_membership(budget, &p.growths, p.d);
        let threshold = hats::unit_ball_threshold_check(budget, p.alpha, f.linf());
        rows.push(CheckRow {
            check: "unit_ball_cert".into(),
            params: format!("kind=hat_sum;m={m};k={k}"),
            value: dev,
            bound: s.tol,
            pass: dev <= s.tol && member && threshold,
        });
    }
    if s.space.growths.ell_star().at_least(3) {
        for big_m in [1.0, 4.0, 16.0] {
            let y = vec![0.5; p.d];
            let (g, consts) = hats::build_gmy(big_m, &y, p.alpha, s.gamma, &p.growths)?;
            let (net, budget) = hats::gmy_network(&g, &consts, p.alpha, s.gamma, &p.growths)?;
            let mut dev = 0.0f64;
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x66);
            for _ in 0..500 {
                let x: Vec<f64> = (0..p.d).map(|_| rng.gen_range(-0.1..1.1)).collect();
                dev = dev.max((net.realize_scalar(&x)? - g.eval(&x)).abs());
            }
            let member = net.check_membership(budget, &p.growths, p.d);
            let threshold =
                hats::unit_ball_threshold_check(budget, p.alpha, g.linf_on_unit_cube());
            rows.push(CheckRow {
                check: "unit_ball_cert".into(),
                params: format!("kind=gmy;M={big_m}"),
                value: dev,
                bound: s.tol,
                pass: dev <= s.tol && member && threshold,
            });
        }
    }
    Ok(rows)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_space::{CoeffGrowth, DepthGrowth, GrowthPair};

    pub fn settings() -> CheckSettings {
        CheckSettings {
            tol: 1e-9,
            seed: 7,
            space: SpaceParams {
                d: 1,
                alpha: 2.0,
                growths: GrowthPair {
                    depth: DepthGrowth::Constant { l: 3 },
                    coeff: CoeffGrowth::PolyLog { s: 1.0, theta: 0.0, kappa: 0.0 },
                },
            },
            gamma: 0.95,
            theta: 1.0,
            lambda: 1.0,
            consts: cc::CheckConstants::default(),
        }
    }

    #[test]
    fn khintchine_check_emits_24_rows_all_passing() {
        let rows = khintchine(&settings());
        assert_eq!(rows.len(), 24);
        assert!(rows.iter().all(|r| r.pass));
    }

    #[test]
    fn small_fidelity_run_passes() {
        let s = settings();
        let rows = hat_sum_fidelity(&s, 24);
        assert_eq!(rows.len(), 24);
        assert!(rows.iter().all(|r| r.pass), "failing row: {:?}",
            rows.iter().find(|r| !r.pass));
        let rows = multihat_fidelity(&s, 12, 500);
        assert!(rows.iter().all(|r| r.pass), "failing row: {:?}",
            rows.iter().find(|r| !r.pass));
    }

    #[test]
    fn zero_tolerance_makes_fidelity_fail() {
        let mut s = settings();
        s.tol = 0.0;
        let rows = hat_sum_fidelity(&s, 24);
        assert!(rows.iter().any(|r| !r.pass));
    }

    #[test]
    fn subset_and_cube_checks_pass() {
        let s = settings();
        assert!(subset_avg(&s).iter().all(|r| r.pass));
        let rows = cube_volume(&s, 50);
        assert!(rows.iter().all(|r| r.pass), "failing row: {:?}",
            rows.iter().find(|r| !r.pass));
    }

    #[test]
    fn unit_ball_cert_check_passes() {
        let rows = unit_ball_cert(&settings()).unwrap();
        assert!(rows.len() >= 7);
        assert!(rows.iter().all(|r| r.pass), "failing row: {:?}",
            rows.iter().find(|r| !r.pass));
    }
}
