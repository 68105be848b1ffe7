//! Brute-force and Monte Carlo oracles for the auxiliary quantitative lemmas:
//! empirical Lipschitz constants, greedy covering numbers, VC dimension by
//! exhaustive shattering, the exact sign-average behind Khintchine's
//! inequality, hypergeometric subset averages, and cube intersection volumes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::approx_space::{ExtNat, GrowthPair};
use crate::relu_net::{Layer, Matrix, Network};

/// Configured absolute constants that the source material leaves unspecified.
/// All checks using them are one-sided and can only fail if these are too
/// small; failures instruct raising the configuration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CheckConstants {
    /// `C'` in the VC bound `C' n ln(e n)^(sigma+2)`.
    pub vc_cprime: f64,
    /// `kappa` in the deterministic quadrature bound.
    pub quad_kappa: f64,
    /// Lower Khintchine constant `A_1`.
    pub khintchine_a1: f64,
    /// Upper Khintchine constant `B_1`.
    pub khintchine_b1: f64,
}

impl Default for CheckConstants {
    fn default() -> Self {
        CheckConstants {
            vc_cprime: 100.0,
            quad_kappa: 1.0,
            khintchine_a1: std::f64::consts::FRAC_1_SQRT_2,
            khintchine_b1: 1.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Lipschitz probing
// ---------------------------------------------------------------------------

/// Max over probe pairs of `|F(x) - F(x')| / ||x - x'||` for the `l1` and
/// `l_inf` metrics. Half the pairs are local perturbations, half global.
pub fn empirical_lipschitz(net: &Network<f64>, probes: usize, seed: u64) -> (f64, f64) {
    let d = net.d_in();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lip1 = 0.0f64;
    let mut lip_inf = 0.0f64;
    for i in 0..probes {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.1..1.1)).collect();
        let x2: Vec<f64> = if i % 2 == 0 {
            x.iter().map(|v| v + rng.gen_range(-1e-3..1e-3)).collect()
        } else {
            (0..d).map(|_| rng.gen_range(-0.1..1.1)).collect()
        };
        let l1: f64 = x.iter().zip(&x2).map(|(a, b)| (a - b).abs()).sum();
        let linf: f64 = x.iter().zip(&x2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if linf == 0.0 {
            continue;
        }
        let df = (net.realize_scalar(&x).unwrap() - net.realize_scalar(&x2).unwrap()).abs();
        lip1 = lip1.max(df / l1);
        lip_inf = lip_inf.max(df / linf);
    }
    (lip1, lip_inf)
}

/// Draws a random network respecting the budget of the set with `n` weights:
/// `W <= n`, `L <= ell(n)`, weight sup `<= c(n)`, scalar output.
pub fn random_budget_network(
    n: u64,
    growths: &GrowthPair,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Network<f64> {
    let ell = match growths.depth.eval(n) {
        ExtNat::Fin(l) => l.min(6),
        ExtNat::Inf => 6,
    };
    let c = growths.coeff.eval(n).min(1e6);
    let layers_n = rng.gen_range(1..=ell.max(1)) as usize;
    let max_width = ((n as usize / (2 * layers_n)).max(1)).min(8);
    let mut widths = vec![d];
    for _ in 0..layers_n - 1 {
        widths.push(rng.gen_range(1..=max_width));
    }
    widths.push(1);

    let mut layers = Vec::with_capacity(layers_n);
    for l in 0..layers_n {
        layers.push(Layer {
            a: Matrix::zeros(widths[l + 1], widths[l]),
            b: vec![0.0; widths[l + 1]],
        });
    }
    // Scatter at most n nonzero weights over all positions.
    let mut positions = Vec::new();
    for (l, layer) in layers.iter().enumerate() {
        for i in 0..layer.a.rows {
            for j in 0..layer.a.cols {
                positions.push((l, i, j, false));
            }
            positions.push((l, i, 0, true));
        }
    }
    positions.shuffle(rng);
    for &(l, i, j, is_bias) in positions.iter().take(n as usize) {
        let v = rng.gen_range(-c..c);
        if is_bias {
            layers[l].b[i] = v;
        } else {
            layers[l].a.set(i, j, v);
        }
    }
    let net = Network::new(layers);
    debug_assert!(net.check_membership(n, growths, d));
    net
}

// ---------------------------------------------------------------------------
// Covering numbers
// ---------------------------------------------------------------------------

/// Greedy epsilon-net size in the sup metric over a fixed evaluation grid.
/// `class[i]` holds the i-th function's values on the grid. The result upper
/// bounds the grid-metric covering number.
pub fn empirical_covering(class: &[Vec<f64>], eps: f64) -> usize {
    assert!(eps > 0.0);
    let mut centers: Vec<&Vec<f64>> = Vec::new();
    for f in class {
        let covered = centers.iter().any(|c| {
            f.iter().zip(c.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= eps
        });
        if !covered {
            centers.push(f);
        }
    }
    centers.len().max(usize::from(!class.is_empty()))
}

/// Log of the covering bound `(44/eps * ell(n)^4 * (c(n) max(d,n))^(1+ell(n)))^n`.
pub fn covering_bound_ln(n: u64, growths: &GrowthPair, d: usize, eps: f64) -> f64 {
    let ell = growths.depth.eval(n).as_f64();
    let c = growths.coeff.eval(n);
    let eta = (d as f64).max(n as f64);
    n as f64 * ((44.0 / eps).ln() + 4.0 * ell.ln() + (1.0 + ell) * (c * eta).ln())
}

// ---------------------------------------------------------------------------
// VC dimension by exhaustive shattering
// ---------------------------------------------------------------------------

/// Thresholded dichotomies of a function class on a point pool.
pub fn dichotomy_masks(class: &[impl Fn(f64) -> f64], pool: &[f64], lambda: f64) -> Vec<u32> {
    let mut masks: Vec<u32> = class
        .iter()
        .map(|g| {
            pool.iter()
                .enumerate()
                .fold(0u32, |m, (i, x)| if g(*x) > lambda { m | (1 << i) } else { m })
        })
        .collect();
    masks.sort_unstable();
    masks.dedup();
    masks
}

/// Largest `m` such that some `m`-subset of the pool is shattered, by
/// exhaustive enumeration over subsets and dichotomies. Pool size <= 20.
pub fn vc_bruteforce(masks: &[u32], pool_size: usize) -> usize {
    assert!(pool_size <= 20, "exhaustive shattering capped at 20 points");
    let mut masks = masks.to_vec();
    masks.sort_unstable();
    masks.dedup();
    let mut best = 0usize;
    for m in 1..=pool_size {
        // A class with fewer than 2^m distinct dichotomies cannot shatter m points.
        if masks.len() < (1usize << m) {
            break;
        }
        let mut found = false;
        let mut subset: Vec<usize> = (0..m).collect();
        loop {
            if shatters(&masks, &subset) {
                found = true;
                break;
            }
            // Next lexicographic combination.
            let mut i = m;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + pool_size - m {
                    subset[i] += 1;
                    for j in i + 1..m {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    subset.clear();
                    break;
                }
            }
            if subset.is_empty() {
                break;
            }
        }
        if found {
            best = m;
        } else {
            break;
        }
    }
    best
}

fn shatters(masks: &[u32], subset: &[usize]) -> bool {
    let m = subset.len();
    let want = 1u32 << m;
    let mut seen = vec![false; want as usize];
    let mut count = 0u32;
    for mask in masks {
        let mut p = 0u32;
        for (t, &idx) in subset.iter().enumerate() {
            p |= ((mask >> idx) & 1) << t;
        }
        if !seen[p as usize] {
            seen[p as usize] = true;
            count += 1;
            if count == want {
                return true;
            }
        }
    }
    false
}

/// The VC bound `C' n ln(e n)^(sigma+2)` of the thresholded network class.
pub fn vc_bound(n: u64, sigma: f64, consts: &CheckConstants) -> f64 {
    consts.vc_cprime * n as f64 * (std::f64::consts::E * n as f64).ln().powf(sigma + 2.0)
}

/// Enumerates the realizations of tiny one-input networks
/// `x -> v * relu(w x + b) + c` with weights on the given grid and `W <= n`.
pub fn enumerate_tiny_networks(n: u64, grid: &[f64]) -> Vec<impl Fn(f64) -> f64> {
    let mut fns = Vec::new();
    for &w in grid {
        for &b in grid {
            for &v in grid {
                for &c in grid {
                    let nnz = [w, b, v, c].iter().filter(|t| **t != 0.0).count() as u64;
                    if nnz <= n {
                        fns.push(move |x: f64| v * (w * x + b).max(0.0) + c);
                    }
                }
            }
        }
    }
    fns
}

// ---------------------------------------------------------------------------
// Exact combinatorial averages
// ---------------------------------------------------------------------------

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact `2^-n sum_{nu in {-1,1}^n} |sum_i nu_i|`, via binomial weights.
/// Restricted to `n <= 24` so all intermediate integers are exact.
pub fn khintchine_average(n: u32) -> f64 {
    assert!((1..=24).contains(&n), "exact enumeration capped at n = 24");
    let mut acc: u128 = 0;
    for j in 0..=n as u64 {
        let drift = (n as i64 - 2 * j as i64).unsigned_abs() as u128;
        acc += binomial(n as u64, j) * drift;
    }
    acc as f64 / 2f64.powi(n as i32)
}

/// Average of `|J cap I|^(1/2)` over uniform `J in P_k([2m])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetAverage {
    pub value: f64,
    /// Zero when computed by exact hypergeometric summation.
    pub stderr: f64,
    pub exact: bool,
}

/// Exact hypergeometric summation when `C(2m,k) <= 10^6`, otherwise Monte
/// Carlo over random subsets (seeded) with reported standard error. The
/// distribution of `|J cap I|` depends on `I` only through its size.
pub fn subset_average(m: u64, k: u64, i_size: u64, seed: u64) -> SubsetAverage {
    assert!(k >= 1 && k <= 2 * m && i_size <= 2 * m);
    let total = binomial(2 * m, k);
    if total <= 1_000_000 {
        let mut acc = 0.0;
        for j in 0..=k.min(i_size) {
            let ways = binomial(i_size, j) * binomial(2 * m - i_size, k - j);
            acc += (ways as f64 / total as f64) * (j as f64).sqrt();
        }
        return SubsetAverage { value: acc, stderr: 0.0, exact: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = 20_000usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut pool: Vec<u64> = (0..2 * m).collect();
    for _ in 0..draws {
        pool.shuffle(&mut rng);
        let hits = pool[..k as usize].iter().filter(|&&j| j < i_size).count();
        let v = (hits as f64).sqrt();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / draws as f64;
    let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
    SubsetAverage { value: mean, stderr: (var / draws as f64).sqrt(), exact: false }
}

/// Brute-force oracle: enumerate every `J in P_k([2m])` as a bitmask.
/// Only for `2m <= 20`.
pub fn subset_average_bruteforce(m: u64, k: u64, i_set: u32) -> f64 {
    let n = 2 * m as usize;
    assert!(n <= 20);
    let mut sum = 0.0;
    let mut count = 0u64;
    let mut j: u32 = (1 << k) - 1;
    while j < (1 << n) {
        sum += ((j & i_set).count_ones() as f64).sqrt();
        count += 1;
        // Gosper's hack: next bit pattern with the same popcount.
        let c = j & j.wrapping_neg();
        let r = j + c;
        j = (((r ^ j) >> 2) / c) | r;
        if c == 0 {
            break;
        }
    }
    sum / count as f64
}

// ---------------------------------------------------------------------------
// Cube intersection volumes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeVolume {
    pub exact: f64,
    pub mc: f64,
    pub sigma: f64,
}

/// Volume of `[0,1]^d cap (x + [-T,T]^d)`: closed form
/// `prod_j (min(1, x_j + T) - max(0, x_j - T))` plus a seeded Monte Carlo
/// estimate with its standard error.
pub fn cube_intersection_volume(
    d: usize,
    t: f64,
    x: &[f64],
    mc_samples: usize,
    seed: u64,
) -> CubeVolume {
    assert!(t > 0.0 && t <= 1.0 && x.len() == d);
    let exact: f64 = x
        .iter()
        .map(|xj| ((xj + t).min(1.0) - (xj - t).max(0.0)).max(0.0))
        .product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..mc_samples {
        let inside = (0..d).all(|j| {
            let u: f64 = rng.gen();
            (u - x[j]).abs() <= t
        });
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / mc_samples as f64;
    CubeVolume { exact, mc: p, sigma: (p * (1.0 - p) / mc_samples as f64).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_space::{CoeffGrowth, DepthGrowth};
    use crate::relu_net::{Layer, Matrix};

    fn growths(l: u64, s: f64) -> GrowthPair {
        GrowthPair {
            depth: DepthGrowth::Constant { l },
            coeff: CoeffGrowth::PolyLog { s, theta: 0.0, kappa: 0.0 },
        }
    }

    #[test]
    fn lipschitz_of_constant_and_identity_chains() {
        let net = Network::new(vec![Layer {
            a: Matrix::from_rows(vec![vec![0.0]]),
            b: vec![3.0],
        }]);
        let (l1, linf) = empirical_lipschitz(&net, 500, 1);
        assert_eq!((l1, linf), (0.0, 0.0));
        // Identity chained through L layers with C = 1.
        let id = Layer { a: Matrix::from_rows(vec![vec![1.0]]), b: vec![0.0] };
        let net = Network::new(vec![id.clone(), id.clone(), id]);
        let (l1, _) = empirical_lipschitz(&net, 500, 2);
        assert!(l1 <= 1.0 + 1e-12);
    }

    #[test]
    fn random_budget_networks_respect_lipschitz_bound() {
        let g = growths(4, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12u64);
            let d = rng.gen_range(1..=3usize);
            let net = random_budget_network(n, &g, d, &mut rng);
            assert!(net.check_membership(n, &g, d));
            let (l1, linf) = empirical_lipschitz(&net, 200, 5);
            let (b1, binf) = crate::approx_space::lipschitz_bound(n, &g, d);
            assert!(l1 <= b1 + 1e-9, "l1 {l1} > bound {b1}");
            assert!(linf <= binf + 1e-9);
        }
    }

    #[test]
    fn covering_trivial_cases() {
        assert_eq!(empirical_covering(&[vec![1.0, 2.0]], 0.5), 1);
        // Two functions at sup distance 3 eps need two centers.
        let class = vec![vec![0.0, 0.0], vec![0.75, 0.0]];
        assert_eq!(empirical_covering(&class, 0.25), 2);
    }

    #[test]
    fn covering_of_tiny_budget_class_below_paper_bound() {
        let g = growths(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let class: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                let net = random_budget_network(2, &g, 1, &mut rng);
                grid.iter().map(|&x| net.realize_scalar(&[x]).unwrap()).collect()
            })
            .collect();
        let count = empirical_covering(&class, 0.25);
        let bound_ln = covering_bound_ln(2, &g, 1, 0.25);
        assert!((count as f64).ln() <= bound_ln);
    }

    #[test]
    fn vc_of_threshold_class_is_one() {
        let pool: Vec<f64> = (0..10).map(|i| 0.05 + i as f64 / 10.0).collect();
        let thresholds: Vec<_> = (0..=20)
            .map(|i| {
                let t = i as f64 / 20.0;
                move |x: f64| if x > t { 1.0 } else { 0.0 }
            })
            .collect();
        let masks = dichotomy_masks(&thresholds, &pool, 0.5);
        assert_eq!(vc_bruteforce(&masks, pool.len()), 1);
    }

    #[test]
    fn vc_of_constant_class_is_zero() {
        let class: Vec<_> = vec![|_: f64| 0.25];
        let pool = [0.1, 0.5, 0.9];
        let masks = dichotomy_masks(&class, &pool, 0.5);
        assert_eq!(vc_bruteforce(&masks, 3), 0);
    }

    #[test]
    fn vc_of_single_neuron_class_matches_halfline_oracle() {
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let pool: Vec<f64> = (0..8).map(|i| 0.07 + i as f64 * 0.11).collect();
        // Route 1: evaluate relu neurons and threshold at 0.
        let class: Vec<_> = grid
            .iter()
            .flat_map(|&w| grid.iter().map(move |&b| move |x: f64| (w * x + b).max(0.0)))
            .collect();
        let masks = dichotomy_masks(&class, &pool, 0.0);
        let vc_eval = vc_bruteforce(&masks, pool.len());
        // Route 2: sign-pattern enumeration. relu(wx+b) > 0 iff wx+b > 0, so
        // the dichotomies are exactly the half-lines {x > t} and {x < t}.
        let mut halfline_masks = Vec::new();
        for &w in &grid {
            for &b in &grid {
                if w == 0.0 {
                    halfline_masks.push(if b > 0.0 { (1u32 << pool.len()) - 1 } else { 0 });
                } else {
                    let t = -b / w;
                    let mask = pool.iter().enumerate().fold(0u32, |m, (i, &x)| {
                        let inside = if w > 0.0 { x > t } else { x < t };
                        if inside { m | (1 << i) } else { m }
                    });
                    halfline_masks.push(mask);
                }
            }
        }
        let vc_oracle = vc_bruteforce(&halfline_masks, pool.len());
        assert_eq!(vc_eval, vc_oracle);
        assert_eq!(vc_eval, 2);
    }

    #[test]
    fn tiny_network_class_vc_below_configured_bound() {
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let class = enumerate_tiny_networks(3, &grid);
        let pool: Vec<f64> = (0..10).map(|i| 0.03 + i as f64 * 0.097).collect();
        let masks = dichotomy_masks(&class, &pool, 0.25);
        let vc = vc_bruteforce(&masks, pool.len());
        let consts = CheckConstants::default();
        assert!((vc as f64) <= vc_bound(3, 1.0, &consts));
    }

    #[test]
    fn khintchine_small_values_exact() {
        assert_eq!(khintchine_average(1), 1.0);
        assert_eq!(khintchine_average(2), 1.0);
        assert_eq!(khintchine_average(4), 1.5);
        // Dual oracle: direct enumeration over all sign vectors.
        for n in 1..=12u32 {
            let mut sum = 0i64;
            for bits in 0u32..(1 << n) {
                let s = (0..n).map(|i| if bits >> i & 1 == 1 { 1i64 } else { -1 }).sum::<i64>();
                sum += s.abs();
            }
            let enumerated = sum as f64 / 2f64.powi(n as i32);
            assert!((khintchine_average(n) - enumerated).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn khintchine_bracket_holds_up_to_24() {
        let consts = CheckConstants::default();
        for n in 1..=24u32 {
            let v = khintchine_average(n);
            let root = (n as f64).sqrt();
            assert!(v >= consts.khintchine_a1 * root - 1e-12, "lower bound fails at n = {n}");
            assert!(v <= consts.khintchine_b1 * root + 1e-12, "upper bound fails at n = {n}");
        }
    }

    #[test]
    fn subset_average_examples() {
        // m=1, k=1, |I|=1: (1 + 0)/2 = 0.5 >= 1/4.
        let r = subset_average(1, 1, 1, 0);
        assert!(r.exact && (r.value - 0.5).abs() < 1e-15);
        // k = 2m, I = [2m]: J forced, value sqrt(2m).
        let r = subset_average(3, 6, 6, 0);
        assert!((r.value - 6f64.sqrt()).abs() < 1e-12);
        // m=2, k=2, |I|=2: (sqrt2 + 4)/6.
        let r = subset_average(2, 2, 2, 0);
        assert!((r.value - (2f64.sqrt() + 4.0) / 6.0).abs() < 1e-12);
        assert!(r.value >= 2f64.sqrt() / 4.0);
    }

    #[test]
    fn subset_average_matches_bruteforce_and_bound() {
        for m in 1..=6u64 {
            for k in 1..=2 * m {
                let exact = subset_average(m, k, m, 0);
                let brute = subset_average_bruteforce(m, k, (1u32 << m) - 1);
                assert!((exact.value - brute).abs() < 1e-12, "m={m} k={k}");
                assert!(exact.value >= (k as f64).sqrt() / 4.0);
                // Symmetry: only |I| matters, not which indices.
                let shifted: u32 = ((1u32 << m) - 1) << m;
                let brute2 = subset_average_bruteforce(m, k, shifted);
                assert!((brute - brute2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subset_average_monte_carlo_close_to_exact() {
        // Force the Monte Carlo path (C(24,12) > 10^6), compare against the
        // hypergeometric value computed directly.
        let m = 12u64;
        let k = 12u64;
        let mc = subset_average(m, k, m, 42);
        assert!(!mc.exact);
        let mut exact = 0.0;
        let total = binomial(2 * m, k);
        for j in 0..=k {
            let ways = binomial(m, j) * binomial(m, k - j);
            exact += ways as f64 / total as f64 * (j as f64).sqrt();
        }
        assert!((mc.value - exact).abs() <= 4.0 * mc.stderr.max(1e-3));
    }

    #[test]
    fn cube_volume_examples() {
        let v = cube_intersection_volume(1, 1.0, &[0.0], 1000, 1);
        assert_eq!(v.exact, 1.0);
        let v = cube_intersection_volume(2, 0.5, &[0.5, 0.5], 1000, 1);
        assert_eq!(v.exact, 1.0);
        assert!(v.exact >= 0.25 * 0.25);
        // Corner: exact 0.5^d >= 2^-d 0.5^d.
        let v = cube_intersection_volume(3, 0.5, &[0.0, 0.0, 0.0], 1000, 1);
        assert!((v.exact - 0.125).abs() < 1e-15);
        assert!(v.exact >= 0.125f64 * 0.125);
    }

    #[test]
    fn cube_volume_monte_carlo_tracks_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..200 {
            let d = rng.gen_range(1..=4usize);
            let t = rng.gen_range(0.25..1.0);
            let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            let v = cube_intersection_volume(d, t, &x, 100_000, trial);
            assert!(v.exact >= 0.5f64.powi(d as i32) * t.powi(d as i32) - 1e-15);
            assert!(
                (v.mc - v.exact).abs() <= 4.0 * v.sigma.max(1e-4),
                "d={d} t={t}: mc {} vs exact {}",
                v.mc,
                v.exact
            );
        }
    }
}
