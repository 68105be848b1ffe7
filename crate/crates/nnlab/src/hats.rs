//! Hat and bump functions with their explicit ReLU-network implementations.
//!
//! The analytic side: the triangular hat `Lambda_{M,y}`, its lift to the
//! first coordinate of `R^d`, and the plateau bump `vartheta_{M,y} =
//! theta(sum_j Lambda_{M,y_j}(x_j) - (d-1))`. The network side: builders that
//! emit weight tuples realizing scaled hat sums within `(2L+8)n` nonzero
//! weights and scaled bumps within `15(d+L)n`, for every depth parity case.
//! On top of both sit the unit-ball scalings: the constants `(omega, kappa)`
//! and witness `(L, C1, n0)` that certify membership of the scaled families
//! in the unit ball of the approximation space.

use serde::{Deserialize, Serialize};

use crate::approx_space::{CoeffGrowth, ExtNat, GrowthPair};
use crate::error::{Error, Result};
use crate::pwl::Pwl;
use crate::real::Real;
use crate::relu_net::{Layer, Matrix, Network};

/// The triangular hat: 0 outside `[y - 1/M, y + 1/M]`, peak 1 at `y`,
/// slopes `+-M`. Evaluated by the four-case formula, so it is exactly zero
/// outside its support.
pub fn lambda_eval<T: Real>(m: T, y: T, x: T) -> T {
    let inv_m = m.recip();
    if x <= y - inv_m || x >= y + inv_m {
        T::zero()
    } else if x <= y {
        m * (x - y + inv_m)
    } else {
        -m * (x - y - inv_m)
    }
}

/// `theta(t) = relu(t) - relu(t - 1)`: 0 for `t <= 0`, identity on `[0, 1]`,
/// 1 for `t >= 1`.
pub fn theta_eval<T: Real>(t: T) -> T {
    t.max(T::zero()) - (t - T::one()).max(T::zero())
}

/// One-dimensional hat `Lambda_{M,y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hat1D<T> {
    pub m: T,
    pub y: T,
}

impl<T: Real> Hat1D<T> {
    pub fn eval(&self, x: T) -> T {
        lambda_eval(self.m, self.y, x)
    }

    /// `int_R Lambda_{M,y} = 1/M`.
    pub fn integral(&self) -> T {
        self.m.recip()
    }
}

/// The d-dimensional plateau bump `vartheta_{M,y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpD<T> {
    pub m: T,
    pub y: Vec<T>,
}

impl<T: Real> BumpD<T> {
    pub fn d(&self) -> usize {
        self.y.len()
    }

    /// `theta(Delta_{M,y}(x))` with `Delta = sum_j Lambda(x_j) - (d-1)`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.y.len() {
            return Err(Error::ShapeMismatch { expected: self.y.len(), got: x.len() });
        }
        let mut delta = -T::from_usize(self.y.len() - 1).unwrap();
        for (xj, yj) in x.iter().zip(self.y.iter()) {
            delta = delta + lambda_eval(self.m, *yj, *xj);
        }
        Ok(theta_eval(delta))
    }

    /// Whether `x` lies in the open support cube `y + (-1/M, 1/M)^d`.
    pub fn in_support(&self, x: &[T]) -> bool {
        let inv_m = self.m.recip();
        x.iter().zip(self.y.iter()).all(|(xj, yj)| (*xj - *yj).abs() < inv_m)
    }

    /// Exact `sup_{x in [0,1]^d} vartheta(x)`: each coordinate hat is
    /// unimodal, so the max sits at the per-coordinate clamp of `y`.
    pub fn sup_on_unit_cube(&self) -> T {
        let mut delta = -T::from_usize(self.y.len() - 1).unwrap();
        for yj in &self.y {
            let xj = yj.max(T::zero()).min(T::one());
            delta = delta + lambda_eval(self.m, *yj, xj);
        }
        theta_eval(delta)
    }
}

/// Specification of a scaled hat-sum network
/// `(C^L n^{floor(L/2)} / (4 M n)) * sum_i eps_i Lambda_{M,y_i}(x_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatSumSpec<T> {
    /// Input dimension of the network (the function reads `x_1` only).
    pub d: usize,
    /// Hat slope `M >= 1`.
    pub m: T,
    /// Depth `L >= 2`.
    pub l: usize,
    /// Weight magnitude cap `C > 0`.
    pub c: T,
    /// Signs `eps_i in [-1, 1]`.
    pub signs: Vec<T>,
    /// Centers `y_i in [0, 1]`.
    pub centers: Vec<T>,
}

impl<T: Real> HatSumSpec<T> {
    pub fn n(&self) -> usize {
        self.signs.len()
    }

    /// The output scale `C^L n^{floor(L/2)} / (4 M n)`.
    pub fn scale(&self) -> T {
        let n = T::from_usize(self.n()).unwrap();
        let four = T::from_f64_c(4.0);
        self.c.powi(self.l as i32) * n.powi((self.l / 2) as i32) / (four * self.m * n)
    }

    /// Analytic value of the function the built network realizes.
    pub fn analytic_eval(&self, x1: T) -> T {
        let mut acc = T::zero();
        for (eps, y) in self.signs.iter().zip(self.centers.iter()) {
            acc = acc + *eps * lambda_eval(self.m, *y, x1);
        }
        self.scale() * acc
    }
}

fn e1_stack_rows<T: Real>(rows: usize, d: usize, value: T) -> Matrix<T> {
    let mut a = Matrix::zeros(rows, d);
    for i in 0..rows {
        a.set(i, 0, value);
    }
    a
}

/// Builds the network of the one-dimensional hat-sum implementation.
///
/// Covers all three depth cases: `L = 2`; even `L >= 4` with `(L-4)/2`
/// amplification blocks and a difference head; odd `L >= 3` with `(L-3)/2`
/// blocks and a `(C | -C)` head. The result satisfies
/// `W <= (2L+8) n`, `L(net) = L`, weight sup `<= C`.
pub fn build_hat_sum_network<T: Real>(spec: &HatSumSpec<T>) -> Result<Network<T>> {
    if spec.l < 2 {
        return Err(Error::InvalidDepth { min: 2, got: spec.l });
    }
    assert_eq!(spec.signs.len(), spec.centers.len());
    let n = spec.n();
    assert!(n >= 1, "hat sum needs at least one hat");
    let d = spec.d.max(1);
    let c = spec.c;
    let c2 = c / T::from_f64_c(2.0);
    let inv_m = spec.m.recip();

    // First layer: three shifted copies of (C/2) x_1 per hat.
    let a1 = e1_stack_rows(3 * n, d, c2);
    let mut b1 = Vec::with_capacity(3 * n);
    for y in &spec.centers {
        b1.push(c2 * (inv_m - *y));
        b1.push(c2 * (-*y));
        b1.push(-c2 * (*y + inv_m));
    }

    // Hat combination row: (C/2) * (eps, -2 eps, eps) per hat.
    let mut comb = Vec::with_capacity(3 * n);
    for eps in &spec.signs {
        let e = c2 * *eps;
        comb.push(e);
        comb.push(-(e + e));
        comb.push(e);
    }

    let layer = |a: Matrix<T>| Layer { b: vec![T::zero(); a.rows], a };

    if spec.l == 2 {
        let a2 = Matrix { rows: 1, cols: 3 * n, data: comb };
        return Ok(Network::new(vec![Layer { a: a1, b: b1 }, layer(a2)]));
    }

    // (A2; -A2): tracks (relu(Xi), relu(-Xi)).
    let mut a2_data = comb.clone();
    a2_data.extend(comb.iter().map(|v| -*v));
    let a2 = Matrix { rows: 2, cols: 3 * n, data: a2_data };

    // Amplification pair: A in R^{2n x 2} duplicates each channel n times,
    // B in R^{2 x 2n} sums the copies back. One round multiplies by C^2 n.
    let mut a_amp = Matrix::zeros(2 * n, 2);
    for i in 0..n {
        a_amp.set(i, 0, c);
        a_amp.set(n + i, 1, c);
    }
    let mut b_amp = Matrix::zeros(2, 2 * n);
    for i in 0..n {
        b_amp.set(0, i, c);
        b_amp.set(1, n + i, c);
    }

    let mut layers = vec![Layer { a: a1, b: b1 }, layer(a2)];
    if spec.l % 2 == 0 {
        // L >= 4 even: (L-4)/2 amplification rounds, then A and the
        // difference head D = C (1..1 | -1..-1).
        for _ in 0..(spec.l - 4) / 2 {
            layers.push(layer(a_amp.clone()));
            layers.push(layer(b_amp.clone()));
        }
        layers.push(layer(a_amp));
        let mut d_head = Matrix::zeros(1, 2 * n);
        for i in 0..n {
            d_head.set(0, i, c);
            d_head.set(0, n + i, -c);
        }
        layers.push(layer(d_head));
    } else {
        // L >= 3 odd: (L-3)/2 amplification rounds, then E = (C | -C).
        for _ in 0..(spec.l - 3) / 2 {
            layers.push(layer(a_amp.clone()));
            layers.push(layer(b_amp.clone()));
        }
        let e_head = Matrix { rows: 1, cols: 2, data: vec![c, -c] };
        layers.push(layer(e_head));
    }
    Ok(Network::new(layers))
}

/// Builds the network of the multidimensional bump implementation, realizing
/// `(C^L n^{floor(L/2)} / (4 M)) * vartheta_{M,y}` with `W <= 15 (d+L) n`.
///
/// Needs at least two hidden layers (`L >= 3`); covers `L = 3`, even
/// `L >= 4` and odd `L >= 5`.
pub fn build_multihat_network<T: Real>(
    m: T,
    y: &[T],
    n: usize,
    l: usize,
    c: T,
) -> Result<Network<T>> {
    if l < 3 {
        return Err(Error::InvalidDepth { min: 3, got: l });
    }
    let d = y.len();
    assert!(d >= 1 && n >= 1);
    let c2 = c / T::from_f64_c(2.0);
    let inv_m = m.recip();

    // First layer: per coordinate j, 3n shifted copies of (C/2) x_j followed
    // by n constant rows relu(C/2).
    let mut a1 = Matrix::zeros(4 * n * d, d);
    let mut b1 = Vec::with_capacity(4 * n * d);
    for (j, yj) in y.iter().enumerate() {
        let base = 4 * n * j;
        for i in 0..3 * n {
            a1.set(base + i, j, c2);
        }
        for _ in 0..n {
            b1.push(c2 * (inv_m - *yj));
        }
        for _ in 0..n {
            b1.push(c2 * (-*yj));
        }
        for _ in 0..n {
            b1.push(-c2 * (*yj + inv_m));
        }
        for _ in 0..n {
            b1.push(c2);
        }
    }

    // Second layer rows produce (C^2 n / 4M) Delta and (C^2 n / 4M)(Delta - 1).
    let dm = T::from_usize(d).unwrap();
    let zeta = -inv_m * (dm - T::one()) / dm;
    let xi = -inv_m;
    let mut a2 = Matrix::zeros(2, 4 * n * d);
    for j in 0..d {
        let base = 4 * n * j;
        for i in 0..n {
            a2.set(0, base + i, c2);
            a2.set(0, base + n + i, -(c2 + c2));
            a2.set(0, base + 2 * n + i, c2);
            a2.set(0, base + 3 * n + i, c2 * zeta);
            a2.set(1, base + i, c2);
            a2.set(1, base + n + i, -(c2 + c2));
            a2.set(1, base + 2 * n + i, c2);
            a2.set(1, base + 3 * n + i, c2 * xi);
        }
    }

    let layer = |a: Matrix<T>| Layer { b: vec![T::zero(); a.rows], a };
    let mut layers = vec![Layer { a: a1, b: b1 }, layer(a2)];

    if l == 3 {
        let d_head = Matrix { rows: 1, cols: 2, data: vec![c, -c] };
        layers.push(layer(d_head));
        return Ok(Network::new(layers));
    }

    // A3 takes the theta difference into n parallel copies.
    let mut a3 = Matrix::zeros(n, 2);
    for i in 0..n {
        a3.set(i, 0, c);
        a3.set(i, 1, -c);
    }
    layers.push(layer(a3));
    // A sums n copies, B redistributes; each (B, A) round multiplies by C^2 n.
    let a_sum = Matrix { rows: 1, cols: n, data: vec![c; n] };
    let b_dup = Matrix { rows: n, cols: 1, data: vec![c; n] };
    layers.push(layer(a_sum.clone()));
    let rounds = if l % 2 == 0 { (l - 4) / 2 } else { (l - 5) / 2 };
    for _ in 0..rounds {
        layers.push(layer(b_dup.clone()));
        layers.push(layer(a_sum.clone()));
    }
    if l % 2 == 1 {
        let e_head = Matrix { rows: 1, cols: 1, data: vec![c] };
        layers.push(layer(e_head));
    }
    Ok(Network::new(layers))
}

/// The output scale of [`build_multihat_network`].
pub fn multihat_scale<T: Real>(m: T, n: usize, l: usize, c: T) -> T {
    let nf = T::from_usize(n).unwrap();
    c.powi(l as i32) * nf.powi((l / 2) as i32) / (T::from_f64_c(4.0) * m)
}

// ---------------------------------------------------------------------------
// Unit-ball scalings
// ---------------------------------------------------------------------------

/// Witness for `gamma < gamma_flat`: depth `L`, constant `C1` with
/// `n^gamma <= C1 c(n)^L n^{floor(L/2)}` for all n, and the smallest `n0`
/// with `L <= ell(n0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub l: u64,
    pub c1: f64,
    pub n0: u64,
}

/// Whether `(L, C1, n0)` is a valid witness over the sampled range.
pub fn witness_is_valid(growths: &GrowthPair, gamma: f64, w: &Witness, n_max: u64) -> bool {
    if !growths.depth.eval(w.n0).at_least(w.l) {
        return false;
    }
    let mut n = 1u64;
    while n <= n_max {
        let c = growths.coeff.eval(n);
        let lhs = gamma * (n as f64).ln();
        let rhs = w.c1.ln() + (w.l as f64) * c.ln() + ((w.l / 2) as f64) * (n as f64).ln();
        if lhs > rhs + 1e-12 {
            return false;
        }
        n = (n + 1).max((n as f64 * 1.01) as u64);
    }
    true
}

/// Finds the smallest admissible witness depth `>= min_depth` and computes
/// `C1` as the sup of `n^gamma / (c(n)^L n^{floor(L/2)})`.
///
/// Only parametric poly-log coefficient growths are searchable. The sup is
/// scanned up to `n = 10^6`; the tail is controlled because the polynomial
/// exponent `theta L + floor(L/2)` strictly exceeds `gamma` for the selected
/// depth.
pub fn find_witness(growths: &GrowthPair, gamma: f64, min_depth: u64) -> Result<Witness> {
    let theta = match growths.coeff {
        CoeffGrowth::PolyLog { theta, .. } => theta,
        _ => return Err(Error::UnsupportedGrowth),
    };
    let ell_star = growths.ell_star();
    let min_depth = min_depth.max(2);
    if !ell_star.at_least(min_depth) {
        return Err(Error::DepthInsufficient {
            required: min_depth as usize,
            ell_star: ell_star.to_string(),
        });
    }
    let scan_cap = match ell_star {
        ExtNat::Fin(l) => l,
        ExtNat::Inf => (2.0 * gamma.max(1.0)).ceil() as u64 + 4,
    };
    let mut depth = None;
    for l in min_depth..=scan_cap {
        if theta * l as f64 + (l / 2) as f64 > gamma {
            depth = Some(l);
            break;
        }
    }
    let l = depth.ok_or_else(|| {
        let gamma_flat = match ell_star {
            ExtNat::Fin(ls) => theta * ls as f64 + (ls / 2) as f64,
            ExtNat::Inf => f64::INFINITY,
        };
        Error::InfeasibleWitness { gamma, gamma_flat }
    })?;

    // Sup of the ratio; dense scan first, log-spaced tail after.
    let mut c1: f64 = 0.0;
    let mut last = 0.0;
    let mut n = 1u64;
    while n <= 1_000_000 {
        let c = growths.coeff.eval(n);
        let log_ratio =
            gamma * (n as f64).ln() - (l as f64) * c.ln() - ((l / 2) as f64) * (n as f64).ln();
        last = log_ratio.exp();
        if last > c1 {
            c1 = last;
        }
        n = if n < 200_000 { n + 1 } else { (n as f64 * 1.002) as u64 + 1 };
    }
    if last > 0.99 * c1 {
        // The ratio has not started decaying inside the window; refuse to
        // certify a constant that the scan cannot pin down.
        return Err(Error::InfeasibleWitness { gamma, gamma_flat: f64::NAN });
    }
    let mut n0 = 1u64;
    while !growths.depth.eval(n0).at_least(l) {
        n0 += 1;
    }
    Ok(Witness { l, c1, n0 })
}

/// `(C2, C3, kappa)` from a witness:
/// `C2 = 16 sigma C1`, `C3 = max(1, C2, (2L+8)^alpha (2 n0 sigma)^alpha)`,
/// `kappa = 1 / C3`.
pub fn kappa_from_witness(sigma: f64, c1: f64, l: u64, n0: u64, alpha: f64) -> (f64, f64, f64) {
    let c2 = 16.0 * sigma * c1;
    let c3 = 1.0f64
        .max(c2)
        .max((2.0 * l as f64 + 8.0).powf(alpha) * (2.0 * n0 as f64 * sigma).powf(alpha));
    (c2, c3, 1.0 / c3)
}

/// Derived unit-ball constants for the hat-sum families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBallConstants {
    pub omega: f64,
    pub kappa: f64,
    pub c2: f64,
    pub c3: f64,
    pub witness: Witness,
}

/// Computes `omega = min(-theta alpha, theta (gamma - lambda) - 1)` and
/// `kappa` through the witness for `gamma < gamma_flat`.
pub fn derive_unit_ball_constants(
    alpha: f64,
    gamma: f64,
    theta: f64,
    lambda: f64,
    sigma: f64,
    growths: &GrowthPair,
) -> Result<UnitBallConstants> {
    if !(theta > 0.0) || !(0.0..=1.0).contains(&lambda) || theta * lambda > 1.0 + 1e-12 {
        return Err(Error::Config(format!(
            "need theta > 0, lambda in [0,1], theta*lambda <= 1; got theta={theta}, lambda={lambda}"
        )));
    }
    if sigma < 2.0 {
        return Err(Error::Config(format!("sigma must be >= 2, got {sigma}")));
    }
    let witness = find_witness(growths, gamma, 2)?;
    let omega = (-theta * alpha).min(theta * (gamma - lambda) - 1.0);
    debug_assert!(omega < 0.0);
    let (c2, c3, kappa) = kappa_from_witness(sigma, witness.c1, witness.l, witness.n0, alpha);
    Ok(UnitBallConstants { omega, kappa, c2, c3, witness })
}

/// Parameters of the indexed unit-ball hat family at scale `m`:
/// `M = 4m`, centers `z_j = 1/(4m) + (j-1)/(2m)` for `j = 1..2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitBallFamilyParams {
    pub d: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub theta: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub m: usize,
    pub growths: GrowthPair,
    pub consts: UnitBallConstants,
}

impl UnitBallFamilyParams {
    #[allow(clippy::too_many_arguments)]
    pub fn derive(
        d: usize,
        alpha: f64,
        gamma: f64,
        theta: f64,
        lambda: f64,
        sigma: f64,
        m: usize,
        growths: GrowthPair,
    ) -> Result<Self> {
        let consts = derive_unit_ball_constants(alpha, gamma, theta, lambda, sigma, &growths)?;
        Ok(UnitBallFamilyParams { d, alpha, gamma, theta, lambda, sigma, m, growths, consts })
    }

    /// Same parameters with externally supplied constants.
    #[allow(clippy::too_many_arguments)]
    pub fn with_consts(
        d: usize,
        alpha: f64,
        gamma: f64,
        theta: f64,
        lambda: f64,
        sigma: f64,
        m: usize,
        growths: GrowthPair,
        consts: UnitBallConstants,
    ) -> Self {
        UnitBallFamilyParams { d, alpha, gamma, theta, lambda, sigma, m, growths, consts }
    }

    pub fn big_m(&self) -> f64 {
        4.0 * self.m as f64
    }

    /// Center `z_j` for 0-based index `j`.
    pub fn center(&self, j: usize) -> f64 {
        1.0 / (4.0 * self.m as f64) + j as f64 / (2.0 * self.m as f64)
    }

    /// Admissible index-set size `sigma * m^(theta lambda)`.
    pub fn max_index_size(&self) -> f64 {
        self.sigma * (self.m as f64).powf(self.theta * self.lambda)
    }

    /// `kappa * m^omega`, the scale of every family member.
    pub fn member_scale(&self) -> f64 {
        self.consts.kappa * (self.m as f64).powf(self.consts.omega)
    }
}

/// A member `f_{nu,J} = kappa m^omega sum_{j in J} nu_j Lambda_{M,z_j}(x_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatSumFn {
    pub m: usize,
    pub big_m: f64,
    pub kappa: f64,
    pub omega: f64,
    /// `(j, nu_j)` with 0-based sorted indices, disjoint supports.
    pub terms: Vec<(usize, f64)>,
}

impl HatSumFn {
    pub fn scale(&self) -> f64 {
        self.kappa * (self.m as f64).powf(self.omega)
    }

    pub fn center(&self, j: usize) -> f64 {
        1.0 / (4.0 * self.m as f64) + j as f64 / (2.0 * self.m as f64)
    }

    /// O(log |J|) evaluation: supports tile `[0,1]` in order.
    pub fn eval1(&self, x1: f64) -> f64 {
        // Hat j covers [j/(2m), (j+1)/(2m)].
        let slot = (x1 * 2.0 * self.m as f64).floor();
        if slot < 0.0 || slot >= 2.0 * self.m as f64 {
            return 0.0;
        }
        let j = slot as usize;
        match self.terms.binary_search_by_key(&j, |t| t.0) {
            Ok(i) => {
                let nu = self.terms[i].1;
                self.scale() * nu * lambda_eval(self.big_m, self.center(j), x1)
            }
            Err(_) => 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval1(x[0])
    }

    /// Exact integral over `[0,1]^d`: each hat contributes `1/M`.
    pub fn exact_integral(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|(_, nu)| *nu).sum();
        self.scale() * s / self.big_m
    }

    /// Exact sup norm: disjoint unit hats scaled by `kappa m^omega |nu_j|`.
    pub fn linf(&self) -> f64 {
        let nu_max = self.terms.iter().map(|(_, nu)| nu.abs()).fold(0.0, f64::max);
        self.scale().abs() * nu_max
    }

    /// Exact squared `L^2([0,1]^d)` norm: `||Lambda||_2^2 = 2/(3M)` per hat.
    pub fn l2_sq(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|(_, nu)| nu * nu).sum();
        self.scale().powi(2) * s * 2.0 / (3.0 * self.big_m)
    }

    /// Piecewise-linear form in `x_1`.
    pub fn to_pwl(&self) -> Pwl {
        let inv = 1.0 / self.big_m;
        let mut kinks = Vec::with_capacity(3 * self.terms.len());
        for (j, _) in &self.terms {
            let z = self.center(*j);
            kinks.extend([z - inv, z, z + inv]);
        }
        Pwl::from_kinks(&kinks, |x| self.eval1(x))
    }

    /// Family descriptor in the documented JSON form.
    pub fn descriptor_json(&self) -> String {
        let j: Vec<usize> = self.terms.iter().map(|t| t.0 + 1).collect();
        let nu: Vec<f64> = self.terms.iter().map(|t| t.1).collect();
        serde_json::json!({
            "m": self.m,
            "M": self.big_m,
            "kappa": self.kappa,
            "omega": self.omega,
            "J": j,
            "nu": nu,
        })
        .to_string()
    }
}

/// Builds `f_{nu,J}` from signs `nu` (indexed by `J`'s 0-based entries) after
/// checking `|J| <= sigma m^(theta lambda)`.
pub fn build_unit_ball_family(
    params: &UnitBallFamilyParams,
    nu: &[f64],
    j_set: &[usize],
) -> Result<HatSumFn> {
    if (j_set.len() as f64) > params.max_index_size() + 1e-9 {
        return Err(Error::FamilySize { max: params.max_index_size(), got: j_set.len() });
    }
    let mut terms: Vec<(usize, f64)> = j_set
        .iter()
        .map(|&j| {
            assert!(j < 2 * params.m, "index out of range");
            let nu_j = nu[j];
            assert!((-1.0..=1.0).contains(&nu_j));
            (j, nu_j)
        })
        .collect();
    terms.sort_by_key(|t| t.0);
    Ok(HatSumFn {
        m: params.m,
        big_m: params.big_m(),
        kappa: params.consts.kappa,
        omega: params.consts.omega,
        terms,
    })
}

/// Builds the ReLU network realizing `f` exactly, returning the network and
/// its budget `(2L+8) n`.
///
/// Follows the unit-ball construction: the index set is padded to at least
/// `ceil(m^(theta lambda))` with zero signs, every kept hat is repeated
/// `N = n0 ceil(m^((1-lambda) theta))` times, and the final layer is scaled
/// down from the raw construction scale to `kappa m^omega` (a factor in `(0, 1]`).
pub fn hat_sum_member_network(
    params: &UnitBallFamilyParams,
    f: &HatSumFn,
) -> Result<(Network<f64>, u64)> {
    let w = params.consts.witness;
    let mf = params.m as f64;
    let k_min = mf.powf(params.theta * params.lambda).ceil() as usize;
    let mut terms = f.terms.clone();
    let mut next_free = 0usize;
    while terms.len() < k_min {
        while terms.iter().any(|(j, _)| *j == next_free) {
            next_free += 1;
        }
        terms.push((next_free, 0.0));
        next_free += 1;
    }
    let reps = (w.n0 as f64 * mf.powf((1.0 - params.lambda) * params.theta).ceil()) as usize;
    let n = reps * terms.len();
    let c = params.growths.coeff.eval(n as u64);
    assert!(c.is_finite());

    let mut signs = Vec::with_capacity(n);
    let mut centers = Vec::with_capacity(n);
    for (j, nu) in &terms {
        for _ in 0..reps {
            signs.push(*nu);
            centers.push(f.center(*j));
        }
    }
    let spec = HatSumSpec {
        d: params.d,
        m: f.big_m,
        l: w.l as usize,
        c,
        signs,
        centers,
    };
    let net = build_hat_sum_network(&spec)?;
    // Network realizes raw_scale * f0; rescale the head to kappa m^omega.
    let raw_scale = spec.scale().to_f64_c() * reps as f64;
    let t = f.scale() / raw_scale;
    assert!(
        t.abs() <= 1.0 + 1e-9,
        "unit-ball scale must not exceed the construction scale (t = {t})"
    );
    let budget = (2 * w.l + 8) * n as u64;
    Ok((net.scale_output(t), budget))
}

/// Constants of the scaled bump `g_{M,y} = kappa M^(-alpha/(alpha+gamma)) vartheta_{M,y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmyConstants {
    pub kappa: f64,
    pub witness: Witness,
}

/// `kappa = min((15(d+L))^-alpha (2 n0)^-alpha, 1/(4 C1))` for the bump
/// scaling; needs a witness of depth at least 3.
pub fn derive_gmy_constants(
    d: usize,
    alpha: f64,
    gamma: f64,
    growths: &GrowthPair,
) -> Result<GmyConstants> {
    let witness = find_witness(growths, gamma, 3)?;
    let kappa = ((15.0 * (d as f64 + witness.l as f64)).powf(-alpha)
        * (2.0 * witness.n0 as f64).powf(-alpha))
    .min(1.0 / (4.0 * witness.c1));
    Ok(GmyConstants { kappa, witness })
}

/// A signed scaled bump `s * vartheta_{M,y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFn {
    pub bump: BumpD<f64>,
    /// Signed scale, `|scale| <= kappa M^(-alpha/(alpha+gamma))`.
    pub scale: f64,
}

impl BumpFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.bump.eval(x).expect("dimension checked by caller")
    }

    pub fn linf_on_unit_cube(&self) -> f64 {
        self.scale.abs() * self.bump.sup_on_unit_cube()
    }

    /// Piecewise-linear form in `x_1` (only valid for `d = 1`).
    pub fn to_pwl(&self) -> Pwl {
        assert_eq!(self.bump.d(), 1);
        let inv = 1.0 / self.bump.m;
        let y = self.bump.y[0];
        Pwl::from_kinks(&[y - inv, y, y + inv], |x| self.eval(&[x]))
    }
}

/// Builds `g_{M,y}` with its certificate constants.
pub fn build_gmy(
    big_m: f64,
    y: &[f64],
    alpha: f64,
    gamma: f64,
    growths: &GrowthPair,
) -> Result<(BumpFn, GmyConstants)> {
    assert!(big_m >= 1.0);
    let consts = derive_gmy_constants(y.len(), alpha, gamma, growths)?;
    let scale = consts.kappa * big_m.powf(-alpha / (alpha + gamma));
    Ok((BumpFn { bump: BumpD { m: big_m, y: y.to_vec() }, scale }, consts))
}

/// Builds the network realizing a (possibly sign-flipped) `g_{M,y}` exactly;
/// returns the network and its budget `15 (d+L) n`.
pub fn gmy_network(
    f: &BumpFn,
    consts: &GmyConstants,
    alpha: f64,
    gamma: f64,
    growths: &GrowthPair,
) -> Result<(Network<f64>, u64)> {
    let w = consts.witness;
    let d = f.bump.d();
    let n = (w.n0 as f64 * f.bump.m.powf(1.0 / (alpha + gamma)).ceil()) as usize;
    let c = growths.coeff.eval(n as u64);
    assert!(c.is_finite());
    let net = build_multihat_network(f.bump.m, &f.bump.y, n, w.l as usize, c)?;
    let raw_scale = multihat_scale(f.bump.m, n, w.l as usize, c);
    let t = f.scale / raw_scale;
    assert!(t.abs() <= 1.0 + 1e-9, "bump scale must not exceed the construction scale");
    let budget = 15 * (d as u64 + w.l) * n as u64;
    Ok((net.scale_output(t), budget))
}

/// The finite unit-ball check at the construction threshold:
/// `budget^alpha * ||f||_inf <= 1`.
pub fn unit_ball_threshold_check(budget: u64, alpha: f64, linf: f64) -> bool {
    (budget as f64).powf(alpha) * linf <= 1.0 + 1e-9
}

// ---------------------------------------------------------------------------
// L^p norms of bumps by kink-aligned quadrature
// ---------------------------------------------------------------------------

const GAUSS3: [(f64, f64); 3] = [
    (-0.7745966692414834, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.7745966692414834, 5.0 / 9.0),
];

/// `||vartheta_{M,y}||_{L^p(D)}` for finite `p`, where `D` is `[0,1]^d`
/// (`clip = true`) or the full support box. Composite Gauss-3 panels per
/// axis, split at the hat kinks and refined by doubling until the change
/// falls below 1e-8 relative; the refinement cap keeps the cell count
/// tractable in three dimensions.
pub fn bump_lp_norm(bump: &BumpD<f64>, p: f64, clip: bool) -> f64 {
    assert!(bump.d() <= 3, "quadrature implemented for d <= 3");
    assert!(p > 0.0 && p.is_finite());
    let (mut subdiv, cap) = match bump.d() {
        1 => (64usize, 2048usize),
        2 => (16, 256),
        _ => (12, 48),
    };
    let mut prev = f64::NAN;
    loop {
        let val = bump_lp_integral(bump, p, clip, subdiv);
        if !prev.is_nan() && (val - prev).abs() <= 1e-8 * val.abs().max(1e-12) {
            return val.powf(1.0 / p);
        }
        prev = val;
        subdiv *= 2;
        if subdiv > cap {
            return val.powf(1.0 / p);
        }
    }
}

fn axis_panels(bump: &BumpD<f64>, j: usize, clip: bool, subdiv: usize) -> Vec<(f64, f64)> {
    let inv = 1.0 / bump.m;
    let (mut lo, mut hi) = (bump.y[j] - inv, bump.y[j] + inv);
    if clip {
        lo = lo.max(0.0);
        hi = hi.min(1.0);
    }
    if lo >= hi {
        return Vec::new();
    }
    let mut cuts = vec![lo, hi];
    if bump.y[j] > lo && bump.y[j] < hi {
        cuts.push(bump.y[j]);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / subdiv as f64;
        for i in 0..subdiv {
            panels.push((w[0] + i as f64 * h, w[0] + (i + 1) as f64 * h));
        }
    }
    panels
}

fn bump_lp_integral(bump: &BumpD<f64>, p: f64, clip: bool, subdiv: usize) -> f64 {
    use rayon::prelude::*;
    let d = bump.d();
    let per_axis: Vec<Vec<(f64, f64)>> = (0..d).map(|j| axis_panels(bump, j, clip, subdiv)).collect();
    if per_axis.iter().any(Vec::is_empty) {
        return 0.0;
    }
    let cell_count: usize = per_axis.iter().map(Vec::len).product();
    let cell_values: Vec<f64> = (0..cell_count)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut idx = vec![0usize; d];
            for j in 0..d {
                idx[j] = rem % per_axis[j].len();
                rem /= per_axis[j].len();
            }
            let mut cell = 0.0;
            let mut node = vec![0usize; d];
            let mut x = vec![0.0; d];
            'nodes: loop {
                let mut w = 1.0;
                for j in 0..d {
                    let (a, b) = per_axis[j][idx[j]];
                    let (t, wt) = GAUSS3[node[j]];
                    x[j] = 0.5 * (a + b) + 0.5 * (b - a) * t;
                    w *= 0.5 * (b - a) * wt;
                }
                cell += w * bump.eval(&x).unwrap().powf(p);
                for j in 0..d {
                    node[j] += 1;
                    if node[j] < GAUSS3.len() {
                        continue 'nodes;
                    }
                    node[j] = 0;
                }
                break;
            }
            cell
        })
        .collect();
    crate::real::pairwise_sum(&cell_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_space::DepthGrowth;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn growths(l: u64, s: f64, theta: f64) -> GrowthPair {
        GrowthPair {
            depth: DepthGrowth::Constant { l },
            coeff: CoeffGrowth::PolyLog { s, theta, kappa: 0.0 },
        }
    }

    #[test]
    fn lambda_peak_boundary_integral() {
        assert_eq!(lambda_eval(4.0, 0.5, 0.5), 1.0);
        assert_eq!(lambda_eval(4.0, 0.5, 0.75), 0.0);
        let hat = Hat1D { m: 4.0, y: 0.5 };
        let pwl = Pwl::from_kinks(&[0.25, 0.5, 0.75], |x| hat.eval(x));
        assert!((pwl.integral() - hat.integral()).abs() < 1e-15);
    }

    // Oracle for the realize example: the three-ReLU identity
    // (C/2M) Lambda_{M,y}(x) = r(c2(x-y+1/M)) - 2 r(c2(x-y)) + r(c2(x-y-1/M)).
    fn three_relu(c: f64, m: f64, y: f64, x: f64) -> f64 {
        let r = |t: f64| t.max(0.0);
        let c2 = c / 2.0;
        r(c2 * (x - y + 1.0 / m)) - 2.0 * r(c2 * (x - y)) + r(c2 * (x - y - 1.0 / m))
    }

    #[test]
    fn three_relu_identity_matches_hat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let c = rng.gen_range(0.25..4.0);
            let m = rng.gen_range(1.0..16.0);
            let y = rng.gen_range(0.0..1.0);
            let x = rng.gen_range(-0.5..1.5);
            let lhs = three_relu(c, m, y, x);
            let rhs = (c / (2.0 * m)) * lambda_eval(m, y, x);
            assert!((lhs - rhs).abs() < 1e-12, "identity failed at c={c} m={m} y={y} x={x}");
        }
    }

    #[test]
    fn hat_sum_network_frozen_values() {
        // n=1, L=2, C=1, M=1, y=0.5: value at 0.5 is C^2/(4Mn) * 1 = 0.25.
        let spec: HatSumSpec<f64> =
            HatSumSpec { d: 1, m: 1.0, l: 2, c: 1.0, signs: vec![1.0], centers: vec![0.5] };
        let net = build_hat_sum_network(&spec).unwrap();
        assert!((net.realize_scalar(&[0.5]).unwrap() - 0.25).abs() < 1e-12);
        // n=1, L=2, C=2: 2^2/(4*1*1) = 1.
        let spec: HatSumSpec<f64> =
            HatSumSpec { d: 1, m: 1.0, l: 2, c: 2.0, signs: vec![1.0], centers: vec![0.5] };
        let net = build_hat_sum_network(&spec).unwrap();
        assert!((net.realize_scalar(&[0.5]).unwrap() - 1.0).abs() < 1e-12);
        // n=2, L=4, C=1, M=4, eps=(1,-1), y=(0.25,0.75) at 0.25:
        // scale C^L n^{floor(L/2)} / (4Mn) = 4/32 = 1/8, peak hat 1 only.
        let spec: HatSumSpec<f64> = HatSumSpec {
            d: 1,
            m: 4.0,
            l: 4,
            c: 1.0,
            signs: vec![1.0, -1.0],
            centers: vec![0.25, 0.75],
        };
        let net = build_hat_sum_network(&spec).unwrap();
        assert!((net.realize_scalar(&[0.25]).unwrap() - 0.125).abs() < 1e-12);
        assert!((spec.analytic_eval(0.25) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn hat_sum_network_vanishes_off_support() {
        // Dyadic parameters keep the layer arithmetic exact, so the value off
        // the support is exactly zero; a generic probe stays below 1e-12.
        let spec: HatSumSpec<f64> = HatSumSpec {
            d: 1,
            m: 8.0,
            l: 2,
            c: 1.0,
            signs: vec![1.0, -0.5],
            centers: vec![0.25, 0.75],
        };
        let net = build_hat_sum_network(&spec).unwrap();
        // Supports are [1/8, 3/8] and [5/8, 7/8]; dyadic probes between,
        // left and right of them come out exactly zero.
        assert_eq!(net.realize_scalar(&[0.46875]).unwrap(), 0.0);
        assert_eq!(net.realize_scalar(&[0.0]).unwrap(), 0.0);
        assert_eq!(net.realize_scalar(&[1.03125]).unwrap(), 0.0);
        assert!(net.realize_scalar(&[0.9431]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hat_sum_rejects_shallow_depth() {
        let spec: HatSumSpec<f64> =
            HatSumSpec { d: 1, m: 1.0, l: 1, c: 1.0, signs: vec![1.0], centers: vec![0.5] };
        assert!(matches!(build_hat_sum_network(&spec), Err(Error::InvalidDepth { min: 2, got: 1 })));
        assert!(matches!(
            build_multihat_network(1.0f64, &[0.5], 1, 2, 1.0),
            Err(Error::InvalidDepth { min: 3, got: 2 })
        ));
    }

    #[test]
    fn budget_certificates_for_frozen_examples() {
        let spec: HatSumSpec<f64> =
            HatSumSpec { d: 1, m: 1.0, l: 2, c: 1.0, signs: vec![1.0], centers: vec![0.5] };
        let s = build_hat_sum_network(&spec).unwrap().stats();
        assert!(s.weights <= 12 && s.layers == 2 && s.weight_sup <= 1.0);
        let net = build_multihat_network(1.0f64, &[0.5, 0.5], 1, 3, 1.0).unwrap();
        let s = net.stats();
        assert!(s.weights <= 75, "W = {} exceeds 15(d+L)n = 75", s.weights);
        assert_eq!(s.layers, 3);
    }

    #[test]
    fn hat_sum_fidelity_all_parities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &l in &[2usize, 3, 4, 5, 7, 8] {
            for _ in 0..8 {
                let n = rng.gen_range(1..=4);
                let spec = HatSumSpec {
                    d: 1,
                    m: [1.0, 2.0, 4.0, 8.0][rng.gen_range(0..4)],
                    l,
                    c: [0.5, 1.0, 2.0][rng.gen_range(0..3)],
                    signs: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    centers: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                };
                let net = build_hat_sum_network(&spec).unwrap();
                let stats = net.stats();
                assert!(stats.weights as u64 <= (2 * l as u64 + 8) * n as u64);
                assert_eq!(stats.layers, l);
                assert!(stats.weight_sup <= spec.c + 1e-15);
                for i in 0..=100 {
                    let x = i as f64 / 100.0;
                    let got = net.realize_scalar(&[x]).unwrap();
                    let want = spec.analytic_eval(x);
                    assert!((got - want).abs() < 1e-9, "l={l} x={x}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn multihat_fidelity_all_parities() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &l in &[3usize, 4, 5, 6] {
            for d in 1..=3usize {
                let n = rng.gen_range(1..=3);
                let m = [1.0, 2.0, 4.0][rng.gen_range(0..3)];
                let c = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
                let y: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
                let net = build_multihat_network(m, &y, n, l, c).unwrap();
                let stats = net.stats();
                assert!(stats.weights as u64 <= 15 * (d as u64 + l as u64) * n as u64);
                assert_eq!(stats.layers, l);
                let bump = BumpD { m, y: y.clone() };
                let scale = multihat_scale(m, n, l, c);
                let mut worst = 0.0f64;
                for _ in 0..200 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.2..1.2)).collect();
                    let got = net.realize_scalar(&x).unwrap();
                    let want = scale * bump.eval(&x).unwrap();
                    worst = worst.max((got - want).abs());
                }
                assert!(worst < 1e-9, "d={d} l={l}: deviation {worst}");
            }
        }
    }

    #[test]
    fn multihat_frozen_center_value() {
        // M=1, y center of [0,1]^2, n=1, L=3, C=1: value at y is 1/(4M) = 0.25.
        let y: Vec<f64> = vec![0.5, 0.5];
        let net = build_multihat_network(1.0, &y, 1, 3, 1.0).unwrap();
        assert!((net.realize_scalar(&y).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vartheta_values_and_support() {
        let bump = BumpD { m: 4.0, y: vec![0.3, 0.6] };
        assert_eq!(bump.eval(&[0.3, 0.6]).unwrap(), 1.0);
        // First coordinate off support kills the bump.
        assert_eq!(bump.eval(&[0.55, 0.6]).unwrap(), 0.0);
        assert!(matches!(
            bump.eval(&[0.5]),
            Err(Error::ShapeMismatch { expected: 2, got: 1 })
        ));
        // 0 <= vartheta <= 1 on random probes.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
            let v = bump.eval(&x).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn vartheta_l1_norm_bounded_by_support_volume() {
        for d in 1..=3usize {
            for &m in &[1.0, 4.0] {
                let bump = BumpD { m, y: vec![0.5; d] };
                let norm = bump_lp_norm(&bump, 1.0, false);
                assert!(
                    norm <= (2.0 / m).powi(d as i32) + 1e-6,
                    "d={d} M={m}: {norm} > {}",
                    (2.0 / m).powi(d as i32)
                );
            }
        }
    }

    #[test]
    fn witness_and_kappa_frozen_examples() {
        // c == 1, ell == 3, gamma = 0.5: C1 = sup n^0.5 / n = 1, n0 = 1.
        let g = growths(3, 1.0, 0.0);
        let w = find_witness(&g, 0.5, 3).unwrap();
        assert_eq!((w.l, w.n0), (3, 1));
        assert!((w.c1 - 1.0).abs() < 1e-12);
        assert!(witness_is_valid(&g, 0.5, &w, 100_000));
        // sigma=2, C1=1, L=3, n0=1, alpha=1: C2=32, C3=56, kappa=1/56.
        let (c2, c3, kappa) = kappa_from_witness(2.0, 1.0, 3, 1, 1.0);
        assert_eq!((c2, c3), (32.0, 56.0));
        assert!((kappa - 1.0 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn derive_unit_ball_constants_examples() {
        let g = growths(3, 1.0, 0.0);
        // alpha=1, gamma=0.5, theta=1, lambda=0: omega = min(-1, -0.5) = -1.
        let c = derive_unit_ball_constants(1.0, 0.5, 1.0, 0.0, 2.0, &g).unwrap();
        assert_eq!(c.omega, -1.0);
        assert!(c.kappa <= 1.0 && c.kappa > 0.0);
        // gamma above gamma_flat = 1 is infeasible.
        assert!(matches!(
            derive_unit_ball_constants(1.0, 1.5, 1.0, 0.0, 2.0, &g),
            Err(Error::InfeasibleWitness { .. })
        ));
    }

    #[test]
    fn unit_ball_family_frozen_values() {
        let g = growths(3, 1.0, 0.0);
        let consts = UnitBallConstants {
            omega: -1.0,
            kappa: 1.0 / 56.0,
            c2: 32.0,
            c3: 56.0,
            witness: Witness { l: 3, c1: 1.0, n0: 1 },
        };
        let params =
            UnitBallFamilyParams::with_consts(1, 1.0, 0.5, 1.0, 0.0, 2.0, 1, g, consts);
        // Empty J: the zero function.
        let f = build_unit_ball_family(&params, &[1.0, 1.0], &[]).unwrap();
        assert_eq!(f.eval1(0.3), 0.0);
        assert_eq!(f.linf(), 0.0);
        // m=1, J={1}, nu_1=1, kappa=1/56, omega=-1: peak value 1/56.
        let f = build_unit_ball_family(&params, &[1.0, 1.0], &[0]).unwrap();
        let z1 = params.center(0);
        assert!((f.eval1(z1) - 1.0 / 56.0).abs() < 1e-15);
        assert!((f.exact_integral() - (1.0 / 56.0) / 4.0).abs() < 1e-15);
        // Oversized J is rejected: sigma m^(theta lambda) = 2 here.
        assert!(matches!(
            build_unit_ball_family(&params, &[1.0, 1.0], &[0, 1, 0]),
            Err(Error::FamilySize { .. })
        ));
    }

    #[test]
    fn family_supports_are_disjoint() {
        let g = growths(3, 1.0, 0.0);
        let params = UnitBallFamilyParams::derive(1, 1.0, 0.5, 1.0, 1.0, 2.0, 4, g).unwrap();
        // Product of distinct lifted hats vanishes on a fine grid.
        for i in 0..8 {
            for j in 0..8 {
                if i == j {
                    continue;
                }
                for t in 0..=400 {
                    let x = t as f64 / 400.0;
                    let a = lambda_eval(params.big_m(), params.center(i), x);
                    let b = lambda_eval(params.big_m(), params.center(j), x);
                    assert_eq!(a * b, 0.0);
                }
            }
        }
    }

    #[test]
    fn member_network_realizes_member_and_certifies() {
        let g = growths(3, 1.0, 0.0);
        for m in [1usize, 2, 4, 8] {
            let params =
                UnitBallFamilyParams::derive(1, 1.0, 0.5, 1.0, 0.5, 2.0, m, g).unwrap();
            let k = (m as f64).powf(0.5).ceil() as usize;
            let nu: Vec<f64> = (0..2 * m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let j_set: Vec<usize> = (0..k).collect();
            let f = build_unit_ball_family(&params, &nu, &j_set).unwrap();
            let (net, budget) = hat_sum_member_network(&params, &f).unwrap();
            assert!(net.check_membership(budget, &params.growths, 1));
            for t in 0..=200 {
                let x = t as f64 / 200.0;
                let got = net.realize_scalar(&[x]).unwrap();
                assert!((got - f.eval1(x)).abs() < 1e-12, "m={m} x={x}");
            }
            assert!(unit_ball_threshold_check(budget, params.alpha, f.linf()));
        }
    }

    #[test]
    fn gmy_frozen_constants_and_network() {
        let g = growths(3, 1.0, 0.0);
        // d=1, L=3, n0=1, C1=1, alpha=1: kappa = min(1/120, 1/4) = 1/120.
        let consts = derive_gmy_constants(1, 1.0, 0.5, &g).unwrap();
        assert!((consts.kappa - 1.0 / 120.0).abs() < 1e-12);
        // M=1: scale is kappa itself; g(y) = kappa * M^(-alpha/(alpha+gamma)).
        let (f, consts) = build_gmy(1.0, &[0.5], 1.0, 0.5, &g).unwrap();
        assert!((f.eval(&[0.5]) - consts.kappa).abs() < 1e-15);
        let (f4, _) = build_gmy(4.0, &[0.5], 1.0, 0.5, &g).unwrap();
        assert!((f4.eval(&[0.5]) - consts.kappa * 4.0f64.powf(-1.0 / 1.5)).abs() < 1e-15);
        // Network certificate.
        let (net, budget) = gmy_network(&f4, &consts, 1.0, 0.5, &g).unwrap();
        assert!(net.check_membership(budget, &g, 1));
        for t in 0..=160 {
            let x = t as f64 / 160.0;
            assert!((net.realize_scalar(&[x]).unwrap() - f4.eval(&[x])).abs() < 1e-12);
        }
        assert!(unit_ball_threshold_check(budget, 1.0, f4.linf_on_unit_cube()));
        // Depth-insufficient growths are rejected.
        let shallow = growths(2, 1.0, 0.0);
        assert!(matches!(
            derive_gmy_constants(1, 1.0, 0.5, &shallow),
            Err(Error::DepthInsufficient { .. })
        ));
    }

    #[test]
    fn hat_sum_descriptor_json_shape() {
        let f = HatSumFn {
            m: 2,
            big_m: 8.0,
            kappa: 0.125,
            omega: -1.0,
            terms: vec![(0, 1.0), (3, -1.0)],
        };
        let v: serde_json::Value = serde_json::from_str(&f.descriptor_json()).unwrap();
        assert_eq!(v["m"], 2);
        assert_eq!(v["M"], 8.0);
        assert_eq!(v["J"].as_array().unwrap().len(), 2);
        assert_eq!(v["nu"][1], -1.0);
    }
}
