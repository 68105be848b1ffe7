//! ReLU networks as explicit weight tuples.
//!
//! A network is a sequence of affine layers `(A, b)`; its realization applies
//! the layers in order with a componentwise ReLU after every layer except the
//! last. The module also provides the size statistics used by all budget
//! certificates: layer count, nonzero-weight count and the sup of the weight
//! magnitudes. Nonzero counting is exact equality against zero; no tolerance.

use serde::{Deserialize, Serialize};

use crate::approx_space::GrowthPair;
use crate::error::{Error, Result};
use crate::real::Real;

/// One affine layer `x -> A x + b`, with `A` stored dense row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    /// `rows x cols` matrix, row-major.
    #[serde(rename = "A", with = "matrix_rows")]
    pub a: Matrix<T>,
    /// Bias of length `rows`.
    pub b: Vec<T>,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T], y: &mut Vec<T>) {
        y.clear();
        y.reserve(self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = T::zero();
            for (aij, xj) in row.iter().zip(x.iter()) {
                acc = acc + *aij * *xj;
            }
            y.push(acc);
        }
    }
}

// The wire format keeps matrices as nested row arrays: {"A":[[..],[..]],"b":[..]}.
mod matrix_rows {
    use super::Matrix;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S, T>(m: &Matrix<T>, ser: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        T: serde::Serialize,
    {
        let mut seq = ser.serialize_seq(Some(m.rows))?;
        for i in 0..m.rows {
            seq.serialize_element(&m.data[i * m.cols..(i + 1) * m.cols])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D, T>(de: D) -> Result<Matrix<T>, D::Error>
    where
        D: Deserializer<'de>,
        T: serde::Deserialize<'de>,
    {
        let rows: Vec<Vec<T>> = Vec::deserialize(de)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }
}

/// Size statistics of a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetStats {
    /// Layer count `L`.
    pub layers: usize,
    /// Number of nonzero entries over all `A` and `b`.
    pub weights: usize,
    /// Entrywise max-abs over all `A` and `b`.
    pub weight_sup: f64,
    pub d_in: usize,
    pub d_out: usize,
}

/// A ReLU network as an immutable tuple of layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network<T> {
    layers: Vec<Layer<T>>,
}

impl<T: Real> Network<T> {
    /// Builds a network, checking the architecture chains.
    pub fn new(layers: Vec<Layer<T>>) -> Self {
        assert!(!layers.is_empty(), "network needs at least one layer");
        for layer in &layers {
            assert_eq!(layer.a.rows, layer.b.len(), "bias length must match rows");
        }
        for w in layers.windows(2) {
            assert_eq!(w[1].a.cols, w[0].a.rows, "layer dimensions must chain");
        }
        Network { layers }
    }

    /// Network with a single all-zero layer of the given shape.
    pub fn zero(d_in: usize, d_out: usize) -> Self {
        Network::new(vec![Layer { a: Matrix::zeros(d_out, d_in), b: vec![T::zero(); d_out] }])
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn d_in(&self) -> usize {
        self.layers[0].a.cols
    }

    pub fn d_out(&self) -> usize {
        self.layers.last().unwrap().a.rows
    }

    /// Widths `(N_0, ..., N_L)`.
    pub fn architecture(&self) -> Vec<usize> {
        let mut a = Vec::with_capacity(self.layers.len() + 1);
        a.push(self.d_in());
        a.extend(self.layers.iter().map(|l| l.a.rows));
        a
    }

    /// Evaluates the realization at `x`: affine layers with ReLU between them,
    /// no ReLU after the last layer.
    pub fn realize(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.d_in() {
            return Err(Error::ShapeMismatch { expected: self.d_in(), got: x.len() });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            layer.a.matvec(&cur, &mut next);
            for (v, b) in next.iter_mut().zip(layer.b.iter()) {
                *v = *v + *b;
            }
            if idx != last {
                for v in next.iter_mut() {
                    *v = v.max(T::zero());
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Scalar-output convenience wrapper around [`Network::realize`].
    pub fn realize_scalar(&self, x: &[T]) -> Result<T> {
        let out = self.realize(x)?;
        debug_assert_eq!(out.len(), 1);
        Ok(out[0])
    }

    /// Layer count, nonzero-weight count, weight sup and in/out dimensions.
    pub fn stats(&self) -> NetStats {
        let mut weights = 0usize;
        let mut sup = 0.0f64;
        for layer in &self.layers {
            for v in layer.a.data.iter().chain(layer.b.iter()) {
                if *v != T::zero() {
                    weights += 1;
                }
                sup = sup.max(v.abs().to_f64_c());
            }
        }
        NetStats {
            layers: self.layers.len(),
            weights,
            weight_sup: sup,
            d_in: self.d_in(),
            d_out: self.d_out(),
        }
    }

    /// Whether the network lies in the set with `W <= n`, `L <= ell(n)`,
    /// weight sup `<= c(n)`, input dimension `d` and scalar output.
    pub fn check_membership(&self, n: u64, growths: &GrowthPair, d: usize) -> bool {
        let s = self.stats();
        s.d_out == 1
            && s.d_in == d
            && (s.weights as u64) <= n
            && growths.depth.eval(n).at_least(s.layers as u64)
            && s.weight_sup <= growths.coeff.eval(n)
    }

    /// Returns a copy whose final layer is scaled by `t`.
    ///
    /// For `|t| <= 1` this stays inside the same budget set: `W` cannot grow
    /// and the weight sup cannot increase.
    pub fn scale_output(&self, t: T) -> Self {
        let mut layers = self.layers.clone();
        let last = layers.last_mut().unwrap();
        for v in last.a.data.iter_mut() {
            *v = *v * t;
        }
        for v in last.b.iter_mut() {
            *v = *v * t;
        }
        Network { layers }
    }

    /// Serializes to the documented JSON form `{"layers":[{"A":..,"b":..}]}`.
    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let net: Network<T> = serde_json::from_str(s)?;
        Ok(Network::new(net.layers))
    }
}
