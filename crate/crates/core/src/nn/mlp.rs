//! Dense multilayer perceptron over a flat parameter vector.
//!
//! Parameters are stored layer by layer: the `out x in` weight matrix in
//! row-major order followed by the `out` biases. Hidden layers apply the
//! configured activation; the last layer is affine.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(T::zero()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Identity => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpLayout {
    /// Layer widths including input and output, e.g. `[46, 1024, 512, 15]`.
    pub sizes: Vec<usize>,
    pub activation: Activation,
}

/// Recorded forward pass: the input of every layer plus the final output.
#[derive(Debug, Clone)]
pub struct MlpTape<T> {
    inputs: Vec<Array2<T>>,
    pub output: Array2<T>,
}

impl MlpLayout {
    pub fn new(sizes: Vec<usize>, activation: Activation) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        Self { sizes, activation }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `(fan_in, fan_out)` of layer `l`.
    pub fn layer_shape(&self, l: usize) -> (usize, usize) {
        (self.sizes[l], self.sizes[l + 1])
    }

    /// Offset of layer `l`'s weights in the flat vector.
    pub fn layer_offset(&self, l: usize) -> usize {
        (0..l).map(|k| self.sizes[k + 1] * (self.sizes[k] + 1)).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layer_offset(self.layer_count())
    }

    pub fn weight<'a, T: Real>(&self, params: &'a [T], l: usize) -> ArrayView2<'a, T> {
        let (i, o) = self.layer_shape(l);
        let off = self.layer_offset(l);
        ArrayView2::from_shape((o, i), &params[off..off + o * i]).expect("layout matches params")
    }

    pub fn bias<'a, T: Real>(&self, params: &'a [T], l: usize) -> ArrayView1<'a, T> {
        let (i, o) = self.layer_shape(l);
        let off = self.layer_offset(l) + o * i;
        ArrayView1::from(&params[off..off + o])
    }

    fn check(&self, params_len: usize, x_cols: usize) -> Result<()> {
        if params_len < self.param_count() {
            return Err(Error::Shape(format!(
                "parameter vector has {params_len} entries, layout needs {}",
                self.param_count()
            )));
        }
        if x_cols != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {x_cols} columns, network expects {}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batched forward pass (`x` is `batch x input_dim`), recording a tape.
    pub fn forward<T: Real>(&self, params: &[T], x: ArrayView2<T>) -> Result<MlpTape<T>> {
        self.check(params.len(), x.ncols())?;
        let last = self.layer_count() - 1;
        let mut inputs = Vec::with_capacity(self.layer_count());
        let mut a = x.to_owned();
        for l in 0..self.layer_count() {
            let w = self.weight(params, l);
            let b = self.bias(params, l);
            let mut z = a.dot(&w.t());
            z.zip_mut_with(&b, |a, &v| *a = *a + v);
            if l != last {
                let act = self.activation;
                z.mapv_inplace(|v| act.apply(v));
            }
            inputs.push(std::mem::replace(&mut a, z));
        }
        Ok(MlpTape { inputs, output: a })
    }

    /// Forward pass for a single input vector.
    pub fn forward_one<T: Real>(&self, params: &[T], x: &[T]) -> Result<Vec<T>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(self.forward(params, view)?.output.into_raw_vec_and_offset().0)
    }

    /// Reverse pass. Accumulates `dL/dparams` into `grads` and returns
    /// `dL/dx` given `dy = dL/doutput`.
    pub fn backward<T: Real>(&self, params: &[T], tape: &MlpTape<T>, dy: ArrayView2<T>, grads: &mut [T]) -> Array2<T> {
        debug_assert!(grads.len() >= self.param_count());
        let mut delta = dy.to_owned();
        for l in (0..self.layer_count()).rev() {
            let (i, o) = self.layer_shape(l);
            let off = self.layer_offset(l);
            let input = &tape.inputs[l];
            {
                let (gw, gb) = grads[off..off + o * i + o].split_at_mut(o * i);
                let mut gw = ArrayViewMut2::from_shape((o, i), gw).expect("grad layout");
                general_mat_mul(T::one(), &delta.t(), input, T::one(), &mut gw);
                let mut gb = ArrayViewMut1::from(gb);
                gb.zip_mut_with(&delta.sum_axis(Axis(0)), |a, &v| *a = *a + v);
            }
            let w = self.weight(params, l);
            let mut dx = delta.dot(&w);
            if l > 0 {
                let act = self.activation;
                dx.zip_mut_with(input, |d, &y| *d = *d * act.derivative_from_output(y));
            }
            delta = dx;
        }
        delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_params_give_zero_output() {
        let layout = MlpLayout::new(vec![4, 8, 3], Activation::Tanh);
        let p = vec![0.0f64; layout.param_count()];
        let y = layout.forward_one(&p, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn identity_layer() {
        let layout = MlpLayout::new(vec![3, 3], Activation::Identity);
        let mut p = vec![0.0f64; layout.param_count()];
        for k in 0..3 {
            p[k * 3 + k] = 1.0;
        }
        assert_eq!(layout.forward_one(&p, &[0.3, -1.0, 2.0]).unwrap(), vec![0.3, -1.0, 2.0]);
    }

    #[test]
    fn shape_errors() {
        let layout = MlpLayout::new(vec![3, 2], Activation::Tanh);
        let p = vec![0.0f64; layout.param_count()];
        assert!(matches!(layout.forward_one(&p, &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(layout.forward_one(&p[..3], &[1.0, 2.0, 3.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn half_squared_norm_loss_on_linear_layer() {
        // L = 0.5 |W x + b|^2  =>  dL/dW = y x^T, dL/db = y
        let layout = MlpLayout::new(vec![2, 2], Activation::Tanh);
        let p = vec![0.5, -1.0, 2.0, 0.25, 0.1, -0.2];
        let x = array![[1.5, -0.5]];
        let tape = layout.forward(&p, x.view()).unwrap();
        let y = tape.output.clone();
        let mut g = vec![0.0f64; p.len()];
        layout.backward(&p, &tape, y.view(), &mut g);
        let expect = [
            y[[0, 0]] * 1.5,
            y[[0, 0]] * -0.5,
            y[[0, 1]] * 1.5,
            y[[0, 1]] * -0.5,
            y[[0, 0]],
            y[[0, 1]],
        ];
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        let layout = MlpLayout::new(vec![3, 5, 2], Activation::Tanh);
        let p: Vec<f64> = (0..layout.param_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = array![[0.1, 0.2, 0.3]];
        let tape = layout.forward(&p, x.view()).unwrap();
        let mut g = vec![0.0; p.len()];
        let dx = layout.backward(&p, &tape, Array2::zeros((1, 2)).view(), &mut g);
        assert!(g.iter().all(|v| *v == 0.0));
        assert!(dx.iter().all(|v| *v == 0.0));
    }
}
