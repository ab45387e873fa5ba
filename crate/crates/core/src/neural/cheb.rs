use ndarray::{Array2, Array3, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;
use crate::roadgraph::GraphLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }

    // Both derivatives can be read off the activated value.
    fn derivative_at_output(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Chebyshev coefficients `theta` of shape `(K + 1, F_in, F_out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebFilterParams {
    pub theta: Array3<f64>,
    pub activation: Activation,
}

impl ChebFilterParams {
    pub fn new(theta: Array3<f64>, activation: Activation) -> Result<Self, NeuralError> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("Chebyshev coefficients"));
        }
        if theta.is_empty() {
            return Err(NeuralError::Shape("empty Chebyshev coefficient tensor".into()));
        }
        Ok(Self { theta, activation })
    }

    pub fn zeros(order: usize, in_features: usize, out_features: usize, activation: Activation) -> Self {
        Self {
            theta: Array3::zeros((order + 1, in_features, out_features)),
            activation,
        }
    }

    /// Glorot-uniform initialisation over the stacked `(K + 1) F_in` inputs.
    pub(crate) fn random<R: Rng>(
        order: usize,
        in_features: usize,
        out_features: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let fan_in = (order + 1) * in_features;
        let limit = (6.0 / (fan_in + out_features) as f64).sqrt();
        let theta = Array3::from_shape_simple_fn((order + 1, in_features, out_features), || {
            rng.random_range(-limit..limit)
        });
        Self { theta, activation }
    }

    pub fn order(&self) -> usize {
        self.theta.dim().0 - 1
    }

    pub fn in_features(&self) -> usize {
        self.theta.dim().1
    }

    pub fn out_features(&self) -> usize {
        self.theta.dim().2
    }
}

/// `sigma(sum_k T_k(L) x theta_k)` for one graph signal `x` of shape
/// `[N, F_in]`. The polynomials are applied through the three-term
/// recurrence; `T_k(L)` is never formed.
pub fn cheb_graph_conv(
    x: &Array2<f64>,
    params: &ChebFilterParams,
    lap: &GraphLaplacian,
) -> Result<Array2<f64>, NeuralError> {
    if !lap.rescaled {
        return Err(NeuralError::NotRescaled);
    }
    let (n, f_in) = x.dim();
    if lap.dim() != n {
        return Err(NeuralError::Shape(format!(
            "signal has {n} nodes, Laplacian has {}",
            lap.dim()
        )));
    }
    if f_in != params.in_features() {
        return Err(NeuralError::Shape(format!(
            "signal has {f_in} features, layer expects {}",
            params.in_features()
        )));
    }
    let x3 = x.clone().insert_axis(Axis(1));
    let cache = cheb_forward(x3, params, &lap.matrix);
    if cache.output.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::NonFinite("graph convolution output"));
    }
    Ok(cache.output.index_axis_move(Axis(1), 0))
}

/// Intermediate values of a batched convolution. Signals are laid out
/// `[N, R, F]` so the Laplacian acts on a contiguous `[N, R F]` matrix and
/// the coefficients on a contiguous `[N R, F]` one.
pub(crate) struct ChebCache {
    basis: Vec<Array3<f64>>,
    pub(crate) output: Array3<f64>,
}

fn apply_operator(op: &Array2<f64>, t: &Array3<f64>) -> Array3<f64> {
    let (n, r, f) = t.dim();
    let flat = t
        .view()
        .into_shape_with_order((n, r * f))
        .expect("basis tensors are contiguous");
    op.dot(&flat)
        .into_shape_with_order((n, r, f))
        .expect("product is contiguous")
}

fn as_rows(t: &Array3<f64>) -> ndarray::ArrayView2<'_, f64> {
    let (n, r, f) = t.dim();
    t.view()
        .into_shape_with_order((n * r, f))
        .expect("basis tensors are contiguous")
}

pub(crate) fn cheb_forward(x: Array3<f64>, params: &ChebFilterParams, lap: &Array2<f64>) -> ChebCache {
    let (n, r, _) = x.dim();
    let order = params.order();
    let mut basis = Vec::with_capacity(order + 1);
    basis.push(x);
    if order >= 1 {
        basis.push(apply_operator(lap, &basis[0]));
    }
    for k in 2..=order {
        let mut next = apply_operator(lap, &basis[k - 1]);
        next *= 2.0;
        next -= &basis[k - 2];
        basis.push(next);
    }
    let f_out = params.out_features();
    let mut pre = Array2::<f64>::zeros((n * r, f_out));
    for (k, t) in basis.iter().enumerate() {
        ndarray::linalg::general_mat_mul(1.0, &as_rows(t), &params.theta.index_axis(Axis(0), k), 1.0, &mut pre);
    }
    let act = params.activation;
    pre.mapv_inplace(|v| act.apply(v));
    let output = pre
        .into_shape_with_order((n, r, f_out))
        .expect("output is contiguous");
    ChebCache { basis, output }
}

/// Returns the coefficient gradient and, when requested, the gradient with
/// respect to the layer input.
pub(crate) fn cheb_backward(
    cache: &ChebCache,
    params: &ChebFilterParams,
    lap: &Array2<f64>,
    d_output: &Array3<f64>,
    input_grad: bool,
) -> (Array3<f64>, Option<Array3<f64>>) {
    let (n, r, f_out) = d_output.dim();
    let act = params.activation;
    let mut d_pre = d_output.clone();
    ndarray::Zip::from(&mut d_pre)
        .and(&cache.output)
        .for_each(|d, &o| *d *= act.derivative_at_output(o));
    let d_pre = d_pre
        .into_shape_with_order((n * r, f_out))
        .expect("gradient is contiguous");

    let mut d_theta = Array3::<f64>::zeros(params.theta.raw_dim());
    for (k, t) in cache.basis.iter().enumerate() {
        d_theta
            .index_axis_mut(Axis(0), k)
            .assign(&as_rows(t).t().dot(&d_pre));
    }
    if !input_grad {
        return (d_theta, None);
    }

    let f_in = params.in_features();
    let mut d_basis: Vec<Array3<f64>> = (0..cache.basis.len())
        .map(|k| {
            d_pre
                .dot(&params.theta.index_axis(Axis(0), k).t())
                .into_shape_with_order((n, r, f_in))
                .expect("gradient is contiguous")
        })
        .collect();
    let lap_t = lap.t().to_owned();
    for k in (2..d_basis.len()).rev() {
        let g = std::mem::replace(&mut d_basis[k], Array3::zeros((0, 0, 0)));
        let mut back = apply_operator(&lap_t, &g);
        back *= 2.0;
        d_basis[k - 1] += &back;
        d_basis[k - 2] -= &g;
    }
    if d_basis.len() >= 2 {
        let back = apply_operator(&lap_t, &d_basis[1]);
        d_basis[0] += &back;
    }
    (d_theta, Some(d_basis.swap_remove(0)))
}
