use ndarray::{s, Array1, Array2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;

/// Fused LSTM weights. Gate blocks along the last axis are ordered
/// input, forget, cell candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// `[D, 4H]`
    pub w_input: Array2<f64>,
    /// `[H, 4H]`
    pub w_hidden: Array2<f64>,
    /// `[4H]`
    pub bias: Array1<f64>,
}

impl LstmParams {
    pub fn new(w_input: Array2<f64>, w_hidden: Array2<f64>, bias: Array1<f64>) -> Result<Self, NeuralError> {
        let h = w_hidden.nrows();
        if w_hidden.ncols() != 4 * h || w_input.ncols() != 4 * h || bias.len() != 4 * h {
            return Err(NeuralError::Shape(format!(
                "LSTM weights {:?} / {:?} / {} do not share hidden size {h}",
                w_input.dim(),
                w_hidden.dim(),
                bias.len()
            )));
        }
        Ok(Self {
            w_input,
            w_hidden,
            bias,
        })
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Array2::zeros((input_size, 4 * hidden_size)),
            w_hidden: Array2::zeros((hidden_size, 4 * hidden_size)),
            bias: Array1::zeros(4 * hidden_size),
        }
    }

    /// Uniform in `±1/sqrt(H)` with the forget bias set to 1.
    pub(crate) fn random<R: Rng>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let limit = 1.0 / (hidden_size as f64).sqrt();
        let mut draw = || rng.random_range(-limit..limit);
        let w_input = Array2::from_shape_simple_fn((input_size, 4 * hidden_size), &mut draw);
        let w_hidden = Array2::from_shape_simple_fn((hidden_size, 4 * hidden_size), &mut draw);
        let mut bias = Array1::zeros(4 * hidden_size);
        bias.slice_mut(s![hidden_size..2 * hidden_size]).fill(1.0);
        Self {
            w_input,
            w_hidden,
            bias,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_input.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hidden.nrows()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Runs the recurrence from zero state and returns the last hidden state.
pub fn lstm_forward(sequence: &[Array1<f64>], params: &LstmParams) -> Result<Array1<f64>, NeuralError> {
    let Some(first) = sequence.first() else {
        return Err(NeuralError::EmptySequence);
    };
    let d = params.input_size();
    if sequence.iter().any(|x| x.len() != d) || first.len() != d {
        return Err(NeuralError::Shape(format!("LSTM expects inputs of width {d}")));
    }
    let mut inputs = Array2::zeros((sequence.len(), d));
    for (mut row, x) in inputs.rows_mut().into_iter().zip(sequence) {
        row.assign(x);
    }
    let (h, _) = lstm_forward_batch(inputs, sequence.len(), params);
    if h.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::NonFinite("LSTM hidden state"));
    }
    Ok(h.index_axis_move(Axis(0), 0))
}

struct StepCache {
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    /// Activated gates `[B, 4H]`.
    gates: Array2<f64>,
    tanh_c: Array2<f64>,
}

pub(crate) struct LstmCache {
    inputs: Array2<f64>,
    steps: Vec<StepCache>,
}

/// `inputs` holds `steps` consecutive blocks of `B` rows, one block per time
/// step. Returns the final hidden state `[B, H]`.
pub(crate) fn lstm_forward_batch(inputs: Array2<f64>, steps: usize, params: &LstmParams) -> (Array2<f64>, LstmCache) {
    let batch = inputs.nrows() / steps;
    let hidden = params.hidden_size();
    let projected = inputs.dot(&params.w_input);
    let mut h = Array2::<f64>::zeros((batch, hidden));
    let mut c = Array2::<f64>::zeros((batch, hidden));
    let mut cache = Vec::with_capacity(steps);
    for step in 0..steps {
        let mut gates = projected.slice(s![step * batch..(step + 1) * batch, ..]).to_owned();
        gates += &h.dot(&params.w_hidden);
        gates += &params.bias;
        gates.slice_mut(s![.., ..2 * hidden]).mapv_inplace(sigmoid);
        gates.slice_mut(s![.., 2 * hidden..3 * hidden]).mapv_inplace(f64::tanh);
        gates.slice_mut(s![.., 3 * hidden..]).mapv_inplace(sigmoid);

        let mut c_next = Array2::<f64>::zeros((batch, hidden));
        Zip::from(&mut c_next)
            .and(&c)
            .and(gates.slice(s![.., ..hidden]))
            .and(gates.slice(s![.., hidden..2 * hidden]))
            .and(gates.slice(s![.., 2 * hidden..3 * hidden]))
            .for_each(|cn, &cp, &i, &f, &g| *cn = f * cp + i * g);
        let tanh_c = c_next.mapv(f64::tanh);
        let h_next = &gates.slice(s![.., 3 * hidden..]) * &tanh_c;

        cache.push(StepCache {
            h_prev: std::mem::replace(&mut h, h_next),
            c_prev: std::mem::replace(&mut c, c_next),
            gates,
            tanh_c,
        });
    }
    (h, LstmCache { inputs, steps: cache })
}

/// Backpropagation through time from a gradient on the final hidden state.
/// Returns parameter gradients and the gradient on every input row.
pub(crate) fn lstm_backward(cache: &LstmCache, params: &LstmParams, d_h_final: &Array2<f64>) -> (LstmParams, Array2<f64>) {
    let hidden = params.hidden_size();
    let steps = cache.steps.len();
    let batch = d_h_final.nrows();
    let mut d_gates_all = Array2::<f64>::zeros((steps * batch, 4 * hidden));
    let mut grads = LstmParams::zeros(params.input_size(), hidden);

    let mut d_h = d_h_final.clone();
    let mut d_c = Array2::<f64>::zeros((batch, hidden));
    for step in (0..steps).rev() {
        let sc = &cache.steps[step];
        let g = &sc.gates;
        let mut d_pre = d_gates_all.slice_mut(s![step * batch..(step + 1) * batch, ..]);
        for b in 0..batch {
            for j in 0..hidden {
                let i = g[[b, j]];
                let f = g[[b, hidden + j]];
                let cand = g[[b, 2 * hidden + j]];
                let o = g[[b, 3 * hidden + j]];
                let tc = sc.tanh_c[[b, j]];
                let dh = d_h[[b, j]];
                let dc = d_c[[b, j]] + dh * o * (1.0 - tc * tc);
                d_pre[[b, j]] = dc * cand * i * (1.0 - i);
                d_pre[[b, hidden + j]] = dc * sc.c_prev[[b, j]] * f * (1.0 - f);
                d_pre[[b, 2 * hidden + j]] = dc * i * (1.0 - cand * cand);
                d_pre[[b, 3 * hidden + j]] = dh * tc * o * (1.0 - o);
                d_c[[b, j]] = dc * f;
            }
        }
        let d_pre = d_pre.view();
        grads.w_hidden += &sc.h_prev.t().dot(&d_pre);
        grads.bias += &d_pre.sum_axis(Axis(0));
        d_h = d_pre.dot(&params.w_hidden.t());
    }
    grads.w_input = cache.inputs.t().dot(&d_gates_all).as_standard_layout().into_owned();
    let d_inputs = d_gates_all.dot(&params.w_input.t());
    (grads, d_inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_parameters_give_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let seq = vec![array![1.0, -2.0, 0.5]; 4];
        assert_eq!(lstm_forward(&seq, &p).unwrap(), Array1::<f64>::zeros(4));
    }

    #[test]
    fn scalar_step_matches_hand_computation() {
        // Gates i, f, g, o with weights 0.5, -0.3, 0.8, 0.2 and biases
        // 0.1, 1.0, -0.2, 0.0 on input x = 1.5.
        let p = LstmParams::new(
            array![[0.5, -0.3, 0.8, 0.2]],
            array![[0.0, 0.0, 0.0, 0.0]],
            array![0.1, 1.0, -0.2, 0.0],
        )
        .unwrap();
        let h = lstm_forward(&[array![1.5]], &p).unwrap();
        let i = 1.0 / (1.0 + (-0.85f64).exp());
        let g = 1.0f64.tanh();
        let o = 1.0 / (1.0 + (-0.3f64).exp());
        let expected = o * (i * g).tanh();
        assert!((h[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_misshaped_sequences() {
        let p = LstmParams::zeros(2, 2);
        assert!(matches!(lstm_forward(&[], &p), Err(NeuralError::EmptySequence)));
        assert!(matches!(
            lstm_forward(&[array![1.0, 2.0], array![1.0]], &p),
            Err(NeuralError::Shape(_))
        ));
        assert!(LstmParams::new(Array2::zeros((2, 8)), Array2::zeros((2, 7)), Array1::zeros(8)).is_err());
    }
}
