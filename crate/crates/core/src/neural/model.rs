use ndarray::{concatenate, s, Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cheb::{cheb_backward, cheb_forward, ChebCache};
use super::lstm::{lstm_backward, lstm_forward_batch, LstmCache};
use super::{Activation, ChebFilterParams, LstmParams, NeuralError};
use crate::roadgraph::GraphLaplacian;

/// Architecture of a [`MotifGcrnnModel`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub node_count: usize,
    /// Output width of each graph-convolution layer. Empty disables graph
    /// convolution and feeds raw speeds to the LSTMs.
    pub mgc_filters: Vec<usize>,
    /// Chebyshev order `K`.
    pub cheb_order: usize,
    pub hidden_size: usize,
    /// Recent-trend window `m`.
    pub trend_window: usize,
    /// Daily-period window `n`; 0 disables the period branch.
    pub period_window: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl ModelConfig {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            mgc_filters: vec![32],
            cheb_order: 3,
            hidden_size: 64,
            trend_window: 2,
            period_window: 7,
            activation: Activation::Relu,
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::InvalidConfig(m.to_string()));
        if self.node_count == 0 {
            return bad("node_count must be positive");
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be positive");
        }
        if self.trend_window == 0 {
            return bad("trend_window must be at least 1");
        }
        if self.mgc_filters.contains(&0) {
            return bad("mgc_filters entries must be positive");
        }
        Ok(())
    }

    /// Per-node feature width after the graph-convolution stack.
    pub fn feature_width(&self) -> usize {
        self.mgc_filters.last().copied().unwrap_or(1)
    }

    /// Width of the concatenated branch outputs `Y_C`.
    pub fn concat_width(&self) -> usize {
        if self.period_window > 0 {
            2 * self.hidden_size
        } else {
            self.hidden_size
        }
    }
}

/// Per-segment affine map of speeds onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub center: Array1<f64>,
    pub half_range: Array1<f64>,
}

impl MinMaxScaler {
    /// Fits on a `[N, T]` matrix. A constant row maps to 0 with unit scale.
    pub fn fit(data: ArrayView2<'_, f64>) -> Result<Self, NeuralError> {
        if data.ncols() == 0 {
            return Err(NeuralError::Shape("cannot fit a scaler on zero columns".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("scaler input"));
        }
        let n = data.nrows();
        let mut center = Array1::zeros(n);
        let mut half_range = Array1::zeros(n);
        for (i, row) in data.rows().into_iter().enumerate() {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            center[i] = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            half_range[i] = if half > 1e-12 { half } else { 1.0 };
        }
        Ok(Self { center, half_range })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            center: Array1::zeros(n),
            half_range: Array1::ones(n),
        }
    }

    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }

    pub fn normalize(&self, speeds: ArrayView1<'_, f64>) -> Array1<f64> {
        (&speeds - &self.center) / &self.half_range
    }

    pub fn denormalize(&self, scaled: ArrayView1<'_, f64>) -> Array1<f64> {
        &scaled * &self.half_range + &self.center
    }

    fn normalize_rows(&self, frames: &Array2<f64>) -> Array2<f64> {
        (frames - &self.center) / &self.half_range
    }
}

/// One training or test example in speed units: `trend` is `[m, N]`,
/// `period` is `[n, N]`, oldest frame first.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub trend: Array2<f64>,
    pub period: Array2<f64>,
    pub target: Array1<f64>,
}

/// All trainable tensors. Gradients use the same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mgc: Vec<ChebFilterParams>,
    pub trend_lstm: LstmParams,
    pub period_lstm: Option<LstmParams>,
    /// `[N, C]`
    pub fc_weights: Array2<f64>,
    /// `[N]`
    pub fc_bias: Array1<f64>,
}

impl ModelParams {
    pub fn zeros_like(&self) -> Self {
        Self {
            mgc: self
                .mgc
                .iter()
                .map(|l| ChebFilterParams {
                    theta: Array3::zeros(l.theta.raw_dim()),
                    activation: l.activation,
                })
                .collect(),
            trend_lstm: LstmParams::zeros(self.trend_lstm.input_size(), self.trend_lstm.hidden_size()),
            period_lstm: self
                .period_lstm
                .as_ref()
                .map(|p| LstmParams::zeros(p.input_size(), p.hidden_size())),
            fc_weights: Array2::zeros(self.fc_weights.raw_dim()),
            fc_bias: Array1::zeros(self.fc_bias.len()),
        }
    }

    /// Named flat views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        for (i, layer) in self.mgc.iter().enumerate() {
            out.push((format!("mgc{i}.theta"), flat(layer.theta.as_slice())));
        }
        for (name, lstm) in [("trend", Some(&self.trend_lstm)), ("period", self.period_lstm.as_ref())] {
            if let Some(p) = lstm {
                out.push((format!("{name}.w_input"), flat(p.w_input.as_slice())));
                out.push((format!("{name}.w_hidden"), flat(p.w_hidden.as_slice())));
                out.push((format!("{name}.bias"), flat(p.bias.as_slice())));
            }
        }
        out.push(("fc.weights".into(), flat(self.fc_weights.as_slice())));
        out.push(("fc.bias".into(), flat(self.fc_bias.as_slice())));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (i, layer) in self.mgc.iter_mut().enumerate() {
            out.push((format!("mgc{i}.theta"), flat_mut(layer.theta.as_slice_mut())));
        }
        for (name, lstm) in [("trend", Some(&mut self.trend_lstm)), ("period", self.period_lstm.as_mut())] {
            if let Some(p) = lstm {
                out.push((format!("{name}.w_input"), flat_mut(p.w_input.as_slice_mut())));
                out.push((format!("{name}.w_hidden"), flat_mut(p.w_hidden.as_slice_mut())));
                out.push((format!("{name}.bias"), flat_mut(p.bias.as_slice_mut())));
            }
        }
        out.push(("fc.weights".into(), flat_mut(self.fc_weights.as_slice_mut())));
        out.push(("fc.bias".into(), flat_mut(self.fc_bias.as_slice_mut())));
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

fn flat(s: Option<&[f64]>) -> &[f64] {
    s.expect("parameter tensors are in standard layout")
}

fn flat_mut(s: Option<&mut [f64]>) -> &mut [f64] {
    s.expect("parameter tensors are in standard layout")
}

/// Squared Euclidean distance.
pub fn loss_mse(predicted: ArrayView1<'_, f64>, actual: ArrayView1<'_, f64>) -> Result<f64, NeuralError> {
    if predicted.len() != actual.len() {
        return Err(NeuralError::Shape(format!(
            "prediction has {} entries, target has {}",
            predicted.len(),
            actual.len()
        )));
    }
    Ok(predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum())
}

/// Normalized frames of a batch: `trend` is `[m, B, N]`, `period` is
/// `[n, B, N]`, `target` is `[B, N]`.
pub(crate) struct Batch {
    trend: Array3<f64>,
    period: Array3<f64>,
    target: Array2<f64>,
}

impl Batch {
    pub(crate) fn len(&self) -> usize {
        self.target.nrows()
    }
}

struct BranchCache {
    cheb: Vec<ChebCache>,
    lstm: LstmCache,
    steps: usize,
}

pub(crate) struct ForwardCache {
    trend: BranchCache,
    period: Option<BranchCache>,
    concat: Array2<f64>,
    output: Array2<f64>,
}

/// Graph-convolutional recurrent network over a fixed road graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifGcrnnModel {
    pub config: ModelConfig,
    pub params: ModelParams,
    /// Rescaled Laplacian used by every graph-convolution layer.
    pub laplacian: GraphLaplacian,
    pub scaler: MinMaxScaler,
}

impl MotifGcrnnModel {
    /// Randomly initialised model; the same seed gives the same weights.
    pub fn new(
        config: ModelConfig,
        laplacian: GraphLaplacian,
        scaler: MinMaxScaler,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(config, laplacian, scaler, Some(&mut rng))
    }

    /// Model with every parameter zero.
    pub fn zeroed(config: ModelConfig, laplacian: GraphLaplacian, scaler: MinMaxScaler) -> Result<Self, NeuralError> {
        Self::build(config, laplacian, scaler, None::<&mut ChaCha8Rng>)
    }

    fn build<R: Rng>(
        config: ModelConfig,
        laplacian: GraphLaplacian,
        scaler: MinMaxScaler,
        mut rng: Option<&mut R>,
    ) -> Result<Self, NeuralError> {
        config.validate()?;
        let n = config.node_count;
        if laplacian.dim() != n {
            return Err(NeuralError::Shape(format!(
                "Laplacian has dimension {}, model has {n} nodes",
                laplacian.dim()
            )));
        }
        if !laplacian.rescaled {
            return Err(NeuralError::NotRescaled);
        }
        if scaler.len() != n {
            return Err(NeuralError::Shape(format!("scaler covers {} segments, model has {n}", scaler.len())));
        }

        let mut mgc = Vec::with_capacity(config.mgc_filters.len());
        let mut width = 1;
        for &f in &config.mgc_filters {
            mgc.push(match rng.as_deref_mut() {
                Some(r) => ChebFilterParams::random(config.cheb_order, width, f, config.activation, r),
                None => ChebFilterParams::zeros(config.cheb_order, width, f, config.activation),
            });
            width = f;
        }
        let d = n * width;
        let h = config.hidden_size;
        let lstm = |rng: Option<&mut R>| match rng {
            Some(r) => LstmParams::random(d, h, r),
            None => LstmParams::zeros(d, h),
        };
        let trend_lstm = lstm(rng.as_deref_mut());
        let period_lstm = (config.period_window > 0).then(|| lstm(rng.as_deref_mut()));
        let c = config.concat_width();
        let fc_weights = match rng {
            Some(r) => {
                let limit = (6.0 / (c + n) as f64).sqrt();
                Array2::from_shape_simple_fn((n, c), || r.random_range(-limit..limit))
            }
            None => Array2::zeros((n, c)),
        };
        Ok(Self {
            config,
            params: ModelParams {
                mgc,
                trend_lstm,
                period_lstm,
                fc_weights,
                fc_bias: Array1::zeros(n),
            },
            laplacian,
            scaler,
        })
    }

    pub fn node_count(&self) -> usize {
        self.config.node_count
    }

    /// One prediction in speed units from `m` trend frames and `n` period
    /// frames, each of length `N`, oldest first.
    pub fn forward(&self, trend_inputs: &[Array1<f64>], period_inputs: &[Array1<f64>]) -> Result<Array1<f64>, NeuralError> {
        let n = self.node_count();
        let stack = |frames: &[Array1<f64>]| -> Result<Array2<f64>, NeuralError> {
            let mut out = Array2::zeros((frames.len(), n));
            for (mut row, f) in out.rows_mut().into_iter().zip(frames) {
                if f.len() != n {
                    return Err(NeuralError::Shape(format!("frame has {} entries, expected {n}", f.len())));
                }
                row.assign(f);
            }
            Ok(out)
        };
        let window = Window {
            trend: stack(trend_inputs)?,
            period: stack(period_inputs)?,
            target: Array1::zeros(n),
        };
        Ok(self.predict(std::slice::from_ref(&window))?.index_axis_move(Axis(0), 0))
    }

    /// Predictions `[B, N]` in speed units.
    pub fn predict(&self, windows: &[Window]) -> Result<Array2<f64>, NeuralError> {
        let scaled = self.forward_normalized(windows)?;
        let mut out = Array2::zeros(scaled.raw_dim());
        for (mut row, s) in out.rows_mut().into_iter().zip(scaled.rows()) {
            row.assign(&self.scaler.denormalize(s));
        }
        Ok(out)
    }

    /// Regression-head outputs `[B, N]` before denormalisation, in `(-1, 1)`.
    pub fn forward_normalized(&self, windows: &[Window]) -> Result<Array2<f64>, NeuralError> {
        let batch = self.batch_from(windows, true)?;
        let (out, _) = self.forward_batch(&batch);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("model output"));
        }
        Ok(out)
    }

    /// Batch loss `sum_t |Y_t - Y~_t|^2` in normalized units.
    pub fn batch_loss(&self, windows: &[Window]) -> Result<f64, NeuralError> {
        let batch = self.batch_from(windows, true)?;
        let (out, _) = self.forward_batch(&batch);
        let loss = (&out - &batch.target).mapv(|v| v * v).sum();
        if !loss.is_finite() {
            return Err(NeuralError::NonFinite("loss"));
        }
        Ok(loss)
    }

    /// Batch loss and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, windows: &[Window]) -> Result<(f64, ModelParams), NeuralError> {
        let batch = self.batch_from(windows, true)?;
        let (losses, grads) = self.gradients(&batch);
        let loss = losses.sum();
        if !loss.is_finite() || !grads.is_finite() {
            return Err(NeuralError::NonFinite("gradients"));
        }
        Ok((loss, grads))
    }

    pub(crate) fn check_window(&self, w: &Window) -> Result<(), NeuralError> {
        let n = self.node_count();
        let (m, p) = (self.config.trend_window, self.config.period_window);
        if w.trend.dim() != (m, n) || w.period.dim() != (p, n) || w.target.len() != n {
            return Err(NeuralError::Shape(format!(
                "window shapes trend {:?}, period {:?}, target {} do not match m = {m}, n = {p}, N = {n}",
                w.trend.dim(),
                w.period.dim(),
                w.target.len()
            )));
        }
        let finite = w.trend.iter().chain(w.period.iter()).chain(w.target.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(NeuralError::NonFinite("window"));
        }
        Ok(())
    }

    /// Normalizes each window when `scale` is set; otherwise the windows are
    /// taken to be normalized already.
    pub(crate) fn batch_from(&self, windows: &[Window], scale: bool) -> Result<Batch, NeuralError> {
        if windows.is_empty() {
            return Err(NeuralError::Shape("empty batch".into()));
        }
        for w in windows {
            self.check_window(w)?;
        }
        let refs: Vec<&Window> = windows.iter().collect();
        Ok(self.gather(&refs, scale))
    }

    pub(crate) fn gather(&self, windows: &[&Window], scale: bool) -> Batch {
        let n = self.node_count();
        let b = windows.len();
        let (m, p) = (self.config.trend_window, self.config.period_window);
        let mut trend = Array3::zeros((m, b, n));
        let mut period = Array3::zeros((p, b, n));
        let mut target = Array2::zeros((b, n));
        for (j, w) in windows.iter().enumerate() {
            if scale {
                trend.slice_mut(s![.., j, ..]).assign(&self.scaler.normalize_rows(&w.trend));
                period.slice_mut(s![.., j, ..]).assign(&self.scaler.normalize_rows(&w.period));
                target.row_mut(j).assign(&self.scaler.normalize(w.target.view()));
            } else {
                trend.slice_mut(s![.., j, ..]).assign(&w.trend);
                period.slice_mut(s![.., j, ..]).assign(&w.period);
                target.row_mut(j).assign(&w.target);
            }
        }
        Batch { trend, period, target }
    }

    /// Normalized copy of a window.
    pub(crate) fn normalize_window(&self, w: &Window) -> Window {
        Window {
            trend: self.scaler.normalize_rows(&w.trend),
            period: self.scaler.normalize_rows(&w.period),
            target: self.scaler.normalize(w.target.view()),
        }
    }

    fn branch_forward(&self, frames: &Array3<f64>, lstm: &LstmParams) -> (Array2<f64>, BranchCache) {
        let (steps, batch, n) = frames.dim();
        let rows = steps * batch;
        let mut x = frames
            .view()
            .permuted_axes([2, 0, 1])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((n, rows, 1))
            .expect("contiguous");
        let mut cheb = Vec::with_capacity(self.params.mgc.len());
        for layer in &self.params.mgc {
            let cache = cheb_forward(x, layer, &self.laplacian.matrix);
            x = cache.output.clone();
            cheb.push(cache);
        }
        let f = x.dim().2;
        let features = x
            .permuted_axes([1, 0, 2])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((rows, n * f))
            .expect("contiguous");
        let (h, lstm_cache) = lstm_forward_batch(features, steps, lstm);
        (
            h,
            BranchCache {
                cheb,
                lstm: lstm_cache,
                steps,
            },
        )
    }

    fn branch_backward(
        &self,
        cache: &BranchCache,
        lstm: &LstmParams,
        d_h: &Array2<f64>,
        mgc_grads: &mut [ChebFilterParams],
    ) -> LstmParams {
        let (lstm_grads, d_features) = lstm_backward(&cache.lstm, lstm, d_h);
        if self.params.mgc.is_empty() {
            return lstm_grads;
        }
        let n = self.node_count();
        let rows = d_features.nrows();
        let f = self.config.feature_width();
        debug_assert_eq!(rows % cache.steps, 0);
        let mut d = d_features
            .into_shape_with_order((rows, n, f))
            .expect("contiguous")
            .permuted_axes([1, 0, 2])
            .as_standard_layout()
            .into_owned();
        for (l, layer) in self.params.mgc.iter().enumerate().rev() {
            let (d_theta, d_input) = cheb_backward(&cache.cheb[l], layer, &self.laplacian.matrix, &d, l > 0);
            mgc_grads[l].theta += &d_theta;
            if let Some(di) = d_input {
                d = di;
            }
        }
        lstm_grads
    }

    pub(crate) fn forward_batch(&self, batch: &Batch) -> (Array2<f64>, ForwardCache) {
        let (h_trend, trend) = self.branch_forward(&batch.trend, &self.params.trend_lstm);
        let (concat, period) = match &self.params.period_lstm {
            Some(p) => {
                let (h_period, cache) = self.branch_forward(&batch.period, p);
                (concatenate![Axis(1), h_trend, h_period], Some(cache))
            }
            None => (h_trend, None),
        };
        let mut output = concat.dot(&self.params.fc_weights.t());
        output += &self.params.fc_bias;
        output.mapv_inplace(f64::tanh);
        (
            output.clone(),
            ForwardCache {
                trend,
                period,
                concat,
                output,
            },
        )
    }

    /// Per-window losses and the gradient of their sum.
    pub(crate) fn gradients(&self, batch: &Batch) -> (Array1<f64>, ModelParams) {
        let (out, cache) = self.forward_batch(batch);
        let diff = &out - &batch.target;
        let loss = diff.mapv(|v| v * v).sum_axis(Axis(1));

        let mut d_pre = diff * 2.0;
        ndarray::Zip::from(&mut d_pre)
            .and(&cache.output)
            .for_each(|d, &y| *d *= 1.0 - y * y);
        let mut grads = self.params.zeros_like();
        grads.fc_weights = d_pre.t().dot(&cache.concat).as_standard_layout().into_owned();
        grads.fc_bias = d_pre.sum_axis(Axis(0));
        let d_concat = d_pre.dot(&self.params.fc_weights);

        let h = self.config.hidden_size;
        let d_trend = d_concat.slice(s![.., ..h]).to_owned();
        grads.trend_lstm = self.branch_backward(&cache.trend, &self.params.trend_lstm, &d_trend, &mut grads.mgc);
        if let (Some(p), Some(pc)) = (&self.params.period_lstm, &cache.period) {
            let d_period = d_concat.slice(s![.., h..]).to_owned();
            grads.period_lstm = Some(self.branch_backward(pc, p, &d_period, &mut grads.mgc));
        }
        (loss, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadgraph::LaplacianKind;
    use ndarray::array;

    fn path_laplacian(n: usize) -> GraphLaplacian {
        let mut m = Array2::zeros((n, n));
        for i in 0..n - 1 {
            m[[i, i + 1]] = -0.5;
            m[[i + 1, i]] = -0.5;
        }
        GraphLaplacian {
            matrix: m,
            lambda_max: 2.0,
            kind: LaplacianKind::MotifLaplacian,
            rescaled: true,
        }
    }

    #[test]
    fn scaler_maps_training_range_onto_unit_interval() {
        let data = array![[10.0, 20.0, 30.0], [5.0, 5.0, 5.0]];
        let s = MinMaxScaler::fit(data.view()).unwrap();
        assert_eq!(s.normalize(array![10.0, 5.0].view()), array![-1.0, 0.0]);
        assert_eq!(s.normalize(array![30.0, 6.0].view()), array![1.0, 1.0]);
        let back = s.denormalize(s.normalize(array![17.5, 4.0].view()).view());
        assert!((back[0] - 17.5).abs() < 1e-12 && (back[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_model_predicts_scaler_centers() {
        let mut cfg = ModelConfig::new(3);
        cfg.mgc_filters = vec![4];
        cfg.hidden_size = 5;
        cfg.period_window = 2;
        let scaler = MinMaxScaler::fit(array![[10.0, 30.0], [40.0, 60.0], [0.0, 2.0]].view()).unwrap();
        let model = MotifGcrnnModel::zeroed(cfg, path_laplacian(3), scaler).unwrap();
        let frames = vec![array![1.0, 2.0, 3.0]; 2];
        let y = model.forward(&frames, &frames).unwrap();
        assert_eq!(y, array![20.0, 50.0, 1.0]);
    }

    #[test]
    fn period_branch_can_be_disabled() {
        let mut cfg = ModelConfig::new(4);
        cfg.mgc_filters = vec![3];
        cfg.hidden_size = 6;
        cfg.period_window = 0;
        let model = MotifGcrnnModel::new(cfg, path_laplacian(4), MinMaxScaler::identity(4), 3).unwrap();
        assert!(model.params.period_lstm.is_none());
        assert_eq!(model.params.fc_weights.dim(), (4, 6));
        let y = model.forward(&[array![0.1, 0.2, 0.3, 0.4], array![0.0, 0.0, 0.0, 0.0]], &[]).unwrap();
        assert_eq!(y.len(), 4);
    }

    #[test]
    fn rejects_window_length_mismatch() {
        let cfg = ModelConfig {
            mgc_filters: vec![2],
            hidden_size: 3,
            ..ModelConfig::new(2)
        };
        let lap = GraphLaplacian {
            matrix: array![[0.0, -1.0], [-1.0, 0.0]],
            lambda_max: 2.0,
            kind: LaplacianKind::MotifLaplacian,
            rescaled: true,
        };
        let model = MotifGcrnnModel::new(cfg, lap, MinMaxScaler::identity(2), 0).unwrap();
        let f = array![0.0, 0.0];
        assert!(matches!(model.forward(&[f.clone()], &[]), Err(NeuralError::Shape(_))));
    }

    #[test]
    fn same_seed_same_weights() {
        let cfg = ModelConfig {
            mgc_filters: vec![2],
            hidden_size: 3,
            ..ModelConfig::new(3)
        };
        let a = MotifGcrnnModel::new(cfg.clone(), path_laplacian(3), MinMaxScaler::identity(3), 9).unwrap();
        let b = MotifGcrnnModel::new(cfg.clone(), path_laplacian(3), MinMaxScaler::identity(3), 9).unwrap();
        let c = MotifGcrnnModel::new(cfg, path_laplacian(3), MinMaxScaler::identity(3), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(array![1.0, 2.0].view(), array![1.0, 2.0].view()).unwrap(), 0.0);
        assert_eq!(loss_mse(array![1.0, 2.0].view(), array![1.0, 3.0].view()).unwrap(), 1.0);
        assert!(loss_mse(array![1.0].view(), array![1.0, 3.0].view()).is_err());
    }
}
