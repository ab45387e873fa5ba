//! Independent reference implementations shared by the integration tests and
//! the acceptance runner. Each one is written the slow, obvious way.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use ndarray::{Array1, Array2};
use rand::Rng;
use speedcast::neural::{Activation, ChebFilterParams, LstmParams, MotifGcrnnModel, Window};
use speedcast::roadgraph::{DirectedRoadGraph, MotifClass};

pub fn random_digraph<R: Rng>(n: usize, density: f64, rng: &mut R) -> DirectedRoadGraph {
    let mut g = DirectedRoadGraph::new(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random::<f64>() < density {
                g.add_edge(a, b).unwrap();
            }
        }
    }
    g
}

/// Tests every ordered triple against every template embedding and records
/// each matching node set once per class.
pub fn brute_force_motif_counts(g: &DirectedRoadGraph) -> Vec<Array2<u32>> {
    let n = g.node_count();
    let mut instances: BTreeSet<(usize, [usize; 3])> = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                let map = [a, b, c];
                for (ci, class) in MotifClass::ALL.iter().enumerate() {
                    let mapped: BTreeSet<(usize, usize)> =
                        class.edge_pattern().iter().map(|&(s, t)| (map[s], map[t])).collect();
                    let mut actual = BTreeSet::new();
                    for &x in &map {
                        for &y in &map {
                            if x != y && g.has_edge(x, y) {
                                actual.insert((x, y));
                            }
                        }
                    }
                    if mapped == actual {
                        let mut key = map;
                        key.sort_unstable();
                        instances.insert((ci, key));
                    }
                }
            }
        }
    }
    let mut counts = vec![Array2::<u32>::zeros((n, n)); MotifClass::ALL.len()];
    for (ci, nodes) in instances {
        for &x in &nodes {
            for &y in &nodes {
                if x != y && g.has_edge(x, y) {
                    counts[ci][[x, y]] += 1;
                }
            }
        }
    }
    counts
}

/// Breadth-first hop distances on the undirected support of `weights`.
pub fn hop_distances(weights: &Array2<f64>, source: usize) -> Vec<Option<usize>> {
    let n = weights.nrows();
    let mut dist = vec![None; n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if (weights[[u, v]] != 0.0 || weights[[v, u]] != 0.0) && dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for l in 0..k {
                acc += a[i][l] * b[l][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Builds every `T_k(L)` as a dense matrix and sums `T_k x theta_k`.
pub fn dense_cheb_oracle(lap: &Array2<f64>, x: &Array2<f64>, params: &ChebFilterParams) -> Array2<f64> {
    let n = lap.nrows();
    let l: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| lap[[i, j]]).collect()).collect();
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut polys = vec![eye];
    let order = params.theta.dim().0 - 1;
    if order >= 1 {
        polys.push(l.clone());
    }
    for k in 2..=order {
        let lt = matmul(&l, &polys[k - 1]);
        let next = (0..n)
            .map(|i| (0..n).map(|j| 2.0 * lt[i][j] - polys[k - 2][i][j]).collect())
            .collect();
        polys.push(next);
    }
    let (_, f_in, f_out) = params.theta.dim();
    let xs: Vec<Vec<f64>> = (0..n).map(|i| (0..f_in).map(|f| x[[i, f]]).collect()).collect();
    let mut out = Array2::zeros((n, f_out));
    for (k, t) in polys.iter().enumerate() {
        let tx = matmul(t, &xs);
        for i in 0..n {
            for o in 0..f_out {
                for f in 0..f_in {
                    out[[i, o]] += tx[i][f] * params.theta[[k, f, o]];
                }
            }
        }
    }
    if params.activation == Activation::Relu {
        out.mapv_inplace(|v: f64| v.max(0.0));
    }
    out
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Scalar-loop LSTM recurrence from zero state.
pub fn lstm_oracle(sequence: &[Vec<f64>], p: &LstmParams) -> Vec<f64> {
    let hidden = p.w_hidden.nrows();
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    for x in sequence {
        let mut pre = vec![0.0; 4 * hidden];
        for (g, slot) in pre.iter_mut().enumerate() {
            let mut acc = p.bias[g];
            for (d, xv) in x.iter().enumerate() {
                acc += xv * p.w_input[[d, g]];
            }
            for (j, hv) in h.iter().enumerate() {
                acc += hv * p.w_hidden[[j, g]];
            }
            *slot = acc;
        }
        for j in 0..hidden {
            let i = sigmoid(pre[j]);
            let f = sigmoid(pre[hidden + j]);
            let g = pre[2 * hidden + j].tanh();
            let o = sigmoid(pre[3 * hidden + j]);
            c[j] = f * c[j] + i * g;
            h[j] = o * c[j].tanh();
        }
    }
    h
}

/// Straight-line evaluation of one window, composed from the oracles above.
pub fn reference_forward(model: &MotifGcrnnModel, window: &Window) -> Array1<f64> {
    let n = model.config.node_count;
    let scale = |v: f64, i: usize| (v - model.scaler.center[i]) / model.scaler.half_range[i];
    let branch = |frames: &Array2<f64>, lstm: &LstmParams| -> Vec<f64> {
        let mut seq = Vec::new();
        for frame in frames.rows() {
            let mut x = Array2::zeros((n, 1));
            for i in 0..n {
                x[[i, 0]] = scale(frame[i], i);
            }
            for layer in &model.params.mgc {
                x = dense_cheb_oracle(&model.laplacian.matrix, &x, layer);
            }
            seq.push(x.iter().copied().collect::<Vec<f64>>());
        }
        lstm_oracle(&seq, lstm)
    };
    let mut yc = branch(&window.trend, &model.params.trend_lstm);
    if let Some(p) = &model.params.period_lstm {
        yc.extend(branch(&window.period, p));
    }
    let mut out = Array1::zeros(n);
    for i in 0..n {
        let mut acc = model.params.fc_bias[i];
        for (j, v) in yc.iter().enumerate() {
            acc += model.params.fc_weights[[i, j]] * v;
        }
        out[i] = acc.tanh() * model.scaler.half_range[i] + model.scaler.center[i];
    }
    out
}

/// Worst relative error between analytic and central-difference gradients,
/// per tensor, over entries whose analytic magnitude exceeds `floor`.
pub fn gradient_check(model: &MotifGcrnnModel, windows: &[Window], step: f64, floor: f64) -> Vec<(String, f64, usize)> {
    let (_, grads) = model.loss_and_gradients(windows).unwrap();
    let names: Vec<(String, Vec<f64>)> = grads.tensors().into_iter().map(|(n, g)| (n, g.to_vec())).collect();
    let mut report = Vec::new();
    for (ti, (name, analytic)) in names.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for (idx, &g) in analytic.iter().enumerate() {
            if g.abs() <= floor {
                continue;
            }
            let mut plus = model.clone();
            plus.params.tensors_mut()[ti].1[idx] += step;
            let mut minus = model.clone();
            minus.params.tensors_mut()[ti].1[idx] -= step;
            let numeric = (plus.batch_loss(windows).unwrap() - minus.batch_loss(windows).unwrap()) / (2.0 * step);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs());
            worst = worst.max(rel);
            checked += 1;
        }
        report.push((name.clone(), worst, checked));
    }
    report
}

/// Random windows for a model of the given shape, speeds in `[lo, hi)`.
pub fn random_windows<R: Rng>(model: &MotifGcrnnModel, count: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<Window> {
    let n = model.config.node_count;
    let (m, p) = (model.config.trend_window, model.config.period_window);
    (0..count)
        .map(|_| Window {
            trend: Array2::from_shape_simple_fn((m, n), || rng.random_range(lo..hi)),
            period: Array2::from_shape_simple_fn((p, n), || rng.random_range(lo..hi)),
            target: Array1::from_shape_simple_fn(n, || rng.random_range(lo..hi)),
        })
        .collect()
}

/// Simulates `X_t = c + e_t + sum phi_i X_{t-i} + sum lambda_i e_{t-i}` with
/// Gaussian innovations, discarding `burn_in` leading samples.
pub fn simulate_arma<R: Rng>(
    c: f64,
    phi: &[f64],
    lambda: &[f64],
    sigma: f64,
    len: usize,
    burn_in: usize,
    rng: &mut R,
) -> Vec<f64> {
    let total = len + burn_in;
    let mut x = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        let noise: f64 = rng.sample(rand_distr::StandardNormal);
        e[t] = sigma * noise;
        let mut v = c + e[t];
        for (i, p) in phi.iter().enumerate() {
            if t > i {
                v += p * x[t - i - 1];
            }
        }
        for (i, l) in lambda.iter().enumerate() {
            if t > i {
                v += l * e[t - i - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(burn_in)
}
