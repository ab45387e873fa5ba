use super::fit::{check_series, is_constant, long_ar_order, long_ar_residuals, mean, regress};
use super::{fit_arma, ArmaError, ArmaModel};

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelection {
    pub p: usize,
    pub q: usize,
    pub aic: f64,
    /// Fit of the selected orders.
    pub model: ArmaModel,
}

/// AIC grid search over `0 <= p <= max_p`, `0 <= q <= max_q`, `p + q >= 1`.
///
/// All candidates are scored on the same sample, which starts once the
/// longest lag and innovation history are available. Ties go to the smaller
/// `p + q`, then the smaller `p`. When no candidate can be fitted the
/// selection falls back to `(1, 0)`.
pub fn select_orders(series: &[f64], max_p: usize, max_q: usize) -> Result<OrderSelection, ArmaError> {
    if max_p == 0 || max_q == 0 {
        return Err(ArmaError::InvalidOrders { p: max_p, q: max_q });
    }
    check_series(series, 1, 0)?;
    let mu = mean(series);
    if is_constant(series, mu) {
        return Ok(OrderSelection {
            p: 1,
            q: 0,
            aic: f64::NEG_INFINITY,
            model: ArmaModel::mean_only(mu),
        });
    }
    let y: Vec<f64> = series.iter().map(|v| v - mu).collect();
    let m = long_ar_order(y.len());
    let innovations = long_ar_residuals(&y, m)?;
    let start = max_p.max(m + max_q);

    let mut candidates: Vec<(usize, usize)> = (0..=max_p)
        .flat_map(|p| (0..=max_q).map(move |q| (p, q)))
        .filter(|&(p, q)| p + q >= 1)
        .collect();
    candidates.sort_by_key(|&(p, q)| (p + q, p));

    let mut best: Option<(usize, usize, f64)> = None;
    for (p, q) in candidates {
        if check_series(series, p, q).is_err() {
            continue;
        }
        let Ok(reg) = regress(&y, &innovations, p, q, start) else {
            continue;
        };
        let sigma2 = reg.rss / reg.rows as f64;
        let aic = reg.rows as f64 * sigma2.ln() + 2.0 * (p + q + 1) as f64;
        if aic.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, _, b)| aic < b) {
            best = Some((p, q, aic));
        }
    }
    let (p, q, aic) = best.unwrap_or((1, 0, f64::NAN));
    if best.is_none() {
        log::warn!("no ARMA order could be fitted; falling back to (1, 0)");
    }
    let model = fit_arma(series, p, q)?;
    Ok(OrderSelection { p, q, aic, model })
}
