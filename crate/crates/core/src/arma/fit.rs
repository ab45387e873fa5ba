use nalgebra::{DMatrix, DVector};

use super::roots::{reflect_ar, reflect_ma};
use super::{ArmaError, ArmaModel, FitFlags};

/// Order of the stage-one autoregression: `min(20, len / 10)`.
pub fn long_ar_order(len: usize) -> usize {
    (len / 10).min(20)
}

pub(crate) fn check_series(series: &[f64], p: usize, q: usize) -> Result<(), ArmaError> {
    if p + q == 0 {
        return Err(ArmaError::InvalidOrders { p, q });
    }
    let required = 10 * (p + q + 1);
    if series.len() < required {
        return Err(ArmaError::TooShort {
            len: series.len(),
            required,
        });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(ArmaError::NonFinite(i));
    }
    Ok(())
}

pub(crate) fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

pub(crate) fn is_constant(series: &[f64], mean: f64) -> bool {
    let spread = series.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    spread <= 1e-12 * mean.abs().max(1.0)
}

/// Ordinary least squares through the normal equations, with an SVD
/// fallback when they are not positive definite.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, ArmaError> {
    let xtx = x.tr_mul(x);
    let xty = x.tr_mul(y);
    if let Some(chol) = xtx.cholesky() {
        let beta = chol.solve(&xty);
        if beta.iter().all(|v| v.is_finite()) {
            return Ok(beta);
        }
    }
    let beta = x.clone().svd(true, true).solve(y, 1e-12).map_err(|_| ArmaError::Singular)?;
    if beta.iter().all(|v| v.is_finite()) {
        Ok(beta)
    } else {
        Err(ArmaError::Singular)
    }
}

/// Residuals of a least-squares AR(`order`) with intercept; entries before
/// `order` are zero.
pub(crate) fn long_ar_residuals(y: &[f64], order: usize) -> Result<Vec<f64>, ArmaError> {
    let rows = y.len() - order;
    let x = DMatrix::from_fn(rows, order + 1, |r, c| if c == 0 { 1.0 } else { y[order + r - c] });
    let target = DVector::from_fn(rows, |r, _| y[order + r]);
    let beta = least_squares(&x, &target)?;
    let fitted = &x * &beta;
    let mut e = vec![0.0; y.len()];
    for r in 0..rows {
        e[order + r] = target[r] - fitted[r];
    }
    Ok(e)
}

/// Stage-two regression result on the centred series.
pub(crate) struct Regression {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub rss: f64,
    pub rows: usize,
}

/// Regresses `y_t` on `1, y_{t-1..p}, e_{t-1..q}` for `t >= start`.
pub(crate) fn regress(y: &[f64], innovations: &[f64], p: usize, q: usize, start: usize) -> Result<Regression, ArmaError> {
    let rows = y.len().saturating_sub(start);
    if rows <= 1 + p + q {
        return Err(ArmaError::TooShort {
            len: y.len(),
            required: start + p + q + 2,
        });
    }
    let x = DMatrix::from_fn(rows, 1 + p + q, |r, c| {
        let t = start + r;
        match c {
            0 => 1.0,
            c if c <= p => y[t - c],
            c => innovations[t - (c - p)],
        }
    });
    let target = DVector::from_fn(rows, |r, _| y[start + r]);
    let beta = least_squares(&x, &target)?;
    let resid = &target - &x * &beta;
    Ok(Regression {
        intercept: beta[0],
        ar: beta.iter().skip(1).take(p).copied().collect(),
        ma: beta.iter().skip(1 + p).copied().collect(),
        rss: resid.norm_squared(),
        rows,
    })
}

/// Maps a regression on the series centred at `mu` back to original units and
/// repairs non-stationary or non-invertible polynomials.
pub(crate) fn finish(reg: Regression, mu: f64) -> ArmaModel {
    let mut flags = FitFlags::default();
    let ar = match reflect_ar(&reg.ar) {
        Some(fixed) => {
            flags.ar_reflected = true;
            log::warn!("AR polynomial was not stationary; roots reflected");
            fixed
        }
        None => reg.ar,
    };
    let ma = match reflect_ma(&reg.ma) {
        Some(fixed) => {
            flags.ma_reflected = true;
            log::debug!("MA polynomial was not invertible; roots reflected");
            fixed
        }
        None => reg.ma,
    };
    let intercept = reg.intercept + mu * (1.0 - ar.iter().sum::<f64>());
    ArmaModel {
        intercept,
        ar,
        ma,
        noise_variance: reg.rss / reg.rows as f64,
        flags,
    }
}

/// Two-stage Hannan–Rissanen estimate. A constant series yields the
/// mean-only model with `flags.degenerate` set.
pub fn fit_arma(series: &[f64], p: usize, q: usize) -> Result<ArmaModel, ArmaError> {
    check_series(series, p, q)?;
    let mu = mean(series);
    if is_constant(series, mu) {
        log::warn!("constant series; using the mean-only model");
        return Ok(ArmaModel::mean_only(mu));
    }
    let y: Vec<f64> = series.iter().map(|v| v - mu).collect();
    let (innovations, start) = if q > 0 {
        let m = long_ar_order(y.len());
        (long_ar_residuals(&y, m)?, p.max(m + q))
    } else {
        (Vec::new(), p)
    };
    let reg = regress(&y, &innovations, p, q, start)?;
    Ok(finish(reg, mu))
}
