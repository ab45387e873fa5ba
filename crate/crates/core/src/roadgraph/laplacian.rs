use ndarray::{Array1, Array2};

use super::{GraphError, MotifAdjacency};

/// Returned by [`estimate_lambda_max`] when power iteration does not settle.
/// Normalized Laplacians have spectrum in `[0, 2]`, so this never
/// underestimates.
pub const LAMBDA_MAX_FALLBACK: f64 = 2.0;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    /// Built from the motif adjacency `W_M`.
    MotifLaplacian,
    /// Built from the plain binary adjacency.
    StandardNormalized,
}

/// Symmetric graph Laplacian with its largest-eigenvalue estimate.
///
/// After [`rescale_laplacian`] the matrix holds `2 L / lambda_max - I` and
/// `rescaled` is set; `lambda_max` keeps the value used for the rescaling.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphLaplacian {
    pub matrix: Array2<f64>,
    pub lambda_max: f64,
    pub kind: LaplacianKind,
    pub rescaled: bool,
}

impl GraphLaplacian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        is_symmetric(&self.matrix, tol)
    }
}

/// `I - D^{-1/2} W D^{-1/2}` on the motif adjacency.
///
/// With `symmetrize` the weights are replaced by `W + W^T`; otherwise `W`
/// must already be symmetric. Zero-degree nodes get identity rows.
pub fn motif_laplacian(
    adj: &MotifAdjacency,
    symmetrize: bool,
) -> Result<GraphLaplacian, GraphError> {
    let mut lap = normalized_laplacian(&adj.weights_f64(), symmetrize)?;
    lap.kind = LaplacianKind::MotifLaplacian;
    Ok(lap)
}

/// Symmetric normalized Laplacian of an arbitrary non-negative weight matrix.
pub fn normalized_laplacian(
    weights: &Array2<f64>,
    symmetrize: bool,
) -> Result<GraphLaplacian, GraphError> {
    let (rows, cols) = weights.dim();
    if rows != cols {
        return Err(GraphError::NotSquare { rows, cols });
    }
    for ((r, c), &w) in weights.indexed_iter() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(GraphError::NegativeWeight {
                row: r,
                col: c,
                value: w,
            });
        }
    }
    let w = if symmetrize {
        weights + &weights.t()
    } else {
        for r in 0..rows {
            for c in (r + 1)..rows {
                if weights[[r, c]] != weights[[c, r]] {
                    return Err(GraphError::Asymmetric { row: r, col: c });
                }
            }
        }
        weights.clone()
    };
    let inv_sqrt_deg: Array1<f64> = w
        .rows()
        .into_iter()
        .map(|row| {
            let d = row.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut matrix = Array2::<f64>::eye(rows);
    for r in 0..rows {
        for c in 0..rows {
            matrix[[r, c]] -= inv_sqrt_deg[r] * w[[r, c]] * inv_sqrt_deg[c];
        }
    }
    let lambda_max = estimate_lambda_max(&matrix, POWER_TOL, POWER_MAX_ITERS);
    Ok(GraphLaplacian {
        matrix,
        lambda_max,
        kind: LaplacianKind::StandardNormalized,
        rescaled: false,
    })
}

/// `2 L / lambda_max - I`, mapping the spectrum into `[-1, 1]`.
pub fn rescale_laplacian(lap: &GraphLaplacian) -> Result<GraphLaplacian, GraphError> {
    if !(lap.lambda_max > 0.0) {
        return Err(GraphError::NonPositiveLambda(lap.lambda_max));
    }
    let n = lap.dim();
    let matrix = &lap.matrix * (2.0 / lap.lambda_max) - Array2::<f64>::eye(n);
    Ok(GraphLaplacian {
        matrix,
        lambda_max: lap.lambda_max,
        kind: lap.kind,
        rescaled: true,
    })
}

/// Power-iteration estimate of the spectral radius of a symmetric matrix.
///
/// On convergence the Rayleigh quotient plus the residual norm is returned,
/// which bounds the dominant eigenvalue from above. A matrix that maps the
/// start vector to zero, or iteration that has not converged after
/// `max_iters` steps, yields [`LAMBDA_MAX_FALLBACK`].
pub fn estimate_lambda_max(matrix: &Array2<f64>, tol: f64, max_iters: usize) -> f64 {
    let n = matrix.nrows();
    if n == 0 || max_iters == 0 {
        return LAMBDA_MAX_FALLBACK;
    }
    // Deterministic, non-degenerate start vector.
    let golden = 0.618_033_988_749_894_9_f64;
    let mut v: Array1<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * golden).fract())
        .collect();
    let norm = v.dot(&v).sqrt();
    v /= norm;
    for _ in 0..max_iters {
        let w = matrix.dot(&v);
        let w_norm = w.dot(&w).sqrt();
        if w_norm == 0.0 {
            return LAMBDA_MAX_FALLBACK;
        }
        let rayleigh = v.dot(&w);
        let residual = (&w - &(&v * rayleigh)).mapv(|x| x * x).sum().sqrt();
        if residual <= tol * rayleigh.abs().max(1.0) {
            return rayleigh.abs() + residual;
        }
        v = w / w_norm;
    }
    LAMBDA_MAX_FALLBACK
}

fn is_symmetric(m: &Array2<f64>, tol: f64) -> bool {
    let n = m.nrows();
    m.ncols() == n && (0..n).all(|r| (r + 1..n).all(|c| (m[[r, c]] - m[[c, r]]).abs() <= tol))
}
