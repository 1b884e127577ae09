//! Bivariate linear Granger causality with a forced decision.
//!
//! For a candidate cause `x` and effect `y` two autoregressions of `y` are
//! fitted by least squares on the same rows: a restricted one on `p` lags of
//! `y`, and an unrestricted one that adds `p` lags of `x`. The nested F test
//! gives a p-value for "x does not Granger-cause y". Running both directions
//! and picking the smaller p-value yields a forced decision that can be
//! compared head-to-head with SIC.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_input, Error, Result};
use crate::series::TimeSeries;
use crate::sic::Direction;
use crate::special::f_survival;

pub const DEFAULT_LAG_ORDER: usize = 5;

/// Relative size of a triangular-factor diagonal entry below which the
/// design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Ridge strength, relative to the mean diagonal of `X^T X`, used when the
/// design is rank deficient.
const RIDGE_SCALE: f64 = 1e-8;

/// Ordinary least-squares solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
    /// The design was rank deficient and a tiny ridge penalty was used.
    pub ridge: bool,
}

/// Least squares `min ||target - design * beta||^2` via Householder QR,
/// with a ridge fallback for rank-deficient designs.
pub fn ols(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<OlsFit> {
    let (rows, cols) = design.shape();
    if rows != target.len() {
        return Err(invalid_input!("design has {rows} rows but target has {}", target.len()));
    }
    if rows < cols || cols == 0 {
        return Err(Error::SingularFit(alloc::format!("{rows} observations for {cols} coefficients")));
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let max_diag = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let full_rank = max_diag > 0.0 && (0..cols).all(|i| r[(i, i)].abs() > RANK_TOL * max_diag);

    let (beta, ridge) = if full_rank {
        let qty = qr.q().transpose() * target;
        let beta = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::SingularFit("triangular solve failed".into()))?;
        (beta, false)
    } else {
        log::warn!("rank-deficient design ({rows}x{cols}); falling back to ridge regression");
        let mut gram = design.transpose() * design;
        let lambda = RIDGE_SCALE * gram.trace() / cols as f64;
        if !(lambda > 0.0) {
            return Err(Error::SingularFit("design matrix is identically zero".into()));
        }
        for i in 0..cols {
            gram[(i, i)] += lambda;
        }
        let rhs = design.transpose() * target;
        let beta = gram
            .cholesky()
            .ok_or_else(|| Error::SingularFit("ridge system is not positive definite".into()))?
            .solve(&rhs);
        (beta, true)
    };
    let residual = target - design * &beta;
    Ok(OlsFit { coefficients: beta.iter().copied().collect(), rss: residual.norm_squared(), ridge })
}

/// Restricted and unrestricted fits of `effect` for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedFit {
    /// `[intercept, effect lags 1..=p]`
    pub restricted: OlsFit,
    /// `[intercept, effect lags 1..=p, cause lags 1..=p]`
    pub unrestricted: OlsFit,
    /// Numerator degrees of freedom, `p`.
    pub df_num: usize,
    /// Denominator degrees of freedom, `len - 3p - 1`.
    pub df_den: usize,
}

impl NestedFit {
    pub fn rss_restricted(&self) -> f64 {
        self.restricted.rss
    }

    pub fn rss_unrestricted(&self) -> f64 {
        self.unrestricted.rss
    }

    /// `((RSS_r - RSS_u) / p) / (RSS_u / df_den)`, clamped at zero.
    pub fn f_statistic(&self) -> f64 {
        let num = (self.restricted.rss - self.unrestricted.rss).max(0.0) / self.df_num as f64;
        let den = self.unrestricted.rss / self.df_den as f64;
        if num == 0.0 {
            0.0
        } else if den <= 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }

    pub fn p_value(&self) -> f64 {
        f_survival(self.f_statistic(), self.df_num as f64, self.df_den as f64)
    }
}

/// Fits the restricted (own lags) and unrestricted (own and `cause` lags)
/// autoregressions of `effect` with lag order `p`.
pub fn fit_var_restricted_unrestricted(effect: &TimeSeries, cause: &TimeSeries, p: usize) -> Result<NestedFit> {
    let n = effect.len();
    if cause.len() != n {
        return Err(invalid_input!("series lengths differ ({n} vs {})", cause.len()));
    }
    if p == 0 {
        return Err(invalid_input!("lag order must be at least 1"));
    }
    if n <= 3 * p + 1 {
        return Err(invalid_input!("series of length {n} too short for lag order {p} (need more than {})", 3 * p + 1));
    }
    for (name, s) in [("effect", effect), ("cause", cause)] {
        if s.variance() == 0.0 {
            return Err(Error::SingularFit(alloc::format!("{name} series is constant")));
        }
    }
    let (e, c) = (effect.samples(), cause.samples());
    let rows = n - p;
    let target = DVector::from_fn(rows, |r, _| e[r + p]);
    let lagged = |cols: usize| {
        DMatrix::from_fn(rows, cols, |r, j| {
            let t = r + p;
            match j {
                0 => 1.0,
                j if j <= p => e[t - j],
                j => c[t - (j - p)],
            }
        })
    };
    let restricted = ols(&lagged(p + 1), &target)?;
    let unrestricted = ols(&lagged(2 * p + 1), &target)?;
    Ok(NestedFit { restricted, unrestricted, df_num: p, df_den: n - 3 * p - 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrangerReport {
    /// p-value of "x does not Granger-cause y".
    pub p_xy: f64,
    /// p-value of "y does not Granger-cause x".
    pub p_yx: f64,
    pub f_xy: f64,
    pub f_yx: f64,
    pub lag_order: usize,
    pub decision: Direction,
}

/// Granger tests in both directions and the forced decision: the direction
/// with the smaller p-value wins, exact ties are undecided.
pub fn granger_test(x: &TimeSeries, y: &TimeSeries, p: usize) -> Result<GrangerReport> {
    let xy = fit_var_restricted_unrestricted(y, x, p)?;
    let yx = fit_var_restricted_unrestricted(x, y, p)?;
    let (p_xy, p_yx) = (xy.p_value(), yx.p_value());
    let decision = if p_xy < p_yx {
        Direction::XtoY
    } else if p_yx < p_xy {
        Direction::YtoX
    } else {
        Direction::Undecided
    };
    Ok(GrangerReport { p_xy, p_yx, f_xy: xy.f_statistic(), f_yx: yx.f_statistic(), lag_order: p, decision })
}
