//! Pairwise linear Granger F-test.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;

/// Residual sum of squares of the least-squares fit of `y` on `x`.
fn rss(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * x.nrows().max(x.ncols()) as f64;
    if svd.rank(tol) < x.ncols() {
        return Err(Error::Numerical("singular Granger design matrix".into()));
    }
    let beta = svd.solve(y, tol).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((y - x * beta).norm_squared())
}

/// F-test p-value of "source does not Granger-cause target" with `order`
/// lags of each, comparing own-lag and own-plus-source-lag regressions
/// (both with an intercept).
pub fn granger_f_test(panel: &TimeSeriesPanel, source: usize, target: usize, order: usize) -> Result<f64> {
    let k = panel.num_series();
    if source >= k || target >= k {
        return Err(Error::config(format!("series index out of range for K = {k}")));
    }
    if order == 0 {
        return Err(Error::config("Granger order must be at least 1"));
    }
    let t = panel.len();
    if t <= 2 * (2 * order + 1) {
        return Err(Error::InsufficientData { needed: 2 * (2 * order + 1) + 1, available: t });
    }
    let n = t - order;
    let (x, y) = (panel.column(source), panel.column(target));
    let resp = DMatrix::from_fn(n, 1, |r, _| y[r + order]);
    let restricted = DMatrix::from_fn(n, 1 + order, |r, c| if c == 0 { 1.0 } else { y[r + order - c] });
    let full = DMatrix::from_fn(n, 1 + 2 * order, |r, c| match c {
        0 => 1.0,
        c if c <= order => y[r + order - c],
        c => x[r + order - (c - order)],
    });
    let rss_r = rss(&restricted, &resp)?;
    let rss_u = rss(&full, &resp)?;
    let df2 = (n - (2 * order + 1)) as f64;
    if rss_u <= 0.0 {
        return Err(Error::Numerical("perfect fit in the unrestricted Granger regression".into()));
    }
    let f = ((rss_r - rss_u).max(0.0) / order as f64) / (rss_u / df2);
    let dist = FisherSnedecor::new(order as f64, df2).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(dist.sf(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn strong_channel_rejects() {
        let x = noise(300, 1);
        let e = noise(300, 2);
        let y: Vec<f64> = (0..300).map(|t| e[t] + if t > 0 { 0.8 * x[t - 1] } else { 0.0 }).collect();
        let p = TimeSeriesPanel::from_columns(vec!["x".into(), "y".into()], &[x, y]).unwrap();
        assert!(granger_f_test(&p, 0, 1, 1).unwrap() < 1e-6);
        assert!(granger_f_test(&p, 1, 0, 1).unwrap() > 1e-3);
    }

    #[test]
    fn too_short_and_singular() {
        let p = TimeSeriesPanel::from_columns(vec!["a".into(), "b".into()], &[noise(6, 1), noise(6, 2)]).unwrap();
        assert!(matches!(granger_f_test(&p, 0, 1, 1), Err(Error::InsufficientData { .. })));
        let c = vec![1.0; 50];
        let p = TimeSeriesPanel::from_columns(vec!["a".into(), "b".into()], &[c, noise(50, 3)]).unwrap();
        assert!(matches!(granger_f_test(&p, 0, 1, 1), Err(Error::Numerical(_))));
    }
}
