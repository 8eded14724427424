//! Ordinary least squares helpers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slope of the OLS regression of `ys` on `xs` (with intercept).
pub fn ols_slope<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("regression inputs differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::estimation("regression needs at least 2 points"));
    }
    let n = T::count(xs.len());
    let mean_x = xs.iter().copied().sum::<T>() / n;
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let (sxy, sxx) = xs
        .iter()
        .zip(ys)
        .fold((T::zero(), T::zero()), |(sxy, sxx), (&x, &y)| {
            let dx = x - mean_x;
            (sxy + dx * (y - mean_y), sxx + dx * dx)
        });
    if !(sxx > T::zero()) {
        return Err(Error::estimation("regressor has no spread"));
    }
    Ok(sxy / sxx)
}
