//! Central finite differences with one Richardson level.

use num_complex::Complex64 as C;

use crate::error::Result;

/// Derivative at `s = 0` of a vector-valued function of one real parameter.
///
/// Uses `D(h) = (f(h) - f(-h)) / 2h` and returns `(4 D(h) - D(2h)) / 3`.
pub fn derivative<F>(mut f: F, h: f64) -> Result<Vec<C>>
where
    F: FnMut(f64) -> Result<Vec<C>>,
{
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok((0..p1.len())
        .map(|i| {
            let d1 = (p1[i] - m1[i]) / (2.0 * h);
            let d2 = (p2[i] - m2[i]) / (4.0 * h);
            (d1 * 4.0 - d2) / 3.0
        })
        .collect())
}

/// Second derivative at `s = 0`, Richardson-extrapolated:
/// `S(h) = (f(h) - 2 f(0) + f(-h)) / h²`, result `(4 S(h) - S(2h)) / 3`.
pub fn second_derivative<F>(mut f: F, h: f64) -> Result<Vec<C>>
where
    F: FnMut(f64) -> Result<Vec<C>>,
{
    let z = f(0.0)?;
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok((0..z.len())
        .map(|i| {
            let s1 = (p1[i] - z[i] * 2.0 + m1[i]) / (h * h);
            let s2 = (p2[i] - z[i] * 2.0 + m2[i]) / (4.0 * h * h);
            (s1 * 4.0 - s2) / 3.0
        })
        .collect())
}
