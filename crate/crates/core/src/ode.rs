//! Embedded Dormand-Prince 5(4) integrator over complex state vectors.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step as a fraction of the span; `None` tries the whole span.
    pub first_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            first_step: None,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Integrate `y' = rhs(s, y)` from `s0` to `s1`.
///
/// `accept` runs after every accepted step and may adjust the state in place
/// (branch continuation) or abort the integration with an error.
pub fn integrate<F, A>(
    mut rhs: F,
    y: &mut [C],
    s0: f64,
    s1: f64,
    opts: &OdeOptions,
    mut accept: A,
) -> Result<OdeStats>
where
    F: FnMut(f64, &[C], &mut [C]) -> Result<()>,
    A: FnMut(f64, &mut [C]) -> Result<()>,
{
    let n = y.len();
    let mut stats = OdeStats::default();
    let span = s1 - s0;
    if span == 0.0 || n == 0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let mut s = s0;
    let mut h = opts.first_step.map(|f| f * span.abs()).unwrap_or(span.abs());
    let h_min = 1e-14 * span.abs().max(1e-300);

    let mut k: Vec<Vec<C>> = (0..7).map(|_| vec![C::new(0.0, 0.0); n]).collect();
    let mut tmp = vec![C::new(0.0, 0.0); n];
    let mut y5 = vec![C::new(0.0, 0.0); n];

    rhs(s, y, &mut k[0])?;
    stats.rhs_evals += 1;

    while dir * (s1 - s) > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepFailure { s, h });
        }
        if h > (s1 - s).abs() {
            h = (s1 - s).abs();
        }
        let hs = dir * h;

        let stages: [(&[f64], f64); 5] = [
            (&[A21], C2),
            (&[A31, A32], C3),
            (&[A41, A42, A43], C4),
            (&[A51, A52, A53, A54], C5),
            (&[A61, A62, A63, A64, A65], 1.0),
        ];
        for (stage, (coef, c)) in stages.iter().enumerate() {
            for i in 0..n {
                let mut acc = C::new(0.0, 0.0);
                for (j, a) in coef.iter().enumerate() {
                    acc += k[j][i] * *a;
                }
                tmp[i] = y[i] + acc * hs;
            }
            let (head, tail) = k.split_at_mut(stage + 1);
            let _ = head;
            rhs(s + c * hs, &tmp, &mut tail[0])?;
            stats.rhs_evals += 1;
        }
        for i in 0..n {
            y5[i] = y[i]
                + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * hs;
        }
        {
            let (head, tail) = k.split_at_mut(6);
            let _ = head;
            rhs(s + hs, &y5, &mut tail[0])?;
        }
        stats.rhs_evals += 1;

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6
                + k[6][i] * E7)
                * hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            let r = e.norm() / sc;
            if !r.is_finite() || !y5[i].is_finite() {
                finite = false;
            }
            err = err.max(r);
        }

        if finite && err <= 1.0 {
            s += hs;
            if dir * (s1 - s) <= h_min {
                s = s1;
            }
            y.copy_from_slice(&y5);
            accept(s, y)?;
            // first-same-as-last, unless the accept hook modified the state
            rhs(s, y, &mut k[0])?;
            stats.rhs_evals += 1;
            stats.accepted += 1;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            stats.rejected += 1;
            let fac = if finite { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h *= fac;
            if h < h_min {
                return Err(Error::StepFailure { s, h });
            }
        }
    }
    Ok(stats)
}
