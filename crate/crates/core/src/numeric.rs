//! Floating-point matrix functions used by the dynamics modules.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type FMat = DMatrix<f64>;

pub fn frobenius(m: &FMat) -> f64 {
    m.norm()
}

fn norm1(m: &FMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn taylor_exp(a: &FMat) -> FMat {
    let n = a.nrows();
    let mut sum = FMat::identity(n, n);
    let mut term = FMat::identity(n, n);
    for k in 1..64 {
        term = &term * a / k as f64;
        sum += &term;
        if term.amax() <= 1e-18 * sum.amax() {
            break;
        }
    }
    sum
}

/// Matrix exponential by scaling and squaring around a Taylor core.
pub fn expm(a: &FMat) -> FMat {
    let nrm = norm1(a);
    let squarings = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    let mut e = taylor_exp(&scaled);
    for _ in 0..squarings {
        e = &e * &e;
    }
    e
}

/// Exponential of a nilpotent matrix: the series truncates after `n` terms.
pub fn expm_nilpotent(a: &FMat) -> FMat {
    let n = a.nrows();
    let mut sum = FMat::identity(n, n);
    let mut term = FMat::identity(n, n);
    for k in 1..n {
        term = &term * a / k as f64;
        sum += &term;
    }
    sum
}

/// Denman–Beavers square root.
fn sqrtm(a: &FMat) -> Result<FMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = FMat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or_else(|| Error::NonConvergence("singular iterate in sqrtm".into()))?;
        let zi = z.clone().try_inverse().ok_or_else(|| Error::NonConvergence("singular iterate in sqrtm".into()))?;
        let y_next = (&y + &zi) * 0.5;
        let z_next = (&z + &yi) * 0.5;
        let delta = (&y_next - &y).amax();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.amax().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::NonConvergence("sqrtm did not converge".into()))
}

/// Principal logarithm by inverse scaling and squaring.
pub fn logm(g: &FMat) -> Result<FMat> {
    let n = g.nrows();
    let id = FMat::identity(n, n);
    let mut a = g.clone();
    let mut roots = 0;
    while norm1(&(&a - &id)) > 0.25 {
        if roots > 60 {
            return Err(Error::NonConvergence("logm: too many square roots".into()));
        }
        a = sqrtm(&a)?;
        roots += 1;
    }
    let x = &a - &id;
    let mut sum = FMat::zeros(n, n);
    let mut power = x.clone();
    for k in 1..200 {
        let term = &power / k as f64;
        if k % 2 == 1 {
            sum += &term;
        } else {
            sum -= &term;
        }
        if term.amax() <= 1e-18 * sum.amax().max(1e-300) {
            break;
        }
        power = &power * &x;
    }
    if !sum.iter().all(|v| v.is_finite()) {
        return Err(Error::NonConvergence("logm produced non-finite entries".into()));
    }
    Ok(sum * 2f64.powi(roots))
}

/// `d_G(g, e)`: Frobenius norm of the principal logarithm.
pub fn dist_to_identity(g: &FMat) -> Result<f64> {
    Ok(frobenius(&logm(g)?))
}

/// Ordinary least-squares slope and intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> FMat {
        FMat::from_row_slice(2, 2, &[a, b, c, d])
    }

    #[test]
    fn exp_of_diagonal_and_nilpotent() {
        let e = expm(&m2(1.0, 0.0, 0.0, -1.0));
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-1f64).exp()).abs() < 1e-15);
        let u = expm(&m2(0.0, 1e6, 0.0, 0.0));
        assert!((u[(0, 1)] - 1e6).abs() < 1e-6);
        assert_eq!(expm_nilpotent(&m2(0.0, 3.0, 0.0, 0.0)), m2(1.0, 3.0, 0.0, 1.0));
    }

    #[test]
    fn log_inverts_exp() {
        let a = m2(0.3, -1.2, 0.7, -0.3);
        let l = logm(&expm(&a)).unwrap();
        assert!((l - a).amax() < 1e-12);
        let b = FMat::from_row_slice(3, 3, &[0.1, 0.5, 0.0, 0.0, -0.2, 0.3, 0.0, 0.0, 0.1]);
        assert!((logm(&expm(&b)).unwrap() - b).amax() < 1e-12);
        assert!(dist_to_identity(&FMat::identity(3, 3)).unwrap() < 1e-15);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let (s, c) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
    }
}
