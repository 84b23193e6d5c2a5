//! Real polynomials with root isolation, sup norms and sublevel sets on intervals.

use serde::{Deserialize, Serialize};

/// Coefficients in ascending order: `coeffs[k]` multiplies `t^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn add_const(&self, c: f64) -> Poly {
        let mut v = self.coeffs.clone();
        v[0] += c;
        Poly::new(v)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// `p(c t)`.
    pub fn rescale_var(&self, c: f64) -> Poly {
        let mut f = 1.0;
        Poly::new(
            self.coeffs
                .iter()
                .map(|a| {
                    let v = a * f;
                    f *= c;
                    v
                })
                .collect(),
        )
    }

    /// Sorted real roots in `[a, b]`, isolated between critical points.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let mut knots = vec![a];
        knots.extend(self.derivative().roots_in(a, b));
        knots.push(b);
        let mut roots: Vec<f64> = Vec::new();
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            let r = if flo == 0.0 {
                Some(lo)
            } else if fhi == 0.0 {
                Some(hi)
            } else if flo.signum() != fhi.signum() {
                Some(bisect(|t| self.eval(t), lo, hi, flo))
            } else {
                None
            };
            if let Some(r) = r {
                if roots.last().is_none_or(|&last| (r - last).abs() > 1e-14 * (1.0 + r.abs())) {
                    roots.push(r);
                }
            }
        }
        roots
    }

    /// `sup |p|` over `[a, b]`.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a, b];
        pts.extend(self.derivative().roots_in(a, b));
        pts.into_iter().map(|t| self.eval(t).abs()).fold(0.0, f64::max)
    }

    /// `max p` over `[a, b]`.
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a, b];
        pts.extend(self.derivative().roots_in(a, b));
        pts.into_iter().map(|t| self.eval(t)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximal subintervals of `[a, b]` on which `|p| <= eps`.
    pub fn sublevel_intervals(&self, eps: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![a];
        cuts.extend(self.add_const(-eps).roots_in(a, b));
        cuts.extend(self.add_const(eps).roots_in(a, b));
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let inside = if hi > lo { self.eval(0.5 * (lo + hi)).abs() <= eps } else { self.eval(lo).abs() <= eps };
            if !inside {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.1 >= lo => last.1 = hi,
                _ => out.push((lo, hi)),
            }
        }
        out
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cubic() {
        // (t-1)(t-2)(t-3)
        let p = Poly::new(vec![-6.0, 11.0, -6.0, 1.0]);
        let r = p.roots_in(0.0, 4.0);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(p.roots_in(3.5, 4.0).is_empty());
    }

    #[test]
    fn sup_and_sublevel() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        assert!((p.sup_abs(-1.0, 0.5) - 1.0).abs() < 1e-15);
        let iv = p.sublevel_intervals(0.01, 0.0, 1.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - 0.1).abs() < 1e-12);
        let q = Poly::new(vec![-0.5, 1.0]);
        let iv = q.sublevel_intervals(0.1, 0.0, 1.0);
        assert!((iv[0].0 - 0.4).abs() < 1e-12 && (iv[0].1 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn algebra() {
        let p = Poly::new(vec![1.0, 2.0]);
        let q = Poly::new(vec![0.0, 1.0, 0.0]);
        assert_eq!(q.degree(), 1);
        assert_eq!(p.mul(&q).coeffs, vec![0.0, 1.0, 2.0]);
        assert_eq!(p.add(&q).coeffs, vec![1.0, 3.0]);
        assert_eq!(p.rescale_var(3.0).coeffs, vec![1.0, 6.0]);
        assert_eq!(p.derivative().coeffs, vec![2.0]);
    }
}
