//! SL(2,R) computations: KAK decomposition, the ψ time change, the slide
//! estimate, the trace and conjugator formulas for products of triple
//! exponentials, and covering numbers of balls.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{bowen_sup, conj_poly, in_bowen_ball, CoordinateChart};
use crate::error::{Error, Result};
use crate::numeric::linear_fit;
use crate::rng::{log_uniform, stream};

pub type M2 = Matrix2<f64>;

pub fn exp_u(t: f64) -> M2 {
    M2::new(1.0, t, 0.0, 1.0)
}

pub fn exp_v(t: f64) -> M2 {
    M2::new(1.0, 0.0, t, 1.0)
}

pub fn exp_x(t: f64) -> M2 {
    M2::new(t.exp(), 0.0, 0.0, (-t).exp())
}

pub fn rotation(theta: f64) -> M2 {
    let (s, c) = theta.sin_cos();
    M2::new(c, -s, s, c)
}

fn angle_of(k: &M2) -> f64 {
    k[(1, 0)].atan2(k[(0, 0)]).rem_euclid(2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KakDecomposition {
    pub theta1: f64,
    pub s: f64,
    pub theta2: f64,
}

impl KakDecomposition {
    pub fn recompose(&self) -> M2 {
        rotation(self.theta1) * exp_x(self.s) * rotation(self.theta2)
    }
}

/// `g = k(θ1) exp(sX) k(θ2)` with `s = ½ log λ_max(g gᵀ) >= 0`.
///
/// The `-id` ambiguity is fixed by taking `θ2` in `[0, π)`; when `s = 0` the
/// whole rotation goes into `θ1`.
pub fn kak(g: &M2) -> KakDecomposition {
    let ggt = g * g.transpose();
    let tr = ggt.trace();
    let disc = ((tr * 0.5).powi(2) - ggt.determinant()).max(0.0).sqrt();
    let lmax = tr * 0.5 + disc;
    let s = 0.5 * lmax.ln().max(0.0);
    if s < 1e-12 {
        return KakDecomposition { theta1: angle_of(g), s: 0.0, theta2: 0.0 };
    }
    // right singular vector for the top singular value: eigenvector of gᵀg
    let gtg = g.transpose() * g;
    let (a, b, d) = (gtg[(0, 0)], gtg[(0, 1)], gtg[(1, 1)]);
    let v = if (a - lmax).abs() + b.abs() > (d - lmax).abs() + b.abs() {
        (-b, a - lmax)
    } else {
        (d - lmax, -b)
    };
    let n = v.0.hypot(v.1);
    // v is the first row of k2 = [[cos, -sin], [sin, cos]]
    let mut theta2 = (-v.1 / n).atan2(v.0 / n);
    if theta2 < 0.0 {
        theta2 += PI;
    }
    if theta2 >= PI {
        theta2 -= PI;
    }
    let k1 = g * rotation(theta2).transpose() * exp_x(-s);
    KakDecomposition { theta1: angle_of(&k1), s, theta2 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub t: f64,
    pub s: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub rows: Vec<DistanceRow>,
    pub max_ratio: f64,
    pub within_bound: bool,
}

/// `s(t)` of `exp(tU)` against `2 log t`.
pub fn unipotent_distance_check(t_values: &[f64]) -> Result<DistanceReport> {
    if t_values.iter().any(|&t| !(t >= 2.0)) {
        return Err(Error::OutOfRange("distance check needs t >= 2".into()));
    }
    let rows: Vec<DistanceRow> = t_values
        .iter()
        .map(|&t| {
            let s = kak(&exp_u(t)).s;
            DistanceRow { t, s, ratio: s / t.ln() }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let within_bound = rows.iter().all(|r| r.s <= 2.0 * r.t.ln());
    Ok(DistanceReport { rows, max_ratio, within_bound })
}

/// `s` of `exp(tU)` in closed form: `½ log((t² + t√(t²+4) + 2)/2)`.
pub fn unipotent_s_closed_form(t: f64) -> f64 {
    0.5 * ((t * t + (t * t + 4.0).sqrt() * t.abs() + 2.0) / 2.0).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiMatch {
    pub psi: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `||exp(ψU) h exp(-tU) - exp(αV) exp(βX)||_F`.
    pub residual: f64,
    pub psi_prime: f64,
    pub alpha_bound_ok: bool,
    pub beta_bound_ok: bool,
}

/// Time change `ψ` straightening `h = exp(a_V V) exp(a_X X)` along the `U` flow.
pub fn psi_match(a_v: f64, a_x: f64, t: f64, eps1: f64) -> Result<PsiMatch> {
    if a_x.abs() >= eps1 || (a_v != 0.0 && t.abs() > eps1 / a_v.abs()) {
        return Err(Error::DomainExceeded(format!("a_X={a_x}, a_V={a_v}, t={t}, ε1={eps1}")));
    }
    let (ep, em) = (a_x.exp(), (-a_x).exp());
    let den = em - a_v * ep * t;
    let psi = t * ep / den;
    let alpha = a_v * ep * den;
    let beta = -den.ln();
    let h = exp_v(a_v) * exp_x(a_x);
    let lhs = exp_u(psi) * h * exp_u(-t);
    let rhs = exp_v(alpha) * exp_x(beta);
    Ok(PsiMatch {
        psi,
        alpha,
        beta,
        residual: (lhs - rhs).norm(),
        psi_prime: 1.0 / (den * den),
        alpha_bound_ok: alpha.abs() <= 2.0 * a_v.abs(),
        beta_bound_ok: beta.abs() <= 2.0 * (a_x.abs() + a_v.abs() * t.abs()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlideReport {
    pub ell: f64,
    /// Chart coefficients of `exp(ℓU) g exp(-LU)`.
    pub coeffs: Vec<f64>,
    /// Distance between the assembled and the directly multiplied element.
    pub residual: f64,
    pub bowen_sup: f64,
    pub member: bool,
}

/// Slides a Kakutani perturbation along the flow: for `x = g y` with `g` in the
/// `Kak(R, ε³)` box and `|L| <= R/3`, checks `exp(ψ(L)U) g exp(-LU)` lies in the
/// `Kak(R/2, ε)` box.
pub fn slide_check(chart: &CoordinateChart, coeffs: &[f64], r: f64, l: f64, eps: f64, eps1: f64) -> Result<SlideReport> {
    if coeffs.len() != chart.dim() {
        return Err(Error::DimensionMismatch { expected: chart.dim(), got: coeffs.len() });
    }
    let e3 = eps.powi(3);
    let mut tau = coeffs.to_vec();
    tau[0] = 0.0;
    tau[1] = 0.0;
    if coeffs[0].abs() >= e3 / r || coeffs[1].abs() >= e3 || !in_bowen_ball(chart, &tau, r, e3) {
        return Err(Error::PreconditionViolated("x is not in the Kak(R, ε³) box".into()));
    }
    if l.abs() > r / 3.0 {
        return Err(Error::PreconditionViolated(format!("|L| = {} exceeds R/3", l.abs())));
    }
    let m = psi_match(coeffs[0], coeffs[1], l, eps1)?;
    let moved = conj_poly(chart, &tau, 0.0)?.eval(l);
    let mut out = moved;
    out[0] = m.alpha;
    out[1] = m.beta;
    let u = &chart.basis_matrices()[2];
    let direct = crate::numeric::expm(&(u * m.psi)) * chart.recompose(coeffs) * crate::numeric::expm(&(u * -l));
    let residual = (chart.recompose(&out) - &direct).norm() / direct.norm();
    let mut tau_out = out.clone();
    tau_out[0] = 0.0;
    tau_out[1] = 0.0;
    let sup = bowen_sup(chart, &tau_out, r / 2.0);
    let member = out[0].abs() < eps / (r / 2.0) && out[1].abs() < eps && sup < eps;
    Ok(SlideReport { ell: m.psi, coeffs: out, residual, bowen_sup: sup, member })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductParams {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub j_delta: f64,
    pub eps_prime: f64,
}

impl ProductParams {
    pub fn admissible(&self) -> bool {
        let jd = self.j_delta;
        let (lo_pq, hi_pq) = (2f64.powf(20.0 * jd), 2f64.powf(40.0 * jd));
        let lo_ac = 2f64.powf(-10.0 * jd);
        let tol = 1e-12;
        [self.p, self.q].iter().all(|x| *x >= lo_pq * (1.0 - tol) && *x <= hi_pq * (1.0 + tol))
            && [self.a, self.c].iter().all(|x| x.abs() >= lo_ac * (1.0 - tol) && x.abs() <= 1.0 + tol)
            && self.b.abs() <= self.eps_prime
            && self.d.abs() <= self.eps_prime
    }

    /// Log-uniform sample of the admissible ranges with random signs on `a, c, b, d`.
    pub fn sample<R: Rng>(rng: &mut R, j_delta: f64, eps_prime: f64) -> Self {
        let pq = |rng: &mut R| 2f64.powf(rng.gen_range(20.0 * j_delta..=40.0 * j_delta));
        let ac = |rng: &mut R| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * 2f64.powf(rng.gen_range(-10.0 * j_delta..=0.0))
        };
        let (p, q) = (pq(rng), pq(rng));
        let (a, c) = (ac(rng), ac(rng));
        let b = rng.gen_range(-eps_prime..=eps_prime);
        let d = rng.gen_range(-eps_prime..=eps_prime);
        ProductParams { p, q, a, b, c, d, j_delta, eps_prime }
    }
}

/// `exp(-dX) exp(-cV) exp(pU) exp(aV) exp(bX) exp(-qU)`.
pub fn product_matrix(pr: &ProductParams) -> M2 {
    exp_x(-pr.d) * exp_v(-pr.c) * exp_u(pr.p) * exp_v(pr.a) * exp_x(pr.b) * exp_u(-pr.q)
}

pub fn product_trace_closed_form(pr: &ProductParams) -> f64 {
    let ProductParams { p, q, a, b, c, d, .. } = *pr;
    (-b - d).exp()
        * (q * (2.0 * (b + d)).exp() * (a * (c * p - 1.0) + c) + (2.0 * b).exp() * (a * p + 1.0) + (2.0 * d).exp() * (1.0 - c * p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductResult {
    pub m: [[f64; 2]; 2],
    pub trace_closed: f64,
    pub trace_direct: f64,
    pub rel_err: f64,
    pub window: (f64, f64),
    pub in_window: bool,
}

/// Product matrix, both traces, and the trace window `[2^{20jδ-1}, 2^{80jδ+1}]`.
///
/// Inadmissible parameters are rejected unless `diagnostic` is set.
pub fn product_m(pr: &ProductParams, diagnostic: bool) -> Result<ProductResult> {
    if !diagnostic && !pr.admissible() {
        return Err(Error::OutOfRange(format!("inadmissible parameters {pr:?}")));
    }
    let m = product_matrix(pr);
    let trace_direct = m.trace();
    let trace_closed = product_trace_closed_form(pr);
    let rel_err = (trace_closed - trace_direct).abs() / trace_direct.abs().max(f64::MIN_POSITIVE);
    let window = (2f64.powf(20.0 * pr.j_delta - 1.0), 2f64.powf(80.0 * pr.j_delta + 1.0));
    let in_window = trace_direct.abs() >= window.0 && trace_direct.abs() <= window.1;
    Ok(ProductResult {
        m: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        trace_closed,
        trace_direct,
        rel_err,
        window,
        in_window,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugatorResult {
    pub lambda: f64,
    /// `m² = h exp(sX) h⁻¹`, `s = 2 log|λ|` (natural log).
    pub s: f64,
    /// `2 log₂|λ|`, the quantity compared with the dyadic window.
    pub s_dyadic: f64,
    pub theta: f64,
    pub alpha: f64,
    pub log_abs_alpha: f64,
    /// `||m² - h exp(sX) h⁻¹||_F / ||m²||_F`.
    pub residual: f64,
    /// `|Tr m - (λ + 1/λ)| / |Tr m|`.
    pub eigen_consistency: f64,
    pub window: (f64, f64),
    pub in_window: bool,
}

/// Diagonalizes a hyperbolic `m` and writes `m² = h exp(sX) h⁻¹` with
/// `h = k exp(αU)`, `k` a rotation.
pub fn conjugator_decomposition(m: &M2, j_delta: f64) -> Result<ConjugatorResult> {
    let tr = m.trace();
    if tr.abs() <= 2.0 {
        return Err(Error::NotHyperbolic(tr.abs()));
    }
    let lambda = 0.5 * (tr + tr.signum() * (tr * tr - 4.0).sqrt());
    let mu = 1.0 / lambda;
    let eigvec = |e: f64| -> (f64, f64) {
        let c1 = (m[(0, 1)], e - m[(0, 0)]);
        let c2 = (e - m[(1, 1)], m[(1, 0)]);
        if c1.0.hypot(c1.1) >= c2.0.hypot(c2.1) {
            c1
        } else {
            c2
        }
    };
    let (v1, mut v2) = (eigvec(lambda), eigvec(mu));
    let det = v1.0 * v2.1 - v1.1 * v2.0;
    if det < 0.0 {
        v2 = (-v2.0, -v2.1);
    }
    let det = det.abs();
    let sc = det.sqrt();
    let hp = M2::new(v1.0 / sc, v2.0 / sc, v1.1 / sc, v2.1 / sc);
    // h' = k r with r upper triangular, positive diagonal
    let r11 = hp[(0, 0)].hypot(hp[(1, 0)]);
    let k = M2::new(hp[(0, 0)] / r11, -hp[(1, 0)] / r11, hp[(1, 0)] / r11, hp[(0, 0)] / r11);
    let r = k.transpose() * hp;
    let alpha = r[(0, 1)] * r[(0, 0)];
    let s = 2.0 * lambda.abs().ln();
    let h = k * exp_u(alpha);
    let h_inv = exp_u(-alpha) * k.transpose();
    let m2 = m * m;
    let residual = (m2 - h * exp_x(s) * h_inv).norm() / m2.norm();
    let s_dyadic = 2.0 * lambda.abs().log2();
    let window = (40.0 * j_delta - 5.0, 160.0 * j_delta + 6.0);
    Ok(ConjugatorResult {
        lambda,
        s,
        s_dyadic,
        theta: angle_of(&k),
        alpha,
        log_abs_alpha: alpha.abs().ln(),
        residual,
        eigen_consistency: (tr - (lambda + mu)).abs() / tr.abs(),
        window,
        in_window: s_dyadic.abs() >= window.0 && s_dyadic.abs() <= window.1,
    })
}

/// Local right-invariant distance `||g h⁻¹ - I||_F`.
fn local_dist(g: &M2, h_inv: &M2) -> f64 {
    (g * h_inv - M2::identity()).norm()
}

/// Haar sample from `exp(B(0, R))` in `sl(2)`, using the Jacobian
/// `(sinh μ / μ)²`, `μ² = -det Z`, against the Frobenius ball.
fn haar_ball_sample<R: Rng>(rng: &mut R, radius: f64) -> M2 {
    let jac = |z: &M2| -> f64 {
        let mu2 = -z.determinant();
        if mu2.abs() < 1e-12 {
            1.0
        } else if mu2 > 0.0 {
            let mu = mu2.sqrt();
            (mu.sinh() / mu).powi(2)
        } else {
            let nu = (-mu2).sqrt();
            (nu.sin() / nu).powi(2)
        }
    };
    let jmax = {
        let mu = radius / 2f64.sqrt();
        if mu < 1e-12 {
            1.0
        } else {
            (mu.sinh() / mu).powi(2)
        }
    };
    loop {
        // orthonormal basis of sl(2) for the Frobenius product
        let (x, y, w) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let n2: f64 = x * x + y * y + w * w;
        if n2 > 1.0 {
            continue;
        }
        let diag = x * radius / 2f64.sqrt();
        let z = M2::new(diag, y * radius, w * radius, -diag);
        if rng.gen_range(0.0..=jmax) <= jac(&z) {
            return crate::numeric::expm(&nalgebra::DMatrix::from_column_slice(2, 2, z.as_slice()))
                .fixed_view::<2, 2>(0, 0)
                .into();
        }
    }
}

/// Greedy `ε`-net size of a Haar sample cloud in `exp(B(0, R))`.
pub fn greedy_net_size(eps: f64, radius: f64, samples: usize, seed: u64) -> Result<usize> {
    if radius == 0.0 {
        return Ok(1);
    }
    let cloud: Vec<M2> = (0..samples)
        .into_par_iter()
        .map(|i| haar_ball_sample(&mut stream(seed, i as u64), radius))
        .collect();
    let max_norm = cloud.iter().map(|g| g.norm()).fold(0.0, f64::max);
    // ||g h⁻¹ - I|| < ε forces ||g - h|| < ε ||h||
    let cell = eps * max_norm;
    let key = |g: &M2| -> [i64; 4] {
        [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]].map(|x| (x / cell).floor() as i64)
    };
    let mut grid: HashMap<[i64; 4], Vec<(M2, M2)>> = HashMap::new();
    let mut centers = 0usize;
    for g in &cloud {
        let k = key(g);
        let mut covered = false;
        'outer: for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    for d3 in -1..=1 {
                        if let Some(list) = grid.get(&[k[0] + d0, k[1] + d1, k[2] + d2, k[3] + d3]) {
                            if list.iter().any(|(_, hinv)| local_dist(g, hinv) < eps) {
                                covered = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        if !covered {
            let inv = M2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]);
            grid.entry(k).or_default().push((*g, inv));
            centers += 1;
        }
    }
    if centers * 4 > samples {
        return Err(Error::SampleBudgetExceeded(format!(
            "net of {centers} centers from {samples} samples is not saturated"
        )));
    }
    Ok(centers)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetPoint {
    pub eps: f64,
    pub radius: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringFit {
    pub points: Vec<NetPoint>,
    /// Slope of `log N` against `log(1/ε)` at the radius with the most points.
    pub eps_exponent: f64,
    /// Slope of `log N` against `R` at the `ε` with the most points.
    pub radius_rate: f64,
    /// `C` with `N <= C ε^{-3} e^{2CR}` on every training point, from a
    /// least-squares fit of the growth rate in `R`.
    pub c_fit: f64,
    pub holdout: Vec<(NetPoint, f64, bool)>,
}

/// Net sizes over `(ε, R)` training pairs, a fitted constant, and held-out checks.
pub fn covering_growth(train: &[(f64, f64)], holdout: &[(f64, f64)], samples: usize, seed: u64) -> Result<CoveringFit> {
    let net = |&(eps, radius): &(f64, f64)| -> Result<NetPoint> {
        Ok(NetPoint { eps, radius, size: greedy_net_size(eps, radius, samples, seed)? })
    };
    let points = train.iter().map(net).collect::<Result<Vec<_>>>()?;
    // rate from log(N ε³) = log A + κ R, then C large enough for both factors
    let xs: Vec<f64> = points.iter().map(|p| p.radius).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.size as f64 * p.eps.powi(3)).ln()).collect();
    let kappa = linear_fit(&xs, &ys).0.max(0.0);
    let amp = points.iter().map(|p| p.size as f64 * p.eps.powi(3) * (-kappa * p.radius).exp()).fold(0.0, f64::max);
    let c_fit = amp.max(kappa / 2.0);
    let holdout = holdout
        .iter()
        .map(|hp| {
            let p = net(hp)?;
            let bound = c_fit * p.eps.powi(-3) * (2.0 * c_fit * p.radius).exp();
            let ok = p.size as f64 <= bound;
            Ok((p, bound, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope_over = |sel: Vec<&NetPoint>, x: fn(&NetPoint) -> f64| -> f64 {
        if sel.len() < 2 {
            return f64::NAN;
        }
        let xs: Vec<f64> = sel.iter().map(|p| x(p)).collect();
        let ys: Vec<f64> = sel.iter().map(|p| (p.size as f64).ln()).collect();
        linear_fit(&xs, &ys).0
    };
    // fit each slope on the slice with the most points
    let most = |key: fn(&NetPoint) -> f64| -> f64 {
        let mut keys: Vec<f64> = points.iter().map(key).collect();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let count = |k: f64| points.iter().filter(|p| key(p) == k).count();
        keys.into_iter().fold((f64::NAN, 0), |best, k| if count(k) > best.1 { (k, count(k)) } else { best }).0
    };
    let r0 = most(|p| p.radius);
    let eps_sel: Vec<&NetPoint> = points.iter().filter(|p| p.radius == r0).collect();
    let e0 = most(|p| p.eps);
    let r_sel: Vec<&NetPoint> = points.iter().filter(|p| p.eps == e0 && p.radius > 0.0).collect();
    Ok(CoveringFit {
        eps_exponent: slope_over(eps_sel, |p| (1.0 / p.eps).ln()),
        radius_rate: slope_over(r_sel, |p| p.radius),
        points,
        c_fit,
        holdout,
    })
}

/// Default `ε'` bound on `b, d` in the admissible ranges.
pub const PRODUCT_EPS_PRIME: f64 = 0.01;

/// Admissible samples with `jδ` log-uniform in `[lo, hi]`.
pub fn product_samples(n: usize, seed: u64, lo: f64, hi: f64) -> Vec<ProductParams> {
    (0..n)
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let jd = log_uniform(&mut rng, lo, hi);
            ProductParams::sample(&mut rng, jd, PRODUCT_EPS_PRIME)
        })
        .collect()
}
