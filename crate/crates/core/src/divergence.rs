//! Coordinate charts near the identity, conjugation polynomials, Bowen and
//! Kakutani–Bowen box models, polynomial sublevel bounds and the renormalization
//! estimates used to control divergence of nearby orbits.

use nalgebra::{DMatrix, DVector};
use num_traits::Signed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{chain_basis, ChainBasis, Sl2Triple};
use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, LieAlgebra};
use crate::matrix::{frac, to_f64, Matrix, Scalar};
use crate::numeric::{dist_to_identity, expm, frobenius, linear_fit, logm, FMat};
use crate::poly::Poly;
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coord {
    V,
    X,
    U,
    /// `X_level^chain`, where `chain` indexes the chain basis.
    Chain { chain: usize, level: usize, depth: usize },
}

impl Coord {
    pub fn label(&self) -> String {
        match self {
            Coord::V => "V".into(),
            Coord::X => "X".into(),
            Coord::U => "U".into(),
            Coord::Chain { chain, level, .. } => format!("X_{level}^{chain}"),
        }
    }

    /// `ad_X` weight of the coordinate direction.
    pub fn weight(&self) -> i64 {
        match self {
            Coord::V => -2,
            Coord::X => 0,
            Coord::U => 2,
            Coord::Chain { level, depth, .. } => *depth as i64 - 2 * *level as i64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSlot {
    pub chain: usize,
    pub depth: usize,
    /// Coordinate index of `X_0` of this chain; `X_i` sits at `start + i`.
    pub start: usize,
}

/// Coordinates `(V, X, U, X_i^j ...)` around the identity, with the
/// Jacobson–Morozov chain replaced by `V, X, U`.
#[derive(Clone, Debug)]
pub struct CoordinateChart {
    pub algebra: LieAlgebra,
    pub basis: ChainBasis,
    pub triple: Sl2Triple,
    pub coords: Vec<Coord>,
    pub slots: Vec<ChainSlot>,
    /// Domain radius in `d_G`.
    pub radius: f64,
    mats: Vec<FMat>,
    pinv: FMat,
}

/// `a_V` and `a_X` vanish up to round-off relative to the other coefficients.
fn sl2_part_vanishes(coeffs: &[f64]) -> bool {
    let scale = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    coeffs[0].abs() <= 1e-13 * scale && coeffs[1].abs() <= 1e-13 * scale
}

fn flatten(m: &FMat) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

impl CoordinateChart {
    pub fn new(g: &LieAlgebra, u: &AlgebraElement) -> Result<Self> {
        let cb = chain_basis(g, u)?;
        Self::from_chain_basis(g, cb)
    }

    pub fn from_chain_basis(g: &LieAlgebra, cb: ChainBasis) -> Result<Self> {
        let triple = cb.triple.clone().ok_or(Error::ZeroElement)?;
        let mut coords = vec![Coord::V, Coord::X, Coord::U];
        let mut elements = vec![triple.v.clone(), triple.x.clone(), triple.u.clone()];
        let mut slots = Vec::new();
        for (j, c) in cb.non_sl2_chains() {
            slots.push(ChainSlot { chain: j, depth: c.depth(), start: coords.len() });
            for (i, x) in c.vectors.iter().enumerate() {
                coords.push(Coord::Chain { chain: j, level: i, depth: c.depth() });
                elements.push(x.clone());
            }
        }
        let mats: Vec<FMat> = elements.iter().map(|e| g.to_matrix(e).to_f64()).collect();
        let n2 = g.ambient_dim() * g.ambient_dim();
        let mut design = DMatrix::<f64>::zeros(n2, mats.len());
        for (k, m) in mats.iter().enumerate() {
            design.set_column(k, &flatten(m));
        }
        let pinv = design
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::NonConvergence(format!("chart pseudo-inverse: {e}")))?;
        Ok(CoordinateChart { algebra: g.clone(), basis: cb, triple, coords, slots, radius: 0.1, mats, pinv })
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn basis_matrices(&self) -> &[FMat] {
        &self.mats
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        self.coords.iter().position(|&x| x == c)
    }

    /// Longest chain depth `L_U` (the Jacobson–Morozov chain included).
    pub fn max_depth(&self) -> usize {
        self.basis.max_depth()
    }

    pub fn matrix_of(&self, coeffs: &[f64]) -> FMat {
        let n = self.algebra.ambient_dim();
        let mut m = FMat::zeros(n, n);
        for (c, b) in coeffs.iter().zip(&self.mats) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    pub fn coords_of_matrix(&self, m: &FMat) -> Vec<f64> {
        (&self.pinv * flatten(m)).iter().copied().collect()
    }

    /// `exp(a_V V) exp(a_X X) exp(a_U U + Σ a_ij X_i^j)`.
    pub fn recompose(&self, a: &[f64]) -> FMat {
        let mut tau = a.to_vec();
        tau[0] = 0.0;
        tau[1] = 0.0;
        expm(&(&self.mats[0] * a[0])) * expm(&(&self.mats[1] * a[1])) * expm(&self.matrix_of(&tau))
    }

    /// Inverts [`recompose`](Self::recompose) by damped Newton iteration.
    pub fn decompose(&self, g: &FMat) -> Result<Vec<f64>> {
        let d0 = dist_to_identity(g).map_err(|e| Error::OutOfChartDomain(e.to_string()))?;
        if d0 > self.radius {
            return Err(Error::OutOfChartDomain(format!("d(g,e) = {d0:.3e} exceeds radius {}", self.radius)));
        }
        let log_of = |m: &FMat| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(
                self.coords_of_matrix(&logm(m).map_err(|e| Error::OutOfChartDomain(e.to_string()))?),
            ))
        };
        let target = log_of(g)?;
        let n = self.dim();
        let mut a = target.clone();
        let residual = |a: &DVector<f64>| -> Result<DVector<f64>> { Ok(log_of(&self.recompose(a.as_slice()))? - &target) };
        let mut r = residual(&a)?;
        for _ in 0..60 {
            if r.amax() < 1e-15 {
                break;
            }
            let h = 1e-7;
            let mut jac = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                let mut ap = a.clone();
                let mut am = a.clone();
                ap[k] += h;
                am[k] -= h;
                jac.set_column(k, &((residual(&ap)? - residual(&am)?) / (2.0 * h)));
            }
            let step = jac
                .lu()
                .solve(&(-&r))
                .ok_or_else(|| Error::OutOfChartDomain("singular chart Jacobian".into()))?;
            let mut lambda = 1.0;
            loop {
                let cand = &a + &step * lambda;
                let rc = residual(&cand)?;
                if rc.norm() < r.norm() || lambda < 1e-6 {
                    a = cand;
                    r = rc;
                    break;
                }
                lambda *= 0.5;
            }
        }
        let err = frobenius(&(self.recompose(a.as_slice()) - g));
        if err > 1e-10 {
            return Err(Error::OutOfChartDomain(format!("recomposition error {err:.3e}")));
        }
        Ok(a.iter().copied().collect())
    }

    fn check_standard(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        if !sl2_part_vanishes(coeffs) {
            return Err(Error::NonzeroSl2Part);
        }
        Ok(())
    }

    /// Coefficients of `Ad(exp(sX) exp(tU)) τ` computed by direct conjugation.
    pub fn conj_direct(&self, coeffs: &[f64], t: f64, s: f64) -> Vec<f64> {
        let a = expm(&(&self.mats[1] * s)) * expm(&(&self.mats[2] * t));
        let a_inv = expm(&(&self.mats[2] * -t)) * expm(&(&self.mats[1] * -s));
        self.coords_of_matrix(&(&a * self.matrix_of(coeffs) * a_inv))
    }

    /// Polynomials in `t` of each chain coordinate of `Ad(exp(tU)) τ`, unscaled.
    fn chain_polys(&self, coeffs: &[f64]) -> Vec<Poly> {
        let mut out = vec![Poly::new(vec![0.0]); self.dim()];
        out[2] = Poly::new(vec![coeffs[2]]);
        for slot in &self.slots {
            for i in 0..=slot.depth {
                let mut fact = 1.0;
                let c: Vec<f64> = (0..=slot.depth - i)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        coeffs[slot.start + k + i] / fact
                    })
                    .collect();
                out[slot.start + i] = Poly::new(c);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyEntry {
    pub coord: Coord,
    /// Coefficient at `(t, s)` is `exp(weight * s) * poly(t)`.
    pub poly: Poly,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergencePolynomial {
    pub s: f64,
    pub entries: Vec<PolyEntry>,
}

impl DivergencePolynomial {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.entries.iter().map(|e| (e.weight as f64 * self.s).exp() * e.poly.eval(t)).collect()
    }
}

/// Chart coefficients of `exp(sX) exp(tU) g exp(-tU) exp(-sX)` as polynomials in `t`.
pub fn conj_poly(chart: &CoordinateChart, coeffs: &[f64], s: f64) -> Result<DivergencePolynomial> {
    chart.check_standard(coeffs)?;
    let polys = chart.chain_polys(coeffs);
    Ok(DivergencePolynomial {
        s,
        entries: chart
            .coords
            .iter()
            .zip(polys)
            .map(|(&coord, poly)| PolyEntry { coord, poly, weight: coord.weight() })
            .collect(),
    })
}

/// Exact constant of the polynomial coefficient bound, as a rational.
///
/// Uses the inverse Vandermonde matrix on the nodes `k/d`: if `|p| < ε` on
/// `[0, 1]` then `|a_k| <= (row sum k) ε`. The value is raised to at least
/// `d + 1` so that the converse (`|a_k| < ε/C` forces `|p| < ε`) also holds.
pub fn coefficient_bounds_constant_exact(d: usize) -> Scalar {
    if d == 0 {
        return frac(1, 1);
    }
    let n = d + 1;
    let mut vand = Matrix::zeros(n, n);
    for k in 0..n {
        let x = frac(k as i64, d as i64);
        let mut p = frac(1, 1);
        for l in 0..n {
            vand.set(k, l, p.clone());
            p = &p * &x;
        }
    }
    let inv = vand.inverse().expect("Vandermonde on distinct nodes is invertible");
    let row_max = (0..n)
        .map(|l| inv.row(l).iter().fold(frac(0, 1), |acc, x| acc + x.abs()))
        .max()
        .expect("nonempty");
    row_max.max(frac(n as i64, 1))
}

pub fn coefficient_bounds_constant(d: usize) -> f64 {
    to_f64(&coefficient_bounds_constant_exact(d))
}

/// `1 + Σ_{non-sl2 chains} Σ_{i=0}^{m_j} i`.
pub fn kak_volume_exponent(cb: &ChainBasis) -> u64 {
    1 + cb.non_sl2_chains().map(|(_, c)| (c.depth() * (c.depth() + 1) / 2) as u64).sum::<u64>()
}

/// Coefficient box of the Kakutani–Bowen ball at horizon `R` and radius `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KakBallSpec {
    pub r: f64,
    pub eps: f64,
    pub half_widths: Vec<f64>,
    /// Power of `R^{-1}` in each half-width.
    pub exponents: Vec<u32>,
}

impl KakBallSpec {
    pub fn new(chart: &CoordinateChart, r: f64, eps: f64) -> Result<Self> {
        if r.is_nan() || r <= 0.0 || eps.is_nan() || eps <= 0.0 {
            return Err(Error::OutOfRange(format!("need R > 0 and ε > 0, got R={r}, ε={eps}")));
        }
        let exponents: Vec<u32> = chart
            .coords
            .iter()
            .map(|c| match c {
                Coord::V => 1,
                Coord::X | Coord::U => 0,
                Coord::Chain { level, .. } => *level as u32,
            })
            .collect();
        let half_widths = exponents.iter().map(|&e| eps * r.powi(-(e as i32))).collect();
        Ok(KakBallSpec { r, eps, half_widths, exponents })
    }

    pub fn exponent_sum(&self) -> u64 {
        self.exponents.iter().map(|&e| e as u64).sum()
    }

    pub fn contains(&self, coeffs: &[f64]) -> bool {
        coeffs.iter().zip(&self.half_widths).all(|(c, w)| c.abs() < *w)
    }

    pub fn log_volume(&self) -> f64 {
        self.half_widths.iter().map(|w| (2.0 * w).ln()).sum()
    }
}

/// `sup_{r in [0, horizon]} ||Ad(exp(rU)) τ||_F` for the standard part of `coeffs`.
pub fn bowen_sup(chart: &CoordinateChart, coeffs: &[f64], horizon: f64) -> f64 {
    let polys: Vec<Poly> = chart.chain_polys(coeffs).into_iter().map(|p| p.rescale_var(horizon)).collect();
    let deg = polys.iter().map(Poly::degree).max().unwrap_or(0);
    let n = chart.algebra.ambient_dim();
    let blocks: Vec<FMat> = (0..=deg)
        .map(|p| {
            let mut b = FMat::zeros(n, n);
            for (k, poly) in polys.iter().enumerate() {
                if let Some(c) = poly.coeffs.get(p) {
                    if *c != 0.0 {
                        b += &chart.mats[k] * *c;
                    }
                }
            }
            b
        })
        .collect();
    let mut sq = vec![0.0; 2 * deg + 1];
    for p in 0..=deg {
        for q in 0..=deg {
            sq[p + q] += blocks[p].dot(&blocks[q]);
        }
    }
    Poly::new(sq).max_on(0.0, 1.0).max(0.0).sqrt()
}

pub fn in_bowen_ball(chart: &CoordinateChart, coeffs: &[f64], horizon: f64, eps: f64) -> bool {
    bowen_sup(chart, coeffs, horizon) < eps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeFit {
    pub r_values: Vec<f64>,
    pub fractions: Vec<f64>,
    pub log_volumes: Vec<f64>,
    pub slope: f64,
    pub expected_slope: f64,
}

/// Monte Carlo volume of `Kak(R, ε) ∩ box` over a grid of horizons.
///
/// Samples are uniform in the Kakutani–Bowen coefficient box; the `V` and `X`
/// directions are exact box factors and the standard part is tested against
/// the true Bowen condition. The same uniform draws are reused for every `R`.
pub fn kak_volume_mc(chart: &CoordinateChart, eps: f64, r_values: &[f64], samples: usize, seed: u64) -> Result<VolumeFit> {
    if r_values.len() < 2 || samples == 0 {
        return Err(Error::OutOfRange("need at least two horizons and one sample".into()));
    }
    let specs = r_values.iter().map(|&r| KakBallSpec::new(chart, r, eps)).collect::<Result<Vec<_>>>()?;
    let dim = chart.dim();
    let hits: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream(seed, idx as u64);
            let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            specs
                .iter()
                .map(|spec| {
                    let mut c: Vec<f64> = u.iter().zip(&spec.half_widths).map(|(x, w)| x * w).collect();
                    c[0] = 0.0;
                    c[1] = 0.0;
                    u64::from(in_bowen_ball(chart, &c, spec.r, eps))
                })
                .collect::<Vec<u64>>()
        })
        .reduce(|| vec![0; specs.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    if hits.contains(&0) {
        return Err(Error::SampleBudgetExceeded("no sample landed in the ball at some horizon".into()));
    }
    let fractions: Vec<f64> = hits.iter().map(|&h| h as f64 / samples as f64).collect();
    let log_volumes: Vec<f64> = specs.iter().zip(&fractions).map(|(s, f)| s.log_volume() + f.ln()).collect();
    let log_r: Vec<f64> = r_values.iter().map(|r| r.ln()).collect();
    let (slope, _) = linear_fit(&log_r, &log_volumes);
    Ok(VolumeFit {
        r_values: r_values.to_vec(),
        fractions,
        log_volumes,
        slope,
        expected_slope: -(kak_volume_exponent(&chart.basis) as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BgCheck {
    pub sup_v: f64,
    pub sup_omega: f64,
    pub omega_measure: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `sup_V |p| <= (4|V|/|ω|)^d sup_ω |p|` with `ω` a finite union of subintervals of `V`.
pub fn brudnyi_ganzburg(p: &Poly, v: (f64, f64), omega: &[(f64, f64)]) -> Result<BgCheck> {
    if !(v.1 > v.0) {
        return Err(Error::DegenerateInterval);
    }
    let sup_v = p.sup_abs(v.0, v.1);
    let omega_measure: f64 = omega.iter().map(|(a, b)| b - a).sum();
    let sup_omega = omega.iter().map(|(a, b)| p.sup_abs(*a, *b)).fold(0.0, f64::max);
    let d = p.degree() as i32;
    let bound = if omega_measure > 0.0 {
        (4.0 * (v.1 - v.0) / omega_measure).powi(d) * sup_omega
    } else {
        f64::INFINITY
    };
    Ok(BgCheck { sup_v, sup_omega, omega_measure, bound, holds: sup_v <= bound * (1.0 + 1e-9) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublevelReport {
    pub measure: f64,
    pub intervals: Vec<(f64, f64)>,
    pub bg: BgCheck,
}

/// Lebesgue measure of `{t in I : |p(t)| <= ε}` by root bracketing, with the
/// Brudnyi–Ganzburg inequality checked on that set.
pub fn sublevel_measure(p: &Poly, eps: f64, interval: (f64, f64)) -> Result<SublevelReport> {
    if !(interval.1 > interval.0) {
        return Err(Error::DegenerateInterval);
    }
    let intervals = p.sublevel_intervals(eps, interval.0, interval.1);
    let measure = intervals.iter().map(|(a, b)| b - a).sum();
    let bg = brudnyi_ganzburg(p, interval, &intervals)?;
    Ok(SublevelReport { measure, intervals, bg })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemPolCheck {
    pub degree: usize,
    pub n: f64,
    pub eta: f64,
    pub measure: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Measure of `{w in [0, N^{1+η}] : |p(w)| <= 10ε}` against `40 C(d)^2 N^{1+η-η/d}`.
pub fn lem_pol_check(p: &Poly, eps: f64, n: f64, eta: f64) -> Result<LemPolCheck> {
    let d = p.degree().max(1);
    let c = coefficient_bounds_constant(d);
    if p.eval(n).abs() < eps || p.eval(0.0).abs() >= eps / c {
        return Err(Error::PreconditionViolated("need |p(N)| >= ε and |p(0)| < ε/C(d)".into()));
    }
    let rep = sublevel_measure(p, 10.0 * eps, (0.0, n.powf(1.0 + eta)))?;
    let bound = 40.0 * c * c * n.powf(1.0 + eta - eta / d as f64);
    Ok(LemPolCheck { degree: d, n, eta, measure: rep.measure, bound, ratio: rep.measure / bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormReport {
    pub scaled: Vec<f64>,
    /// Horizon `R^{1/2 - Cδ'}` at which membership is tested.
    pub horizon: f64,
    pub radius: f64,
    pub member: bool,
    /// The `U` and `X_0^j` part of the scaled coefficients.
    pub y_c: Vec<f64>,
    pub residual: f64,
    pub residual_bound: f64,
    /// Whether the residual bound applies (`s <= ½ log R`).
    pub residual_applies: bool,
}

/// Constant in the residual bound: `2 C(L) L! Σ ||basis||_F`.
pub fn residual_constant(chart: &CoordinateChart) -> f64 {
    let l = chart.max_depth();
    let fact: f64 = (1..=l).map(|k| k as f64).product();
    2.0 * coefficient_bounds_constant(l) * fact * chart.mats.iter().map(frobenius).sum::<f64>()
}

/// Conjugates by `exp(-sX)` and checks the renormalized Bowen membership and
/// the split into a centralizer part plus a small residual.
pub fn renormalize_bowen(
    chart: &CoordinateChart,
    coeffs: &[f64],
    eps: f64,
    s: f64,
    r: f64,
    delta: f64,
    c_delta: f64,
) -> Result<RenormReport> {
    if coeffs.len() != chart.dim() {
        return Err(Error::DimensionMismatch { expected: chart.dim(), got: coeffs.len() });
    }
    if !sl2_part_vanishes(coeffs) {
        return Err(Error::PreconditionViolated("a_V and a_X must vanish".into()));
    }
    if !(r > 1.0) || !(0.0..=0.5 * (1.0 + delta) * r.ln()).contains(&s) {
        return Err(Error::PreconditionViolated(format!("need R > 1 and 0 <= s <= ½(1+δ')log R, got s={s}, R={r}")));
    }
    let l = chart.max_depth();
    let c = coefficient_bounds_constant(l);
    for slot in &chart.slots {
        for i in 0..=slot.depth {
            let a = coeffs[slot.start + i];
            if a.abs() > c * eps * r.powi(-(i as i32)) * (1.0 + 1e-12) {
                return Err(Error::PreconditionViolated(format!("coefficient X_{i}^{} exceeds the Bowen bound", slot.chain)));
            }
        }
    }
    let scaled: Vec<f64> = chart
        .coords
        .iter()
        .zip(coeffs)
        .map(|(coord, a)| match coord {
            Coord::V | Coord::X => 0.0,
            _ => (-(coord.weight() as f64) * s).exp() * a,
        })
        .collect();
    let horizon = r.powf(0.5 - c_delta * delta);
    let radius = eps.powf(1.0 / 3.0);
    let member = in_bowen_ball(chart, &scaled, horizon, radius);
    let mut y_c = vec![0.0; chart.dim()];
    y_c[2] = scaled[2];
    for slot in &chart.slots {
        y_c[slot.start] = scaled[slot.start];
    }
    let residual = dist_to_identity(&(expm(&chart.matrix_of(&scaled)) * expm(&(-chart.matrix_of(&y_c)))))?;
    let residual_bound = residual_constant(chart) * eps / r.sqrt();
    Ok(RenormReport {
        scaled,
        horizon,
        radius,
        member,
        y_c,
        residual,
        residual_bound,
        residual_applies: s <= 0.5 * r.ln(),
    })
}

/// Smallest grid horizon from which membership holds at every larger grid point.
pub fn bowen_threshold(
    chart: &CoordinateChart,
    profile: &[f64],
    eps: f64,
    delta: f64,
    c_delta: f64,
    r_grid: &[f64],
) -> Result<Option<f64>> {
    let mut r0 = None;
    for &r in r_grid.iter().rev() {
        let coeffs = bowen_profile_coeffs(chart, profile, eps, r);
        let rep = renormalize_bowen(chart, &coeffs, eps, 0.5 * r.ln(), r, delta, c_delta)?;
        if rep.member {
            r0 = Some(r);
        } else {
            break;
        }
    }
    Ok(r0)
}

/// Coefficients `a_{ij} = b_{ij} ε R^{-i}` from a normalized profile `b`.
pub fn bowen_profile_coeffs(chart: &CoordinateChart, profile: &[f64], eps: f64, r: f64) -> Vec<f64> {
    chart
        .coords
        .iter()
        .zip(profile)
        .map(|(coord, b)| match coord {
            Coord::V | Coord::X => 0.0,
            Coord::U => b * eps,
            Coord::Chain { level, .. } => b * eps * r.powi(-(*level as i32)),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub s: f64,
    pub s_max: f64,
    pub zeta_norm: f64,
    /// Chart coefficients of `C_t`.
    pub c_t: Vec<f64>,
    pub max_c: f64,
    pub max_c_floor: f64,
    pub residual: f64,
    pub residual_bound: f64,
    /// `d_G(exp(tU) g exp(-tU), e)`; the escape statement assumes this exceeds `10ε`.
    pub conjugated_distance: f64,
    pub precondition_met: bool,
}

/// Finds `s` with `||ζ(s)||_1 = 2ε` by bisection, where `ζ(s)` collects the
/// `X_0^j` coefficients of `exp(-sX) exp(tU) g exp(-tU) exp(sX)`.
pub fn escape_direction(chart: &CoordinateChart, coeffs: &[f64], t: f64, r: f64, eta: f64, eps: f64) -> Result<EscapeReport> {
    chart.check_standard(coeffs)?;
    let polys = chart.chain_polys(coeffs);
    let at = |s: f64| -> Vec<f64> {
        chart
            .coords
            .iter()
            .zip(&polys)
            .map(|(coord, p)| (-(coord.weight() as f64) * s).exp() * p.eval(t))
            .collect()
    };
    let zeta = |s: f64| -> f64 {
        let v = at(s);
        chart.slots.iter().map(|slot| v[slot.start].abs()).sum()
    };
    let s_max = 2.0 * (chart.max_depth() as f64 + 1.0) * eta * r.ln();
    let target = 2.0 * eps;
    let (z0, z1) = (zeta(0.0), zeta(s_max));
    if !(z0 >= target && z1 <= target) {
        return Err(Error::NoCrossing);
    }
    let (mut lo, mut hi) = (0.0, s_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zeta(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * s_max.max(1.0) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let full = at(s);
    let mut c_t = vec![0.0; chart.dim()];
    c_t[2] = full[2];
    for slot in &chart.slots {
        c_t[slot.start] = full[slot.start];
    }
    let n = chart.slots.len().max(1);
    let max_c = chart.slots.iter().map(|slot| c_t[slot.start].abs()).fold(0.0, f64::max);
    let residual = dist_to_identity(&(expm(&chart.matrix_of(&full)) * expm(&(-chart.matrix_of(&c_t)))))?;
    let conj0 = at(0.0);
    let conjugated_distance = frobenius(&chart.matrix_of(&conj0));
    Ok(EscapeReport {
        s,
        s_max,
        zeta_norm: zeta(s),
        c_t,
        max_c,
        max_c_floor: eps / n as f64,
        residual,
        residual_bound: r.powf(-eta),
        conjugated_distance,
        precondition_met: conjugated_distance > 10.0 * eps,
    })
}
