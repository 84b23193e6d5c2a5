//! Verification suites: each check exercises one statement over a deterministic
//! sample and records measured values against the bound it must satisfy.

use rand::Rng;
use rayon::prelude::*;

use crate::chain::{
    chain_basis, classify, gap_scan, jacobson_morozov, partition_nilpotent, partitions, single_block,
    sl_d_single_block_gr, verify_rep_relations,
};
use crate::divergence::{
    bowen_profile_coeffs, bowen_threshold, brudnyi_ganzburg, coefficient_bounds_constant, conj_poly, escape_direction,
    kak_volume_exponent, kak_volume_mc, lem_pol_check, renormalize_bowen, Coord, CoordinateChart,
};
use crate::error::{Error, Result};
use crate::flow::{cusp_tail, divergence_degree, lattice_count, matching_experiment, reduce, splitting_time};
use crate::lie::{build_sl, build_su21, direct_sum, sl_offdiag_index, sum_element, AlgebraElement, LieAlgebra};
use crate::matrix::{int, Matrix};
use crate::numeric::expm;
use crate::poly::Poly;
use crate::report::{Check, SuiteReport};
use crate::rng::{log_uniform, stream};
use crate::sl2::{
    product_m, product_matrix, product_samples, conjugator_decomposition, covering_growth, kak, psi_match,
    rotation, slide_check, unipotent_distance_check, ProductParams, M2,
};

pub const SUITES: [&str; 4] = ["chain", "divergence", "flow", "sl2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Divides sample counts by ten.
    pub quick: bool,
}

impl SuiteOptions {
    fn n(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }
}

/// A named nilpotent in a builtin algebra.
pub struct Case {
    pub name: &'static str,
    pub algebra: LieAlgebra,
    pub u: AlgebraElement,
}

/// The builtin examples used throughout the suites.
pub fn builtin_cases() -> Result<Vec<Case>> {
    let sl2 = build_sl(2)?;
    let sl3 = build_sl(3)?;
    let su21 = build_su21()?;
    let e12 = sl3.basis_element(sl_offdiag_index(3, 0, 1));
    let regular = e12.add(&sl3.basis_element(sl_offdiag_index(3, 1, 2)));
    let sl2x2 = direct_sum(&sl2, &sl2)?;
    let diag = sum_element(&[&sl2.basis_element(0), &sl2.basis_element(0)]);
    Ok(vec![
        Case { name: "sl2", u: sl2.basis_element(0), algebra: sl2 },
        Case { name: "sl3-e12", u: e12, algebra: sl3.clone() },
        Case { name: "sl3-regular", u: regular, algebra: sl3 },
        Case { name: "su21-ie12", u: su21.basis_element(2), algebra: su21 },
        Case { name: "sl2+sl2-diagonal", u: diag, algebra: sl2x2 },
    ])
}

pub fn run_suite(name: &str, opts: SuiteOptions) -> Result<SuiteReport> {
    let checks = match name {
        "chain" => chain_suite(opts)?,
        "divergence" => divergence_suite(opts)?,
        "sl2" => sl2_suite(opts)?,
        "flow" => flow_suite(opts)?,
        "all" => return run_all(opts),
        other => return Err(Error::InvalidSpec(format!("unknown suite '{other}'"))),
    };
    Ok(SuiteReport::new(name, opts.seed, checks))
}

/// Runs every suite concurrently and merges the reports in suite order.
pub fn run_all(opts: SuiteOptions) -> Result<SuiteReport> {
    let parts = SUITES.par_iter().map(|s| run_suite(s, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge("all", opts.seed, parts))
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Random nilpotent of `sl(d)`: a partition nilpotent conjugated by a random
/// unimodular integer matrix.
fn random_nilpotent<R: Rng>(rng: &mut R, g: &LieAlgebra, d: usize) -> Result<AlgebraElement> {
    let parts: Vec<Vec<usize>> = partitions(d).into_iter().filter(|p| p[0] > 1).collect();
    let u = partition_nilpotent(g, d, &parts[rng.gen_range(0..parts.len())])?;
    let mut p = Matrix::identity(d);
    for _ in 0..2 * d {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i != j {
            let mut e = Matrix::identity(d);
            e.set(i, j, int(rng.gen_range(-2..=2)));
            p = &p * &e;
        }
    }
    let pinv = p.inverse().ok_or(Error::DependentBasis)?;
    g.from_matrix(&(&(&p * &g.to_matrix(&u)) * &pinv))
}

fn chain_suite(opts: SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cases = builtin_cases()?;

    // growth rates of the named examples
    let expected: [(&str, u64, bool); 4] =
        [("sl2", 3, true), ("sl3-e12", 5, false), ("sl3-regular", 13, false), ("su21-ie12", 5, false)];
    for (name, gr, standard) in expected {
        let case = cases.iter().find(|c| c.name == name).expect("builtin case");
        let rep = classify(&case.algebra, &case.u)?;
        let depths_ok = match name {
            "sl3-e12" => rep.depths == vec![2, 1, 1, 0],
            "su21-ie12" => rep.depths == vec![2, 1, 1, 0],
            _ => true,
        };
        let ok = rep.gr == gr && rep.standard == standard && depths_ok && rep.codim_criterion_agrees;
        checks.push(
            Check::new(&format!("growth-rate/{name}"), "growth rate of the chain structure", &format!("GR = {gr}"))
                .input("case", name)
                .input("depths", format!("{:?}", rep.depths))
                .measure("gr", rep.gr as f64)
                .measure("centralizer_codim", rep.centralizer_codim as f64)
                .verdict(ok),
        );
    }

    // closed form for single Jordan blocks and its increments
    let mut mismatches = 0;
    let mut pairs = 0;
    for d in 2..=6 {
        let g = build_sl(d)?;
        let mut prev: Option<u64> = None;
        for l in 2..=d {
            let gr = chain_basis(&g, &single_block(&g, d, l)?)?.growth_rate();
            pairs += 1;
            if gr != sl_d_single_block_gr(d, l)? {
                mismatches += 1;
            }
            // U_1 = 0, so the first increment starts from GR(U_2)
            if let Some(p) = prev {
                let step = (l - 1) * (2 * d - (l - 1));
                if gr - p != step as u64 {
                    mismatches += 1;
                }
            }
            prev = Some(gr);
        }
    }
    checks.push(
        Check::new("sl-d-closed-form", "single-block growth rate in sl(d)", "exact agreement")
            .input("d", "2..=6")
            .measure("mismatches", mismatches as f64)
            .samples(pairs)
            .verdict(mismatches == 0),
    );

    // gap: no growth rate equals 4
    let gaps = gap_scan(5)?;
    let fours = gaps.iter().filter(|r| r.gr == 4).count();
    let min_nonstd = gaps.iter().map(|r| r.gr).filter(|&g| g != 3).min().unwrap_or(0);
    checks.push(
        Check::new("gap", "no growth rate strictly between 3 and 5", "GR = 3 or GR >= 5")
            .input("d", "2..=5")
            .measure("count_gr_4", fours as f64)
            .measure("min_gr_above_3", min_nonstd as f64)
            .samples(gaps.len() as u64)
            .verdict(fours == 0 && gaps.iter().all(|r| r.gr >= 3)),
    );

    // codimension criterion over all partition nilpotents
    let mut disagree = 0;
    let mut total = 0;
    for d in 2..=4 {
        let g = build_sl(d)?;
        for p in partitions(d).into_iter().filter(|p| p[0] > 1) {
            let rep = classify(&g, &partition_nilpotent(&g, d, &p)?)?;
            total += 1;
            disagree += usize::from(!rep.codim_criterion_agrees);
        }
    }
    checks.push(
        Check::new("codim-criterion", "GR = 3 iff the neutral element has centralizer codimension at most 3", "agreement")
            .measure("disagreements", disagree as f64)
            .samples(total)
            .verdict(disagree == 0),
    );

    // products of sl(2) with the diagonal nilpotent
    let sl2 = build_sl(2)?;
    let mut alg = sl2.clone();
    for k in 1..=4i64 {
        if k > 1 {
            alg = direct_sum(&alg, &sl2)?;
        }
        let u = sum_element(&vec![&sl2.basis_element(0); k as usize]);
        let rep = classify(&alg, &u)?;
        let ok = rep.gr as i64 == 3 * k
            && rep.invariant_cocompact == 3 * k - 3
            && rep.invariant_bounds == (3 * k - 4, 3 * k - 3);
        checks.push(
            Check::new(&format!("product-flow/k{k}"), "invariant of product horocycle flows", "GR = 3k")
                .input("k", k)
                .measure("gr", rep.gr as f64)
                .measure("invariant_cocompact", rep.invariant_cocompact as f64)
                .verdict(ok),
        );
    }

    // Jacobson–Morozov on random conjugates
    let samples = 50;
    let failures: usize = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut rng = stream(opts.seed ^ 0x4a4d, i as u64);
            let d = rng.gen_range(2..=4);
            let g = build_sl(d)?;
            let u = random_nilpotent(&mut rng, &g, d)?;
            let triple = jacobson_morozov(&g, &u)?;
            let cb = chain_basis(&g, &u)?;
            let ok = triple.relations_hold(&g)? && verify_rep_relations(&g, &cb, &triple).is_ok() && cb.verify(&g).is_ok();
            Ok(usize::from(!ok))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    checks.push(
        Check::new("jacobson-morozov", "sl(2) triple through a nilpotent", "all relations exact")
            .input("d", "2..=4")
            .measure("failures", failures as f64)
            .samples(samples as u64)
            .verdict(failures == 0),
    );

    // Killing form nondegeneracy for every builtin algebra
    for case in &cases {
        let rank = case.algebra.killing_form().rank();
        checks.push(
            Check::new(&format!("killing/{}", case.name), "semisimplicity witness", "nondegenerate Killing form")
                .measure("rank", rank as f64)
                .measure("dim", case.algebra.dim() as f64)
                .verdict(rank == case.algebra.dim()),
        );
    }
    Ok(checks)
}

/// Random standard coefficients (zero `V`, `X` parts) of the given size.
fn random_standard<R: Rng>(rng: &mut R, dim: usize, size: f64) -> Vec<f64> {
    let mut c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-size..=size)).collect();
    c[0] = 0.0;
    c[1] = 0.0;
    c
}

fn divergence_suite(opts: SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cases = builtin_cases()?;
    let charts: Vec<(&'static str, CoordinateChart)> = cases
        .iter()
        .map(|c| Ok((c.name, CoordinateChart::new(&c.algebra, &c.u)?)))
        .collect::<Result<Vec<_>>>()?;

    for (ci, (name, chart)) in charts.iter().enumerate() {
        // chart round trip
        let n = opts.n(200);
        let errs = (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut rng = stream(opts.seed ^ 0xc4a7, (ci * 1_000_000 + i) as u64);
                let size = 0.02 / (chart.dim() as f64).sqrt();
                let a: Vec<f64> = (0..chart.dim()).map(|_| rng.gen_range(-size..=size)).collect();
                let back = chart.decompose(&chart.recompose(&a))?;
                Ok(max_of(a.iter().zip(&back).map(|(x, y)| (x - y).abs())))
            })
            .collect::<Result<Vec<_>>>()?;
        let worst = max_of(errs);
        checks.push(
            Check::new(&format!("chart-round-trip/{name}"), "coordinate chart near the identity", "error < 1e-10")
                .measure("max_error", worst)
                .samples(n as u64)
                .ratio(worst / 1e-10)
                .verdict(worst < 1e-10),
        );

        // conj polynomial vs direct conjugation
        let n = opts.n(1000);
        let errs: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut rng = stream(opts.seed ^ 0xc0e1, (ci * 1_000_000 + i) as u64);
                let a = random_standard(&mut rng, chart.dim(), 0.1);
                let (t, s) = (rng.gen_range(0.0..=5.0), rng.gen_range(0.0..=1.0));
                let poly = chart.matrix_of(&conj_poly(chart, &a, s)?.eval(t));
                let direct = chart.matrix_of(&chart.conj_direct(&a, t, s));
                Ok((poly - &direct).norm() / direct.norm().max(1e-300))
            })
            .collect::<Result<Vec<_>>>()?;
        let worst = max_of(errs);
        checks.push(
            Check::new(&format!("conj-poly/{name}"), "adjoint action of the flow as a polynomial", "relative error < 1e-9")
                .input("t", "[0,5]")
                .input("s", "[0,1]")
                .measure("max_rel_error", worst)
                .samples(n as u64)
                .ratio(worst / 1e-9)
                .verdict(worst < 1e-9),
        );

        // degree bound per coordinate
        let mut rng = stream(opts.seed ^ 0xde9, ci as u64);
        let a = random_standard(&mut rng, chart.dim(), 0.1);
        let dp = conj_poly(chart, &a, 0.0)?;
        let mut violations = 0;
        for e in &dp.entries {
            let bound = match e.coord {
                Coord::Chain { level, depth, .. } => depth - level,
                Coord::U => 0,
                Coord::V | Coord::X => 0,
            };
            violations += usize::from(e.poly.degree() > bound);
            if let Coord::Chain { chain, level, depth } = e.coord {
                // leading term is a_{m,j} / (m - i)!
                let top = chart.index(Coord::Chain { chain, level: depth, depth }).expect("chain top");
                let fact: f64 = (1..=depth - level).map(|k| k as f64).product();
                let lead = e.poly.coeffs.get(depth - level).copied().unwrap_or(0.0);
                if (lead - a[top] / fact).abs() > 1e-12 {
                    violations += 1;
                }
            }
        }
        checks.push(
            Check::new(&format!("degree-bound/{name}"), "degree of coefficient polynomials", "deg <= m_j - i")
                .measure("violations", violations as f64)
                .verdict(violations == 0),
        );

        // volume exponent identity
        let exp = kak_volume_exponent(&chart.basis);
        let gr = chart.basis.growth_rate();
        checks.push(
            Check::new(&format!("volume-exponent/{name}"), "volume of Kakutani-Bowen balls", "exponent = GR - 2")
                .measure("exponent", exp as f64)
                .measure("gr", gr as f64)
                .verdict(exp + 2 == gr),
        );
    }

    // volume exponent identity over all partition nilpotents of small sl(d)
    let mut bad = 0;
    let mut total = 0;
    for d in 2..=4 {
        let g = build_sl(d)?;
        for p in partitions(d).into_iter().filter(|p| p[0] > 1) {
            let cb = chain_basis(&g, &partition_nilpotent(&g, d, &p)?)?;
            total += 1;
            bad += usize::from(kak_volume_exponent(&cb) + 2 != cb.growth_rate());
        }
    }
    checks.push(
        Check::new("volume-exponent/partitions", "volume of Kakutani-Bowen balls", "exponent = GR - 2")
            .measure("violations", bad as f64)
            .samples(total)
            .verdict(bad == 0),
    );

    // Monte Carlo volume slope
    let r_values: Vec<f64> = (8..=16).map(|k| 2f64.powi(k)).collect();
    for (ci, (name, chart)) in charts.iter().enumerate() {
        let samples = opts.n(20_000);
        let fit = kak_volume_mc(chart, 0.05, &r_values, samples, opts.seed ^ (ci as u64 + 17))?;
        let dev = (fit.slope - fit.expected_slope).abs();
        checks.push(
            Check::new(&format!("volume-mc/{name}"), "volume of Kakutani-Bowen balls", "|slope + (GR-2)| <= 0.05")
                .input("eps", 0.05)
                .input("R", "2^8..2^16")
                .measure("slope", fit.slope)
                .measure("expected_slope", fit.expected_slope)
                .measure("min_fraction", fit.fractions.iter().cloned().fold(1.0, f64::min))
                .samples(samples as u64)
                .ratio(dev / 0.05)
                .verdict(dev <= 0.05),
        );
    }

    // coefficient bound constant: validity and converse
    for d in 1..=5usize {
        let c = coefficient_bounds_constant(d);
        let n = opts.n(10_000);
        let (worst_fwd, worst_conv) = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(opts.seed ^ 0xcd, (d * 1_000_000 + i) as u64);
                let p = Poly::new((0..=d).map(|_| rng.gen_range(-1.0..=1.0)).collect());
                let sup = p.sup_abs(0.0, 1.0);
                let fwd = max_of(p.coeffs.iter().map(|a| a.abs() / (c * sup)));
                // converse: coefficients below ε/C force sup below ε
                let eps = 1.0;
                let q = Poly::new((0..=d).map(|_| rng.gen_range(-1.0..=1.0) * eps / c / (d as f64 + 1.0) * 0.999).collect());
                let conv = q.sup_abs(0.0, 1.0) / eps;
                (fwd, conv)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        checks.push(
            Check::new(&format!("coefficient-bound/d{d}"), "coefficients bounded by the sup norm", "|a_k| <= C(d) sup|p|")
                .input("d", d)
                .measure("C", c)
                .measure("worst_forward_ratio", worst_fwd)
                .measure("worst_converse_ratio", worst_conv)
                .samples(n as u64)
                .ratio(worst_fwd.max(worst_conv))
                .verdict(worst_fwd <= 1.0 && worst_conv < 1.0),
        );
    }

    // Brudnyi–Ganzburg on random polynomials and random subsets
    let n = opts.n(100_000);
    let (fails, worst) = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(usize, f64)> {
            let mut rng = stream(opts.seed ^ 0xb6, i as u64);
            let deg = rng.gen_range(1..=5);
            let p = Poly::new((0..=deg).map(|_| rng.gen_range(-1.0..=1.0)).collect());
            let a = rng.gen_range(0.0..0.9);
            let b = rng.gen_range(a + 0.01..=1.0);
            let omega = if rng.gen_bool(0.5) {
                vec![(a, b)]
            } else {
                let m = 0.5 * (a + b);
                vec![(a, m - 0.25 * (m - a)), (m + 0.25 * (b - m), b)]
            };
            let r = brudnyi_ganzburg(&p, (0.0, 1.0), &omega)?;
            Ok((usize::from(!r.holds), r.sup_v / r.bound))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0, 0.0f64), |acc, x| (acc.0 + x.0, acc.1.max(x.1)));
    checks.push(
        Check::new("brudnyi-ganzburg", "sup over an interval controlled by sup over a subset", "no counterexample")
            .input("max_degree", 5)
            .measure("counterexamples", fails as f64)
            .samples(n as u64)
            .ratio(worst)
            .verdict(fails == 0),
    );

    // sublevel measure bound on a polynomial family
    let eps = 1e-3;
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in 1..=5usize {
        for n in [10.0, 100.0, 1000.0] {
            for eta in [0.1, 0.5] {
                for k in 0..4u64 {
                    let mut rng = stream(opts.seed ^ 0x1e, (d as u64) * 1000 + k);
                    let b: Vec<f64> = (0..=d).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-1.0..=1.0) }).collect();
                    let base = Poly::new(b).rescale_var(1.0 / n);
                    let val = base.eval(n).abs().max(1e-12);
                    let p = base.scale(2.0 * eps / val);
                    let r = lem_pol_check(&p, eps, n, eta)?;
                    worst = worst.max(r.ratio);
                    count += 1;
                }
            }
        }
    }
    checks.push(
        Check::new("sublevel-bound", "sublevel sets of polynomials with a large endpoint value", "measure <= 40 C(d)^2 N^{1+η-η/d}")
            .measure("worst_ratio", worst)
            .samples(count)
            .ratio(worst)
            .verdict(worst <= 1.0),
    );

    // renormalization of Bowen balls
    let (_, chart) = charts.iter().find(|(n, _)| *n == "sl3-e12").expect("case");
    let r = 2f64.powi(20);
    let eps = 0.01;
    let slot = chart.slots.iter().find(|s| s.depth == 1).expect("depth-1 chain");
    let mut a = vec![0.0; chart.dim()];
    a[slot.start + 1] = eps / r;
    let rep = renormalize_bowen(chart, &a, eps, 0.5 * r.ln(), r, 0.0, 1.0)?;
    checks.push(
        Check::new("renormalization", "renormalized Bowen balls", "residual <= C ε / sqrt(R) and membership")
            .input("R", r)
            .input("eps", eps)
            .measure("residual", rep.residual)
            .measure("residual_bound", rep.residual_bound)
            .ratio(rep.residual / rep.residual_bound)
            .verdict(rep.member && rep.residual <= rep.residual_bound),
    );
    let profile: Vec<f64> = (0..chart.dim()).map(|i| if i < 2 { 0.0 } else { 0.5 }).collect();
    let grid: Vec<f64> = (4..=24).map(|k| 2f64.powi(k)).collect();
    let r0 = bowen_threshold(chart, &profile, eps, 0.0, 1.0, &grid)?;
    let sample = bowen_profile_coeffs(chart, &profile, eps, grid[grid.len() - 1]);
    checks.push(
        Check::new("renormalization-threshold", "renormalized Bowen balls", "threshold R0 exists on the grid")
            .measure("r0", r0.unwrap_or(f64::NAN))
            .measure("profile_norm", max_of(sample.iter().map(|x| x.abs())))
            .verdict(r0.is_some()),
    );

    // escape direction
    let eps = 1e-3;
    let (r, eta, t) = (2f64.powi(20), 0.01, 100.0);
    let nslots = chart.slots.len() as f64;
    let mut a = vec![0.0; chart.dim()];
    a[slot.start + 1] = 8.0 * eps / nslots / t;
    let rep = escape_direction(chart, &a, t, r, eta, eps)?;
    checks.push(
        Check::new("escape-direction", "divergence along non-sl2 chains", "crossing found with bounded residual")
            .measure("s", rep.s)
            .measure("zeta_norm", rep.zeta_norm)
            .measure("residual", rep.residual)
            .measure("max_c", rep.max_c)
            .ratio(rep.residual / rep.residual_bound)
            .verdict(rep.residual < rep.residual_bound && rep.max_c >= rep.max_c_floor),
    );
    Ok(checks)
}

fn sl2_suite(opts: SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // KAK recomposition and determinant
    let n = opts.n(10_000);
    let (rec, det) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(opts.seed ^ 0x6a, i as u64);
            let g = rotation(rng.gen_range(0.0..7.0)) * crate::sl2::exp_x(rng.gen_range(0.0..10.0)) * rotation(rng.gen_range(0.0..7.0));
            let k = kak(&g);
            let back = k.recompose();
            // det error scales with ||g||², so it is reported relative to it
            ((back - g).norm() / g.norm(), (back.determinant() - 1.0).abs() / g.norm_squared())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    checks.push(
        Check::new("kak-recomposition", "KAK decomposition", "relative error < 1e-10, |det - 1| / ||g||² < 1e-12")
            .input("max_s", 10)
            .measure("max_rel_error", rec)
            .measure("max_det_error", det)
            .samples(n as u64)
            .ratio(rec / 1e-10)
            .verdict(rec < 1e-10 && det < 1e-12),
    );

    // distance along the unipotent orbit
    let ts: Vec<f64> = (0..=60).map(|k| 2.0 * 10f64.powf(k as f64 / 10.0)).collect();
    let rep = unipotent_distance_check(&ts)?;
    let last = rep.rows.last().expect("nonempty").ratio;
    checks.push(
        Check::new("unipotent-distance", "distance to the identity along a unipotent orbit", "s(t) <= 2 log t")
            .input("t", "2..2e6")
            .measure("max_ratio", rep.max_ratio)
            .measure("ratio_at_2e6", last)
            .samples(ts.len() as u64)
            .ratio(rep.max_ratio / 2.0)
            .verdict(rep.within_bound),
    );

    // ψ matching over an admissible grid
    let n = opts.n(10_000);
    let eps1 = 0.1;
    let rows: Vec<(f64, bool)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let mut rng = stream(opts.seed ^ 0x9e, i as u64);
            let a_v = if rng.gen_bool(0.1) { 0.0 } else { log_uniform(&mut rng, 1e-8, 1e-2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 } };
            let a_x = rng.gen_range(-0.999 * eps1..0.999 * eps1);
            let tmax = if a_v == 0.0 { 1e4 } else { eps1 / a_v.abs() };
            let t = rng.gen_range(-tmax..=tmax);
            let m = psi_match(a_v, a_x, t, eps1)?;
            let scale = 1.0 + m.psi.abs();
            Ok((m.residual / scale, m.alpha_bound_ok && m.beta_bound_ok))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = max_of(rows.iter().map(|r| r.0));
    let bounds_ok = rows.iter().all(|r| r.1);
    checks.push(
        Check::new("psi-matching", "time change straightening a transverse perturbation", "residual < 1e-10, |α| <= 2|a_V|, |β| <= 2(|a_X| + |a_V||t|)")
            .input("eps1", eps1)
            .measure("max_residual", worst)
            .samples(n as u64)
            .ratio(worst / 1e-10)
            .verdict(worst < 1e-10 && bounds_ok),
    );

    // ψ' under the small-parameter hypotheses
    let n = opts.n(10_000);
    let eps = 0.2f64;
    let worst = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(opts.seed ^ 0x9f, i as u64);
            let a_v = log_uniform(&mut rng, 1e-8, 1e-2);
            let a_x = rng.gen_range(-0.999 * eps * eps..0.999 * eps * eps);
            let t = rng.gen_range(-1.0..=1.0) * eps * eps / a_v;
            Ok((psi_match(a_v, a_x, t, eps1)?.psi_prime - 1.0).abs() / eps)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(
        Check::new("psi-derivative", "time change is close to an isometry", "|ψ' - 1| < ε")
            .input("eps", eps)
            .measure("worst_ratio", worst)
            .samples(n as u64)
            .ratio(worst)
            .verdict(worst < 1.0),
    );

    // slide estimate
    let g = build_sl(2)?;
    let chart = CoordinateChart::new(&g, &g.basis_element(0))?;
    let (eps, r) = (0.1f64, 2f64.powi(16));
    let mut members = 0;
    let mut total = 0;
    let mut worst_res = 0.0f64;
    for l in [0.0, r / 8.0, r / 4.0, -r / 4.0, r / 3.0, -r / 3.0] {
        for frac in [0.0, 0.5, 0.999] {
            let a = [frac * eps.powi(3) / r, 0.5 * frac * eps.powi(3), 0.5 * eps.powi(3)];
            let rep = slide_check(&chart, &a, r, l, eps, eps1)?;
            total += 1;
            members += usize::from(rep.member);
            worst_res = worst_res.max(rep.residual);
        }
    }
    checks.push(
        Check::new("slide", "sliding a Kakutani perturbation along the flow", "membership in Kak(R/2, ε)")
            .input("R", r)
            .input("eps", eps)
            .measure("members", members as f64)
            .measure("max_residual", worst_res)
            .samples(total)
            .verdict(members == total as usize && worst_res < 1e-9),
    );

    // product trace formula and window
    let n = opts.n(10_000);
    let samples = product_samples(n, opts.seed ^ 0xa9, 0.25, 1.0);
    let results = samples.par_iter().map(|p| product_m(p, false)).collect::<Result<Vec<_>>>()?;
    let worst_rel = max_of(results.iter().map(|r| r.rel_err));
    let outside = results.iter().filter(|r| !r.in_window).count();
    let low = results.iter().map(|r| r.trace_direct.abs() / r.window.0).fold(f64::INFINITY, f64::min);
    let high = max_of(results.iter().map(|r| r.trace_direct.abs() / r.window.1));
    checks.push(
        Check::new("product-trace", "trace of the product of triple exponentials", "closed form = direct (rel 1e-9)")
            .measure("max_rel_error", worst_rel)
            .samples(n as u64)
            .ratio(worst_rel / 1e-9)
            .verdict(worst_rel < 1e-9),
    );
    checks.push(
        Check::new("product-trace-window", "trace of the product of triple exponentials", "2^{20jδ-1} <= |Tr| <= 2^{80jδ+1}")
            .input("eps_prime", crate::sl2::PRODUCT_EPS_PRIME)
            .measure("outside", outside as f64)
            .measure("min_lower_ratio", low)
            .measure("max_upper_ratio", high)
            .samples(n as u64)
            .ratio(high.max(1.0 / low))
            .verdict(outside == 0),
    );

    // conjugator decomposition
    let conj = samples
        .par_iter()
        .map(|p| Ok((p.j_delta, conjugator_decomposition(&product_matrix(p), p.j_delta)?, p)))
        .collect::<Result<Vec<(f64, _, &ProductParams)>>>()?;
    let worst_res = max_of(conj.iter().map(|c| c.1.residual));
    let worst_eig = max_of(conj.iter().map(|c| c.1.eigen_consistency));
    let outside = conj.iter().filter(|c| !c.1.in_window).count();
    // distance of m² to the identity through its KAK radius, per unit jδ
    let k_prime = max_of(conj.iter().map(|(jd, _, p)| {
        let m = product_matrix(p);
        kak(&(m * m)).s / jd
    }));
    let max_abs_alpha = max_of(conj.iter().map(|c| c.1.alpha.abs()));
    let max_log_alpha = conj.iter().map(|c| c.1.log_abs_alpha).fold(f64::NEG_INFINITY, f64::max);
    checks.push(
        Check::new("conjugator", "diagonalizing the square of a hyperbolic product", "residual < 1e-8, s in window")
            .measure("max_residual", worst_res)
            .measure("max_eigen_consistency", worst_eig)
            .measure("outside_window", outside as f64)
            .measure("k_prime_measured", k_prime)
            .measure("max_abs_alpha", max_abs_alpha)
            .measure("max_log_abs_alpha", max_log_alpha)
            .samples(n as u64)
            .ratio(worst_res / 1e-8)
            .verdict(worst_res < 1e-8 && worst_eig < 1e-9 && outside == 0 && k_prime.is_finite()),
    );

    // covering numbers of balls
    // the finest net needs a dense cloud, so the budget does not shrink in quick mode
    let samples = 400_000;
    let train = [(0.2, 1.0), (0.1, 1.0), (0.2, 0.5), (0.2, 1.5)];
    let fit = covering_growth(&train, &[(0.2, 2.0)], samples, opts.seed ^ 0xc0)?;
    let size = |e: f64| fit.points.iter().find(|p| p.eps == e && p.radius == 1.0).map(|p| p.size as f64);
    let ratio = size(0.1).unwrap_or(0.0) / size(0.2).unwrap_or(1.0);
    let holdout_ok = fit.holdout.iter().all(|h| h.2);
    checks.push(
        Check::new("covering-growth", "covering numbers of balls in SL(2,R)", "N <= C ε^{-3} e^{2CR}; halving ε multiplies N by 8 ± 30%")
            .measure("c_fit", fit.c_fit)
            .measure("eps_exponent", fit.eps_exponent)
            .measure("radius_rate", fit.radius_rate)
            .measure("halving_ratio", ratio)
            .measure("holdout_size", fit.holdout.first().map(|h| h.0.size as f64).unwrap_or(f64::NAN))
            .measure("holdout_bound", fit.holdout.first().map(|h| h.1).unwrap_or(f64::NAN))
            .samples(samples as u64)
            .verdict(holdout_ok && (ratio - 8.0).abs() <= 0.3 * 8.0),
    );
    Ok(checks)
}

fn flow_suite(opts: SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // reduction is constant on right orbits
    let n = opts.n(1000);
    let failures: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(opts.seed ^ 0x7ed, i as u64);
            let g = rotation(rng.gen_range(0.0..7.0)) * crate::sl2::exp_x(rng.gen_range(0.0..2.0)) * rotation(rng.gen_range(0.0..7.0));
            let gamma = random_gamma(&mut rng, 1000);
            let (r1, r2) = (reduce(&g), reduce(&(g * crate::flow::ito_f(&gamma))));
            let word = crate::flow::imul(&gamma, &r2.gamma);
            let neg = crate::flow::imul(&word, &[[-1, 0], [0, -1]]);
            usize::from(word != r1.gamma && neg != r1.gamma)
        })
        .sum();
    checks.push(
        Check::new("reduce-orbit-invariance", "fundamental domain reduction", "same reducing word up to sign")
            .measure("failures", failures as f64)
            .samples(n as u64)
            .verdict(failures == 0),
    );

    // flow semigroup after reduction
    let n = opts.n(1000);
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(opts.seed ^ 0x5e, i as u64);
            let g = rotation(rng.gen_range(0.0..7.0)) * crate::sl2::exp_x(rng.gen_range(0.0..2.0));
            let x = reduce(&g);
            let (s, t) = (rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
            let a = crate::flow::flow(&crate::flow::flow(&x, s), t).rep;
            let b = crate::flow::flow(&x, s + t).rep;
            (a - b).norm().min((a + b).norm())
        })
        .reduce(|| 0.0, f64::max);
    checks.push(
        Check::new("flow-semigroup", "flow on the quotient", "representatives agree to 1e-9")
            .measure("max_error", worst)
            .samples(n as u64)
            .ratio(worst / 1e-9)
            .verdict(worst < 1e-9),
    );

    // matching with and without the time change
    let y = M2::new(1.1, 0.3, 0.2, (1.0 + 0.3 * 0.2) / 1.1);
    let eps = 0.2f64;
    let r = 2f64.powi(12);
    let rec = matching_experiment(&y, r, eps, eps.powi(5) / r, 0.0, 0.0, 1000)?;
    checks.push(
        Check::new("matching", "explicit matching of nearby orbits", "sup d <= ε^3 with ψ, > ε^3 without")
            .input("R", r)
            .input("eps", eps)
            .measure("sup_corrected", rec.sup_corrected)
            .measure("sup_uncorrected", rec.sup_uncorrected)
            .measure("max_slope_defect", rec.max_slope_defect)
            .samples(rec.grid_points as u64)
            .ratio(rec.sup_corrected / eps.powi(3))
            .verdict(rec.corrected_ok && rec.control_fails),
    );

    // splitting time examples and monotonicity
    let g = build_sl(2)?;
    let chart = CoordinateChart::new(&g, &g.basis_element(0))?;
    let yf = crate::numeric::FMat::from_row_slice(2, 2, &[1.2, 0.5, 0.1, (1.0 + 0.05) / 1.2]);
    let cap = 2f64.powi(40);
    let v = expm(&(&chart.basis_matrices()[0] * 1e-6));
    let s_v = splitting_time(&chart, &(&v * &yf), &yf, 0.1, cap)?;
    let x = expm(&(&chart.basis_matrices()[1] * 1e-3));
    let s_x = splitting_time(&chart, &(&x * &yf), &yf, 0.1, cap)?;
    let pert = expm(&(&chart.basis_matrices()[0] * 3e-5)) * expm(&(&chart.basis_matrices()[2] * 1e-4));
    let mut mono = true;
    let mut last = 0.0;
    for e in [0.01, 0.02, 0.05, 0.1, 0.2] {
        let s = splitting_time(&chart, &(&pert * &yf), &yf, e, cap)?.s;
        mono &= s >= last;
        last = s;
    }
    let ratio_v = s_v.s / 1e5;
    checks.push(
        Check::new("splitting-time", "splitting time of nearby points", "S ≈ ε/a_V within factor 2; X direction capped; monotone in ε")
            .measure("s_v_direction", s_v.s)
            .measure("s_x_direction", s_x.s)
            .ratio(ratio_v.max(1.0 / ratio_v) / 2.0)
            .verdict((0.5..=2.0).contains(&ratio_v) && s_x.capped && mono),
    );

    // cusp tail
    let n = opts.n(100_000).max(10_000);
    let tail = cusp_tail(n, opts.seed ^ 0xc5)?;
    let dominated = tail.c_dominating <= 1.5 * tail.c_fit;
    checks.push(
        Check::new("cusp-tail", "exponential decay of cusp excursions", "κ in [0.85, 1.15]")
            .measure("kappa", tail.kappa)
            .measure("kappa_ci", tail.kappa_ci)
            .measure("c_fit", tail.c_fit)
            .measure("c_dominating", tail.c_dominating)
            .samples(n as u64)
            .ratio((tail.kappa - 1.0).abs() / 0.15)
            .verdict((0.85..=1.15).contains(&tail.kappa) && tail.kappa > 0.0 && dominated),
    );

    // lattice point counts
    let ts = [50.0, 100.0, 200.0, 400.0, 800.0];
    let lc = lattice_count(&ts)?;
    let monotone = lc.counts.windows(2).all(|w| w[1] >= w[0]);
    checks.push(
        Check::new("lattice-count", "growth of lattice points in norm balls", "exponent in [1.9, 2.1]")
            .input("T", "50..800")
            .measure("exponent", lc.exponent)
            .measure("count_800", lc.counts[4] as f64)
            .ratio((lc.exponent - 2.0).abs() / 0.1)
            .verdict((1.9..=2.1).contains(&lc.exponent) && monotone),
    );

    // divergence degrees
    for (idx, name, expect) in [(0usize, "V", 2.0), (1, "X", 1.0), (2, "U", 0.0)] {
        let fit = divergence_degree(&chart, idx, 1e-6, 1e4)?;
        let dev = (fit.slope - expect).abs();
        checks.push(
            Check::new(&format!("divergence-degree/{name}"), "polynomial divergence of nearby orbits", "|slope - degree| <= 0.05")
                .input("direction", name)
                .measure("slope", fit.slope)
                .measure("horizon_used", fit.horizon_used)
                .ratio(dev / 0.05)
                .verdict(dev <= 0.05),
        );
    }
    // chain vectors of sl(3): slope equals the level
    let sl3 = build_sl(3)?;
    let c3 = CoordinateChart::new(&sl3, &sl3.basis_element(sl_offdiag_index(3, 0, 1)))?;
    for slot in &c3.slots {
        for level in 0..=slot.depth {
            let fit = divergence_degree(&c3, slot.start + level, 1e-6, 1e4)?;
            let dev = (fit.slope - level as f64).abs();
            checks.push(
                Check::new(
                    &format!("divergence-degree/sl3-chain{}-level{level}", slot.chain),
                    "polynomial divergence of nearby orbits",
                    "|slope - level| <= 0.05",
                )
                .measure("slope", fit.slope)
                .ratio(dev / 0.05)
                .verdict(dev <= 0.05),
            );
        }
    }
    Ok(checks)
}

fn random_gamma<R: Rng>(rng: &mut R, bound: i64) -> crate::flow::IMat {
    loop {
        let (a, c) = (rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound));
        if num_integer::gcd(a, c) != 1 {
            continue;
        }
        // solve a d - b c = 1 by the extended Euclidean algorithm
        let e = num_integer::Integer::extended_gcd(&a, &c);
        let sign = e.gcd;
        let (d, b) = (e.x * sign, -e.y * sign);
        let k = rng.gen_range(-3..=3);
        let m = [[a, b + k * a], [c, d + k * c]];
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 1 && m.iter().flatten().all(|v| v.abs() <= bound) {
            return m;
        }
    }
}
