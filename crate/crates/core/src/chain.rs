//! Jordan chains of `ad_U`, sl(2) triples, growth rates and the invariant verdicts.
//!
//! Chain vectors are indexed from the bottom: `chain.vectors[i]` is `X_i`, with
//! `ad_U(X_i) = X_{i-1}` and `ad_U(X_0) = 0`. A chain of depth `m` has `m + 1`
//! vectors. In the canonical basis each `X_i` is an `ad_X` eigenvector with
//! eigenvalue `m - 2i`, and `X_0` is a highest weight vector.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{build_sl, sl_offdiag_index, AlgebraElement, LieAlgebra};
use crate::matrix::{format_scalar, independent_subset, int, vec_is_zero, Matrix, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub vectors: Vec<AlgebraElement>,
}

impl Chain {
    pub fn depth(&self) -> usize {
        self.vectors.len() - 1
    }
}

/// Standard triple: `[X,U] = 2U`, `[X,V] = -2V`, `[U,V] = X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Triple {
    pub v: AlgebraElement,
    pub x: AlgebraElement,
    pub u: AlgebraElement,
}

impl Sl2Triple {
    pub fn relations_hold(&self, g: &LieAlgebra) -> Result<bool> {
        let two = int(2);
        Ok(g.bracket(&self.x, &self.u)? == self.u.scale(&two)
            && g.bracket(&self.x, &self.v)? == self.v.scale(&-two)
            && g.bracket(&self.u, &self.v)? == self.x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBasis {
    pub u: AlgebraElement,
    /// Sorted by depth, deepest first.
    pub chains: Vec<Chain>,
    pub triple: Option<Sl2Triple>,
    /// Position of the Jacobson–Morozov chain `(-V/2, -X/2, U)` in `chains`.
    pub sl2_chain: Option<usize>,
}

impl ChainBasis {
    pub fn depths(&self) -> Vec<usize> {
        self.chains.iter().map(Chain::depth).collect()
    }

    pub fn growth_rate(&self) -> u64 {
        growth_rate_of_depths(&self.depths())
    }

    /// Longest chain depth `L_U`.
    pub fn max_depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Chains other than the Jacobson–Morozov chain, with their positions.
    pub fn non_sl2_chains(&self) -> impl Iterator<Item = (usize, &Chain)> {
        self.chains.iter().enumerate().filter(move |(j, _)| Some(*j) != self.sl2_chain)
    }

    /// Re-checks the chain relations and the basis property exactly.
    pub fn verify(&self, g: &LieAlgebra) -> Result<()> {
        let ad = g.ad(&self.u)?;
        let mut all = Vec::new();
        for (j, c) in self.chains.iter().enumerate() {
            for (i, x) in c.vectors.iter().enumerate() {
                let image = ad.apply(x);
                let ok = if i == 0 { image.is_zero() } else { image == c.vectors[i - 1] };
                if !ok {
                    return Err(Error::EigenAlignmentFailed(format!("ad_U relation fails at chain {j}, level {i}")));
                }
                all.push(x.coeffs.clone());
            }
        }
        if all.len() != g.dim() || Matrix::from_columns(&all).rank() != g.dim() {
            return Err(Error::EigenAlignmentFailed("chain vectors do not form a basis".into()));
        }
        Ok(())
    }
}

/// `½ Σ m(m+1)`.
pub fn growth_rate_of_depths(depths: &[usize]) -> u64 {
    depths.iter().map(|&m| (m * (m + 1) / 2) as u64).sum()
}

fn nilpotency_index(op: &Matrix) -> Result<u32> {
    let n = op.rows();
    let mut p = Matrix::identity(n);
    for k in 0..=n as u32 {
        if p.is_zero() {
            return Ok(k);
        }
        p = &p * op;
    }
    Err(Error::NotNilpotent)
}

/// Jordan chains of a nilpotent operator, each returned bottom-first.
///
/// Chain tops of length `k` are taken from a basis of `ker N^k`, skipping any
/// candidate already in `ker N^{k-1}` plus the level-`k` images of longer
/// chains. Candidates are scanned in kernel-basis order.
pub fn jordan_chains(op: &Matrix) -> Result<Vec<Vec<Vec<Scalar>>>> {
    assert!(op.is_square());
    let p = nilpotency_index(op)? as usize;
    let n = op.rows();
    let mut powers = vec![Matrix::identity(n)];
    for k in 1..=p {
        powers.push(&powers[k - 1] * op);
    }
    let kernels: Vec<Vec<Vec<Scalar>>> = powers.iter().map(Matrix::null_space).collect();
    let mut tops: Vec<(usize, Vec<Scalar>)> = Vec::new();
    for k in (1..=p).rev() {
        let mut span: Vec<Vec<Scalar>> = kernels[k - 1].clone();
        for (len, top) in &tops {
            span.push(powers[len - k].mul_vec(top));
        }
        let mut rank = if span.is_empty() { 0 } else { Matrix::from_columns(&span).rank() };
        for cand in &kernels[k] {
            span.push(cand.clone());
            let r = Matrix::from_columns(&span).rank();
            if r > rank {
                rank = r;
                tops.push((k, cand.clone()));
            } else {
                span.pop();
            }
        }
    }
    Ok(tops
        .into_iter()
        .map(|(len, top)| (0..len).map(|i| powers[len - 1 - i].mul_vec(&top)).collect())
        .collect())
}

fn check_nilpotent(g: &LieAlgebra, u: &AlgebraElement) -> Result<Matrix> {
    let ad = g.ad(u)?.matrix;
    if !ad.pow(g.dim() as u32).is_zero() {
        return Err(Error::NotNilpotent);
    }
    Ok(ad)
}

/// Jordan chains of `ad_U` straight from kernel filtrations, without re-basing.
pub fn raw_chain_basis(g: &LieAlgebra, u: &AlgebraElement) -> Result<ChainBasis> {
    let ad = check_nilpotent(g, u)?;
    let chains = jordan_chains(&ad)?
        .into_iter()
        .map(|vs| Chain { vectors: vs.into_iter().map(AlgebraElement::new).collect() })
        .collect();
    Ok(ChainBasis { u: u.clone(), chains, triple: None, sl2_chain: None })
}

/// Completes a nonzero nilpotent `U` to an sl(2) triple by exact linear solves.
pub fn jacobson_morozov(g: &LieAlgebra, u: &AlgebraElement) -> Result<Sl2Triple> {
    if u.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ad_u = check_nilpotent(g, u)?;
    let n = g.dim();
    // H = [U, Z] with [H, U] = 2U, i.e. ad_U² Z = -2U.
    let ad_u2 = &ad_u * &ad_u;
    let target: Vec<Scalar> = u.coeffs.iter().map(|c| c * int(-2)).collect();
    let z = ad_u2
        .solve(&target)
        .ok_or_else(|| Error::EigenAlignmentFailed("no neutral element in the image of ad_U".into()))?;
    let h = AlgebraElement::new(ad_u.mul_vec(&z));
    // V0 with [U, V0] = H, then correct by w in ker ad_U so that [H, V] = -2V.
    let v0 = ad_u
        .solve(&h.coeffs)
        .ok_or_else(|| Error::EigenAlignmentFailed("H is not in the image of ad_U".into()))?;
    let ad_h = g.ad(&h)?.matrix;
    let shifted = &ad_h + &Matrix::identity(n).scale(&int(2));
    let rhs_bottom: Vec<Scalar> = shifted.mul_vec(&v0).into_iter().map(|x| -x).collect();
    let stacked = ad_u.vstack(&shifted);
    let mut rhs = vec![Scalar::zero(); n];
    rhs.extend(rhs_bottom);
    let w = stacked
        .solve(&rhs)
        .ok_or_else(|| Error::EigenAlignmentFailed("no V completing the triple".into()))?;
    let v = AlgebraElement::new(v0.iter().zip(&w).map(|(a, b)| a + b).collect());
    let triple = Sl2Triple { v, x: h, u: u.clone() };
    debug_assert!(triple.relations_hold(g)?);
    Ok(triple)
}

/// Canonical chain basis: highest weight vectors of the triple's adjoint
/// representation, lowered by `ad_V` and normalised so that `ad_U` steps down
/// by exactly one level. The Jacobson–Morozov chain has `X_0 = U`.
pub fn chain_basis(g: &LieAlgebra, u: &AlgebraElement) -> Result<ChainBasis> {
    let raw = raw_chain_basis(g, u)?;
    if u.is_zero() {
        return Ok(raw);
    }
    let triple = jacobson_morozov(g, u)?;
    let cb = chain_basis_with_triple(g, &triple)?;
    let mut raw_depths = raw.depths();
    raw_depths.sort_unstable_by(|a, b| b.cmp(a));
    if cb.depths() != raw_depths {
        return Err(Error::EigenAlignmentFailed(format!(
            "re-based depths {:?} differ from Jordan depths {:?}",
            cb.depths(),
            raw_depths
        )));
    }
    Ok(cb)
}

/// Canonical chain basis for a given triple.
pub fn chain_basis_with_triple(g: &LieAlgebra, triple: &Sl2Triple) -> Result<ChainBasis> {
    let n = g.dim();
    let ad_u = g.ad(&triple.u)?.matrix;
    let ad_x = g.ad(&triple.x)?.matrix;
    let ad_v = g.ad(&triple.v)?.matrix;
    let mut chains = Vec::new();
    let mut sl2_chain = None;
    let max_weight = n; // weights never exceed dim - 1
    for m in (0..max_weight).rev() {
        let shifted = &ad_x - &Matrix::identity(n).scale(&int(m as i64));
        let mut hw = ad_u.vstack(&shifted).null_space();
        if hw.is_empty() {
            continue;
        }
        if m == 2 {
            let mut cands = vec![triple.u.coeffs.clone()];
            cands.extend(hw);
            let keep = independent_subset(&cands);
            hw = keep.into_iter().map(|i| cands[i].clone()).collect();
            sl2_chain = Some(chains.len());
        }
        for top in hw {
            let mut vectors = vec![AlgebraElement::new(top)];
            for i in 1..=m {
                let lowered = ad_v.mul_vec(&vectors[i - 1].coeffs);
                let norm = Scalar::one() / int((i * (m - i + 1)) as i64);
                vectors.push(AlgebraElement::new(lowered.iter().map(|x| x * &norm).collect()));
            }
            if !vec_is_zero(&ad_v.mul_vec(&vectors[m].coeffs)) {
                return Err(Error::EigenAlignmentFailed(format!("weight {m} chain does not terminate under ad_V")));
            }
            chains.push(Chain { vectors });
        }
    }
    let cb = ChainBasis { u: triple.u.clone(), chains, triple: Some(triple.clone()), sl2_chain };
    cb.verify(g)?;
    Ok(cb)
}

/// Per-chain data realised by the triple's action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRepresentation {
    pub depth: usize,
    /// `ad_X` eigenvalue of `X_i`, expected `m - 2i`.
    pub eigenvalues: Vec<i64>,
    /// `ad_V(X_i) = a_i X_{i+1}`; one constant per `i < m`, as rational strings.
    pub v_constants: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepReport {
    pub chains: Vec<ChainRepresentation>,
}

/// Confirms the sl(2) representation relations on every chain vector.
pub fn verify_rep_relations(g: &LieAlgebra, cb: &ChainBasis, triple: &Sl2Triple) -> Result<RepReport> {
    let ad_u = g.ad(&triple.u)?;
    let ad_x = g.ad(&triple.x)?;
    let ad_v = g.ad(&triple.v)?;
    let mut reports = Vec::new();
    for (j, c) in cb.chains.iter().enumerate() {
        let m = c.depth();
        let mut eigenvalues = Vec::new();
        let mut v_constants = Vec::new();
        for (i, x) in c.vectors.iter().enumerate() {
            let expected = m as i64 - 2 * i as i64;
            if ad_x.apply(x) != x.scale(&int(expected)) {
                return Err(Error::EigenAlignmentFailed(format!(
                    "chain {j} level {i} is not an ad_X eigenvector with eigenvalue {expected}"
                )));
            }
            eigenvalues.push(expected);
            let up = ad_u.apply(x);
            if (i == 0 && !up.is_zero()) || (i > 0 && up != c.vectors[i - 1]) {
                return Err(Error::EigenAlignmentFailed(format!("ad_U relation fails at chain {j} level {i}")));
            }
            let down = ad_v.apply(x);
            if i == m {
                if !down.is_zero() {
                    return Err(Error::EigenAlignmentFailed(format!("ad_V does not kill the bottom of chain {j}")));
                }
            } else {
                let next = &c.vectors[i + 1];
                let k = next.coeffs.iter().position(|a| !a.is_zero()).expect("chain vector is nonzero");
                let a = &down.coeffs[k] / &next.coeffs[k];
                if a.is_zero() || down != next.scale(&a) {
                    return Err(Error::EigenAlignmentFailed(format!("ad_V is not a nonzero step on chain {j}")));
                }
                v_constants.push(format_scalar(&a));
            }
        }
        reports.push(ChainRepresentation { depth: m, eigenvalues, v_constants });
    }
    Ok(RepReport { chains: reports })
}

/// Verdict on the Kakutani invariant of the flow generated by `U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub algebra: String,
    pub depths: Vec<usize>,
    pub gr: u64,
    /// Invariant value for cocompact lattices, `GR - 3`.
    pub invariant_cocompact: i64,
    /// Bounds `(GR - 4, GR - 3)` valid for every lattice.
    pub invariant_bounds: (i64, i64),
    pub standard: bool,
    /// `GR == 3 || GR >= 5`.
    pub gap_witness: bool,
    /// `dim G - dim C(X)` for the neutral element `X` of the triple.
    pub centralizer_codim: usize,
    /// Whether `GR == 3` agrees with `dim G - dim C(X) <= 3`.
    pub codim_criterion_agrees: bool,
}

pub fn classify(g: &LieAlgebra, u: &AlgebraElement) -> Result<GrowthReport> {
    if u.is_zero() {
        return Err(Error::ZeroElement);
    }
    let cb = chain_basis(g, u)?;
    let triple = cb.triple.as_ref().expect("nonzero U has a triple");
    let gr = cb.growth_rate();
    let codim = g.dim() - g.centralizer(std::slice::from_ref(&triple.x))?.len();
    let gri = gr as i64;
    Ok(GrowthReport {
        algebra: g.label().to_string(),
        depths: cb.depths(),
        gr,
        invariant_cocompact: gri - 3,
        invariant_bounds: (gri - 4, gri - 3),
        standard: gr == 3,
        gap_witness: gr == 3 || gr >= 5,
        centralizer_codim: codim,
        codim_criterion_agrees: (gr == 3) == (codim <= 3),
    })
}

/// Closed form for `GR(E_12 + … + E_{l-1,l})` in `sl(d)`.
pub fn sl_d_single_block_gr(d: usize, l: usize) -> Result<u64> {
    if l < 2 || l > d {
        return Err(Error::OutOfRange(format!("need 2 <= l <= d, got l={l}, d={d}")));
    }
    let (d, l) = (d as u64, l as u64);
    Ok(l * (4 * l + 1) * (l - 1) / 6 + l * (d - l) * (l - 1))
}

/// All partitions of `d`, parts non-increasing, in reverse lexicographic order.
pub fn partitions(d: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

/// Sum of elementary Jordan blocks of the given sizes, as an element of `sl(d)`.
pub fn partition_nilpotent(g: &LieAlgebra, d: usize, parts: &[usize]) -> Result<AlgebraElement> {
    if parts.iter().sum::<usize>() != d || g.ambient_dim() != d || g.dim() != d * d - 1 {
        return Err(Error::InvalidDimension(format!("partition {parts:?} does not fit sl({d})")));
    }
    let mut e = AlgebraElement::zero(g.dim());
    let mut offset = 0;
    for &k in parts {
        for i in offset..offset + k - 1 {
            e.coeffs[sl_offdiag_index(d, i, i + 1)] = Scalar::one();
        }
        offset += k;
    }
    Ok(e)
}

/// `U_l = E_12 + … + E_{l-1,l}` in `sl(d)`.
pub fn single_block(g: &LieAlgebra, d: usize, l: usize) -> Result<AlgebraElement> {
    if l < 1 || l > d {
        return Err(Error::OutOfRange(format!("need 1 <= l <= d, got l={l}, d={d}")));
    }
    let mut parts = vec![l];
    parts.extend(std::iter::repeat_n(1, d - l));
    partition_nilpotent(g, d, &parts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub d: usize,
    pub partition: Vec<usize>,
    pub gr: u64,
}

/// GR of every nonzero partition nilpotent in `sl(d)` for `2 <= d <= max_d`.
pub fn gap_scan(max_d: usize) -> Result<Vec<GapRecord>> {
    let jobs: Vec<(usize, Vec<usize>)> = (2..=max_d)
        .flat_map(|d| partitions(d).into_iter().filter(|p| p[0] > 1).map(move |p| (d, p)))
        .collect();
    let mut out = jobs
        .par_iter()
        .map(|(d, p)| {
            let g = build_sl(*d)?;
            let u = partition_nilpotent(&g, *d, p)?;
            let gr = chain_basis(&g, &u)?.growth_rate();
            Ok(GapRecord { d: *d, partition: p.clone(), gr })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| (a.d, &b.partition).cmp(&(b.d, &a.partition)));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassStatus {
    /// Single member: its GR differs from every other class, so it is not
    /// Kakutani equivalent to any other listed flow.
    Distinct,
    /// Several members share a GR value; equivalence is not decided.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KakutaniClass {
    pub gr: u64,
    pub members: Vec<usize>,
    pub status: ClassStatus,
}

/// Groups elements by GR; distinct values are pairwise non-equivalent.
pub fn kakutani_table(g: &LieAlgebra, elements: &[AlgebraElement]) -> Result<Vec<KakutaniClass>> {
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, u) in elements.iter().enumerate() {
        if u.is_zero() {
            return Err(Error::ZeroElement);
        }
        let gr = chain_basis(g, u)?.growth_rate();
        groups.entry(gr).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(gr, members)| {
            let status = if members.len() == 1 { ClassStatus::Distinct } else { ClassStatus::Undetermined };
            KakutaniClass { gr, members, status }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_su21, direct_sum, sl_cartan_index, sum_element};

    fn sl(d: usize) -> LieAlgebra {
        build_sl(d).unwrap()
    }

    fn e(g: &LieAlgebra, d: usize, i: usize, j: usize) -> AlgebraElement {
        g.basis_element(sl_offdiag_index(d, i, j))
    }

    #[test]
    fn sl2_chain_is_the_triple() {
        let g = sl(2);
        let u = g.basis_element(0);
        let cb = chain_basis(&g, &u).unwrap();
        assert_eq!(cb.depths(), vec![2]);
        assert_eq!(cb.sl2_chain, Some(0));
        let c = &cb.chains[0];
        assert_eq!(c.vectors[0], u);
        // X_1 = -X/2, X_2 = -V/2
        assert_eq!(c.vectors[1], g.basis_element(2).scale(&crate::matrix::frac(-1, 2)));
        assert_eq!(c.vectors[2], g.basis_element(1).scale(&crate::matrix::frac(-1, 2)));
    }

    #[test]
    fn sl3_e12_chains() {
        let g = sl(3);
        let u = e(&g, 3, 0, 1);
        let cb = chain_basis(&g, &u).unwrap();
        assert_eq!(cb.depths(), vec![2, 1, 1, 0]);
        assert_eq!(cb.growth_rate(), 5);
        // depth-1 chains: E_23 -> E_13 and E_31 -> -E_32, up to scaling
        let depth_one: Vec<&Chain> = cb.chains.iter().filter(|c| c.depth() == 1).collect();
        let pairs: Vec<(usize, usize)> = depth_one
            .iter()
            .map(|c| {
                let top = c.vectors[1].coeffs.iter().position(|x| !x.is_zero()).unwrap();
                let bottom = c.vectors[0].coeffs.iter().position(|x| !x.is_zero()).unwrap();
                (top, bottom)
            })
            .collect();
        let e23_e13 = (sl_offdiag_index(3, 1, 2), sl_offdiag_index(3, 0, 2));
        let e31_e32 = (sl_offdiag_index(3, 2, 0), sl_offdiag_index(3, 2, 1));
        assert!(pairs.contains(&e23_e13));
        assert!(pairs.contains(&e31_e32));
    }

    #[test]
    fn sl3_regular_nilpotent() {
        let g = sl(3);
        let u = e(&g, 3, 0, 1).add(&e(&g, 3, 1, 2));
        let cb = chain_basis(&g, &u).unwrap();
        assert_eq!(cb.depths(), vec![4, 2]);
        assert_eq!(cb.growth_rate(), 13);
        let t = jacobson_morozov(&g, &u).unwrap();
        assert!(t.relations_hold(&g).unwrap());
    }

    #[test]
    fn jm_sl2_standard_generators() {
        let g = sl(2);
        let t = jacobson_morozov(&g, &g.basis_element(0)).unwrap();
        assert_eq!(t.x, g.basis_element(2));
        assert_eq!(t.v, g.basis_element(1));
    }

    #[test]
    fn jm_sl3_examples() {
        let g = sl(3);
        let t = jacobson_morozov(&g, &e(&g, 3, 0, 1)).unwrap();
        assert_eq!(g.to_matrix(&t.x), Matrix::from_i64(3, 3, &[1, 0, 0, 0, -1, 0, 0, 0, 0]));
        assert_eq!(t.v, e(&g, 3, 1, 0));
        let t = jacobson_morozov(&g, &e(&g, 3, 0, 1).add(&e(&g, 3, 1, 2))).unwrap();
        assert_eq!(g.to_matrix(&t.x), Matrix::from_i64(3, 3, &[2, 0, 0, 0, 0, 0, 0, 0, -2]));
        assert_eq!(t.v, e(&g, 3, 1, 0).add(&e(&g, 3, 2, 1)).scale(&int(2)));
        assert!(t.relations_hold(&g).unwrap());
    }

    #[test]
    fn jm_errors() {
        let g = sl(2);
        assert_eq!(jacobson_morozov(&g, &AlgebraElement::zero(3)), Err(Error::ZeroElement));
        assert_eq!(jacobson_morozov(&g, &g.basis_element(2)), Err(Error::NotNilpotent));
        assert_eq!(chain_basis(&g, &g.basis_element(2)).unwrap_err(), Error::NotNilpotent);
    }

    #[test]
    fn growth_rate_values() {
        assert_eq!(growth_rate_of_depths(&[2]), 3);
        assert_eq!(growth_rate_of_depths(&[2, 1, 1, 0]), 5);
        assert_eq!(growth_rate_of_depths(&[4, 2]), 13);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(sl_d_single_block_gr(3, 2).unwrap(), 5);
        assert_eq!(sl_d_single_block_gr(3, 3).unwrap(), 13);
        assert_eq!(sl_d_single_block_gr(4, 3).unwrap() - sl_d_single_block_gr(4, 2).unwrap(), 12);
        assert!(sl_d_single_block_gr(3, 1).is_err());
        assert!(sl_d_single_block_gr(3, 4).is_err());
    }

    #[test]
    fn rep_relations_report() {
        let g = sl(3);
        let u = e(&g, 3, 0, 1);
        let cb = chain_basis(&g, &u).unwrap();
        let t = cb.triple.clone().unwrap();
        let rep = verify_rep_relations(&g, &cb, &t).unwrap();
        assert_eq!(rep.chains[0].eigenvalues, vec![2, 0, -2]);
        assert_eq!(rep.chains[1].eigenvalues, vec![1, -1]);
        assert_eq!(rep.chains[3].eigenvalues, vec![0]);
        assert!(rep.chains[3].v_constants.is_empty());
        // raw chains need not be ad_X homogeneous
        let raw = raw_chain_basis(&g, &u).unwrap();
        let _ = verify_rep_relations(&g, &raw, &t);
    }

    #[test]
    fn classify_examples() {
        let g = sl(3);
        let r = classify(&g, &e(&g, 3, 0, 1)).unwrap();
        assert_eq!((r.gr, r.standard, r.invariant_bounds, r.invariant_cocompact), (5, false, (1, 2), 2));
        assert!(r.codim_criterion_agrees);

        let s = direct_sum(&sl(2), &sl(3)).unwrap();
        let u = sum_element(&[&sl(2).basis_element(0), &AlgebraElement::zero(8)]);
        let r = classify(&s, &u).unwrap();
        assert_eq!(r.gr, 3);
        assert!(r.standard && r.codim_criterion_agrees);

        let s2 = direct_sum(&sl(2), &sl(2)).unwrap();
        let u = sum_element(&[&sl(2).basis_element(0), &sl(2).basis_element(0)]);
        let r = classify(&s2, &u).unwrap();
        assert_eq!((r.gr, r.invariant_cocompact), (6, 3));
    }

    #[test]
    fn su21_ie12_flow() {
        let g = build_su21().unwrap();
        let r = classify(&g, &g.basis_element(2)).unwrap();
        assert_eq!(r.depths, vec![2, 1, 1, 0]);
        assert_eq!(r.gr, 5);
    }

    #[test]
    fn partitions_count() {
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn kakutani_table_groups() {
        let g = sl(4);
        let els: Vec<_> = (2..=4).map(|l| single_block(&g, 4, l).unwrap()).collect();
        let t = kakutani_table(&g, &els).unwrap();
        assert_eq!(t.iter().map(|c| c.gr).collect::<Vec<_>>(), vec![7, 19, 34]);
        assert!(t.iter().all(|c| c.status == ClassStatus::Distinct));

        let g2 = sl(2);
        let t = kakutani_table(&g2, &[g2.basis_element(0), g2.basis_element(1)]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].status, ClassStatus::Undetermined);

        let g3 = sl(3);
        let t = kakutani_table(&g3, &[e(&g3, 3, 0, 1), e(&g3, 3, 0, 2)]).unwrap();
        assert_eq!((t.len(), t[0].gr), (1, 5));
    }

    #[test]
    fn centralizer_of_ux_equals_uvx() {
        let g = sl(3);
        let cb = chain_basis(&g, &e(&g, 3, 0, 1)).unwrap();
        let t = cb.triple.unwrap();
        let cux = g.centralizer(&[t.u.clone(), t.x.clone()]).unwrap();
        let cuvx = g.centralizer(&[t.u.clone(), t.v.clone(), t.x.clone()]).unwrap();
        assert_eq!(cux, cuvx);
        let _ = sl_cartan_index(3, 0);
    }
}
