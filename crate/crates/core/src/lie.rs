//! Matrix Lie algebras over the rationals.
//!
//! An algebra is a list of linearly independent square matrices closed under
//! the commutator. Structure constants are computed once at construction, and
//! every constructor also checks that the Killing form is nondegenerate, so
//! all algebras handed out by this module are semisimple.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{int, parse_scalar, vec_is_zero, Matrix, Scalar};

/// Coefficient vector of an element with respect to an algebra's basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    pub coeffs: Vec<Scalar>,
}

impl AlgebraElement {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        AlgebraElement { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        AlgebraElement { coeffs: vec![Scalar::zero(); dim] }
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[i] = Scalar::one();
        e
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        vec_is_zero(&self.coeffs)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        AlgebraElement { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraElement { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraElement { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(crate::matrix::to_f64).collect()
    }
}

/// The matrix of `ad(x)` in basis coordinates: column `b` holds `[x, B_b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdOperator {
    pub source: AlgebraElement,
    pub matrix: Matrix,
}

impl AdOperator {
    pub fn apply(&self, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.matrix.mul_vec(&y.coeffs))
    }
}

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    label: String,
    ambient_dim: usize,
    basis: Vec<Matrix>,
    /// `structure[a][b][c]` is the coefficient of `B_c` in `[B_a, B_b]`.
    structure: Vec<Vec<Vec<Scalar>>>,
    /// Rows of the flattened basis used to read off coordinates.
    pivot_rows: Vec<usize>,
    pivot_inverse: Matrix,
}

impl LieAlgebra {
    /// Builds an algebra from explicit basis matrices, validating independence,
    /// bracket closure and nondegeneracy of the Killing form.
    pub fn from_basis(label: impl Into<String>, basis: Vec<Matrix>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::InvalidDimension("empty basis".into()));
        }
        let ambient = basis[0].rows();
        if basis.iter().any(|b| b.rows() != ambient || b.cols() != ambient) {
            return Err(Error::InvalidDimension("basis matrices must share a square shape".into()));
        }
        let flat = Matrix::from_columns(&basis.iter().map(|b| b.entries().to_vec()).collect::<Vec<_>>());
        let (_, row_pivots) = flat.transpose().rref();
        if row_pivots.len() < n {
            return Err(Error::DependentBasis);
        }
        let mut square = Matrix::zeros(n, n);
        for (r, &p) in row_pivots.iter().enumerate() {
            for c in 0..n {
                square.set(r, c, flat.get(p, c).clone());
            }
        }
        let pivot_inverse = square.inverse().ok_or(Error::DependentBasis)?;
        let mut alg = LieAlgebra {
            label: label.into(),
            ambient_dim: ambient,
            basis,
            structure: Vec::new(),
            pivot_rows: row_pivots,
            pivot_inverse,
        };
        let mut structure = vec![vec![vec![Scalar::zero(); n]; n]; n];
        for a in 0..n {
            for b in (a + 1)..n {
                let c = alg.basis[a].commutator(&alg.basis[b]);
                let coords = alg.coords_of(&c).map_err(|_| Error::NotClosed(a, b))?;
                structure[b][a] = coords.iter().map(|x| -x).collect();
                structure[a][b] = coords;
            }
        }
        alg.structure = structure;
        let killing = alg.killing_form();
        let rank = killing.rank();
        if rank < n {
            return Err(Error::NotSemisimple { rank, dim: n });
        }
        Ok(alg)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Scalar>>] {
        &self.structure
    }

    pub fn element(&self, coeffs: Vec<Scalar>) -> Result<AlgebraElement> {
        self.check(&AlgebraElement { coeffs })
    }

    fn check(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(x.clone())
    }

    fn check_dim(&self, x: &AlgebraElement) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(())
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::basis_vector(self.dim(), i)
    }

    /// `Σ coeffs[a] · basis[a]`.
    pub fn to_matrix(&self, x: &AlgebraElement) -> Matrix {
        let n = self.ambient_dim;
        let mut m = Matrix::zeros(n, n);
        for (c, b) in x.coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                m = &m + &b.scale(c);
            }
        }
        m
    }

    /// Coordinates of an ambient matrix; fails if it is not in the span.
    pub fn coords_of(&self, m: &Matrix) -> Result<Vec<Scalar>> {
        if m.rows() != self.ambient_dim || m.cols() != self.ambient_dim {
            return Err(Error::NotInSpan);
        }
        let picked: Vec<Scalar> = self.pivot_rows.iter().map(|&r| m.entries()[r].clone()).collect();
        let coords = self.pivot_inverse.mul_vec(&picked);
        let back = self.to_matrix(&AlgebraElement::new(coords.clone()));
        if &back != m {
            return Err(Error::NotInSpan);
        }
        Ok(coords)
    }

    pub fn from_matrix(&self, m: &Matrix) -> Result<AlgebraElement> {
        self.coords_of(m).map(AlgebraElement::new)
    }

    /// Bracket through the matrix commutator, cross-checked in debug builds
    /// against the cached structure constants.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let c = self.to_matrix(x).commutator(&self.to_matrix(y));
        let out = self.from_matrix(&c)?;
        debug_assert_eq!(out, self.bracket_structural(x, y));
        Ok(out)
    }

    /// Bracket computed from structure constants only.
    pub fn bracket_structural(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let n = self.dim();
        let mut out = vec![Scalar::zero(); n];
        for a in 0..n {
            if x.coeffs[a].is_zero() {
                continue;
            }
            for b in 0..n {
                if y.coeffs[b].is_zero() {
                    continue;
                }
                let w = &x.coeffs[a] * &y.coeffs[b];
                for (o, s) in out.iter_mut().zip(&self.structure[a][b]) {
                    if !s.is_zero() {
                        *o += &w * s;
                    }
                }
            }
        }
        AlgebraElement::new(out)
    }

    pub fn ad(&self, x: &AlgebraElement) -> Result<AdOperator> {
        self.check_dim(x)?;
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for b in 0..n {
            let col = self.bracket_structural(x, &self.basis_element(b));
            for (c, v) in col.coeffs.into_iter().enumerate() {
                m.set(c, b, v);
            }
        }
        Ok(AdOperator { source: x.clone(), matrix: m })
    }

    /// `K_ab = tr(ad B_a · ad B_b)`.
    pub fn killing_form(&self) -> Matrix {
        let n = self.dim();
        let ads: Vec<Matrix> = (0..n).map(|a| self.ad(&self.basis_element(a)).unwrap().matrix).collect();
        let mut k = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = (&ads[a] * &ads[b]).trace();
                k.set(a, b, v.clone());
                k.set(b, a, v);
            }
        }
        k
    }

    /// Basis of the common centralizer: the null space of the stacked ad operators.
    pub fn centralizer(&self, elements: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
        let n = self.dim();
        if elements.is_empty() {
            return Ok((0..n).map(|i| self.basis_element(i)).collect());
        }
        let mut stacked = Matrix::zeros(0, n);
        for e in elements {
            stacked = stacked.vstack(&self.ad(e)?.matrix);
        }
        Ok(stacked.null_space().into_iter().map(AlgebraElement::new).collect())
    }

    /// Every basis triple satisfies the Jacobi identity exactly.
    pub fn jacobi_holds(&self) -> bool {
        let n = self.dim();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (x, y, z) = (self.basis_element(a), self.basis_element(b), self.basis_element(c));
                    let t1 = self.bracket_structural(&x, &self.bracket_structural(&y, &z));
                    let t2 = self.bracket_structural(&y, &self.bracket_structural(&z, &x));
                    let t3 = self.bracket_structural(&z, &self.bracket_structural(&x, &y));
                    if !t1.add(&t2).add(&t3).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `sl(d, R)` with basis `{E_ij : i≠j}` (lexicographic) followed by `E_ii − E_{i+1,i+1}`.
pub fn build_sl(d: usize) -> Result<LieAlgebra> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("sl(d) needs d >= 2, got {d}")));
    }
    let mut basis = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                basis.push(Matrix::unit(d, i, j));
            }
        }
    }
    for i in 0..d - 1 {
        let mut h = Matrix::zeros(d, d);
        h.set(i, i, int(1));
        h.set(i + 1, i + 1, int(-1));
        basis.push(h);
    }
    LieAlgebra::from_basis(format!("sl({d})"), basis)
}

/// Index of `E_ij` (zero-based `i != j`) in the basis produced by [`build_sl`].
pub fn sl_offdiag_index(d: usize, i: usize, j: usize) -> usize {
    assert!(i != j && i < d && j < d);
    i * (d - 1) + if j > i { j - 1 } else { j }
}

/// Index of `E_ii − E_{i+1,i+1}` in the basis produced by [`build_sl`].
pub fn sl_cartan_index(d: usize, i: usize) -> usize {
    assert!(i + 1 < d);
    d * (d - 1) + i
}

/// A complex 3x3 matrix embedded in 6x6 real matrices, `a+ib -> [[a,-b],[b,a]]`.
fn realify(entries: &[(usize, usize, i64, i64)]) -> Matrix {
    let mut m = Matrix::zeros(6, 6);
    for &(i, j, re, im) in entries {
        let (r, c) = (2 * i, 2 * j);
        let add = |m: &mut Matrix, a: usize, b: usize, v: i64| {
            let cur = m.get(a, b).clone();
            m.set(a, b, cur + int(v));
        };
        add(&mut m, r, c, re);
        add(&mut m, r + 1, c + 1, re);
        add(&mut m, r, c + 1, -im);
        add(&mut m, r + 1, c, im);
    }
    m
}

/// Names of the [`build_su21`] basis, in order.
pub const SU21_BASIS_NAMES: [&str; 8] = ["Re z", "Im z", "t", "s", "Re w1", "Im w1", "Re w2", "Im w2"];

/// `su(2,1)` in the block form
///
/// ```text
/// [ z      i t    w1      ]
/// [ i s   -z̄      w2      ]
/// [ -w̄2   -w̄1    -2i Im z ]
/// ```
///
/// with one real generator per real parameter. The flow generator `iE_12`
/// is the `t` generator (index 2).
pub fn build_su21() -> Result<LieAlgebra> {
    let basis = vec![
        // z = 1
        realify(&[(0, 0, 1, 0), (1, 1, -1, 0)]),
        // z = i: -z̄ = i, -2i Im z = -2i
        realify(&[(0, 0, 0, 1), (1, 1, 0, 1), (2, 2, 0, -2)]),
        // t
        realify(&[(0, 1, 0, 1)]),
        // s
        realify(&[(1, 0, 0, 1)]),
        // w1 = 1
        realify(&[(0, 2, 1, 0), (2, 1, -1, 0)]),
        // w1 = i: -w̄1 = i
        realify(&[(0, 2, 0, 1), (2, 1, 0, 1)]),
        // w2 = 1
        realify(&[(1, 2, 1, 0), (2, 0, -1, 0)]),
        // w2 = i
        realify(&[(1, 2, 0, 1), (2, 0, 0, 1)]),
    ];
    LieAlgebra::from_basis("su(2,1)", basis)
}

/// Block-diagonal direct sum; cross brackets vanish.
pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> Result<LieAlgebra> {
    let (na, nb) = (a.ambient_dim(), b.ambient_dim());
    let n = na + nb;
    let mut basis = Vec::with_capacity(a.dim() + b.dim());
    for m in a.basis() {
        let mut big = Matrix::zeros(n, n);
        for i in 0..na {
            for j in 0..na {
                big.set(i, j, m.get(i, j).clone());
            }
        }
        basis.push(big);
    }
    for m in b.basis() {
        let mut big = Matrix::zeros(n, n);
        for i in 0..nb {
            for j in 0..nb {
                big.set(na + i, na + j, m.get(i, j).clone());
            }
        }
        basis.push(big);
    }
    LieAlgebra::from_basis(format!("{}+{}", a.label(), b.label()), basis)
}

/// Concatenates coefficient vectors of a direct sum's summands.
pub fn sum_element(parts: &[&AlgebraElement]) -> AlgebraElement {
    AlgebraElement::new(parts.iter().flat_map(|p| p.coeffs.iter().cloned()).collect())
}

/// Algebra description as read from a JSON or TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Builtin(BuiltinSpec),
    Explicit {
        label: Option<String>,
        /// Basis matrices as rows of rational strings.
        basis: Vec<Vec<Vec<String>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "lowercase")]
pub enum BuiltinSpec {
    Sl { d: usize },
    Su21,
    Sum { parts: Vec<AlgebraSpec> },
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<LieAlgebra> {
        match self {
            AlgebraSpec::Builtin(BuiltinSpec::Sl { d }) => build_sl(*d),
            AlgebraSpec::Builtin(BuiltinSpec::Su21) => build_su21(),
            AlgebraSpec::Builtin(BuiltinSpec::Sum { parts }) => {
                let mut iter = parts.iter();
                let first = iter.next().ok_or_else(|| Error::InvalidSpec("empty sum".into()))?;
                iter.try_fold(first.build()?, |acc, p| direct_sum(&acc, &p.build()?))
            }
            AlgebraSpec::Explicit { label, basis } => {
                let mats = basis
                    .iter()
                    .map(|rows| {
                        let parsed = rows
                            .iter()
                            .map(|r| r.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>>>())
                            .collect::<Result<Vec<_>>>()?;
                        Matrix::from_rows(&parsed)
                    })
                    .collect::<Result<Vec<_>>>()?;
                LieAlgebra::from_basis(label.clone().unwrap_or_else(|| "explicit".into()), mats)
            }
        }
    }
}

/// Parses a coefficient vector of rational strings.
pub fn parse_element(alg: &LieAlgebra, coeffs: &[String]) -> Result<AlgebraElement> {
    let v = coeffs.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>>>()?;
    alg.element(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frac;

    fn sl2_named() -> (LieAlgebra, AlgebraElement, AlgebraElement, AlgebraElement) {
        let g = build_sl(2).unwrap();
        let u = g.basis_element(0);
        let v = g.basis_element(1);
        let x = g.basis_element(2);
        (g, u, v, x)
    }

    #[test]
    fn sl2_basis_and_brackets() {
        let (g, u, v, x) = sl2_named();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.basis()[0], Matrix::from_i64(2, 2, &[0, 1, 0, 0]));
        assert_eq!(g.basis()[1], Matrix::from_i64(2, 2, &[0, 0, 1, 0]));
        assert_eq!(g.basis()[2], Matrix::from_i64(2, 2, &[1, 0, 0, -1]));
        assert_eq!(g.bracket(&x, &u).unwrap(), u.scale(&int(2)));
        assert!(g.bracket(&u, &u).unwrap().is_zero());
        assert_eq!(g.bracket(&u, &v).unwrap(), x);
    }

    #[test]
    fn sl_dimensions() {
        assert_eq!(build_sl(3).unwrap().dim(), 8);
        assert!(matches!(build_sl(1), Err(Error::InvalidDimension(_))));
        let g = build_sl(4).unwrap();
        assert_eq!(g.dim(), 15);
        // every one of the 105 unordered pairs closes (checked in from_basis)
        assert_eq!(g.structure_constants().len(), 15);
    }

    #[test]
    fn sl_index_helpers() {
        let g = build_sl(3).unwrap();
        let e23 = sl_offdiag_index(3, 1, 2);
        assert_eq!(g.basis()[e23], Matrix::unit(3, 1, 2));
        let e31 = sl_offdiag_index(3, 2, 0);
        assert_eq!(g.basis()[e31], Matrix::unit(3, 2, 0));
        let h2 = sl_cartan_index(3, 1);
        assert_eq!(g.basis()[h2], Matrix::from_i64(3, 3, &[0, 0, 0, 0, 1, 0, 0, 0, -1]));
    }

    #[test]
    fn su21_shape() {
        let g = build_su21().unwrap();
        assert_eq!(g.dim(), 8);
        assert_eq!(g.ambient_dim(), 6);
        let u = g.basis_element(2);
        let ad = g.ad(&u).unwrap().matrix;
        assert!(ad.pow(g.dim() as u32).is_zero());
        assert_eq!(g.killing_form().rank(), 8);
    }

    #[test]
    fn direct_sum_cross_brackets_vanish() {
        let a = build_sl(2).unwrap();
        let s = direct_sum(&a, &a).unwrap();
        assert_eq!(s.dim(), 6);
        let u0 = s.basis_element(0);
        let v1 = s.basis_element(4);
        assert!(s.bracket(&u0, &v1).unwrap().is_zero());
        let b = build_sl(3).unwrap();
        assert_eq!(direct_sum(&a, &b).unwrap().dim(), 11);
    }

    #[test]
    fn not_in_span_detected() {
        let g = build_sl(2).unwrap();
        assert_eq!(g.coords_of(&Matrix::identity(2)), Err(Error::NotInSpan));
    }

    #[test]
    fn non_semisimple_rejected() {
        // upper triangular 2x2 traceless: span{E_12, diag(1,-1)} is solvable
        let basis = vec![Matrix::unit(2, 0, 1), Matrix::from_i64(2, 2, &[1, 0, 0, -1])];
        assert!(matches!(LieAlgebra::from_basis("b", basis), Err(Error::NotSemisimple { .. })));
        let dep = vec![Matrix::unit(2, 0, 1), Matrix::unit(2, 0, 1)];
        assert_eq!(LieAlgebra::from_basis("d", dep).unwrap_err(), Error::DependentBasis);
    }

    #[test]
    fn centralizer_examples() {
        let (g, u, _, _) = sl2_named();
        let c = g.centralizer(std::slice::from_ref(&u)).unwrap();
        assert_eq!(c.len(), 1);
        let g3 = build_sl(3).unwrap();
        // diag(1,-1,0) is regular; diag(1,1,-2) is not
        let h0 = g3.basis_element(sl_cartan_index(3, 0));
        assert_eq!(g3.centralizer(std::slice::from_ref(&h0)).unwrap().len(), 2);
        let h = h0.add(&g3.basis_element(sl_cartan_index(3, 1)).scale(&int(2)));
        assert_eq!(g3.centralizer(&[h]).unwrap().len(), 4);
        let _ = frac(1, 2);
    }

    #[test]
    fn spec_parsing() {
        let spec = AlgebraSpec::Builtin(BuiltinSpec::Sum {
            parts: vec![
                AlgebraSpec::Builtin(BuiltinSpec::Sl { d: 2 }),
                AlgebraSpec::Builtin(BuiltinSpec::Sl { d: 3 }),
            ],
        });
        assert_eq!(spec.build().unwrap().dim(), 11);
        let explicit = AlgebraSpec::Explicit {
            label: None,
            basis: vec![
                vec![vec!["0".into(), "1".into()], vec!["0".into(), "0".into()]],
                vec![vec!["0".into(), "0".into()], vec!["1".into(), "0".into()]],
                vec![vec!["1/2".into(), "0".into()], vec!["0".into(), "-1/2".into()]],
            ],
        };
        assert_eq!(explicit.build().unwrap().dim(), 3);
    }
}
