//! Lie algebras given by sparse structure constants over a labeled basis.

use crate::error::{Error, Result};
use crate::linalg::{axpy, gdot, Mat};
use crate::report::{CheckReport, Tracker};
use crate::scalar::{Scalar, FLOAT_TOL};

/// Sparse vector: sorted `(index, coefficient)` pairs with no explicit zeros.
pub type SVec<S> = Vec<(usize, S)>;

pub fn sparse<S: Scalar>(v: &[S]) -> SVec<S> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn dense<S: Scalar>(n: usize, v: &SVec<S>) -> Vec<S> {
    let mut out = vec![S::zero(); n];
    for (i, x) in v {
        out[*i].add_ref(x);
    }
    out
}

#[derive(Clone, Debug)]
pub struct LieAlgebra<S> {
    pub name: String,
    pub labels: Vec<String>,
    /// `[e_i, e_j]` for `i < j`, stored at `i * dim + j`.
    structure: Vec<SVec<S>>,
    /// Gram matrix of the invariant inner product.
    pub form: Mat<S>,
}

impl<S: Scalar> LieAlgebra<S> {
    /// Builds the algebra from brackets `[e_i, e_j]` given for `i < j`.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        form: Mat<S>,
        mut bracket_of: impl FnMut(usize, usize) -> Vec<S>,
    ) -> Result<Self> {
        let dim = labels.len();
        if form.rows() != dim || form.cols() != dim {
            return Err(Error::Input("form size does not match basis".into()));
        }
        if let Err(k) = form.positive_definite() {
            return Err(Error::Input(format!(
                "invariant form is not positive definite (leading minor {k})"
            )));
        }
        let mut structure = vec![Vec::new(); dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = bracket_of(i, j);
                if v.len() != dim {
                    return Err(Error::Input("bracket has wrong dimension".into()));
                }
                structure[i * dim + j] = sparse(&v);
            }
        }
        Ok(LieAlgebra {
            name: name.into(),
            labels,
            structure,
            form,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Structure constants `c^k_{ij}` of `[e_i, e_j]`.
    pub fn structure(&self, i: usize, j: usize) -> SVec<S> {
        let d = self.dim();
        if i < j {
            self.structure[i * d + j].clone()
        } else if i > j {
            self.structure[j * d + i]
                .iter()
                .map(|(k, c)| (*k, -c.clone()))
                .collect()
        } else {
            Vec::new()
        }
    }

    fn add_basis_bracket(&self, out: &mut [S], coef: &S, i: usize, j: usize) {
        let d = self.dim();
        if i == j || coef.is_zero() {
            return;
        }
        let (entry, neg) = if i < j {
            (&self.structure[i * d + j], false)
        } else {
            (&self.structure[j * d + i], true)
        };
        for (k, c) in entry {
            if neg {
                out[*k].sub_ref(&coef.mul_ref(c));
            } else {
                out[*k].add_mul(coef, c);
            }
        }
    }

    pub fn bracket(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(Error::Input(format!(
                "bracket: expected vectors of length {d}, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.br(x, y))
    }

    /// Bracket without the dimension check.
    pub fn br(&self, x: &[S], y: &[S]) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() || i == j {
                    continue;
                }
                let c = xi.mul_ref(yj);
                self.add_basis_bracket(&mut out, &c, i, j);
            }
        }
        out
    }

    pub fn br_basis(&self, i: usize, j: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        self.add_basis_bracket(&mut out, &S::one(), i, j);
        out
    }

    pub fn ad_operator(&self, x: &[S]) -> Result<Mat<S>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::Input("ad_operator: dimension mismatch".into()));
        }
        let mut m = Mat::zeros(d, d);
        for j in 0..d {
            let mut e = vec![S::zero(); d];
            e[j] = S::one();
            let col = self.br(x, &e);
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn inner(&self, u: &[S], v: &[S]) -> S {
        gdot(&self.form, u, v)
    }

    pub fn label_of(&self, v: &[S]) -> String {
        let terms: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{c}*{}", self.labels[i]))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    /// Exhaustive Jacobi identity over basis triples `i < j < k`.
    pub fn jacobi_check(&self) -> CheckReport {
        let d = self.dim();
        let mut t = Tracker::<S>::new(format!("jacobi[{}]", self.name));
        for i in 0..d {
            for j in i + 1..d {
                let eij = self.br_basis(i, j);
                for k in j + 1..d {
                    let ejk = self.br_basis(j, k);
                    let eki = self.br_basis(k, i);
                    let mut s = vec![S::zero(); d];
                    for (m, c) in eij.iter().enumerate() {
                        self.add_basis_bracket(&mut s, c, m, k);
                    }
                    for (m, c) in ejk.iter().enumerate() {
                        self.add_basis_bracket(&mut s, c, m, i);
                    }
                    for (m, c) in eki.iter().enumerate() {
                        self.add_basis_bracket(&mut s, c, m, j);
                    }
                    for (m, c) in s.iter().enumerate() {
                        t.track(c, || {
                            vec![
                                self.labels[i].clone(),
                                self.labels[j].clone(),
                                self.labels[k].clone(),
                                self.labels[m].clone(),
                            ]
                        });
                    }
                }
            }
        }
        t.finish()
    }

    /// Exhaustive check of `<[x,y],z> + <y,[x,z]> = 0` over basis triples.
    pub fn invariance_check(&self) -> CheckReport {
        let d = self.dim();
        let mut t = Tracker::<S>::new(format!("ad_invariance[{}]", self.name));
        // Row k of `gb[i]` is <[e_i, e_k], ·> as a covector.
        let gb: Vec<Vec<Vec<S>>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|k| self.form.vec_mul(&self.br_basis(i, k)))
                    .collect()
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in j..d {
                    let v = gb[i][j][k].clone() + gb[i][k][j].clone();
                    t.track(&v, || {
                        vec![
                            self.labels[i].clone(),
                            self.labels[j].clone(),
                            self.labels[k].clone(),
                        ]
                    });
                }
            }
        }
        t.finish()
    }

    pub fn antisymmetry_check(&self) -> CheckReport {
        let d = self.dim();
        let mut t = Tracker::<S>::new(format!("antisymmetry[{}]", self.name));
        for i in 0..d {
            for j in 0..d {
                let a = self.br_basis(i, j);
                let b = self.br_basis(j, i);
                for k in 0..d {
                    let s = a[k].clone() + b[k].clone();
                    t.track(&s, || {
                        vec![self.labels[i].clone(), self.labels[j].clone()]
                    });
                }
            }
        }
        t.finish()
    }

    pub fn whole(&self) -> Subspace<S> {
        let d = self.dim();
        Subspace {
            ambient: d,
            basis: (0..d).map(|i| crate::linalg::unit(d, i)).collect(),
        }
    }

    /// Kernel of `ad(x)^2 - lambda` restricted to `domain`.
    pub fn eigenspace_of_ad_squared(
        &self,
        x: &[S],
        lambda: &S,
        domain: &Subspace<S>,
    ) -> Result<Subspace<S>> {
        let ad = self.ad_operator(x)?;
        let ad2 = ad.mul(&ad);
        let cols: Vec<Vec<S>> = domain
            .basis
            .iter()
            .map(|b| {
                let mut v = ad2.mul_vec(b);
                axpy(&mut v, &-lambda.clone(), b);
                v
            })
            .collect();
        let m = Mat::from_cols(self.dim(), &cols);
        let ker = m.kernel(FLOAT_TOL);
        Ok(Subspace {
            ambient: self.dim(),
            basis: ker.iter().map(|c| domain.combine(c)).collect(),
        })
    }

    /// Vectors of `within` orthogonal to `s` under the invariant form.
    pub fn orthogonal_complement(&self, s: &Subspace<S>, within: &Subspace<S>) -> Subspace<S> {
        let m = Mat::from_fn(s.dim(), within.dim(), |k, i| {
            self.inner(&s.basis[k], &within.basis[i])
        });
        let ker = m.kernel(FLOAT_TOL);
        Subspace {
            ambient: self.dim(),
            basis: ker.iter().map(|c| within.combine(c)).collect(),
        }
    }

    /// Orthogonal projection onto `s` under the invariant form.
    pub fn project(&self, v: &[S], s: &Subspace<S>) -> Result<Vec<S>> {
        let n = s.dim();
        if n == 0 {
            return Ok(vec![S::zero(); self.dim()]);
        }
        let g = Mat::from_fn(n, n, |a, b| self.inner(&s.basis[a], &s.basis[b]));
        let rhs: Vec<S> = s.basis.iter().map(|b| self.inner(v, b)).collect();
        let c = g
            .solve(&rhs, FLOAT_TOL)
            .ok_or_else(|| Error::Input("degenerate Gram matrix on subspace".into()))?;
        Ok(s.combine(&c))
    }
}

/// Linearly independent family of vectors in an algebra of dimension `ambient`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<S> {
    pub ambient: usize,
    pub basis: Vec<Vec<S>>,
}

impl<S: Scalar> Subspace<S> {
    pub fn new(ambient: usize, basis: Vec<Vec<S>>) -> Result<Self> {
        if basis.iter().any(|b| b.len() != ambient) {
            return Err(Error::Input("subspace vector has wrong length".into()));
        }
        let s = Subspace { ambient, basis };
        if s.dim() > 0 && Mat::from_cols(ambient, &s.basis).rank(FLOAT_TOL) != s.dim() {
            return Err(Error::Input("subspace basis is linearly dependent".into()));
        }
        Ok(s)
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn combine(&self, c: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); self.ambient];
        for (ci, b) in c.iter().zip(&self.basis) {
            axpy(&mut v, ci, b);
        }
        v
    }

    pub fn contains(&self, v: &[S]) -> bool {
        if v.iter().all(|x| x.near_zero(FLOAT_TOL)) {
            return true;
        }
        let mut cols = self.basis.clone();
        cols.push(v.to_vec());
        Mat::from_cols(self.ambient, &cols).rank(FLOAT_TOL) == self.dim()
    }

    pub fn sum(&self, o: &Subspace<S>) -> Subspace<S> {
        let mut cols = self.basis.clone();
        cols.extend(o.basis.iter().cloned());
        let m = Mat::from_cols(self.ambient, &cols);
        let (_, piv) = m.rref(FLOAT_TOL);
        Subspace {
            ambient: self.ambient,
            basis: piv.iter().map(|&p| cols[p].clone()).collect(),
        }
    }

    /// Dimension of the span of arbitrary (possibly dependent) vectors.
    pub fn span_dim(ambient: usize, vs: &[Vec<S>]) -> usize {
        if vs.is_empty() {
            return 0;
        }
        Mat::from_cols(ambient, vs).rank(FLOAT_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{so_algebra, su_algebra};
    use crate::scalar::Q;

    #[test]
    fn so4_bracket_example() {
        let g = so_algebra::<Q>(3);
        let idx = |l: &str| g.labels.iter().position(|x| x == l).unwrap();
        let v = g.br_basis(idx("B0_13"), idx("B0_23"));
        let mut want = vec![Q::ratio(0, 1); g.dim()];
        want[idx("B0_12")] = Q::ratio(-1, 1);
        assert_eq!(v, want);
    }

    #[test]
    fn su3_bracket_example() {
        let g = su_algebra::<Q>(2);
        let idx = |l: &str| g.labels.iter().position(|x| x == l).unwrap();
        let v = g.br_basis(idx("A_12"), idx("B0_13"));
        let mut want = vec![Q::ratio(0, 1); g.dim()];
        want[idx("B1_13")] = Q::ratio(1, 1);
        assert_eq!(v, want);
    }

    #[test]
    fn bracket_rejects_mismatch() {
        let g = so_algebra::<Q>(2);
        assert!(g.bracket(&[Q::ratio(1, 1)], &[Q::ratio(1, 1)]).is_err());
    }

    #[test]
    fn ad_of_zero_is_zero() {
        let g = su_algebra::<Q>(2);
        let z = vec![Q::ratio(0, 1); g.dim()];
        assert_eq!(g.ad_operator(&z).unwrap(), Mat::zeros(g.dim(), g.dim()));
    }

    #[test]
    fn so4_ad_squared_on_mu_block() {
        let g = so_algebra::<Q>(3);
        let idx = |l: &str| g.labels.iter().position(|x| x == l).unwrap();
        let x = crate::linalg::unit::<Q>(g.dim(), idx("B0_12"));
        let ad = g.ad_operator(&x).unwrap();
        let ad2 = ad.mul(&ad);
        for l in ["B0_13", "B0_14"] {
            let e = crate::linalg::unit::<Q>(g.dim(), idx(l));
            let img = ad2.mul_vec(&e);
            let want: Vec<Q> = e.iter().map(|c| -c.clone()).collect();
            assert_eq!(img, want);
        }
    }

    #[test]
    fn complement_of_k_in_so4() {
        let g = so_algebra::<Q>(3);
        // k = so(3) on indices 2..4 (B0_jk with 2 <= j < k).
        let k_basis: Vec<Vec<Q>> = g
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.starts_with("B0_1"))
            .map(|(i, _)| crate::linalg::unit(g.dim(), i))
            .collect();
        let k = Subspace::new(g.dim(), k_basis).unwrap();
        let m = g.orthogonal_complement(&k, &g.whole());
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn trivial_eigenspace_of_span_x() {
        let g = su_algebra::<Q>(2);
        let x = crate::linalg::unit::<Q>(g.dim(), 3);
        let dom = Subspace::new(g.dim(), vec![x.clone()]).unwrap();
        let e = g
            .eigenspace_of_ad_squared(&x, &Q::ratio(0, 1), &dom)
            .unwrap();
        assert_eq!(e.dim(), 1);
    }

    #[test]
    fn small_algebras_are_valid() {
        for n in 2..=4 {
            let g = so_algebra::<Q>(n);
            assert!(g.jacobi_check().passed());
            assert!(g.invariance_check().passed());
            assert!(g.antisymmetry_check().passed());
        }
        for n in 1..=3 {
            let g = su_algebra::<Q>(n);
            assert!(g.jacobi_check().passed());
            assert!(g.invariance_check().passed());
        }
    }
}
