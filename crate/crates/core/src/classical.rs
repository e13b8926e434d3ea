//! so(n+1) and su(n+1) from their multiplication tables.
//!
//! su(n+1) is never realized through complex matrices: elements are symbolic
//! combinations of `A_{i,i+1}`, `B^0_{jk}`, `B^1_{jk}` reduced with
//! superscripts taken mod 2, `B^0_{kj} = -B^0_{jk}`, `B^1_{kj} = B^1_{jk}`,
//! `B^1_{jj} = 2 D_j` and `A_{rj} = D_r - D_j`.

use crate::lie::LieAlgebra;
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Position of `B^0_{jk}` (`1 <= j < k <= n+1`) in the so(n+1) basis.
pub fn so_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k <= n + 1);
    let big = n + 1;
    // Pairs are ordered lexicographically.
    (j - 1) * big - (j - 1) * j / 2 + (k - j - 1)
}

fn pair_label(prefix: &str, j: usize, k: usize) -> String {
    if j < 10 && k < 10 {
        format!("{prefix}_{j}{k}")
    } else {
        format!("{prefix}_{{{j},{k}}}")
    }
}

/// Adds `coef * B^0_{xy}` of so(n+1) to `out`.
pub fn so_add_b<S: Scalar>(n: usize, out: &mut [S], coef: &S, x: usize, y: usize) {
    if x == y || coef.is_zero() {
        return;
    }
    if x < y {
        out[so_index(n, x, y)].add_ref(coef);
    } else {
        out[so_index(n, y, x)].sub_ref(coef);
    }
}

pub fn so_element<S: Scalar>(n: usize, x: usize, y: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n * (n + 1) / 2];
    so_add_b(n, &mut v, &S::one(), x, y);
    v
}

/// so(n+1) on the basis `B^0_{jk} = E_jk - E_kj`, with the form `-1/2 tr(AB)`.
pub fn so_algebra<S: Scalar>(n: usize) -> LieAlgebra<S> {
    let big = n + 1;
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    for j in 1..=big {
        for k in j + 1..=big {
            pairs.push((j, k));
            labels.push(pair_label("B0", j, k));
        }
    }
    let dim = pairs.len();
    let d = |a: usize, b: usize| a == b;
    LieAlgebra::new(format!("so({big})"), labels, Mat::identity(dim), |p, q| {
        let (r, j) = pairs[p];
        let (k, l) = pairs[q];
        let mut out = vec![S::zero(); dim];
        let one = S::one();
        let m1 = -S::one();
        if d(r, k) {
            so_add_b(n, &mut out, &m1, j, l);
        }
        if d(r, l) {
            so_add_b(n, &mut out, &one, j, k);
        }
        if d(j, k) {
            so_add_b(n, &mut out, &one, r, l);
        }
        if d(j, l) {
            so_add_b(n, &mut out, &m1, r, k);
        }
        out
    })
    .expect("so(n+1) construction")
}

/// A basis element of su(n+1) with generic indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuGen {
    /// `A_{rj} = D_r - D_j`.
    A(usize, usize),
    /// `B^a_{jk}`, superscript taken mod 2.
    B(u8, usize, usize),
}

/// Accumulates symbolic su(n+1) combinations before reduction to the basis.
pub struct SuAcc<S> {
    n: usize,
    coords: Vec<S>,
    diag: Vec<S>,
}

impl<S: Scalar> SuAcc<S> {
    pub fn new(n: usize) -> Self {
        SuAcc {
            n,
            coords: vec![S::zero(); su_dim(n)],
            diag: vec![S::zero(); n + 2],
        }
    }

    pub fn add(&mut self, coef: &S, g: SuGen) {
        if coef.is_zero() {
            return;
        }
        match g {
            SuGen::A(r, j) => {
                self.diag[r].add_ref(coef);
                self.diag[j].sub_ref(coef);
            }
            SuGen::B(a, x, y) => {
                let a = a % 2;
                let c = coef.clone();
                match (a, x.cmp(&y)) {
                    (0, std::cmp::Ordering::Equal) => {}
                    (0, std::cmp::Ordering::Less) => self.coords[su_b_index(self.n, 0, x, y)].add_ref(&c),
                    (0, std::cmp::Ordering::Greater) => self.coords[su_b_index(self.n, 0, y, x)].sub_ref(&c),
                    (_, std::cmp::Ordering::Equal) => {
                        let two = S::from_i64(2);
                        self.diag[x].add_mul(&two, &c);
                    }
                    (_, _) => self.coords[su_b_index(self.n, 1, x.min(y), x.max(y))].add_ref(&c),
                }
            }
        }
    }

    /// Reduces the diagonal part via `sum c_j D_j = sum_i (c_1+...+c_i) A_{i,i+1}`.
    pub fn finish(mut self) -> Vec<S> {
        let mut partial = S::zero();
        for i in 1..=self.n {
            partial.add_ref(&self.diag[i]);
            self.coords[i - 1].add_ref(&partial);
        }
        partial.add_ref(&self.diag[self.n + 1]);
        assert!(
            partial.near_zero(1e-9),
            "diagonal combination is not trace free"
        );
        self.coords
    }
}

pub fn su_dim(n: usize) -> usize {
    (n + 1) * (n + 1) - 1
}

/// Position of `B^a_{jk}` (`j < k`) in the su(n+1) basis.
pub fn su_b_index(n: usize, a: u8, j: usize, k: usize) -> usize {
    n + 2 * so_index(n, j, k) + a as usize
}

fn su_basis_gen(n: usize, idx: usize) -> SuGen {
    if idx < n {
        return SuGen::A(idx + 1, idx + 2);
    }
    let p = (idx - n) / 2;
    let a = ((idx - n) % 2) as u8;
    let big = n + 1;
    let mut count = 0;
    for j in 1..=big {
        for k in j + 1..=big {
            if count == p {
                return SuGen::B(a, j, k);
            }
            count += 1;
        }
    }
    unreachable!("basis index out of range")
}

fn sign(k: u8) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `[x, y]` of two generators, accumulated with weight `w`.
pub fn su_bracket_gens<S: Scalar>(acc: &mut SuAcc<S>, w: &S, x: SuGen, y: SuGen) {
    let d = |p: usize, q: usize| p == q;
    match (x, y) {
        (SuGen::A(..), SuGen::A(..)) => {}
        (SuGen::B(..), SuGen::A(..)) => su_bracket_gens(acc, &-w.clone(), y, x),
        (SuGen::A(r, j), SuGen::B(a, k, l)) => {
            let terms = [
                (d(r, k), sign(a), SuGen::B(a + 1, r, l)),
                (d(r, l), -1, SuGen::B(a + 1, r, k)),
                (d(j, k), sign(a + 1), SuGen::B(a + 1, j, l)),
                (d(j, l), 1, SuGen::B(a + 1, j, k)),
            ];
            for (on, s, g) in terms {
                if on {
                    acc.add(&w.mul_ref(&S::from_i64(s)), g);
                }
            }
        }
        (SuGen::B(a, r, j), SuGen::B(b, k, l)) => {
            if a % 2 > b % 2 {
                return su_bracket_gens(acc, &-w.clone(), y, x);
            }
            let c = a + b;
            let terms = [
                (d(r, k), -1, SuGen::B(c, j, l)),
                (d(r, l), sign(b), SuGen::B(c, j, k)),
                (d(j, k), sign(a), SuGen::B(c, r, l)),
                (d(j, l), sign(a + b + 1), SuGen::B(c, r, k)),
            ];
            for (on, s, g) in terms {
                if on {
                    acc.add(&w.mul_ref(&S::from_i64(s)), g);
                }
            }
        }
    }
}

/// Basis vector of a generator expressed in the su(n+1) basis.
pub fn su_element<S: Scalar>(n: usize, terms: &[(S, SuGen)]) -> Vec<S> {
    let mut acc = SuAcc::new(n);
    for (c, g) in terms {
        acc.add(c, *g);
    }
    acc.finish()
}

/// su(n+1) on the basis `A_{i,i+1}` (i = 1..n) followed by `B^0_{jk}, B^1_{jk}`
/// for `j < k`, with the form `-2 tr(UV)`.
pub fn su_algebra<S: Scalar>(n: usize) -> LieAlgebra<S> {
    let dim = su_dim(n);
    let mut labels: Vec<String> = (1..=n).map(|i| pair_label("A", i, i + 1)).collect();
    for j in 1..=n + 1 {
        for k in j + 1..=n + 1 {
            labels.push(pair_label("B0", j, k));
            labels.push(pair_label("B1", j, k));
        }
    }
    let form = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            S::from_i64(4)
        } else if i < n && j < n && (i as isize - j as isize).abs() == 1 {
            S::from_i64(-2)
        } else {
            S::zero()
        }
    });
    LieAlgebra::new(format!("su({})", n + 1), labels, form, |p, q| {
        let mut acc = SuAcc::new(n);
        su_bracket_gens(&mut acc, &S::one(), su_basis_gen(n, p), su_basis_gen(n, q));
        acc.finish()
    })
    .expect("su(n+1) construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    #[test]
    fn indices_are_consistent() {
        let n = 4;
        let mut count = 0;
        for j in 1..=n + 1 {
            for k in j + 1..=n + 1 {
                assert_eq!(so_index(n, j, k), count);
                count += 1;
            }
        }
        for idx in 0..su_dim(n) {
            match su_basis_gen(n, idx) {
                SuGen::A(i, _) => assert_eq!(idx, i - 1),
                SuGen::B(a, j, k) => assert_eq!(su_b_index(n, a, j, k), idx),
            }
        }
    }

    #[test]
    fn b1_diagonal_reduces_to_cartan() {
        // B^1_11 - B^1_22 = 2(D_1 - D_2) = 2 A_12
        let v = su_element::<Q>(
            2,
            &[(Q::from_i64(1), SuGen::B(1, 1, 1)), (Q::from_i64(-1), SuGen::B(1, 2, 2))],
        );
        assert_eq!(v[0], Q::from_i64(2));
        assert!(v[1..].iter().all(|c| c == &Q::from_i64(0)));
    }
}
