//! Structure constants from the multiplication tables against brackets of
//! explicit real and complex matrices.

use num::complex::Complex64;

use crosm::classical::{so_algebra, su_algebra};

type CMat = Vec<Vec<Complex64>>;

fn zeros(n: usize) -> CMat {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j] += a[i][k] * b[k][j] - b[i][k] * a[k][j];
            }
        }
    }
    c
}

fn pairs(big: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..big {
        for k in j + 1..big {
            out.push((j, k));
        }
    }
    out
}

/// `A_{i,i+1}`, then `B^0_{jk}, B^1_{jk}` as anti-Hermitian matrices.
fn su_basis(n: usize) -> Vec<CMat> {
    let big = n + 1;
    let i1 = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut basis = Vec::new();
    for i in 0..n {
        let mut m = zeros(big);
        m[i][i] = i1;
        m[i + 1][i + 1] = -i1;
        basis.push(m);
    }
    for (j, k) in pairs(big) {
        let mut b0 = zeros(big);
        b0[j][k] = one;
        b0[k][j] = -one;
        let mut b1 = zeros(big);
        b1[j][k] = i1;
        b1[k][j] = i1;
        basis.push(b0);
        basis.push(b1);
    }
    basis
}

/// Coordinates of a traceless anti-Hermitian matrix in `su_basis`.
fn su_coords(n: usize, m: &CMat) -> Vec<f64> {
    let big = n + 1;
    let mut out = Vec::new();
    let mut partial = 0.0;
    for i in 0..n {
        partial += m[i][i].im;
        out.push(partial);
    }
    for (j, k) in pairs(big) {
        out.push(m[j][k].re);
        out.push(m[j][k].im);
    }
    out
}

#[test]
fn su_tables_match_complex_matrices() {
    for n in 1..=4 {
        let alg = su_algebra::<f64>(n);
        let basis = su_basis(n);
        assert_eq!(basis.len(), alg.dim());
        for p in 0..basis.len() {
            for q in 0..basis.len() {
                let want = su_coords(n, &commutator(&basis[p], &basis[q]));
                let got = alg.br_basis(p, q);
                for (g, w) in got.iter().zip(&want) {
                    assert!(
                        (g - w).abs() < 1e-12,
                        "su({}) [{}, {}]: {:?} vs {:?}",
                        n + 1,
                        alg.labels[p],
                        alg.labels[q],
                        got,
                        want
                    );
                }
            }
        }
    }
}

#[test]
fn su_form_is_minus_twice_trace() {
    for n in 1..=3 {
        let alg = su_algebra::<f64>(n);
        let basis = su_basis(n);
        for p in 0..basis.len() {
            for q in 0..basis.len() {
                let mut tr = Complex64::new(0.0, 0.0);
                for i in 0..=n {
                    for k in 0..=n {
                        tr += basis[p][i][k] * basis[q][k][i];
                    }
                }
                assert!(tr.im.abs() < 1e-12);
                assert!((alg.form[(p, q)] + 2.0 * tr.re).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn so_tables_match_real_matrices() {
    for n in 2..=6 {
        let big = n + 1;
        let alg = so_algebra::<f64>(n);
        let ps = pairs(big);
        let mat = |(j, k): (usize, usize)| {
            let mut m = zeros(big);
            m[j][k] = Complex64::new(1.0, 0.0);
            m[k][j] = Complex64::new(-1.0, 0.0);
            m
        };
        for (p, &a) in ps.iter().enumerate() {
            for (q, &b) in ps.iter().enumerate() {
                let c = commutator(&mat(a), &mat(b));
                let want: Vec<f64> = ps.iter().map(|&(j, k)| c[j][k].re).collect();
                let got = alg.br_basis(p, q);
                assert_eq!(got.len(), want.len());
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12, "so({big}) {p} {q}");
                }
            }
        }
    }
}
