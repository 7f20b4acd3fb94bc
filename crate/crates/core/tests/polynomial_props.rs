use fracpoly::momentidx::{assemble, localizing_matrix_spec, moment_matrix_spec, moments_from_point};
use fracpoly::polycore::{basis_size, enumerate_basis, MultiIndex, Polynomial};
use fracpoly::sdpsolve::min_eigenvalue;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

fn graded_less(a: &MultiIndex, b: &MultiIndex) -> bool {
    (a.degree(), std::cmp::Reverse(a.exponents())) < (b.degree(), std::cmp::Reverse(b.exponents()))
}

#[test]
fn basis_sizes_and_order_exhaustive() {
    for n in 1..=6 {
        for v in 0..=10 {
            let b = enumerate_basis(n, v).unwrap();
            assert_eq!(b.len() as u64, binomial((n + v) as u64, v as u64));
            assert_eq!(basis_size(n, v).unwrap(), b.len() as u64);
            assert!(b.get(0).is_zero());
            for w in b.entries().windows(2) {
                assert!(graded_less(&w[0], &w[1]), "{:?} !< {:?}", w[0], w[1]);
            }
        }
    }
}

fn poly_in(n: usize) -> impl Strategy<Value = Polynomial<f64>> {
    (0usize..=6).prop_flat_map(move |deg| {
        let size = enumerate_basis(n, deg).unwrap().len();
        prop::collection::vec(prop_oneof![Just(0.0), -10.0..10.0f64], size)
            .prop_map(move |c| Polynomial::from_coeff_vector(&enumerate_basis(n, deg).unwrap(), &c).unwrap())
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(1.0)
}

// Sum of |c|·|x^α| bounds the cancellation error of either evaluation order.
fn magnitude(p: &Polynomial<f64>, x: &[f64]) -> f64 {
    p.terms()
        .map(|(a, c)| c.abs() * a.eval_monomial(&x.iter().map(|v| v.abs()).collect::<Vec<_>>()))
        .sum()
}

proptest! {
    #[test]
    fn coefficient_vector_round_trip(
        (p, x) in (1usize..=4).prop_flat_map(|n| (poly_in(n), point(n)))
    ) {
        let basis = enumerate_basis(p.n(), p.degree()).unwrap();
        let v = p.to_coeff_vector(&basis).unwrap();
        let q = Polynomial::from_coeff_vector(&basis, &v).unwrap();
        prop_assert_eq!(&q, &p);
        let dense: f64 = v.iter().zip(basis.eval(&x)).map(|(c, m)| c * m).sum();
        prop_assert!(close(dense, p.eval(&x).unwrap(), 1e-12, magnitude(&p, &x)));
    }

    #[test]
    fn multiplication_distributes_over_eval(
        (p, q, x) in (1usize..=4).prop_flat_map(|n| (poly_in(n), poly_in(n), point(n)))
    ) {
        let pq = p.try_mul(&q).unwrap();
        let want = p.eval(&x).unwrap() * q.eval(&x).unwrap();
        let scale = magnitude(&p, &x) * magnitude(&q, &x);
        prop_assert!(close(pq.eval(&x).unwrap(), want, 1e-10, scale));
        if !p.is_zero() && !q.is_zero() {
            prop_assert_eq!(pq.degree(), p.degree() + q.degree());
        }
    }

    #[test]
    fn moment_matrix_of_point_is_rank_one(n in 1usize..=3, d in 1usize..=3, seed in point(3)) {
        let x = &seed[..n];
        let y = moments_from_point(x, d).unwrap();
        let spec = moment_matrix_spec::<f64>(n, d).unwrap();
        prop_assert!(spec.is_symmetric());
        let m = assemble(&spec, &y).unwrap();
        let v = DVecFrom::basis_values(n, d, x);
        let outer = &v * v.transpose();
        prop_assert!((&m - &outer).abs().max() <= 1e-12 * outer.abs().max().max(1.0));
        let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert!(eig.iter().all(|&e| e >= -1e-9 * eig[0]));
        if eig.len() > 1 {
            prop_assert!(eig[1] <= 1e-9 * eig[0]);
        }
    }

    #[test]
    fn localizing_matrix_psd_where_constraint_holds(
        n in 1usize..=3, d in 1usize..=3, seed in point(3), coeffs in prop::collection::vec(-1.0..1.0f64, 10)
    ) {
        let x = &seed[..n];
        let basis = enumerate_basis(n, 2).unwrap();
        let mut h = Polynomial::from_coeff_vector(&basis, &coeffs[..basis.len()]).unwrap();
        let hx = h.eval(x).unwrap();
        if hx < 0.0 {
            h = h.scale(-1.0);
        }
        let spec = match localizing_matrix_spec(&h, n, d) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        prop_assert!(spec.is_symmetric());
        let y = moments_from_point(x, d).unwrap();
        let l = assemble(&spec, &y).unwrap();
        prop_assert!(min_eigenvalue(&l) >= -1e-9 * l.abs().max().max(1.0));
    }
}

struct DVecFrom;

impl DVecFrom {
    fn basis_values(n: usize, d: usize, x: &[f64]) -> DMatrix<f64> {
        let vals = enumerate_basis(n, d).unwrap().eval(x);
        DMatrix::from_column_slice(vals.len(), 1, &vals)
    }
}
