use polydisc::factorization::{riesz_factorize, BlaschkeProduct};
use polydisc::inequalities::{burbea_hilbert_gap, main_product_gap, polygon_area_length, GapConfig};
use polydisc::norms::{hq_inner, hq_norm_integral, hq_norm_series};
use polydisc::quadrature::mp_at_radius;
use polydisc::series::{kernel_eval, kernel_series};
use polydisc::{Complex64, MultiIndex, PolySeries, QuadratureConfig, Verdict, WeightVector};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn point(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..radius, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn poly(n: usize, max_degree: usize) -> impl Strategy<Value = PolySeries> {
    proptest::collection::vec(0..=max_degree, n).prop_flat_map(move |degree| {
        let count: usize = degree.iter().map(|d| d + 1).product();
        proptest::collection::vec(coeff(), count).prop_map(move |c| PolySeries::from_dense(degree.clone(), c, 0.0).unwrap())
    })
}

fn nonzero_poly(n: usize, max_degree: usize) -> impl Strategy<Value = PolySeries> {
    poly(n, max_degree).prop_filter("nonzero", |f| f.coeff_two_norm() > 1e-3)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_commutative_and_evaluates_pointwise(
        (f, g, z) in (1usize..=2).prop_flat_map(|n| (poly(n, 4), poly(n, 4), proptest::collection::vec(point(1.0), n)))
    ) {
        let fg = f.multiply(&g).unwrap();
        let gf = g.multiply(&f).unwrap();
        prop_assert_eq!(fg.degree(), gf.degree());
        for (a, b) in fg.dense().iter().zip(gf.dense()) {
            prop_assert!(close(*a, *b, 1e-14));
        }
        let expected = f.eval(&z).unwrap() * g.eval(&z).unwrap();
        prop_assert!(close(fg.eval(&z).unwrap(), expected, 1e-12));
    }

    #[test]
    fn multiplication_is_associative(f in poly(2, 3), g in poly(2, 3), h in poly(2, 3)) {
        let left = f.multiply(&g).unwrap().multiply(&h).unwrap();
        let right = f.multiply(&g.multiply(&h).unwrap()).unwrap();
        for (a, b) in left.dense().iter().zip(right.dense()) {
            prop_assert!(close(*a, *b, 1e-13));
        }
    }

    #[test]
    fn truncated_kernel_is_within_its_tail_bound(
        q in 0.3f64..4.0,
        w in proptest::collection::vec(point(0.8), 2),
        z in proptest::collection::vec(point(0.999), 2),
    ) {
        let q = WeightVector::scalar(q, 2).unwrap();
        let k = kernel_series(&q, &w, &MultiIndex::zeros(2), 1e-9).unwrap();
        let exact = kernel_eval(&q, &z, &w).unwrap();
        let got = k.eval(&z).unwrap();
        prop_assert!(k.tail_bound() <= 1e-9);
        prop_assert!((got - exact).norm() <= k.tail_bound() + 1e-12 * exact.norm());
    }

    #[test]
    fn kernel_reproduces_point_values(f in poly(2, 5), w in proptest::collection::vec(point(0.7), 2), q in 0.5f64..3.0) {
        let q = WeightVector::scalar(q, 2).unwrap();
        let k = kernel_series(&q, &w, &MultiIndex::new(f.degree().to_vec()), 1e-14).unwrap();
        let inner = hq_inner(&f, &k, &q).unwrap();
        prop_assert!(close(inner, f.eval(&w).unwrap(), 1e-11));
    }

    #[test]
    fn series_and_integral_norms_agree(f in poly(2, 4), q1 in 1.0f64..4.0, q2 in 1.0f64..4.0) {
        let q = WeightVector::new(vec![q1, q2]).unwrap();
        let s = hq_norm_series(&f, &q).unwrap();
        let i = hq_norm_integral(&f, &q).unwrap();
        prop_assert!((s - i).abs() <= 1e-10 * s.max(1e-300));
    }

    #[test]
    fn coefficient_json_round_trips(f in poly(2, 4)) {
        let back = PolySeries::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn integral_means_increase_with_radius(f in nonzero_poly(1, 5), p in 0.5f64..4.0, r in 0.05f64..0.95) {
        let cfg = QuadratureConfig::default();
        let inner = mp_at_radius(&f, p, r, &cfg).unwrap();
        let outer = mp_at_radius(&f, p, (r + 0.05).min(1.0), &cfg).unwrap();
        prop_assert!(inner <= outer * (1.0 + 1e-9));
    }

    #[test]
    fn blaschke_products_are_unimodular_on_the_circle(
        zeros in proptest::collection::vec(point(0.95), 0..6),
        t in 0.0f64..std::f64::consts::TAU,
        z in point(0.99),
    ) {
        let b = BlaschkeProduct::new(zeros).unwrap();
        prop_assert!((b.eval(Complex64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-12);
        prop_assert!(b.eval(z).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn riesz_factor_has_the_boundary_modulus_of_f(f in nonzero_poly(1, 6), t in 0.0f64..std::f64::consts::TAU) {
        let fac = match riesz_factorize(&f, 2.0, &QuadratureConfig::default()) {
            Ok(fac) => fac,
            Err(_) => return Ok(()),
        };
        let zeta = Complex64::from_polar(1.0, t);
        let fz = f.eval(&[zeta]).unwrap().norm();
        prop_assert!((fac.eval_h(zeta).norm() - fz).abs() <= 1e-8 * (1.0 + fz));
        prop_assert!((fac.norm_check - fac.f_norm).abs() <= 1e-10 * fac.f_norm);
    }

    #[test]
    fn hilbert_product_inequality_is_never_violated(
        (fs, qs) in (1usize..=2, 2usize..=3).prop_flat_map(|(n, m)| (
            proptest::collection::vec(poly(n, 3), m),
            proptest::collection::vec(0.25f64..3.0, m).prop_map(move |q| q.into_iter().map(|q| WeightVector::scalar(q, n).unwrap()).collect::<Vec<_>>()),
        ))
    ) {
        let rep = burbea_hilbert_gap(&fs, &qs, &GapConfig::default()).unwrap();
        prop_assert!(rep.verdict != Verdict::Violated);
    }

    #[test]
    fn hardy_product_inequality_is_never_violated(
        fs in proptest::collection::vec(poly(1, 3), 2..=3),
        p in proptest::collection::vec(0.5f64..4.0, 3),
    ) {
        let rep = main_product_gap(&fs, &p[..fs.len()], &GapConfig::default()).unwrap();
        prop_assert!(rep.verdict != Verdict::Violated);
    }

    #[test]
    fn zero_factor_gives_zero_sides(f in poly(1, 3), p in 0.5f64..4.0) {
        let zero = PolySeries::zeros(vec![2]).unwrap();
        let rep = main_product_gap(&[f, zero], &[p, p], &GapConfig::default()).unwrap();
        prop_assert_eq!(rep.lhs, 0.0);
        prop_assert_eq!(rep.rhs, 0.0);
        prop_assert!(rep.verdict != Verdict::Violated);
    }

    #[test]
    fn polygon_area_and_length_are_rigid_motion_invariant(
        pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..12),
        angle in 0.0f64..std::f64::consts::TAU,
        shift in (-5.0f64..5.0, -5.0f64..5.0),
    ) {
        let mut closed = pts.clone();
        closed.push(pts[0]);
        let (c, s) = (angle.cos(), angle.sin());
        let moved: Vec<(f64, f64)> = closed.iter().map(|&(x, y)| (c * x - s * y + shift.0, s * x + c * y + shift.1)).collect();
        let (a0, l0) = polygon_area_length(&closed).unwrap();
        let (a1, l1) = polygon_area_length(&moved).unwrap();
        prop_assert!((a0 - a1).abs() <= 1e-12 * (1.0 + a0) * 100.0);
        prop_assert!((l0 - l1).abs() <= 1e-12 * (1.0 + l0));
    }
}
