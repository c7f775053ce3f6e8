//! Randomized invariants of the series layer, the resolvents and the kernels.

use hypomodel::field::GridSpec;
use hypomodel::kernels::KernelEvaluator;
use hypomodel::laurent::{circle_samples, tail_from_samples};
use hypomodel::operators::{commutator_apply, op_z, op_z_star, resolvent_z_tail};
use hypomodel::{Complex64, DomainSpec, LaurentTail};
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn tail(max_len: usize) -> impl Strategy<Value = LaurentTail> {
    prop::collection::vec(complex(1.0), 1..max_len).prop_map(LaurentTail::new)
}

/// A point of modulus in `[lo, hi]`.
fn annulus(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_resolvent_inverts_z_minus_a(f in tail(12), a in annulus(1.5, 4.0)) {
        let g = resolvent_z_tail(&f, a);
        let back = op_z(&g).axpy(-a, &g);
        prop_assert!(back.sub(&f).max_abs() < 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn z_resolvent_matches_the_difference_quotient(f in tail(8), a in annulus(1.5, 3.0), z in annulus(1.5, 3.0)) {
        prop_assume!((z - a).norm() > 1e-3);
        let g = resolvent_z_tail(&f, a);
        let want = (f.eval(z) - f.eval(a)) / (z - a);
        prop_assert!((g.eval(z) - want).norm() < 1e-10 * want.norm().max(1.0));
    }

    #[test]
    fn disk_commutator_is_rank_one(f in tail(10)) {
        let s = DomainSpec::unit_disk().schwarz_series(2, 4).unwrap();
        let c = commutator_apply(&f, &s).unwrap();
        // S_- = 1/z on the unit disk
        let want = LaurentTail::monomial(0, f.residue_at_infinity());
        prop_assert!(c.sub(&want.truncate(c.len())).max_abs() < 1e-14);
    }

    #[test]
    fn ellipse_commutator_is_residue_times_s_minus(f in tail(8), a in 1.2..3.0f64) {
        let b = a / 2.0;
        let s = DomainSpec::ellipse(a, b).unwrap().schwarz_series(2, 24).unwrap();
        let c = commutator_apply(&f, &s).unwrap();
        let want = s.s_minus_tail().scale(f.residue_at_infinity());
        let n = c.len().min(want.len());
        prop_assert!(c.truncate(n).sub(&want.truncate(n)).max_abs() < 1e-10 * (1.0 + want.max_abs()));
    }

    #[test]
    fn z_star_is_linear(f in tail(6), g in tail(6), c in complex(2.0)) {
        let s = DomainSpec::ellipse(2.0, 1.0).unwrap().schwarz_series(2, 16).unwrap();
        let lhs = op_z_star(&f.axpy(c, &g), &s, 12).unwrap();
        let rhs = op_z_star(&f, &s, 12).unwrap().axpy(c, &op_z_star(&g, &s, 12).unwrap());
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn sampling_recovers_tails(f in tail(16), r in 1.0..3.0f64) {
        let vals: Vec<Complex64> = circle_samples(r, 64).iter().map(|&z| f.eval(z)).collect();
        let (g, _) = tail_from_samples(&vals, r, 24, 1e-10).unwrap();
        // recovering a_k multiplies sample roundoff by r^(k+1)
        let bound = 1e-13 * r.powi(f.len() as i32 + 1) * f.max_abs().max(1.0);
        prop_assert!(g.truncate(f.len()).sub(&f).max_abs() < bound.max(1e-12));
    }

    #[test]
    fn ellipse_h_is_hermitian(s in 0.0..0.9f64, t in 0.0..6.3f64, u in 0.0..0.9f64, v in 0.0..6.3f64) {
        let d = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let k = KernelEvaluator::new(&d).unwrap();
        let z = d.boundary_point(t) * s;
        let w = d.boundary_point(v) * u;
        let (a, b) = (k.h(z, w).unwrap(), k.h(w, z).unwrap());
        prop_assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
        prop_assert!(k.h(z, z).unwrap().im.abs() < 1e-12 && k.h(z, z).unwrap().re > 0.0);
    }

    #[test]
    fn exterior_e_tends_to_one(z in annulus(1e5, 1e6), w in annulus(1e5, 1e6)) {
        let k = KernelEvaluator::new(&DomainSpec::unit_disk()).unwrap();
        prop_assume!((z - w).norm() > 1.0);
        prop_assert!((k.e(z, w).unwrap() - 1.0).norm() < 1e-8);
    }

    #[test]
    fn grid_specs_round_trip(x0 in -5.0..5.0f64, dx in 0.0..5.0f64, y0 in -5.0..5.0f64, dy in 0.0..5.0f64, h in 0.01..1.0f64) {
        let s = GridSpec { x0, x1: x0 + dx, y0, y1: y0 + dy, h };
        let text = format!("{:?},{:?},{:?},{:?},{:?}", s.x0, s.x1, s.y0, s.y1, s.h);
        prop_assert_eq!(GridSpec::parse(&text).unwrap(), s);
    }
}
