use heis_sio::group::{dilate, dist, inv, koranyi_norm, mul, Point, VerticalSubgroup};
use heis_sio::kernels::CZKernel;
use heis_sio::removability::horizontal_path;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn close(a: Point, b: Point, tol: f64) -> bool {
    let s = 1.0 + a.x.abs().max(a.y.abs()).max(a.t.abs());
    (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.t - b.t).abs()) <= tol * s
}

proptest! {
    #[test]
    fn associativity(a in point(), b in point(), c in point()) {
        prop_assert!(close(mul(mul(a, b), c), mul(a, mul(b, c)), 1e-13));
    }

    #[test]
    fn inverse_cancels(a in point()) {
        prop_assert!(close(mul(a, inv(a)), Point::IDENTITY, 1e-15));
        prop_assert_eq!(koranyi_norm(a), koranyi_norm(inv(a)));
    }

    #[test]
    fn distance_is_left_invariant(a in point(), b in point(), g in point()) {
        let (d, dg) = (dist(a, b), dist(mul(g, a), mul(g, b)));
        prop_assert!((d - dg).abs() <= 1e-10 * (1.0 + d));
    }

    #[test]
    fn dilation_scales_norm(a in point(), r in 0.01..100.0f64) {
        let n = koranyi_norm(dilate(r, a).unwrap());
        prop_assert!((n - r * koranyi_norm(a)).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn projections_recompose(a in point(), theta in -3.2..3.2f64) {
        let w = VerticalSubgroup::new(theta).unwrap();
        let (pw, v) = w.split(a);
        prop_assert!(close(mul(w.embed_w(pw), w.embed_v(v)), a, 1e-13));
    }

    #[test]
    fn riesz_kernel_is_homogeneous_and_horizontally_odd(a in point(), r in 0.1..10.0f64) {
        prop_assume!(koranyi_norm(a) > 1e-3);
        let k = CZKernel::riesz();
        let (v, vr, vi) = (k.eval(a).unwrap().v, k.eval(dilate(r, a).unwrap()).unwrap().v, k.eval(Point::new(-a.x, -a.y, a.t)).unwrap().v);
        for i in 0..2 {
            prop_assert!((vr[i] * r.powi(3) - v[i]).abs() <= 1e-11 * (1.0 + v[i].abs()));
            prop_assert!((vi[i] + v[i]).abs() <= 1e-12 * (1.0 + v[i].abs()));
        }
    }

    #[test]
    fn horizontal_paths_are_short(a in point(), b in point()) {
        let p = horizontal_path(a, b);
        prop_assert!(close(p.traced_end(), b, 1e-12));
        prop_assert!(p.length() <= 3.0 * dist(b, a) * (1.0 + 1e-12) + 1e-15);
    }
}
