use heis_sio::graphs::{graph_map, IntrinsicFunction};
use heis_sio::group::{dist, Point, WPoint};
use heis_sio::quadrature::{build_graph_measure, Domain, GraphMeasure};
use heis_sio::removability::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump() -> (IntrinsicFunction, GraphMeasure) {
    let f = IntrinsicFunction::bump(0.4, 0.3).unwrap();
    let mu = build_graph_measure(&f, Domain::new(-0.5, 0.5, -0.125, 0.125).unwrap(), 24, 288).unwrap();
    (f, mu)
}

/// Points displaced horizontally off the graph by `0.1..0.4` on either side.
fn off_graph_samples(f: &IntrinsicFunction, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let w = WPoint::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.08..0.08));
            let q = graph_map(f, w);
            let s = rng.gen_range(0.1..0.4) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            q.mul(Point::new(s, 0.0, 0.0))
        })
        .collect()
}

#[test]
fn bump_potential_lipschitz_quotient_tracks_gradient() {
    let (f, mu) = bump();
    let c = Charges::from_measure(&mu, &vec![1.0; mu.len()]).unwrap();
    let pts = off_graph_samples(&f, 200, 1);
    let pairs = sample_pairs(&pts, 1e-3, 2);
    let lip = lipschitz_stat(|p| c.potential_raw(p), &pairs);
    let grad = fd_gradient_sup(|p| c.potential_raw(p), &pts, 1e-4).unwrap();
    assert!(lip.quotient.is_finite() && grad.is_finite());
    assert!(lip.quotient <= 5.0 * grad && grad <= 5.0 * lip.quotient);
}

#[test]
fn pairing_constant_is_shared_by_point_masses_and_graph_measures() {
    let (_, mu) = bump();
    let b = PlateauBox::new([0.6, 0.7, 0.3], [1.2, 1.4, 0.6]).unwrap();
    let point = nonharmonicity_pairing(&Charges::point_mass(Point::IDENTITY, 1.0), &b, 40).unwrap();
    let ones = nonharmonicity_pairing(&Charges::from_measure(&mu, &vec![1.0; mu.len()]).unwrap(), &b, 40).unwrap();
    let core: Vec<f64> = mu.nodes.iter().map(|w| if w.w1.abs() < 0.2 { 1.0 } else { 0.3 }).collect();
    let part = nonharmonicity_pairing(&Charges::from_measure(&mu, &core).unwrap(), &b, 40).unwrap();
    assert!(ones.value < 0.0 && part.value < 0.0);
    assert!((ones.constant / part.constant - 1.0).abs() < 0.1);
    assert!((ones.constant / point.constant - 1.0).abs() < 0.1);
}

#[test]
fn paths_on_graph_points() {
    let (_, mu) = bump();
    for k in (0..mu.len()).step_by(97) {
        let (a, b) = (mu.points[k], mu.points[(k * 7 + 3) % mu.len()]);
        let path = horizontal_path(a, b);
        let e = path.traced_end();
        assert!((e.x - b.x).abs().max((e.y - b.y).abs()).max((e.t - b.t).abs()) <= 1e-12);
        assert!(path.length() <= 3.0 * dist(b, a) + 1e-15);
    }
}
