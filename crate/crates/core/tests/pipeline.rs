use heis_sio::graphs::IntrinsicFunction;
use heis_sio::kernels::CZKernel;
use heis_sio::quadrature::{build_christ_cubes, build_graph_measure, Domain};
use heis_sio::removability::Charges;
use heis_sio::sio::{apply_truncated, t1_test, T1Pair};

fn run() -> (T1Pair, Vec<[f64; 3]>, Vec<f64>) {
    let f = IntrinsicFunction::bump(0.4, 0.3).unwrap();
    let mu = build_graph_measure(&f, Domain::new(-0.5, 0.5, -0.125, 0.125).unwrap(), 16, 128).unwrap();
    let tree = build_christ_cubes(&mu, -1, 0).unwrap();
    let k = CZKernel::riesz();
    let t1 = t1_test(&k, &mu, &tree, &[0.5, 0.25, 0.125]).unwrap();
    let ones = vec![1.0; mu.len()];
    let tf: Vec<[f64; 3]> = apply_truncated(&k, &mu, &ones, 0.1).unwrap();
    let pot = Charges::from_measure(&mu, &ones).unwrap().potential_field(&mu.points.iter().map(|p| p.mul(heis_sio::Point::new(0.2, 0.0, 0.0))).collect::<Vec<_>>()).unwrap();
    (t1, tf, pot)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
    assert_eq!(one.0, four.0);
    assert_eq!(one.1, four.1);
    assert_eq!(one.2, four.2);
}

#[test]
fn t1_ratios_are_finite_and_ordered() {
    let (t1, _, _) = run();
    for rep in [&t1.direct, &t1.adjoint] {
        assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
        let eps: Vec<f64> = rep.max_ratio_per_eps.iter().map(|x| x.0).collect();
        assert_eq!(eps, vec![0.5, 0.25, 0.125]);
    }
}
