use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use psdda::objective::l1_norm;
use psdda::{project_l1_ball, proximal_projection, FeasibleSet, Objective, QuadraticObjective, SensorObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quad(targets: Array2<f64>) -> Objective {
    Objective::Quadratic(QuadraticObjective::new(targets).unwrap())
}

/// Uniform point of the l1 ball by rejection from the enclosing cube.
fn ball_point(rng: &mut ChaCha8Rng, dim: usize, h: f64) -> Array1<f64> {
    loop {
        let x = Array1::from_shape_fn(dim, |_| rng.random_range(-h..=h));
        if l1_norm(x.view()) <= h {
            return x;
        }
    }
}

#[test]
fn quadratic_examples() {
    let obj = quad(array![[0.0, 0.0], [1.0, -1.0]]);
    let (v, g) = obj.value_and_subgradient(1, array![1.0, -1.0].view());
    assert_eq!((v, g), (0.0, array![0.0, 0.0]));
    let (v, g) = obj.value_and_subgradient(0, array![1.0, 1.0].view());
    assert_eq!((v, g), (2.0, array![2.0, 2.0]));
}

#[test]
fn sensor_examples() {
    // a = 1, b = 1, truth 0 gives r = 1
    let obj = Objective::Sensor(SensorObjective::new(array![1.0], array![1.0], 0.0).unwrap());
    assert_eq!(obj.value_and_subgradient(0, array![1.0].view()), (0.0, array![0.0]));
    assert_eq!(obj.value_and_subgradient(0, array![0.0].view()), (0.5, array![-1.0]));
}

#[test]
fn lipschitz_examples() {
    let ball = FeasibleSet::l1_ball(3.0).unwrap();
    assert_eq!(quad(Array2::zeros((4, 2))).lipschitz_bound(&ball), 6.0);
    let small = FeasibleSet::l1_ball(0.1).unwrap();
    let sensor = Objective::Sensor(SensorObjective::new(array![1.0, 2.0], array![0.0, 0.0], 0.0).unwrap());
    assert!((sensor.lipschitz_bound(&small) - 0.1).abs() < 1e-15);
}

#[test]
fn optimum_examples() {
    let ball = FeasibleSet::l1_ball(3.0).unwrap();
    let inside = quad(array![[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(inside.exact_optimum(&ball).point, array![0.5, 0.5]);

    let outside = quad(array![[3.0, 1.0], [3.0, 1.0]]);
    let opt = outside.exact_optimum(&ball);
    assert_eq!(opt.point, array![2.5, 0.5]);
    // grid minimum, step 1e-3, of (x - 3)^2 + (y - 1)^2
    let mut best = f64::INFINITY;
    for a in -3000i32..=3000 {
        let x = a as f64 * 1e-3;
        let n = 3000 - a.abs();
        for b in -n..=n {
            let y = b as f64 * 1e-3;
            best = best.min((x - 3.0).powi(2) + (y - 1.0).powi(2));
        }
    }
    assert!((opt.value - best).abs() <= 1e-5);

    // readings r = a * 0 + b averaging 1.5, clamped to h
    let sensor = Objective::Sensor(SensorObjective::new(array![1.0, 1.0], array![1.0, 2.0], 0.0).unwrap());
    let opt = sensor.exact_optimum(&FeasibleSet::l1_ball(0.1).unwrap());
    assert_eq!(opt.point, array![0.1]);
}

fn random_objectives(rng: &mut ChaCha8Rng) -> Vec<(Objective, FeasibleSet)> {
    vec![
        (
            Objective::Quadratic(QuadraticObjective::random(5, 2, -2.0, 2.0, rng).unwrap()),
            FeasibleSet::l1_ball(3.0).unwrap(),
        ),
        (
            Objective::Quadratic(QuadraticObjective::random(4, 3, -4.0, 4.0, rng).unwrap()),
            FeasibleSet::l1_ball(1.0).unwrap(),
        ),
        (
            Objective::Sensor(SensorObjective::random(8, 0.0, rng).unwrap()),
            FeasibleSet::l1_ball(0.1).unwrap(),
        ),
        (
            Objective::Sensor(SensorObjective::random(8, 2.0, rng).unwrap()),
            FeasibleSet::l1_ball(5.0).unwrap(),
        ),
    ]
}

#[test]
fn subgradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (obj, set) in random_objectives(&mut rng) {
        for _ in 0..100 {
            let x = ball_point(&mut rng, obj.dim(), set.radius());
            let i = rng.random_range(0..obj.nodes());
            let (_, g) = obj.value_and_subgradient(i, x.view());
            let dir = Array1::from_shape_fn(obj.dim(), |_| rng.random_range(-1.0..=1.0));
            let h = 1e-5;
            let fd = (obj.local_value(i, (&x + &(&dir * h)).view()) - obj.local_value(i, (&x - &(&dir * h)).view()))
                / (2.0 * h);
            let exact = g.dot(&dir);
            assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd} vs {exact}");
        }
    }
}

#[test]
fn sampled_gradients_stay_below_lipschitz_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (obj, set) in random_objectives(&mut rng) {
        let l = obj.lipschitz_bound(&set);
        for _ in 0..10_000 {
            let x = ball_point(&mut rng, obj.dim(), set.radius());
            let i = rng.random_range(0..obj.nodes());
            let g = obj.value_and_subgradient(i, x.view()).1;
            assert!(g.dot(&g).sqrt() <= l);
        }
    }
}

#[test]
fn optimum_satisfies_first_order_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (obj, set) in random_objectives(&mut rng) {
        let opt = obj.exact_optimum(&set);
        assert!(set.contains(opt.point.view()));
        let grad = obj.gradient(opt.point.view());
        for _ in 0..1000 {
            let x = ball_point(&mut rng, obj.dim(), set.radius());
            assert!(grad.dot(&(&x - &opt.point)) >= -1e-8);
        }
    }
}

#[test]
fn projection_examples() {
    assert_eq!(project_l1_ball(array![0.5, -1.0].view(), 3.0), array![0.5, -1.0]);
    assert_eq!(project_l1_ball(array![3.0, 1.0].view(), 3.0), array![2.5, 0.5]);
}

#[test]
fn projection_norm_over_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let dim = rng.random_range(1..=6);
        let h = rng.random_range(0.05..=5.0);
        let v = Array1::from_shape_fn(dim, |_| rng.random_range(-10.0..=10.0));
        let p = project_l1_ball(v.view(), h);
        assert!((l1_norm(p.view()) - l1_norm(v.view()).min(h)).abs() <= 1e-10);
    }
}

fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..6).prop_flat_map(|d| proptest::collection::vec(-20.0f64..20.0, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn projection_is_idempotent(v in vec_strategy(), h in 0.01f64..10.0) {
        let v = Array1::from(v);
        let p = project_l1_ball(v.view(), h);
        let pp = project_l1_ball(p.view(), h);
        prop_assert!((&p - &pp).mapv(f64::abs).sum() <= 1e-10);
        prop_assert!(l1_norm(p.view()) <= h + 1e-12);
    }

    #[test]
    fn projection_is_nonexpansive(
        pair in (1usize..6).prop_flat_map(|d| (
            proptest::collection::vec(-20.0f64..20.0, d),
            proptest::collection::vec(-20.0f64..20.0, d),
        )),
        h in 0.01f64..10.0,
        alpha in 0.001f64..10.0,
    ) {
        let (u, v) = (Array1::from(pair.0), Array1::from(pair.1));
        let dist = |a: &Array1<f64>, b: &Array1<f64>| (a - b).mapv(|x| x * x).sum().sqrt();
        prop_assert!(dist(&project_l1_ball(u.view(), h), &project_l1_ball(v.view(), h)) <= dist(&u, &v) + 1e-10);
        let set = FeasibleSet::l1_ball(h).unwrap();
        let pu = proximal_projection(u.view(), alpha, &set).unwrap();
        let pv = proximal_projection(v.view(), alpha, &set).unwrap();
        prop_assert!(dist(&pu, &pv) <= alpha * dist(&u, &v) + 1e-10);
    }
}
