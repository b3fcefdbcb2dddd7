//! Local objectives of the two experiment families and the l1-ball constraint.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed in membership tests.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    L1Ball { radius: f64 },
}

impl FeasibleSet {
    pub fn l1_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "l1-ball radius must be positive, got {radius}"
            )));
        }
        Ok(FeasibleSet::L1Ball { radius })
    }

    pub fn radius(&self) -> f64 {
        match *self {
            FeasibleSet::L1Ball { radius } => radius,
        }
    }

    pub fn contains(&self, x: ArrayView1<'_, f64>) -> bool {
        match *self {
            FeasibleSet::L1Ball { radius } => l1_norm(x) <= radius + FEASIBILITY_TOL,
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        match *self {
            FeasibleSet::L1Ball { radius } => project_l1_ball(v, radius),
        }
    }

    /// `sup_{x in X} ||x||_2`.
    pub fn max_euclidean_norm(&self) -> f64 {
        match *self {
            // attained at a vertex h e_k
            FeasibleSet::L1Ball { radius } => radius,
        }
    }
}

pub fn l1_norm(x: ArrayView1<'_, f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn l2_norm(x: ArrayView1<'_, f64>) -> f64 {
    x.dot(&x).sqrt()
}

/// Euclidean projection of `v` onto `{x : ||x||_1 <= radius}`.
///
/// Outside the ball the result is the soft threshold `sign(v) max(|v| - theta, 0)`
/// where `theta` comes from a scan over the sorted magnitudes.
pub fn project_l1_ball(v: ArrayView1<'_, f64>, radius: f64) -> Array1<f64> {
    if l1_norm(v) <= radius {
        return v.to_owned();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// `f_i(x) = ||x - U_i||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    targets: Array2<f64>,
}

impl QuadraticObjective {
    pub fn new(targets: Array2<f64>) -> Result<Self> {
        if targets.nrows() == 0 || targets.ncols() == 0 {
            return Err(Error::InvalidParameter("empty target matrix".into()));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite target vector".into()));
        }
        Ok(QuadraticObjective { targets })
    }

    /// Targets drawn uniformly from `[low, high]^dim`.
    pub fn random<R: Rng>(nodes: usize, dim: usize, low: f64, high: f64, rng: &mut R) -> Result<Self> {
        if !(low < high) {
            return Err(Error::InvalidParameter(format!(
                "target range [{low}, {high}] is empty"
            )));
        }
        let targets = Array2::from_shape_fn((nodes, dim), |_| rng.random_range(low..high));
        Self::new(targets)
    }

    pub fn targets(&self) -> &Array2<f64> {
        &self.targets
    }

    pub fn value_and_subgradient(&self, node: usize, x: ArrayView1<'_, f64>) -> (f64, Array1<f64>) {
        let diff = &x - &self.targets.row(node);
        (diff.dot(&diff), 2.0 * diff)
    }

    pub fn mean_target(&self) -> Array1<f64> {
        self.targets.mean_axis(Axis(0)).expect("at least one target row")
    }
}

/// Scalar sensor model: `f_i(x) = 0.5 (r_i - x)^2` with `r_i = a_i x_true + b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorObjective {
    gains: Array1<f64>,
    offsets: Array1<f64>,
    truth: f64,
    readings: Array1<f64>,
}

impl SensorObjective {
    pub fn new(gains: Array1<f64>, offsets: Array1<f64>, truth: f64) -> Result<Self> {
        if gains.len() != offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: gains.len(),
                found: offsets.len(),
            });
        }
        if gains.is_empty() {
            return Err(Error::InvalidParameter("no sensors".into()));
        }
        if gains.iter().chain(offsets.iter()).any(|v| !v.is_finite()) || !truth.is_finite() {
            return Err(Error::InvalidParameter("non-finite sensor parameter".into()));
        }
        let readings = &gains * truth + &offsets;
        Ok(SensorObjective {
            gains,
            offsets,
            truth,
            readings,
        })
    }

    /// Gains uniform on `[1, 2]`, offsets uniform on `[-1/2, 1/2]`.
    pub fn random<R: Rng>(nodes: usize, truth: f64, rng: &mut R) -> Result<Self> {
        let gains = Array1::from_shape_fn(nodes, |_| rng.random_range(1.0..=2.0));
        let offsets = Array1::from_shape_fn(nodes, |_| rng.random_range(-0.5..=0.5));
        Self::new(gains, offsets, truth)
    }

    pub fn gains(&self) -> &Array1<f64> {
        &self.gains
    }

    pub fn offsets(&self) -> &Array1<f64> {
        &self.offsets
    }

    pub fn truth(&self) -> f64 {
        self.truth
    }

    pub fn readings(&self) -> &Array1<f64> {
        &self.readings
    }

    pub fn value_and_subgradient(&self, node: usize, x: ArrayView1<'_, f64>) -> (f64, Array1<f64>) {
        let residual = self.readings[node] - x[0];
        (0.5 * residual * residual, Array1::from_elem(1, -residual))
    }
}

/// Minimizer of the network objective over the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub point: Array1<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Quadratic(QuadraticObjective),
    Sensor(SensorObjective),
}

impl Objective {
    pub fn nodes(&self) -> usize {
        match self {
            Objective::Quadratic(q) => q.targets.nrows(),
            Objective::Sensor(s) => s.readings.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::Quadratic(q) => q.targets.ncols(),
            Objective::Sensor(_) => 1,
        }
    }

    pub fn value_and_subgradient(&self, node: usize, x: ArrayView1<'_, f64>) -> (f64, Array1<f64>) {
        match self {
            Objective::Quadratic(q) => q.value_and_subgradient(node, x),
            Objective::Sensor(s) => s.value_and_subgradient(node, x),
        }
    }

    pub fn local_value(&self, node: usize, x: ArrayView1<'_, f64>) -> f64 {
        self.value_and_subgradient(node, x).0
    }

    /// `f(x) = (1/m) sum_i f_i(x)`.
    pub fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        let m = self.nodes();
        (0..m).map(|i| self.local_value(i, x)).sum::<f64>() / m as f64
    }

    /// Gradient of the network objective.
    pub fn gradient(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let m = self.nodes();
        let mut g = Array1::zeros(self.dim());
        for i in 0..m {
            g += &self.value_and_subgradient(i, x).1;
        }
        g / m as f64
    }

    /// Uniform bound on `||grad f_i||` over the set.
    pub fn lipschitz_bound(&self, set: &FeasibleSet) -> f64 {
        let reach = set.max_euclidean_norm();
        match self {
            Objective::Quadratic(q) => {
                let max_target = q.targets.rows().into_iter().map(l2_norm).fold(0.0, f64::max);
                2.0 * (reach + max_target)
            }
            Objective::Sensor(s) => s.readings.iter().map(|r| reach + r.abs()).fold(0.0, f64::max),
        }
    }

    pub fn exact_optimum(&self, set: &FeasibleSet) -> Optimum {
        let point = match self {
            // ||x - u_bar||^2 + const, so the minimizer is the projection of u_bar
            Objective::Quadratic(q) => set.project(q.mean_target().view()),
            Objective::Sensor(s) => {
                let h = set.radius();
                let mean = s.readings.mean().unwrap_or(0.0);
                Array1::from_elem(1, mean.clamp(-h, h))
            }
        };
        let value = self.value(point.view());
        Optimum { point, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn l1_projection_examples() {
        let inside = array![1.0, -1.5];
        assert_eq!(project_l1_ball(inside.view(), 3.0), inside);
        assert_eq!(project_l1_ball(array![3.0, 1.0].view(), 3.0), array![2.5, 0.5]);
        assert_eq!(project_l1_ball(array![-3.0, 1.0].view(), 3.0), array![-2.5, 0.5]);
        // all mass on one coordinate
        assert_eq!(
            project_l1_ball(array![0.0, 10.0, 0.0].view(), 2.0),
            array![0.0, 2.0, 0.0]
        );
    }

    // Minimizes ||x - v||^2 over a fine grid of the 2-d ball.
    fn grid_projection(v: [f64; 2], h: f64, step: f64) -> ([f64; 2], f64) {
        let n = (h / step).round() as i64;
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for a in -n..=n {
            let x0 = a as f64 * step;
            let rem = h - x0.abs();
            let nb = (rem / step + 1e-9).floor() as i64;
            for b in -nb..=nb {
                let x1 = b as f64 * step;
                let d = (x0 - v[0]).powi(2) + (x1 - v[1]).powi(2);
                if d < best.1 {
                    best = ([x0, x1], d);
                }
            }
        }
        best
    }

    #[test]
    fn l1_projection_matches_grid_search() {
        let (grid, dist) = grid_projection([3.0, 1.0], 3.0, 1e-3);
        let p = project_l1_ball(array![3.0, 1.0].view(), 3.0);
        let ours = (p[0] - 3.0).powi(2) + (p[1] - 1.0).powi(2);
        assert!(ours <= dist + 1e-12);
        assert!((grid[0] - 2.5).abs() < 2e-3 && (grid[1] - 0.5).abs() < 2e-3);
    }

    #[test]
    fn quadratic_values() {
        let obj = QuadraticObjective::new(array![[0.0, 0.0], [1.0, 2.0]]).unwrap();
        let (v, g) = obj.value_and_subgradient(1, array![1.0, 2.0].view());
        assert_eq!(v, 0.0);
        assert_eq!(g, array![0.0, 0.0]);
        let (v, g) = obj.value_and_subgradient(0, array![1.0, 1.0].view());
        assert_eq!(v, 2.0);
        assert_eq!(g, array![2.0, 2.0]);
    }

    #[test]
    fn sensor_values() {
        let s = SensorObjective::new(array![1.0, 1.0], array![1.0, 0.25], 0.0).unwrap();
        assert_eq!(s.value_and_subgradient(0, array![1.0].view()), (0.0, array![-0.0]));
        assert_eq!(s.value_and_subgradient(0, array![0.0].view()), (0.5, array![-1.0]));
    }

    #[test]
    fn lipschitz_examples() {
        let set = FeasibleSet::l1_ball(3.0).unwrap();
        let quad = Objective::Quadratic(QuadraticObjective::new(Array2::zeros((4, 2))).unwrap());
        assert_eq!(quad.lipschitz_bound(&set), 6.0);
        let sensor = Objective::Sensor(SensorObjective::new(array![1.0, 2.0], array![0.0, 0.0], 0.0).unwrap());
        assert_eq!(sensor.lipschitz_bound(&FeasibleSet::l1_ball(0.1).unwrap()), 0.1);
    }

    #[test]
    fn optimum_examples() {
        let set = FeasibleSet::l1_ball(3.0).unwrap();
        let quad = Objective::Quadratic(QuadraticObjective::new(array![[0.5, 0.0], [0.5, 1.0]]).unwrap());
        assert_eq!(quad.exact_optimum(&set).point, array![0.5, 0.5]);

        let quad = Objective::Quadratic(QuadraticObjective::new(array![[2.0, 0.0], [4.0, 2.0]]).unwrap());
        let opt = quad.exact_optimum(&set);
        assert_eq!(opt.point, array![2.5, 0.5]);
        // grid oracle on the same objective
        let (grid, _) = grid_projection([3.0, 1.0], 3.0, 1e-3);
        let grid_value = quad.value(array![grid[0], grid[1]].view());
        assert!((opt.value - grid_value).abs() <= 1e-5);
        assert!(opt.value <= grid_value + 1e-12);

        let sensor = Objective::Sensor(SensorObjective::new(array![1.0, 1.0], array![1.0, 2.0], 0.0).unwrap());
        let opt = sensor.exact_optimum(&FeasibleSet::l1_ball(0.1).unwrap());
        assert_eq!(opt.point, array![0.1]);
    }

    #[test]
    fn random_generators_respect_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SensorObjective::random(50, 0.3, &mut rng).unwrap();
        assert!(s.gains().iter().all(|a| (1.0..=2.0).contains(a)));
        assert!(s.offsets().iter().all(|b| (-0.5..=0.5).contains(b)));
        let q = QuadraticObjective::random(8, 2, -2.0, 2.0, &mut rng).unwrap();
        assert!(q.targets().iter().all(|u| (-2.0..2.0).contains(u)));
        assert!(QuadraticObjective::random(8, 2, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn invalid_sets_and_inputs() {
        assert!(FeasibleSet::l1_ball(0.0).is_err());
        assert!(FeasibleSet::l1_ball(f64::NAN).is_err());
        assert!(SensorObjective::new(array![1.0], array![1.0, 2.0], 0.0).is_err());
        assert!(QuadraticObjective::new(array![[f64::NAN]]).is_err());
    }
}
