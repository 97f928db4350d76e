pub mod audit;
pub mod deform;
pub mod minimize;
pub mod probe;
pub mod project;
pub mod retract;
pub mod rotate;
pub mod slice;
pub mod whitney;

use gmtk::linalg::Vector;
use rand::Rng;

/// Uniform point in `[−half, half]^n`.
pub fn uniform_point<R: Rng>(rng: &mut R, n: usize, half: f64) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-half..=half)))
}

pub fn fmt_vec(v: &Vector) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}
