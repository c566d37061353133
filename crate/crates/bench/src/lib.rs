//! Shared instance builders for the benchmarks.

use freelip_core::free::FreeElement;
use freelip_core::harness::{gen_element, gen_euclidean_space, gen_line_space, rng_for};
use freelip_core::{FiniteMetricSpace, Rat, Scalar};

pub fn line_instance<S: Scalar>(
    seed: u64,
    points: usize,
) -> (FiniteMetricSpace<S>, FreeElement<S>) {
    let mut rng = rng_for(seed, points as u64);
    let space = gen_line_space::<S>(&mut rng, points);
    loop {
        let m = gen_element(&mut rng, &space, points.max(2) / 2);
        if !m.is_zero() {
            return (space, m);
        }
    }
}

pub fn planar_instance(seed: u64, points: usize) -> (FiniteMetricSpace<f64>, FreeElement<f64>) {
    let mut rng = rng_for(seed, points as u64);
    let space = gen_euclidean_space(&mut rng, points);
    loop {
        let m = gen_element(&mut rng, &space, points.max(2) / 2);
        if !m.is_zero() {
            return (space, m);
        }
    }
}

pub fn exact_line_instance(seed: u64, points: usize) -> (FiniteMetricSpace<Rat>, FreeElement<Rat>) {
    line_instance::<Rat>(seed, points)
}
