//! Fixtures shared by the benchmarks.

use ndarray::{Array1, Array2};
use relureach::netmodel::layer_plan;
use relureach::{random_network, Activation, AffineRegion, Network, Polyhedron, UnionOfPolyhedra};

/// Seeded network with ReLU hidden layers and a linear output layer.
pub fn network(sizes: &[usize], seed: u64) -> Network {
    let (n0, plan) = layer_plan(sizes, Activation::Relu, Activation::Linear).expect("valid sizes");
    random_network(n0, &plan, seed).expect("valid plan")
}

/// `||x||_inf <= 1` in `dim` dimensions.
pub fn unit_ball(dim: usize) -> UnionOfPolyhedra {
    UnionOfPolyhedra::single(Polyhedron::infinity_ball(&vec![0.0; dim], 1.0).expect("positive radius"))
}

/// A `dim`-cube cut by `extra` slanted rows, mapped to the plane.
pub fn planar_region(dim: usize, extra: usize) -> AffineRegion {
    let a = Array2::from_shape_fn((extra, dim), |(i, j)| ((i * 7 + j * 3) % 5) as f64 - 2.0);
    let b = Array1::from_elem(extra, 1.5);
    let domain = Polyhedron::from_box(&vec![-1.0; dim], &vec![1.0; dim])
        .and_then(|p| p.with_inequalities(a.view(), b.view()))
        .expect("matching shapes");
    let map = Array2::from_shape_fn((2, dim), |(i, j)| if (i + j) % 2 == 0 { 1.0 } else { -0.5 });
    AffineRegion::new(domain, map, Array1::zeros(2)).expect("matching shapes")
}
