//! Polyhedral kernel: H-representation polyhedra, LP feasibility, affine
//! regions, projection and planar vertex enumeration.

pub mod elimination;
pub mod lp;
pub mod planar;
pub mod polyhedron;
pub mod region;

pub use elimination::DEFAULT_ROW_CAP;
pub use lp::{lp_feasible, lp_minimize, LpOutcome, LpSolution, LpStatus, TOL};
pub use planar::vertices_2d;
pub use polyhedron::{InteriorPoint, Polyhedron, UnionOfPolyhedra, REGULARIZATION_BOX};
pub use region::{region_to_polyhedron, AffineRegion};
