//! Numerical laboratory for the topological degree of maps `S^d -> S^d`
//! (`d = 1, 2`) and the thresholded nonlocal energy
//!
//! ```text
//! E_δ(g) = ∬_{|g(x)-g(y)| > δ} δ^d / |x-y|^{2d} dx dy
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: quadrature grids and oriented meshes of `S^1` and `S^2`.
//! * [`maps`]: parametric map families, sampling and finite-difference gradients.
//! * [`degree`]: winding number, discrete Kronecker integral and a signed
//!   preimage-count oracle.
//! * [`energy`]: the pairwise thresholded energy, its Monte Carlo counterpart and
//!   the small-δ limit against the Dirichlet-type energy `∫|∇g|^d`.
//! * [`lab`]: degree/energy ratios, sweeps, extremal search and failure probes.
//! * [`proof`]: average extension into the ball, the stopping radius ρ and the
//!   interval/disk double-integral inequality check.
//!
//! Points of `S^1` are stored as unit vectors of `R^3` with vanishing third
//! coordinate, so every module works with `[f64; 3]`.

pub mod degree;
pub mod energy;
mod error;
pub mod geometry;
pub mod lab;
pub mod maps;
pub mod proof;
pub mod reduce;
pub mod seed;

pub use error::{LabError, Result};
pub use geometry::{chordal_distance, QuadratureGrid, SpherePoint, TriangleMesh};
pub use maps::{SampledMap, SphereMap};
