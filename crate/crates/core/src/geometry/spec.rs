//! Textual grid specifications: `circle:N`, `ico:L`, `fib:N`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{fibonacci_sphere_grid, icosphere_mesh, uniform_circle_grid, QuadratureGrid, TriangleMesh};
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpec {
    Circle(usize),
    Icosphere(u32),
    Fibonacci(usize),
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Circle(_) => 1,
            _ => 2,
        }
    }

    pub fn build(&self) -> Result<Discretization> {
        match *self {
            GridSpec::Circle(n) => Ok(Discretization::new(uniform_circle_grid(n)?, None)),
            GridSpec::Icosphere(l) => {
                let (mesh, grid) = icosphere_mesh(l)?;
                Ok(Discretization::new(grid, Some(mesh)))
            }
            GridSpec::Fibonacci(n) => Ok(Discretization::new(fibonacci_sphere_grid(n)?, None)),
        }
    }

    /// The same family at roughly four times the number of nodes.
    pub fn refined(&self) -> GridSpec {
        match *self {
            GridSpec::Circle(n) => GridSpec::Circle(4 * n),
            GridSpec::Icosphere(l) => GridSpec::Icosphere(l + 1),
            GridSpec::Fibonacci(n) => GridSpec::Fibonacci(4 * n),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Circle(n) => write!(f, "circle:{n}"),
            GridSpec::Icosphere(l) => write!(f, "ico:{l}"),
            GridSpec::Fibonacci(n) => write!(f, "fib:{n}"),
        }
    }
}

impl FromStr for GridSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| LabError::invalid(format!("grid spec `{s}` is not `kind:value`")))?;
        let bad = || LabError::invalid(format!("grid spec `{s}`: bad resolution `{arg}`"));
        match kind.trim() {
            "circle" => Ok(GridSpec::Circle(arg.trim().parse().map_err(|_| bad())?)),
            "ico" | "icosphere" => Ok(GridSpec::Icosphere(arg.trim().parse().map_err(|_| bad())?)),
            "fib" | "fibonacci" => Ok(GridSpec::Fibonacci(arg.trim().parse().map_err(|_| bad())?)),
            other => Err(LabError::invalid(format!("unknown grid kind `{other}`"))),
        }
    }
}

/// A quadrature grid with its mesh, when one exists. Shared immutably.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Arc<QuadratureGrid>,
    pub mesh: Option<Arc<TriangleMesh>>,
}

impl Discretization {
    pub fn new(grid: QuadratureGrid, mesh: Option<TriangleMesh>) -> Self {
        Discretization { grid: Arc::new(grid), mesh: mesh.map(Arc::new) }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}
