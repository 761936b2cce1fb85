//! Expression DAGs for polynomial and rational functions in solution
//! variables and parameters: parsing, exact symbolic differentiation,
//! point and interval evaluation, parametrized systems and parameter-space
//! homotopies.

pub mod dag;
pub mod parse;
pub mod system;

pub use dag::{Dag, ExprId, Node, Wrt};
pub use parse::{parse_problem, ParsedProblem};
pub use system::{Homotopy, ParametricSystem, PathSpec, SystemInstance};
