pub mod linalg;
pub mod majorant;
pub mod monotone;
pub mod sampling;
pub mod smooth;
pub mod newton;
pub mod problems;
pub mod subproblem;
