//! Sparse storage formats, generators and file ingestion.

mod bcsr;
mod csr;
mod mtx;
mod pattern;
mod poisson;

pub use bcsr::BcsrMatrix;
pub use csr::CsrMatrix;
pub use mtx::{parse_matrix_market, read_matrix_market};
pub use pattern::PatternMatrix;
pub use poisson::poisson_3d;
