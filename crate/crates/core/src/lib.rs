//! Decoupled block ILU(k) preconditioning.
//!
//! The pipeline is split into a values-free symbolic phase that computes the
//! ILU(k) fill pattern of the block structure, and a numeric phase that runs
//! block ILU(0) on the matrix backfilled with zero blocks. The block upper
//! factor is then split as `U = D U'` so that both triangular stages of the
//! preconditioner are unit-diagonal point-wise systems, solved with level
//! scheduling, while `D^-1` is applied as a block-diagonal product.
//!
//! ```
//! use iluk::{build_preconditioner, gmres, poisson_3d, BcsrMatrix, Exec, FillParams,
//!            IlukPreconditioner, SolverConfig};
//!
//! let a = poisson_3d(6, 6, 6).unwrap();
//! let blocked = BcsrMatrix::from_csr(&a, 2).unwrap();
//! let m = IlukPreconditioner::new(build_preconditioner(&blocked, FillParams::new(1)).unwrap())
//!     .unwrap();
//! let b = a.spmv(&vec![1.0; a.num_rows()]).unwrap();
//! let (x, stats) = gmres(&a, &b, &m, &SolverConfig::default(), Exec::Sequential).unwrap();
//! assert!(stats.converged);
//! assert!((x[0] - 1.0).abs() < 1e-4);
//! ```

pub mod bench;
pub mod dense;
pub mod error;
pub mod exec;
pub mod factor;
pub mod krylov;
pub mod sparse;
pub mod symbolic;
pub mod trisolve;

pub use dense::DenseBlock;
pub use error::{Error, Result, Stage};
pub use exec::{with_threads, Exec};
pub use factor::{
    block_ilu0_factorize, block_iluk_factorize, build_preconditioner, materialize,
    materialize_csr, point_ilu0_factorize, point_iluk_factorize, split_ldu, BlockIlukFactors,
};
pub use krylov::{
    gmres, make_rhs, IdentityPreconditioner, LinearOperator, Preconditioner, RhsMode,
    SolveStats, SolverConfig,
};
pub use sparse::{
    parse_matrix_market, poisson_3d, read_matrix_market, BcsrMatrix, CsrMatrix, PatternMatrix,
};
pub use symbolic::{coupled_iluk, fill_levels, symbolic_phase, FillParams};
pub use trisolve::{
    apply_preconditioner, solve_unit_triangular, solve_unit_triangular_into, IlukPreconditioner,
    LevelSchedule, Triangle, TriangularOperand,
};
