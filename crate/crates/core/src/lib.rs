#![no_std]
#![cfg_attr(test, allow(unused_imports))]
#![doc = include_str!("../README.md")]

extern crate alloc;

pub mod banded;
pub mod dc;
pub mod dense;
pub mod error;
pub mod function;
pub mod hss;
pub mod krylov;
pub mod lu;
pub mod operator;
pub mod problems;
pub mod splitting;

pub use banded::{eps_bandwidth, offdiag_split, BandLu, BandedMatrix, OffdiagSplit};
pub use dc::{dc_funm, dc_funm_report, DcConfig, DcInput, DcOutput, DcReport, Flag, UpdateRecord};
pub use dense::{funm_block12, funm_dense, sym_update_x, DenseMatrix};
pub use error::{Error, Result};
pub use function::FunctionSpec;
pub use hss::{build_cluster_tree, ClusterTree, HssMatrix, HssNode};
pub use krylov::{
    block_rational_arnoldi, krylov_update, update_diag, update_trace, KrylovOptions, Pole, PoleKind, PoleSequence,
    UpdateResult, UpdateStatus,
};
pub use lu::{DenseLu, Solve};
pub use operator::{BlockDiagonal, LinearOperator, DEFAULT_DENSE_CAP};
pub use problems::{
    chebyshev_coeffs, chebyshev_error, chebyshev_eval, chebyshev_funm, gen_a1, gen_a2, gen_a3, gen_anderson, gen_fractional,
    gen_gmrf, gen_hamiltonian, gen_test_suite, grunwald_weights, spectral_interval, HamiltonianParams,
};
pub use splitting::{split_diag, split_funm_adaptive, split_funm_fixed, split_trace, SplitMode, SplitPlan, SplitResult};

pub use nalgebra;
pub use num_complex;
