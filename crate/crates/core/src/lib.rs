//! Fisher-information loss from binning list-mode Poisson data.
//!
//! List-mode data records every event's attribute vector; binned data only
//! records how many events fell into each of `M` cells. This crate computes
//! the Fisher information matrices of both data types, the exact loss
//! `ΔθᵀF_LMΔθ − ΔθᵀF_BΔθ` for a perturbation, and the decomposition that
//! explains it: the loss is the squared `1/ḡ`-weighted norm of the part of
//! `Δθ·∇ḡ` annihilated by the binning operator.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`, which is what the command-line
//! tool uses.
//!
//! Module map:
//!
//! * [`model`]: attribute spaces, the [`ParametricModel`] trait and the zoo
//! * [`quadrature`]: per-bin Gauss-Legendre [`NodeRule`]s
//! * [`binning`]: schemes, the binning operator, adjoint and projection
//! * [`fisher`]: FIMs, loss reports, detectability and AUC
//! * [`reconstruction`]: the object-space loss with a convolution operator
//! * [`montecarlo`]: event-list sampling and bin-mean validation

// `!(x > 0)` guards are deliberate: they reject NaN along with the
// out-of-range values. Parallel index loops read better than zipped iterators
// in the quadrature and operator code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod binning;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod reconstruction;
pub mod scalar;

pub use binning::{BinnedVector, BinningScheme, Cell, NodeFunction};
pub use error::{Error, Result};
pub use fisher::{Detectability, Fim, LossReport};
pub use linalg::Matrix;
pub use model::zoo::{GaussianBump, ZooModel};
pub use model::{AttributeSpace, ParametricModel};
pub use montecarlo::EventList;
pub use quadrature::{build_composite_rule, build_rule, NodeRule};
pub use reconstruction::{ObjectFunction, ObjectGrid, PsfSpec, SystemOperator};
pub use scalar::Scalar;

pub type AttributeSpace64 = AttributeSpace<f64>;
pub type ZooModel64 = ZooModel<f64>;
pub type BinningScheme64 = BinningScheme<f64>;
pub type NodeRule64 = NodeRule<f64>;
pub type NodeFunction64 = NodeFunction<f64>;
pub type BinnedVector64 = BinnedVector<f64>;
pub type Fim64 = Fim<f64>;
pub type LossReport64 = LossReport<f64>;
pub type Matrix64 = Matrix<f64>;
pub type ObjectGrid64 = ObjectGrid<f64>;
pub type ObjectFunction64 = ObjectFunction<f64>;
pub type PsfSpec64 = PsfSpec<f64>;
pub type SystemOperator64 = SystemOperator<f64>;
pub type EventList64 = EventList<f64>;

pub type AttributeSpace32 = AttributeSpace<f32>;
pub type ZooModel32 = ZooModel<f32>;
pub type BinningScheme32 = BinningScheme<f32>;
pub type NodeRule32 = NodeRule<f32>;
pub type Fim32 = Fim<f32>;
pub type LossReport32 = LossReport<f32>;
