//! Construction of rational maps that carry a compact set out to infinity
//! along a chain of discs while the boundaries of its neighbourhoods fall
//! into an attracting basin.
//!
//! The crate is organised around the pipeline:
//!
//! * [`grid`] — rasterised planar sets (masks, distance transforms, components, contours);
//! * [`compacta`] — the nested compacta `K_j`, the disc chain `D_j` / `Delta_j`,
//!   and the stage neighbourhoods `R_j`, `L_j`;
//! * [`rational`] — rational maps in stabilised partial-fraction form;
//! * [`runge`] — sup-norm rational approximation on disjoint compact pieces
//!   with prescribed pole sites;
//! * [`construction`] — the inductive stage driver with its margin ledger;
//! * [`dynamics`] — orbit classification and the escape/capture/separation checks;
//! * [`fractal`] — generalised Koch curves, snowflake domains, box-counting
//!   dimension, and the planar-domain classifiers.
//!
//! All heavy sweeps are data-parallel when the `parallel` feature (default)
//! is enabled; the same code paths fall back to sequential iteration without it.

pub mod compacta;
pub mod construction;
pub mod dynamics;
pub mod error;
pub mod fractal;
pub mod geom;
pub mod grid;
pub mod io;
pub mod par;
pub mod rational;
pub mod runge;

pub use error::CoreError;
pub use geom::{AffineMap, Disc, Rect};
pub use grid::GridRegion;
pub use rational::{RationalMap, Value};

/// Crate-wide complex scalar.
pub type C = num_complex::Complex64;
