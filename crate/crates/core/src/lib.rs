//! Equilibria, margin maps, certified bounds and simulation for a
//! stake-governed random-turn tug-of-war.

pub mod certified;
pub mod dynamics;
pub mod elementary;
pub mod engine;
pub mod error;
pub mod margin;
pub mod solution;

pub use error::{Error, Result};
pub use solution::{BoundaryData, Form, PhiView, Quadruple, Transform, Window};
