//! Fractional Orlicz-Sobolev energies and their local limits.
//!
//! Everything is generic over the scalar type through [`Real`] (implemented
//! for `f32` and `f64`); the `*64` aliases below fix `f64`.

pub mod energy;
pub mod extended;
pub mod functions;
pub mod orlicz;
pub mod peridynamic;
pub mod quadrature;
pub mod real;
pub mod young;

pub use energy::{EnergyError, EnergyOptions, EnergyValue, SweepTable, Verdict};
pub use extended::Extended;
pub use functions::{Mollifier, ScalarField, TestFunction};
pub use peridynamic::{Classification, LocalizationResult};
pub use quadrature::{Dim, Point, QuadError, QuadResult};
pub use real::Real;
pub use young::YoungFunction;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type YoungFunction64 = YoungFunction<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type Mollifier64 = Mollifier<f64>;
pub type EnergyValue64 = EnergyValue<f64>;
pub type EnergyOptions64 = EnergyOptions<f64>;
pub type SweepTable64 = SweepTable<f64>;
pub type LocalizationResult64 = LocalizationResult<f64>;
pub type Extended64 = Extended<f64>;
