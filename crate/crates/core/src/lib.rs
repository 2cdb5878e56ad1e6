//! Pseudo-spectral simulation and verification toolkit for the compressible
//! Navier-Stokes-Poisson system around the constant state `(rho, u) = (1, 0)`.

pub mod decay;
pub mod energy;
pub mod error;
pub mod integrator;
pub mod lemmas;
pub mod model;
pub mod recipes;
pub mod spectral;
pub mod symbol;

pub use error::{NspError, Result};
pub use model::{NspModel, NspState, PhysParams, PressureLaw, Tendency};
pub use spectral::{Grid, NormRequest, Rank, SpectralField};
pub use decay::{DataClass, DecayFit, Quantity, Window};
pub use energy::{EnergyReport, EnergyRequest};
pub use integrator::{Integrator, IntegratorConfig, Scheme};
pub use lemmas::{FieldEnsemble, LemmaCheck};
pub use recipes::Recipe;
pub use symbol::{LinearSymbol, RadialProfile};
