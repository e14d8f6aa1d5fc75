pub mod error;
pub mod experiment;
pub mod formulation;
pub mod frequency;
pub mod mip;
pub mod procurement;
pub mod scenario;
pub mod system;
