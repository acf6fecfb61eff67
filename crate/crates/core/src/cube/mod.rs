//! Lifting bias measures to the Boolean cube, the labeled hard family and
//! its Fourier, total-variation and margin certificates.

pub mod discrete;
pub mod instance;
pub mod product;

pub use discrete::{push_forward, tv_exact, Channel, DiscreteDist};
pub use instance::{
    build_instance, margin_of, random_signs, sign, FamilyCertificate, HardFamily, HardInstance, InstanceFile,
};
pub use product::{fourier_gap, fourier_gaps, lift, BaseMeasure, Conditioning, ProductMixtureCube};
