//! Learners for margin halfspaces under SQ access and the convex-loss
//! reductions.

pub mod gd;
pub mod halfspace;
pub mod loss;
pub mod perceptron;
pub mod report;

pub use gd::{sq_gradient_descent, GdConfig, GdRun};
pub use halfspace::{
    candidate_count, lowdeg_nonadaptive_learner, random_halfspace_learner, HalfspaceRun, LowDegreeRun, ThresholdMode,
};
pub use loss::{err_loss_bridge, hinge_loss, phi_gamma, phi_gamma_derivative, BridgeReport, LossKind, LossSpec};
pub use perceptron::{perceptron_sq, PerceptronConfig, PerceptronRun};
pub use report::{gaussian_vector, separable_sphere_instance, unit_vector, Hypothesis, LearnerReport};
