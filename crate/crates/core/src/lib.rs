pub mod cone;
pub mod driver;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod polyhedron;
pub mod problem;
pub mod scalar;
pub mod solvers;
pub mod vselect;

pub use cone::Cone;
pub use driver::{certify, run, CertReport, CertifyOptions, Mode, RunConfig, RunResult, Status};
pub use error::{Error, Result};
pub use polyhedron::{InnerApprox, Polyhedron};
pub use problem::{load_problem, Vcp};
pub use scalar::{Real, Tolerances};

pub type Vcp64 = Vcp<f64>;
pub type Vcp32 = Vcp<f32>;
pub type Cone64 = Cone<f64>;
pub type Cone32 = Cone<f32>;
pub type Polyhedron64 = Polyhedron<f64>;
pub type Polyhedron32 = Polyhedron<f32>;
pub type RunConfig64 = RunConfig<f64>;
pub type RunConfig32 = RunConfig<f32>;
pub type Tolerances64 = Tolerances<f64>;
pub type Tolerances32 = Tolerances<f32>;
