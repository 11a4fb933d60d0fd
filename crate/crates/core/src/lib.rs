pub mod bridge;
pub mod chirotope;
pub mod distgeo;
pub mod entropy;
pub mod error;
pub mod geom;
pub mod graph;
pub mod jumpproc;
pub mod lp;
pub mod metropolis;
pub mod molecular;
pub mod molecules;
pub mod pipeline;
pub mod quadrature;
pub mod rng;
pub mod tables;

pub use error::{Error, Result};
pub use rng::SimRng;
