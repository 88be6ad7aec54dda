pub mod cli;
pub mod contour;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod mech;
pub mod normal_form;
pub mod rigid_body;
pub mod so3;
pub mod tube;

pub use error::{Error, Result};
