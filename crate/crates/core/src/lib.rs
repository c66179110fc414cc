pub mod geometry;
pub mod decomposition;
pub mod sequencing;
pub mod config;
pub mod solver;
pub mod multilayer;
pub mod boundary;
pub mod io;
