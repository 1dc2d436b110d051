pub mod bench;
pub mod biclique;
pub mod cdc;
pub mod formulation;
pub mod geometry;
pub mod partition;
pub mod plot;
pub mod scenario;
pub mod solver;
