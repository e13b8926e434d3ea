pub mod classical;
pub mod config;
pub mod contact;
pub mod error;
pub mod families;
pub mod geometry;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod report;
pub mod scalar;
pub mod suite;
pub mod tables;
