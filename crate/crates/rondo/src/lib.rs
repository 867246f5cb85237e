//! Desk-scale behavioural-cloning pipeline for roundabout driving.
//!
//! The crate covers the whole loop: parametric synthetic maps, an IDM-driven
//! traffic simulator with conflict checking, targeted scenario generation,
//! SDV-centric binary BEV rasterization with label-consistent augmentations,
//! a small convolutional policy trained with waypoint + prediction losses,
//! a spline-and-track controller, and open-/closed-loop evaluation metrics.

pub mod codec;
pub mod controller;
pub mod dataset;
pub mod dynamics;
pub mod geom;
pub mod learner;
pub mod metrics;
pub mod policy;
pub mod raster;
pub mod scenario;
pub mod seeding;
pub mod sim;
