//! Simulation runtime for an assistive mobile robot.

pub mod config;
pub mod dialogue;
pub mod geometry;
pub mod scenarios;
pub mod sensors;
pub mod tasker;
pub mod world;
