//! Simulation, episode recording and graph-dataset tooling for learning
//! robot navigation among people from teleoperated demonstrations.

pub mod bus;
pub mod canonical;
pub mod cli;
pub mod controller;
pub mod driver;
pub mod gateway;
pub mod graph;
pub mod humans;
pub mod recorder;
pub mod replay;
pub mod rng;
pub mod scene;
pub mod sim;
pub mod world;
