//! Multi-agent navigation on grid maps.
//!
//! Agents follow individual any-angle paths ([`theta_star`]) with reciprocal
//! velocity-obstacle avoidance ([`orca`]). When a crowd gathers around a
//! waypoint the agents switch to a coordinated mode ([`coordination`]) and
//! execute a joint grid plan computed by Push and Rotate ([`mapf`]). The
//! [`sim`] module steps the whole system deterministically.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod agent;
pub mod coordination;
pub mod geom;
pub mod grid;
pub mod mapf;
pub mod orca;
pub mod sim;
pub mod theta_star;

pub use agent::{AgentState, Mode};
pub use geom::{Point, Vec2};
pub use grid::{Cell, GridMap};
pub use theta_star::Path;
