//! Lyapunov–Schmidt reduction of the CR Yamabe functional on the bubble manifold.
pub mod fit;
pub mod functional;
pub mod grid;
pub mod krylov;
pub mod ls;
pub mod scan;
