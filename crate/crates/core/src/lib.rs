pub mod config;
pub mod error;
pub mod geometry;
pub mod hodge;
pub mod jacobi;
pub mod linalg;
pub mod mesh;
pub mod pipeline;
pub mod reference;
pub mod sparse;
pub mod surfaces;
pub mod verify;
