use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;
use crate::physics::PhysicsError;
use crate::precond::PrecondError;
use crate::timestep::TimestepError;

/// Umbrella error for callers that drive the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Timestep(#[from] TimestepError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
}
