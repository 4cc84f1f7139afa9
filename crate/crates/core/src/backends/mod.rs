//! Exporters: Mitsuba-style scene XML, the Minecraft voxel backend and
//! animation frame sequences.

pub mod animation;
pub mod minecraft;
pub mod xml;

use std::path::PathBuf;

use thiserror::Error;

use crate::interp::ExecError;
use crate::scene::Word;

pub use animation::export_animation;
pub use minecraft::{compile_minecraft, voxels_to_primitives, BlockPalette, MinecraftOutput, VoxelGrid};
pub use xml::export_scene_xml;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rotation or reflection in the world pose of \"{word}\" at path {path:?}; rotations are not allowed in Minecraft")]
    RotationForbidden { word: Word, path: Vec<usize> },
    #[error("world pose of \"{word}\" at path {path:?} is not an integer translation with positive integer scaling")]
    NonIntegerPose { word: Word, path: Vec<usize> },
    #[error("cannot write {}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
}
