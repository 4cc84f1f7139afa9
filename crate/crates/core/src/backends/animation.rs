//! Frame sequences for 4D programs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::BackendError;
use crate::render::{render, with_render_pool, Camera, RenderMode};
use crate::scene::{flatten, Aabb, Entity};

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.ppm")
}

/// Union of the bounding boxes of all non-empty frames.
pub fn frames_bounds(frames: &[Entity]) -> Option<Aabb> {
    frames
        .iter()
        .filter_map(|f| f.bounding_box().ok())
        .reduce(|a, b| a.union(&b))
}

/// Renders every frame with the same camera into `out_dir` as
/// `frame_0000.ppm`, `frame_0001.ppm`, ...
pub fn export_animation(frames: &[Entity], camera: &Camera, mode: RenderMode, out_dir: &Path) -> Result<Vec<PathBuf>, BackendError> {
    if frames.is_empty() {
        return Err(BackendError::InvalidArgument("animation has no frames".into()));
    }
    let io = |path: &Path, e: std::io::Error| BackendError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let images: Vec<Vec<u8>> = with_render_pool(|| {
        frames
            .par_iter()
            .map(|f| render(&flatten(f), camera, mode).to_ppm())
            .collect()
    });
    let mut paths = Vec::with_capacity(images.len());
    for (i, bytes) in images.iter().enumerate() {
        let path = out_dir.join(frame_file_name(i));
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Embedding, PrimitiveSpec, Word};

    #[test]
    fn static_frames_are_identical_files() {
        let leaf = Entity::leaf(Word::new("ball").unwrap(), Embedding::default(), PrimitiveSpec::sphere(1.0));
        let frames = vec![leaf.clone(), leaf.clone(), leaf];
        let cam = Camera::auto_frame(frames_bounds(&frames), 24, 16);
        let dir = tempfile::tempdir().unwrap();
        let paths = export_animation(&frames, &cam, RenderMode::Shaded, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths[2].ends_with("frame_0002.ppm"));
        let bytes: Vec<_> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        assert!(bytes.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn empty_animation_rejected() {
        let cam = Camera::auto_frame(None, 4, 4);
        let dir = tempfile::tempdir().unwrap();
        assert!(export_animation(&[], &cam, RenderMode::Shaded, dir.path()).is_err());
    }
}
