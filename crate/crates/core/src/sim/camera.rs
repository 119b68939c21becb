//! Pinhole camera with a look-at frame and per-pixel ray generation.

use nalgebra::Vector3;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub position: Vector3<f64>,
    pub look_at: Vector3<f64>,
    pub up: Vector3<f64>,
    /// Vertical field of view, radians.
    pub vertical_fov: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(
        position: Vector3<f64>,
        look_at: Vector3<f64>,
        up: Vector3<f64>,
        vertical_fov: f64,
        width: usize,
        height: usize,
    ) -> Result<Camera> {
        let cam = Camera { position, look_at, up, vertical_fov, width, height };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::Camera(format!(
                "resolution {}x{} below the 16-pixel minimum",
                self.width, self.height
            )));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(Error::Camera(format!("vertical fov {} outside (0, pi)", self.vertical_fov)));
        }
        let view = self.look_at - self.position;
        if view.norm() < 1e-9 {
            return Err(Error::Camera("position equals look_at".into()));
        }
        if view.normalize().cross(&self.up).norm() < 1e-9 {
            return Err(Error::Camera("up parallel to view direction".into()));
        }
        Ok(())
    }

    /// Orthonormal (forward, right, down) frame; `down` points along +row.
    pub fn frame(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let forward = (self.look_at - self.position).normalize();
        let right = forward.cross(&self.up).normalize();
        let down = forward.cross(&right).normalize();
        (forward, right, down)
    }

    /// Unit ray through the center of pixel (row, col), origin at the camera.
    pub fn ray(&self, row: usize, col: usize) -> (Vector3<f64>, Vector3<f64>) {
        let (forward, right, down) = self.frame();
        let tan_half = (self.vertical_fov / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        let x = ((col as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * tan_half * aspect;
        let y = ((row as f64 + 0.5) / self.height as f64 * 2.0 - 1.0) * tan_half;
        let dir = (forward + x * right + y * down).normalize();
        (self.position, dir)
    }
}
