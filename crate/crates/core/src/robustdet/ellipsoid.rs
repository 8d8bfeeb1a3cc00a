//! Boundary `{y : (y - location)^T scatter^{-1} (y - location) = threshold}`
//! as a closed polyline (d = 2) or a latitude-longitude triangle mesh (d = 3).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::robustdet::RobustFit;

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Closed polyline; the last vertex connects back to the first.
    Polyline(Vec<[f64; 2]>),
    Mesh { vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]> },
}

impl Boundary {
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Boundary::Polyline(v) => v.iter().map(|p| p.to_vec()).collect(),
            Boundary::Mesh { vertices, .. } => vertices.iter().map(|p| p.to_vec()).collect(),
        }
    }
}

/// Maps unit-sphere points `u` to `location + sqrt(threshold) * L u`.
pub fn ellipsoid_boundary(fit: &RobustFit, threshold: f64, resolution: usize) -> Result<Boundary> {
    let d = fit.location.len();
    if !(2..=3).contains(&d) {
        return Err(Error::NoBoundaryGeometry(d));
    }
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::DomainError("threshold must be finite and nonnegative".into()));
    }
    if resolution < 3 {
        return Err(Error::DomainError("boundary resolution must be at least 3".into()));
    }
    let chol = Cholesky::new(&fit.scatter).map_err(|_| Error::SingularScatter)?;
    let radius = libm::sqrt(threshold);
    let mut out = [0.0; 3];
    let mut map = |u: &[f64]| -> [f64; 3] {
        chol.lower_mul(u, &mut out[..d]);
        let mut y = [0.0; 3];
        for k in 0..d {
            y[k] = fit.location[k] + radius * out[k];
        }
        y
    };

    if d == 2 {
        let vertices = (0..resolution)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / resolution as f64;
                let y = map(&[libm::cos(theta), libm::sin(theta)]);
                [y[0], y[1]]
            })
            .collect();
        return Ok(Boundary::Polyline(vertices));
    }

    let lon = resolution;
    let lat = (resolution / 2).max(2);
    let mut vertices = Vec::with_capacity(2 + (lat - 1) * lon);
    vertices.push(map(&[0.0, 0.0, 1.0]));
    for i in 1..lat {
        let polar = PI * i as f64 / lat as f64;
        for j in 0..lon {
            let az = 2.0 * PI * j as f64 / lon as f64;
            let s = libm::sin(polar);
            vertices.push(map(&[s * libm::cos(az), s * libm::sin(az), libm::cos(polar)]));
        }
    }
    vertices.push(map(&[0.0, 0.0, -1.0]));
    let south = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * lon + (j % lon);
    let mut triangles = Vec::with_capacity(2 * lon * (lat - 1));
    for j in 0..lon {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..lat - 1 {
        for j in 0..lon {
            triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    for j in 0..lon {
        triangles.push([south, ring(lat - 1, j + 1), ring(lat - 1, j)]);
    }
    Ok(Boundary::Mesh { vertices, triangles })
}
