//! Snapshot and raster serialization: binary PPM images and plain CSV.
//!
//! Every byte here is deterministic. Numbers are printed with 17
//! significant digits (`{:.16e}`), which round-trips f64 exactly, and PPM
//! output is pinned down to the byte so golden files compare equal across
//! platforms.

use std::path::Path;

use compdiff::assembly::NodalField;
use compdiff::mesh::Mesh;
use compdiff::stability::RegionRaster;

use crate::AppError;

/// 8-bit channel value: round(255 * clamp(v, 0, 1)).
fn channel(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary PPM (P6) image of the three species fields.
///
/// Pixel (row r, column c) shows node (c, ny - 1 - r), so the top image row
/// is the y_max edge. Channels: red = u3, green = u1, blue = u2.
pub fn snapshot_ppm_bytes(nx: usize, ny: usize, fields: &[NodalField; 3]) -> Vec<u8> {
    let mut out = format!("P6\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny * 3);
    for r in 0..ny {
        let iy = ny - 1 - r;
        for ix in 0..nx {
            let k = iy * nx + ix;
            out.push(channel(fields[2][k]));
            out.push(channel(fields[0][k]));
            out.push(channel(fields[1][k]));
        }
    }
    out
}

/// CSV dump of the three fields: `x,y,u1,u2,u3`, one row per node in node
/// order, LF line endings.
pub fn snapshot_csv_string(mesh: &Mesh, fields: &[NodalField; 3]) -> String {
    let mut s = String::with_capacity(16 + mesh.n_nodes() * 128);
    s.push_str("x,y,u1,u2,u3\n");
    for (k, &[x, y]) in mesh.nodes().iter().enumerate() {
        s.push_str(&format!(
            "{x:.16e},{y:.16e},{:.16e},{:.16e},{:.16e}\n",
            fields[0][k], fields[1][k], fields[2][k]
        ));
    }
    s
}

/// CSV dump of a stability raster: `re_z,im_z,max_modulus,stable`, one row
/// per sample in storage order (imaginary axis outer, ascending).
pub fn raster_csv_string(raster: &RegionRaster) -> String {
    let mut s = String::with_capacity(24 + raster.samples.len() * 80);
    s.push_str("re_z,im_z,max_modulus,stable\n");
    for sample in &raster.samples {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            sample.z.re,
            sample.z.im,
            sample.max_modulus,
            u8::from(sample.stable)
        ));
    }
    s
}

/// Binary PPM rendering of a stability raster: stable samples dark,
/// unstable light, top image row = im_max.
pub fn raster_ppm_bytes(raster: &RegionRaster) -> Vec<u8> {
    let n = raster.n;
    let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
    out.reserve(n * n * 3);
    for r in 0..n {
        let iy = n - 1 - r;
        for ix in 0..n {
            let v = if raster.at(ix, iy).stable { 0u8 } else { 255u8 };
            out.extend_from_slice(&[v, v, v]);
        }
    }
    out
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}
