//! Triple-junction initial condition.
//!
//! The three species tile the plane around a junction point into three
//! 120-degree sectors; each species starts at `inside_value` in its own
//! sector and `outside_value` elsewhere. Spirals, droplets, and traveling
//! structures all germinate from the junction.

use compdiff::assembly::NodalField;
use compdiff::mesh::Mesh;

use crate::config::IcSettings;
use crate::AppError;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Sector index (0, 1, 2) of the point (x, y) around the junction.
///
/// The polar angle is normalized to [0, 2pi) and measured from `theta0`;
/// species i + 1 owns [theta0 + i*2pi/3, theta0 + (i+1)*2pi/3). A node
/// exactly at the junction gets angle 0 (the atan2(0, 0) convention), which
/// keeps the assignment deterministic.
fn sector(x: f64, y: f64, ic: &IcSettings) -> usize {
    let theta = (y - ic.y_c).atan2(x - ic.x_c);
    let rel = (theta - ic.theta0).rem_euclid(TWO_PI);
    // rel == 2pi can appear through rounding when theta0 is sub-ulp below
    // theta; clamp keeps the index in range
    ((rel / (TWO_PI / 3.0)) as usize).min(2)
}

/// Builds the three species fields for the configured junction.
pub fn build_triple_junction_ic(mesh: &Mesh, ic: &IcSettings) -> Result<[NodalField; 3], AppError> {
    if !mesh.rect().contains(ic.x_c, ic.y_c) {
        return Err(AppError::Config("ic: junction must lie inside the domain".to_string()));
    }
    let mut values = [
        Vec::with_capacity(mesh.n_nodes()),
        Vec::with_capacity(mesh.n_nodes()),
        Vec::with_capacity(mesh.n_nodes()),
    ];
    for &[x, y] in mesh.nodes() {
        let s = sector(x, y, ic);
        for (i, v) in values.iter_mut().enumerate() {
            v.push(if i == s { ic.inside_value } else { ic.outside_value });
        }
    }
    let [v1, v2, v3] = values;
    Ok([
        NodalField::new(v1).map_err(|e| AppError::Config(format!("ic: {e}")))?,
        NodalField::new(v2).map_err(|e| AppError::Config(format!("ic: {e}")))?,
        NodalField::new(v3).map_err(|e| AppError::Config(format!("ic: {e}")))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use compdiff::mesh::{build_structured_quad_mesh, Rect};

    fn settings(x_c: f64, y_c: f64, theta0: f64) -> IcSettings {
        IcSettings { x_c, y_c, theta0, inside_value: 1.0, outside_value: 0.0 }
    }

    #[test]
    fn exactly_one_species_inside_at_every_node() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 21, 21).unwrap();
        let ic = settings(1.0, 1.0, 0.3);
        let fields = build_triple_junction_ic(&mesh, &ic).unwrap();
        for k in 0..mesh.n_nodes() {
            let inside = (0..3).filter(|&i| fields[i][k] == 1.0).count();
            let outside = (0..3).filter(|&i| fields[i][k] == 0.0).count();
            assert_eq!(inside, 1, "node {k}");
            assert_eq!(outside, 2, "node {k}");
        }
    }

    #[test]
    fn sectors_land_where_the_angles_say() {
        // junction at the origin of a symmetric domain, theta0 = 0:
        // species 1 owns [0, 2pi/3), species 2 [2pi/3, 4pi/3), species 3 the rest
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 5, 5).unwrap();
        let ic = settings(0.0, 0.0, 0.0);
        let fields = build_triple_junction_ic(&mesh, &ic).unwrap();
        let expect_species = |x: f64, y: f64| -> usize {
            let deg = (y.atan2(x).to_degrees() + 360.0) % 360.0;
            (deg / 120.0) as usize
        };
        for (k, &[x, y]) in mesh.nodes().iter().enumerate() {
            let s = expect_species(x, y);
            assert_eq!(fields[s][k], 1.0, "node {k} at ({x}, {y})");
        }
        // spot checks: +x axis is species 1, upper-left species 2, lower half species 3
        let idx = |x: f64, y: f64| mesh.nodes().iter().position(|&n| n == [x, y]).unwrap();
        assert_eq!(fields[0][idx(2.0, 0.0)], 1.0);
        assert_eq!(fields[0][idx(1.0, 1.0)], 1.0);
        assert_eq!(fields[1][idx(-1.0, 1.0)], 1.0);
        assert_eq!(fields[2][idx(0.0, -1.0)], 1.0);
        assert_eq!(fields[2][idx(1.0, -1.0)], 1.0);
    }

    #[test]
    fn sector_populations_are_roughly_thirds() {
        // each sector spans a third of the angle, but on a square domain the
        // covered areas are only approximately thirds (a 120-degree sector
        // of a square holds between ~32% and ~36% of its area depending on
        // orientation), so the band here is deliberately loose
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 201, 201).unwrap();
        let ic = settings(0.0, 0.0, 0.1);
        let fields = build_triple_junction_ic(&mesh, &ic).unwrap();
        let n = mesh.n_nodes() as f64;
        for i in 0..3 {
            let frac = fields[i].iter().filter(|&&v| v == 1.0).count() as f64 / n;
            assert!((0.30..0.38).contains(&frac), "species {i}: fraction {frac:.4}");
        }
    }

    #[test]
    fn theta0_rotates_the_pattern() {
        // the 0.05 offset keeps every sector boundary off the lattice
        // directions, so the relabeling is immune to boundary rounding
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 41, 41).unwrap();
        let base = build_triple_junction_ic(&mesh, &settings(0.0, 0.0, 0.05)).unwrap();
        let rotated =
            build_triple_junction_ic(&mesh, &settings(0.0, 0.0, 0.05 + TWO_PI / 3.0)).unwrap();
        // advancing theta0 by one sector relabels species i as i-1
        for k in 0..mesh.n_nodes() {
            assert_eq!(base[1][k], rotated[0][k], "node {k}");
            assert_eq!(base[2][k], rotated[1][k], "node {k}");
            assert_eq!(base[0][k], rotated[2][k], "node {k}");
        }
    }

    #[test]
    fn junction_outside_domain_is_rejected() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 5, 5).unwrap();
        let err = build_triple_junction_ic(&mesh, &settings(3.0, 0.0, 0.0)).unwrap_err();
        assert!(err.to_string().starts_with("config: ic:"));
    }

    #[test]
    fn custom_inside_outside_values() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 9, 9).unwrap();
        let ic =
            IcSettings { x_c: 1.0, y_c: 1.0, theta0: 0.0, inside_value: 0.8, outside_value: 0.05 };
        let fields = build_triple_junction_ic(&mesh, &ic).unwrap();
        for k in 0..mesh.n_nodes() {
            let inside = (0..3).filter(|&i| fields[i][k] == 0.8).count();
            assert_eq!(inside, 1);
            let total: f64 = (0..3).map(|i| fields[i][k]).sum();
            assert!((total - 0.9).abs() < 1e-15);
        }
    }
}
