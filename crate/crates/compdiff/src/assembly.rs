//! Galerkin assembly of the mass, stiffness, and reaction-weighted matrices
//! on Q1 meshes, by 2x2 Gauss quadrature per element.
//!
//! The quadrature is exact for products of bilinear functions on
//! axis-aligned rectangles, so M and K carry no quadrature error. The
//! reaction-weighted matrix B interpolates the argument fields to each
//! quadrature point first and applies the growth function there; this keeps
//! B exactly zero when the fields sit at a spatial equilibrium.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{LinAlgError, SparseMatrix};
use crate::mesh::{element_geometry, shape_eval, ElementGeometry, Mesh, MeshError, RefPoint};
use crate::model::{growth_f, ModelParams, Species};

/// 2x2 Gauss-Legendre points on [-1,1]^2; all weights are 1.
const GAUSS_PT: f64 = 0.577_350_269_189_625_8;
const GAUSS_2X2: [RefPoint; 4] = [
    RefPoint::new(-GAUSS_PT, -GAUSS_PT),
    RefPoint::new(GAUSS_PT, -GAUSS_PT),
    RefPoint::new(GAUSS_PT, GAUSS_PT),
    RefPoint::new(-GAUSS_PT, GAUSS_PT),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AssemblyError {
    /// Field length does not match the mesh node count.
    FieldLengthMismatch {
        expected: usize,
        got: usize,
    },
    /// A nodal value is NaN or infinite.
    NonFiniteField,
    /// Mass lumping requires a square matrix.
    NotSquare {
        n_rows: usize,
        n_cols: usize,
    },
    Mesh(MeshError),
    Matrix(LinAlgError),
}

impl core::fmt::Display for AssemblyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AssemblyError::FieldLengthMismatch { expected, got } => {
                write!(f, "nodal field length {got} does not match mesh node count {expected}")
            }
            AssemblyError::NonFiniteField => write!(f, "nodal field contains a non-finite value"),
            AssemblyError::NotSquare { n_rows, n_cols } => {
                write!(f, "expected a square matrix, got {n_rows}x{n_cols}")
            }
            AssemblyError::Mesh(e) => write!(f, "{e}"),
            AssemblyError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AssemblyError {}

impl From<MeshError> for AssemblyError {
    fn from(e: MeshError) -> Self {
        AssemblyError::Mesh(e)
    }
}

impl From<LinAlgError> for AssemblyError {
    fn from(e: LinAlgError) -> Self {
        AssemblyError::Matrix(e)
    }
}

/// Scalar field given by its values at the mesh nodes.
///
/// Construction checks finiteness; the length is checked against the mesh
/// wherever a mesh is in scope.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Result<Self, AssemblyError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AssemblyError::NonFiniteField);
        }
        Ok(NodalField { values })
    }

    pub fn zeros(n: usize) -> Self {
        NodalField { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self, AssemblyError> {
        Self::new(vec![c; n])
    }

    /// Samples a function of physical coordinates at every node.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Result<Self, AssemblyError> {
        Self::new(mesh.nodes().iter().map(|&[x, y]| f(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl core::ops::Deref for NodalField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

fn check_field(mesh: &Mesh, field: &NodalField) -> Result<(), AssemblyError> {
    if field.len() != mesh.n_nodes() {
        return Err(AssemblyError::FieldLengthMismatch {
            expected: mesh.n_nodes(),
            got: field.len(),
        });
    }
    Ok(())
}

/// Accumulates 4x4 element blocks into global triplets in element order, so
/// assembly is bit-reproducible.
fn assemble<F>(mesh: &Mesh, mut local_integrand: F) -> Result<SparseMatrix, AssemblyError>
where
    F: FnMut(usize, RefPoint, &ElementGeometry) -> [[f64; 4]; 4],
{
    let n = mesh.n_nodes();
    let mut triplets = Vec::with_capacity(mesh.n_elements() * 16);
    for e in 0..mesh.n_elements() {
        let conn = mesh.element(e);
        let mut local = [[0.0_f64; 4]; 4];
        for &q in &GAUSS_2X2 {
            let geom = element_geometry(mesh, e, q)?;
            let block = local_integrand(e, q, &geom);
            for j in 0..4 {
                for k in 0..4 {
                    local[j][k] += block[j][k];
                }
            }
        }
        for j in 0..4 {
            for k in 0..4 {
                triplets.push((conn[j], conn[k], local[j][k]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, &triplets, true)?)
}

/// Mass matrix M_jk = integral of phi_j phi_k; symmetric positive definite.
pub fn assemble_mass(mesh: &Mesh) -> Result<SparseMatrix, AssemblyError> {
    assemble(mesh, |_, q, geom| {
        let shape = shape_eval(q);
        let mut block = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                block[j][k] = geom.det_jac * shape.values[j] * shape.values[k];
            }
        }
        block
    })
}

/// Stiffness matrix K_jk = integral of grad phi_j . grad phi_k; symmetric
/// positive semidefinite with constants in its null space, which is the
/// natural (no-assembly) form of the homogeneous Neumann condition.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseMatrix, AssemblyError> {
    assemble(mesh, |_, _, geom| {
        let mut block = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                block[j][k] = geom.det_jac
                    * (geom.grads[j][0] * geom.grads[k][0] + geom.grads[j][1] * geom.grads[k][1]);
            }
        }
        block
    })
}

/// Reaction-weighted mass matrix B_jk = integral of f_i(u) phi_k phi_j,
/// with the growth factor f_i frozen at the supplied argument fields.
///
/// At each quadrature point the three fields are interpolated first and the
/// growth function applied to the interpolated values, so constant fields at
/// a zero of f_i give exactly B = 0.
pub fn assemble_weighted_mass(
    mesh: &Mesh,
    f_args: &[NodalField; 3],
    species: Species,
    params: &ModelParams,
) -> Result<SparseMatrix, AssemblyError> {
    for field in f_args {
        check_field(mesh, field)?;
    }
    assemble(mesh, |e, q, geom| {
        let shape = shape_eval(q);
        let conn = mesh.element(e);
        let mut u = [0.0_f64; 3];
        for k in 0..4 {
            let node = conn[k];
            let phi = shape.values[k];
            u[0] += phi * f_args[0].values[node];
            u[1] += phi * f_args[1].values[node];
            u[2] += phi * f_args[2].values[node];
        }
        let f = growth_f(species, u, params);
        let mut block = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                block[j][k] = geom.det_jac * f * shape.values[j] * shape.values[k];
            }
        }
        block
    })
}

/// Row-sum lumping: diagonal matrix with the row sums of M, preserving the
/// total 1^T M 1 exactly.
pub fn lump_mass(m: &SparseMatrix) -> Result<SparseMatrix, AssemblyError> {
    if m.n_rows() != m.n_cols() {
        return Err(AssemblyError::NotSquare { n_rows: m.n_rows(), n_cols: m.n_cols() });
    }
    Ok(SparseMatrix::from_diagonal(&m.row_sums())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spmv;
    use crate::mesh::{build_structured_quad_mesh, Rect};
    use rand::{Rng, SeedableRng};

    fn unit_square(h: f64) -> Mesh {
        build_structured_quad_mesh(Rect::new(0.0, h, 0.0, h), 2, 2).unwrap()
    }

    /// Analytic Q1 element mass matrix for an h x h square, CCW ordering.
    fn element_mass(h: f64) -> [[f64; 4]; 4] {
        let s = h * h / 36.0;
        let pat = [
            [4.0, 2.0, 1.0, 2.0],
            [2.0, 4.0, 2.0, 1.0],
            [1.0, 2.0, 4.0, 2.0],
            [2.0, 1.0, 2.0, 4.0],
        ];
        let mut m = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                m[j][k] = s * pat[j][k];
            }
        }
        m
    }

    /// Analytic Q1 element stiffness matrix for any square (h-independent).
    fn element_stiffness() -> [[f64; 4]; 4] {
        let pat = [
            [4.0, -1.0, -2.0, -1.0],
            [-1.0, 4.0, -1.0, -2.0],
            [-2.0, -1.0, 4.0, -1.0],
            [-1.0, -2.0, -1.0, 4.0],
        ];
        let mut k = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                k[i][j] = pat[i][j] / 6.0;
            }
        }
        k
    }

    #[test]
    fn single_element_mass_matches_analytic() {
        for h in [1.0, 0.5, 2.0] {
            let mesh = unit_square(h);
            let conn = mesh.element(0);
            let m = assemble_mass(&mesh).unwrap();
            let expect = element_mass(h);
            for j in 0..4 {
                for k in 0..4 {
                    assert!(
                        (m.get(conn[j], conn[k]) - expect[j][k]).abs() <= 1e-14,
                        "h={h} entry ({j},{k}): {} vs {}",
                        m.get(conn[j], conn[k]),
                        expect[j][k]
                    );
                }
            }
            assert!(m.is_symmetric());
        }
    }

    #[test]
    fn single_element_stiffness_matches_analytic_and_is_h_independent() {
        for h in [0.3, 1.0, 2.0] {
            let mesh = unit_square(h);
            let conn = mesh.element(0);
            let k = assemble_stiffness(&mesh).unwrap();
            let expect = element_stiffness();
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (k.get(conn[i], conn[j]) - expect[i][j]).abs() <= 1e-14,
                        "h={h} entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn total_mass_equals_domain_area() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 33, 33).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        let ones = vec![1.0; mesh.n_nodes()];
        let total: f64 = spmv(&m, &ones).unwrap().iter().sum();
        assert!((total - 16.0).abs() <= 1e-12);
    }

    #[test]
    fn two_element_shared_entries_sum_contributions() {
        // [0,2]x[0,1] split into two unit squares; nodes 1 and 4 are shared
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 2.0, 0.0, 1.0), 3, 2).unwrap();
        assert_eq!(mesh.element(0), [0, 1, 4, 3]);
        assert_eq!(mesh.element(1), [1, 2, 5, 4]);
        let m = assemble_mass(&mesh).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let ml = element_mass(1.0);
        let kl = element_stiffness();
        // node 1 is local 1 in element 0 and local 0 in element 1;
        // node 4 is local 2 in element 0 and local 3 in element 1
        assert!((m.get(1, 4) - (ml[1][2] + ml[0][3])).abs() <= 1e-15);
        assert!((m.get(1, 1) - (ml[1][1] + ml[0][0])).abs() <= 1e-15);
        assert!((k.get(1, 4) - (kl[1][2] + kl[0][3])).abs() <= 1e-15);
        // node 0 belongs to element 0 only
        assert!((m.get(0, 1) - ml[0][1]).abs() <= 1e-15);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mesh = build_structured_quad_mesh(Rect::new(-1.0, 3.0, 0.0, 2.0), 9, 7).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let c = vec![2.5; mesh.n_nodes()];
        for v in spmv(&k, &c).unwrap() {
            assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn stiffness_energy_of_linear_field_is_exact() {
        // f(x,y) = x has |grad f|^2 = 1, so x^T K x = area
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 2.0, 0.0, 2.0), 3, 3).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let x = NodalField::from_fn(&mesh, |x, _| x).unwrap();
        let kx = spmv(&k, &x).unwrap();
        let energy: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        assert!((energy - 4.0).abs() <= 1e-13);
        assert!(energy > 0.0);
    }

    #[test]
    fn mass_positive_definite_stiffness_semidefinite() {
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 5, 5).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let n = mesh.n_nodes();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mx = spmv(&m, &x).unwrap();
            let kx = spmv(&k, &x).unwrap();
            let xmx: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
            let xkx: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
            assert!(xmx > 0.0);
            assert!(xkx >= -1e-13);
        }
    }

    #[test]
    fn weighted_mass_with_zero_fields_is_mass() {
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 4, 4).unwrap();
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let zero = || NodalField::zeros(mesh.n_nodes());
        let b = assemble_weighted_mass(&mesh, &[zero(), zero(), zero()], Species::U2, &p).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        for i in 0..mesh.n_nodes() {
            for j in 0..mesh.n_nodes() {
                assert!((b.get(i, j) - m.get(i, j)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn weighted_mass_vanishes_at_coexistence_state() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 6, 6).unwrap();
        let p = ModelParams::new(1.0, 2.0, 0.1, 0.6).unwrap();
        let e = 0.25;
        let field = || NodalField::constant(mesh.n_nodes(), e).unwrap();
        for s in Species::ALL {
            let b = assemble_weighted_mass(&mesh, &[field(), field(), field()], s, &p).unwrap();
            for i in 0..mesh.n_nodes() {
                for j in 0..mesh.n_nodes() {
                    assert!(b.get(i, j).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn weighted_mass_with_constant_growth_scales_mass() {
        // u1 = 0.5, u2 = u3 = 0, species 1, a=1, b=2: f1 = 0.5 everywhere
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 4, 3).unwrap();
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let args = [
            NodalField::constant(mesh.n_nodes(), 0.5).unwrap(),
            NodalField::zeros(mesh.n_nodes()),
            NodalField::zeros(mesh.n_nodes()),
        ];
        let b = assemble_weighted_mass(&mesh, &args, Species::U1, &p).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        for i in 0..mesh.n_nodes() {
            for j in 0..mesh.n_nodes() {
                assert!((b.get(i, j) - 0.5 * m.get(i, j)).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn weighted_mass_is_affine_in_the_fields() {
        // f_i is affine in u, so B(uA) + B(uB) = M + B(uA + uB) entrywise
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 5, 4).unwrap();
        let p = ModelParams::new(1.3, 0.7, 1.0, 1.0).unwrap();
        let n = mesh.n_nodes();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let mut random_field =
            || NodalField::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let ua: [NodalField; 3] = [random_field(), random_field(), random_field()];
        let ub: [NodalField; 3] = [random_field(), random_field(), random_field()];
        let sum: [NodalField; 3] = core::array::from_fn(|i| {
            NodalField::new(ua[i].iter().zip(ub[i].iter()).map(|(x, y)| x + y).collect()).unwrap()
        });
        let m = assemble_mass(&mesh).unwrap();
        for s in Species::ALL {
            let ba = assemble_weighted_mass(&mesh, &ua, s, &p).unwrap();
            let bb = assemble_weighted_mass(&mesh, &ub, s, &p).unwrap();
            let bsum = assemble_weighted_mass(&mesh, &sum, s, &p).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let lhs = ba.get(i, j) + bb.get(i, j);
                    let rhs = m.get(i, j) + bsum.get(i, j);
                    assert!((lhs - rhs).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn weighted_mass_rejects_mismatched_fields() {
        let mesh = build_structured_quad_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 3, 3).unwrap();
        let p = ModelParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let args = [NodalField::zeros(4), NodalField::zeros(9), NodalField::zeros(9)];
        assert_eq!(
            assemble_weighted_mass(&mesh, &args, Species::U1, &p),
            Err(AssemblyError::FieldLengthMismatch { expected: 9, got: 4 })
        );
    }

    #[test]
    fn nodal_field_rejects_non_finite() {
        assert_eq!(NodalField::new(vec![1.0, f64::NAN]), Err(AssemblyError::NonFiniteField));
        assert_eq!(NodalField::new(vec![f64::INFINITY]), Err(AssemblyError::NonFiniteField));
    }

    #[test]
    fn lumping_diagonal_idempotent_and_conservative() {
        let mesh = unit_square(0.8);
        let m = assemble_mass(&mesh).unwrap();
        let l = lump_mass(&m).unwrap();
        assert_eq!(l.nnz(), 4);
        for i in 0..4 {
            assert!((l.get(i, i) - 0.8 * 0.8 / 4.0).abs() <= 1e-15);
        }
        assert_eq!(lump_mass(&l).unwrap(), l);

        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 9, 9).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        let l = lump_mass(&m).unwrap();
        let ones = vec![1.0; mesh.n_nodes()];
        let total_m: f64 = spmv(&m, &ones).unwrap().iter().sum();
        let total_l: f64 = spmv(&l, &ones).unwrap().iter().sum();
        assert_eq!(total_m, total_l);

        let rect = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)], false).unwrap();
        assert_eq!(lump_mass(&rect), Err(AssemblyError::NotSquare { n_rows: 2, n_cols: 3 }));
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = build_structured_quad_mesh(Rect::new(-2.0, 2.0, -2.0, 2.0), 17, 17).unwrap();
        let p = ModelParams::new(1.0, 2.0, 0.1, 0.6).unwrap();
        let field = NodalField::from_fn(&mesh, |x, y| 0.5 + 0.1 * (x + y)).unwrap();
        let args = [field.clone(), field.clone(), field];
        let b1 = assemble_weighted_mass(&mesh, &args, Species::U3, &p).unwrap();
        let b2 = assemble_weighted_mass(&mesh, &args, Species::U3, &p).unwrap();
        assert_eq!(b1, b2);
    }
}
