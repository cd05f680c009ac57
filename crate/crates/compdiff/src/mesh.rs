//! Structured quadrilateral meshes and Q1 bilinear shape functions.
//!
//! Meshes are uniform tensor grids over an axis-aligned rectangle. Nodes are
//! numbered row-major from the lower-left corner; each element stores its four
//! node indices counter-clockwise starting at its lower-left node. The Q1
//! basis lives on the reference square [-1,1]^2 with shape functions
//! (1 +/- xi)(1 +/- eta)/4.

use alloc::vec::Vec;

/// Axis-aligned rectangle, the spatial domain of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect { x_min, x_max, y_min, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// True when (x, y) lies inside the rectangle, boundary included.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn is_valid(&self) -> bool {
        self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }
}

/// Mesh construction and element geometry failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshError {
    /// Domain bounds are not finite or not strictly ordered.
    InvalidBounds,
    /// Fewer than two nodes requested along an axis.
    TooFewNodes { nx: usize, ny: usize },
    /// Element index out of range.
    ElementOutOfRange { element: usize, n_elements: usize },
    /// Element has a non-positive Jacobian determinant (inverted or collapsed).
    DegenerateElement { element: usize },
    /// Element references a node index outside the mesh.
    BadConnectivity { element: usize },
    /// Node coordinate array length does not equal nx * ny.
    NodeCountMismatch { expected: usize, got: usize },
}

impl core::fmt::Display for MeshError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeshError::InvalidBounds => {
                write!(f, "domain bounds must be finite with min < max per axis")
            }
            MeshError::TooFewNodes { nx, ny } => {
                write!(f, "need at least 2 nodes per axis, got nx={nx}, ny={ny}")
            }
            MeshError::ElementOutOfRange { element, n_elements } => {
                write!(f, "element {element} out of range ({n_elements} elements)")
            }
            MeshError::DegenerateElement { element } => {
                write!(f, "element {element} has non-positive Jacobian determinant")
            }
            MeshError::BadConnectivity { element } => {
                write!(f, "element {element} references a node outside the mesh")
            }
            MeshError::NodeCountMismatch { expected, got } => {
                write!(f, "expected {expected} node coordinates, got {got}")
            }
        }
    }
}

impl core::error::Error for MeshError {}

/// Structured quadrilateral mesh over a rectangle.
///
/// Immutable after construction; all invariants (node count, uniform spacing,
/// counter-clockwise elements with positive Jacobians) are checked by the
/// constructors.
#[derive(Debug, Clone)]
pub struct Mesh {
    rect: Rect,
    nx: usize,
    ny: usize,
    node_coords: Vec<[f64; 2]>,
    elements: Vec<[usize; 4]>,
}

/// Builds a uniform nx-by-ny node grid over `domain`.
///
/// Node k sits at (x_min + (k mod nx) * h_x, y_min + floor(k / nx) * h_y)
/// with h_x = width/(nx-1), h_y = height/(ny-1). Elements are the
/// (nx-1)*(ny-1) grid cells, nodes listed counter-clockwise from the cell's
/// lower-left corner.
pub fn build_structured_quad_mesh(domain: Rect, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if !domain.is_valid() {
        return Err(MeshError::InvalidBounds);
    }
    if nx < 2 || ny < 2 {
        return Err(MeshError::TooFewNodes { nx, ny });
    }
    let hx = domain.width() / (nx - 1) as f64;
    let hy = domain.height() / (ny - 1) as f64;
    let mut node_coords = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            node_coords.push([domain.x_min + ix as f64 * hx, domain.y_min + iy as f64 * hy]);
        }
    }
    let mut elements = Vec::with_capacity((nx - 1) * (ny - 1));
    for ey in 0..ny - 1 {
        for ex in 0..nx - 1 {
            let n0 = ey * nx + ex;
            elements.push([n0, n0 + 1, n0 + nx + 1, n0 + nx]);
        }
    }
    Ok(Mesh { rect: domain, nx, ny, node_coords, elements })
}

impl Mesh {
    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Grid spacing along x.
    pub fn hx(&self) -> f64 {
        self.rect.width() / (self.nx - 1) as f64
    }

    /// Grid spacing along y.
    pub fn hy(&self) -> f64 {
        self.rect.height() / (self.ny - 1) as f64
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        self.node_coords[k]
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    /// Row-major node index of grid position (ix, iy).
    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    pub fn element(&self, e: usize) -> [usize; 4] {
        self.elements[e]
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }
}

/// Point in the Q1 reference square.
///
/// Callers keep |xi| <= 1 and |eta| <= 1; evaluation does not clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub xi: f64,
    pub eta: f64,
}

impl RefPoint {
    pub const fn new(xi: f64, eta: f64) -> Self {
        RefPoint { xi, eta }
    }
}

/// Q1 basis values and reference-coordinate gradients at one point.
#[derive(Debug, Clone, Copy)]
pub struct ShapeEval {
    /// phi_0..phi_3, counter-clockwise from the (-1,-1) corner.
    pub values: [f64; 4],
    /// (d phi_k / d xi, d phi_k / d eta) for each basis function.
    pub grads: [[f64; 2]; 4],
}

/// Evaluates the four Q1 shape functions and their reference gradients at p.
///
/// Basis order is counter-clockwise from the (-1,-1) corner:
/// phi_0 = (1-xi)(1-eta)/4, phi_1 = (1+xi)(1-eta)/4,
/// phi_2 = (1+xi)(1+eta)/4, phi_3 = (1-xi)(1+eta)/4.
/// The values sum to 1 and the gradients sum to (0, 0).
pub fn shape_eval(p: RefPoint) -> ShapeEval {
    let (xi, eta) = (p.xi, p.eta);
    let values = [
        (1.0 - xi) * (1.0 - eta) / 4.0,
        (1.0 + xi) * (1.0 - eta) / 4.0,
        (1.0 + xi) * (1.0 + eta) / 4.0,
        (1.0 - xi) * (1.0 + eta) / 4.0,
    ];
    let grads = [
        [-(1.0 - eta) / 4.0, -(1.0 - xi) / 4.0],
        [(1.0 - eta) / 4.0, -(1.0 + xi) / 4.0],
        [(1.0 + eta) / 4.0, (1.0 + xi) / 4.0],
        [-(1.0 + eta) / 4.0, (1.0 - xi) / 4.0],
    ];
    ShapeEval { values, grads }
}

/// Physical-space gradients of the four basis functions and the Jacobian
/// determinant of the bilinear map at one reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    /// (d phi_k / dx, d phi_k / dy) for each basis function.
    pub grads: [[f64; 2]; 4],
    pub det_jac: f64,
}

/// Maps reference gradients of element e to physical space at point p.
///
/// Uses the full isoparametric bilinear map; for the axis-aligned rectangles
/// built here the Jacobian is diag(h_x/2, h_y/2) and det = h_x * h_y / 4.
pub fn element_geometry(mesh: &Mesh, e: usize, p: RefPoint) -> Result<ElementGeometry, MeshError> {
    if e >= mesh.n_elements() {
        return Err(MeshError::ElementOutOfRange { element: e, n_elements: mesh.n_elements() });
    }
    let conn = mesh.element(e);
    let shape = shape_eval(p);
    // j = [[dx/dxi, dy/dxi], [dx/deta, dy/deta]]
    let mut j = [[0.0_f64; 2]; 2];
    for k in 0..4 {
        let [x, y] = mesh.node(conn[k]);
        j[0][0] += shape.grads[k][0] * x;
        j[0][1] += shape.grads[k][0] * y;
        j[1][0] += shape.grads[k][1] * x;
        j[1][1] += shape.grads[k][1] * y;
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det > 0.0) {
        return Err(MeshError::DegenerateElement { element: e });
    }
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    let mut grads = [[0.0_f64; 2]; 4];
    for k in 0..4 {
        grads[k][0] = inv[0][0] * shape.grads[k][0] + inv[0][1] * shape.grads[k][1];
        grads[k][1] = inv[1][0] * shape.grads[k][0] + inv[1][1] * shape.grads[k][1];
    }
    Ok(ElementGeometry { grads, det_jac: det })
}
