//! Isoparametric element machinery: every cell kind is mapped as a
//! (possibly degenerate) trilinear hexahedron, and face/volume quadrature
//! rules are evaluated through that map.

use crate::error::{Error, Result};
use crate::math::{cross, norm, sub, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Tet,
    Pyramid,
    Prism,
    Hex,
}

impl CellKind {
    pub fn n_vertices(self) -> usize {
        match self {
            CellKind::Tet => 4,
            CellKind::Pyramid => 5,
            CellKind::Prism => 6,
            CellKind::Hex => 8,
        }
    }

    pub fn n_faces(self) -> usize {
        match self {
            CellKind::Tet => 4,
            CellKind::Pyramid => 5,
            CellKind::Prism => 5,
            CellKind::Hex => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Tet => "tet",
            CellKind::Pyramid => "pyr",
            CellKind::Prism => "pri",
            CellKind::Hex => "hex",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tet" => Some(CellKind::Tet),
            "pyr" => Some(CellKind::Pyramid),
            "pri" => Some(CellKind::Prism),
            "hex" => Some(CellKind::Hex),
            _ => None,
        }
    }

    /// Local face connectivity. Triangular faces list 3 vertices, quads 4.
    pub fn faces(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Tet => &[&[0, 2, 1], &[0, 1, 3], &[1, 2, 3], &[2, 0, 3]],
            CellKind::Pyramid => &[
                &[0, 3, 2, 1],
                &[0, 1, 4],
                &[1, 2, 4],
                &[2, 3, 4],
                &[3, 0, 4],
            ],
            CellKind::Prism => &[
                &[0, 2, 1],
                &[3, 4, 5],
                &[0, 1, 4, 3],
                &[1, 2, 5, 4],
                &[2, 0, 3, 5],
            ],
            CellKind::Hex => &[
                &[0, 3, 2, 1],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
        }
    }

    /// Vertex indices of the degenerate hexahedron representing this element.
    pub fn collapse_to_hex(self, v: &[usize]) -> [usize; 8] {
        match self {
            CellKind::Tet => [v[0], v[1], v[2], v[2], v[3], v[3], v[3], v[3]],
            CellKind::Pyramid => [v[0], v[1], v[2], v[3], v[4], v[4], v[4], v[4]],
            CellKind::Prism => [v[0], v[1], v[2], v[2], v[3], v[4], v[5], v[5]],
            CellKind::Hex => [v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]],
        }
    }
}

/// Reference-cube vertex signs for the trilinear map on [-1,1]^3.
const HEX_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Trilinear map x(xi) = sum_l x_l phi_l(xi) and its Jacobian.
pub fn trilinear_map(corners: &[Vec3; 8], xi: Vec3) -> (Vec3, [[f64; 3]; 3]) {
    let mut x = [0.0; 3];
    let mut jac = [[0.0; 3]; 3];
    for (l, s) in HEX_SIGNS.iter().enumerate() {
        let f0 = 1.0 + s[0] * xi[0];
        let f1 = 1.0 + s[1] * xi[1];
        let f2 = 1.0 + s[2] * xi[2];
        let phi = 0.125 * f0 * f1 * f2;
        let dphi = [
            0.125 * s[0] * f1 * f2,
            0.125 * f0 * s[1] * f2,
            0.125 * f0 * f1 * s[2],
        ];
        for d in 0..3 {
            x[d] += phi * corners[l][d];
            for e in 0..3 {
                jac[d][e] += dphi[e] * corners[l][d];
            }
        }
    }
    (x, jac)
}

fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

/// 3-point Gauss-Legendre nodes and weights on [-1, 1].
const GL3_NODES: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
const GL3_WEIGHTS: [f64; 3] = [
    0.5555555555555556,
    0.8888888888888888,
    0.5555555555555556,
];

/// Volume, centroid and centroid-relative monomial averages of an element,
/// integrated with a 3x3x3 tensor Gauss rule over the (degenerate) hex map.
///
/// `moments` holds the averages of [dx, dy, dz, dx^2, dy^2, dz^2, dxdy,
/// dxdz, dydz] with dx = x - centroid; the first three vanish by
/// construction.
#[derive(Debug, Clone, Copy)]
pub struct VolumeIntegrals {
    pub volume: f64,
    pub centroid: Vec3,
    pub moments: [f64; 9],
}

pub fn volume_integrals(corners: &[Vec3; 8]) -> Result<VolumeIntegrals> {
    let mut nodes = Vec::with_capacity(27);
    let mut volume = 0.0;
    let mut first = [0.0; 3];
    for (i, &xi) in GL3_NODES.iter().enumerate() {
        for (j, &eta) in GL3_NODES.iter().enumerate() {
            for (k, &zeta) in GL3_NODES.iter().enumerate() {
                let (x, jac) = trilinear_map(corners, [xi, eta, zeta]);
                let det = det3(&jac);
                if det <= 0.0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "non-positive Jacobian {det:e} at quadrature node"
                    )));
                }
                let w = GL3_WEIGHTS[i] * GL3_WEIGHTS[j] * GL3_WEIGHTS[k] * det;
                volume += w;
                for d in 0..3 {
                    first[d] += w * x[d];
                }
                nodes.push((x, w));
            }
        }
    }
    if volume <= 0.0 {
        return Err(Error::DegenerateGeometry("non-positive volume".into()));
    }
    let centroid = [first[0] / volume, first[1] / volume, first[2] / volume];
    let mut m = [0.0; 9];
    for (x, w) in nodes {
        let d = sub(x, centroid);
        m[0] += w * d[0];
        m[1] += w * d[1];
        m[2] += w * d[2];
        m[3] += w * d[0] * d[0];
        m[4] += w * d[1] * d[1];
        m[5] += w * d[2] * d[2];
        m[6] += w * d[0] * d[1];
        m[7] += w * d[0] * d[2];
        m[8] += w * d[1] * d[2];
    }
    for v in m.iter_mut() {
        *v /= volume;
    }
    Ok(VolumeIntegrals {
        volume,
        centroid,
        moments: m,
    })
}

/// Volume average of a scalar field over a (possibly degenerate) hex with
/// the same 3x3x3 rule used for the geometric moments.
pub fn average_over_hex(corners: &[Vec3; 8], f: &dyn Fn(Vec3) -> f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &xi) in GL3_NODES.iter().enumerate() {
        for (j, &eta) in GL3_NODES.iter().enumerate() {
            for (k, &zeta) in GL3_NODES.iter().enumerate() {
                let (x, jac) = trilinear_map(corners, [xi, eta, zeta]);
                let w = GL3_WEIGHTS[i] * GL3_WEIGHTS[j] * GL3_WEIGHTS[k] * det3(&jac);
                num += w * f(x);
                den += w;
            }
        }
    }
    num / den
}

/// One Gaussian point of a face rule: position, weight (already scaled by
/// the area element) and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceQuadPoint {
    pub position: Vec3,
    pub weight: f64,
    pub normal: Vec3,
}

/// Gaussian points of one face: 3 for a triangle, 4 for a quadrilateral.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceQuadrature {
    pub points: Vec<FaceQuadPoint>,
}

impl FaceQuadrature {
    pub fn area(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

const GL2: f64 = 0.5773502691896258; // 1/sqrt(3)

/// Quadrature for a face given its ordered vertex positions. The normal
/// follows the right-hand rule of the vertex order.
pub fn face_quadrature(verts: &[Vec3]) -> Result<FaceQuadrature> {
    match verts.len() {
        3 => {
            let e1 = sub(verts[1], verts[0]);
            let e2 = sub(verts[2], verts[0]);
            let cr = cross(e1, e2);
            let area = 0.5 * norm(cr);
            if area <= f64::EPSILON {
                return Err(Error::DegenerateGeometry("zero-area triangle face".into()));
            }
            let n = [cr[0] / (2.0 * area), cr[1] / (2.0 * area), cr[2] / (2.0 * area)];
            let bary = [(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0),
                        (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0),
                        (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)];
            let points = bary
                .iter()
                .map(|&(a, b, c)| FaceQuadPoint {
                    position: [
                        a * verts[0][0] + b * verts[1][0] + c * verts[2][0],
                        a * verts[0][1] + b * verts[1][1] + c * verts[2][1],
                        a * verts[0][2] + b * verts[1][2] + c * verts[2][2],
                    ],
                    weight: area / 3.0,
                    normal: n,
                })
                .collect();
            Ok(FaceQuadrature { points })
        }
        4 => {
            // bilinear map with corners at (-1,-1), (1,-1), (1,1), (-1,1)
            let signs = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
            let mut points = Vec::with_capacity(4);
            for &eta in &[-GL2, GL2] {
                for &xi in &[-GL2, GL2] {
                    let mut x = [0.0; 3];
                    let mut dxi = [0.0; 3];
                    let mut deta = [0.0; 3];
                    for (l, s) in signs.iter().enumerate() {
                        let phi = 0.25 * (1.0 + s[0] * xi) * (1.0 + s[1] * eta);
                        let dphi_xi = 0.25 * s[0] * (1.0 + s[1] * eta);
                        let dphi_eta = 0.25 * (1.0 + s[0] * xi) * s[1];
                        for d in 0..3 {
                            x[d] += phi * verts[l][d];
                            dxi[d] += dphi_xi * verts[l][d];
                            deta[d] += dphi_eta * verts[l][d];
                        }
                    }
                    let cr = cross(dxi, deta);
                    let jac = norm(cr);
                    if jac <= f64::EPSILON {
                        return Err(Error::DegenerateGeometry(
                            "degenerate quadrilateral face".into(),
                        ));
                    }
                    points.push(FaceQuadPoint {
                        position: x,
                        weight: jac, // Gauss weights are 1 for the 2x2 rule
                        normal: [cr[0] / jac, cr[1] / jac, cr[2] / jac],
                    });
                }
            }
            Ok(FaceQuadrature { points })
        }
        n => Err(Error::DegenerateGeometry(format!("face with {n} vertices"))),
    }
}

/// Area-weighted mean unit normal of a face rule.
pub fn mean_normal(q: &FaceQuadrature) -> Vec3 {
    let mut n = [0.0; 3];
    for p in &q.points {
        for d in 0..3 {
            n[d] += p.weight * p.normal[d];
        }
    }
    crate::math::normalize(n)
}
