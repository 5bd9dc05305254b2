//! Mixed-element mesh: cells, faces with Gaussian quadrature, ghost cells
//! and von Neumann adjacency.
//!
//! Ghost cells are stored past the interior cells in the geometry array, one
//! per boundary face: mirror images across physical boundaries, translated
//! copies of the partner owner across periodic ones.

pub mod element;
pub mod generate;
pub mod io;

pub use element::{CellKind, FaceQuadPoint, FaceQuadrature};
pub use generate::{build_hybrid_cube, build_structured_hex};

use crate::error::{Error, Result};
use crate::math::{add, dot, norm, scale, sub, Vec3};
use element::{face_quadrature, mean_normal, volume_integrals};
use std::collections::HashMap;

pub type VertexId = usize;
pub type CellId = usize;
pub type FaceId = usize;

#[derive(Debug, Clone)]
pub struct Cell {
    pub kind: CellKind,
    pub vertices: Vec<VertexId>,
}

/// Volume, centroid, centroid-relative monomial averages
/// [dx, dy, dz, dx2, dy2, dz2, dxdy, dxdz, dydz] and the equivalent size dr.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub volume: f64,
    pub centroid: Vec3,
    pub moments: [f64; 9],
    pub dr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Interior(CellId),
    /// Boundary face: tag index plus the ghost cell behind it.
    Boundary { tag: usize, ghost: CellId },
}

#[derive(Debug, Clone)]
pub struct PeriodicLink {
    pub partner: FaceId,
    /// Exactly one face of each pair is primary; fluxes are evaluated there.
    pub primary: bool,
    /// point_map[k] = index of the partner quadrature point matching point k.
    pub point_map: Vec<usize>,
    /// Translation from this face to its partner.
    pub offset: Vec3,
}

#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: Vec<VertexId>,
    pub owner: CellId,
    pub neighbor: Neighbor,
    pub quad: FaceQuadrature,
    pub area: f64,
    pub periodic: Option<PeriodicLink>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.neighbor, Neighbor::Boundary { .. })
    }

    /// Cell on the far side: interior neighbor or ghost.
    pub fn across(&self) -> CellId {
        match self.neighbor {
            Neighbor::Interior(c) => c,
            Neighbor::Boundary { ghost, .. } => ghost,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GhostSource {
    /// Mirror image of the inner cell across the face plane.
    Mirror,
    /// Translated copy of a periodic partner cell.
    Periodic { cell: CellId },
}

#[derive(Debug, Clone, Copy)]
pub struct GhostInfo {
    pub face: FaceId,
    pub inner: CellId,
    pub source: GhostSource,
}

#[derive(Debug)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    /// Face ids per cell, in the local face order of the element kind.
    pub cell_faces: Vec<Vec<FaceId>>,
    /// Geometry for interior cells followed by ghost cells.
    pub geometry: Vec<CellGeometry>,
    pub n_cells: usize,
    pub ghosts: Vec<GhostInfo>,
    /// Face-adjacent interior cells (periodic partners included).
    pub von_neumann: Vec<Vec<CellId>>,
    /// Across-cell (interior or ghost) per face of each cell, aligned with
    /// `cell_faces`.
    pub stencil: Vec<Vec<CellId>>,
    pub boundary_tags: Vec<String>,
    pub periodic_decls: Vec<(String, String, usize)>,
}

/// Raw mesh description before topology and geometry are derived.
#[derive(Debug, Default)]
pub struct MeshInput {
    pub vertices: Vec<Vec3>,
    pub cells: Vec<(CellKind, Vec<VertexId>)>,
    /// Explicit boundary face tags, vertices in any order.
    pub boundary: Vec<(Vec<VertexId>, String)>,
    /// (tag_a, tag_b, axis) periodic identifications.
    pub periodic: Vec<(String, String, usize)>,
}

impl Mesh {
    pub fn is_ghost(&self, c: CellId) -> bool {
        c >= self.n_cells
    }

    pub fn tag_id(&self, name: &str) -> Option<usize> {
        self.boundary_tags.iter().position(|t| t == name)
    }

    pub fn total_volume(&self) -> f64 {
        self.geometry[..self.n_cells].iter().map(|g| g.volume).sum()
    }

    /// Volume average of a field over one interior cell, by the same rule
    /// that builds the geometric moments.
    pub fn cell_average(&self, c: CellId, f: &dyn Fn(Vec3) -> f64) -> f64 {
        let cell = &self.cells[c];
        let hexv = cell.kind.collapse_to_hex(&cell.vertices);
        let corners: [Vec3; 8] = std::array::from_fn(|i| self.vertices[hexv[i]]);
        element::average_over_hex(&corners, f)
    }

    /// Number of quadrature points per face, prefix-summed for flat indexing.
    pub fn face_point_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.faces.len() + 1);
        let mut s = 0;
        for f in &self.faces {
            off.push(s);
            s += f.quad.points.len();
        }
        off.push(s);
        off
    }
}

fn face_centroid(verts: &[VertexId], pos: &[Vec3]) -> Vec3 {
    let mut c = [0.0; 3];
    for &v in verts {
        c = add(c, pos[v]);
    }
    scale(c, 1.0 / verts.len() as f64)
}

/// Build the full mesh from raw input. `auto_tag` supplies a tag name for
/// untagged boundary faces (generators tag by position); explicitly listed
/// tags win.
pub fn build_mesh(
    input: MeshInput,
    auto_tag: Option<&dyn Fn(Vec3) -> String>,
) -> Result<Mesh> {
    let MeshInput {
        vertices,
        cells,
        boundary,
        periodic,
    } = input;
    let n_cells = cells.len();
    if n_cells == 0 {
        return Err(Error::MeshFormat("mesh has no cells".into()));
    }
    for (kind, vs) in &cells {
        if vs.len() != kind.n_vertices() {
            return Err(Error::MeshFormat(format!(
                "{} cell with {} vertices",
                kind.name(),
                vs.len()
            )));
        }
        if vs.iter().any(|&v| v >= vertices.len()) {
            return Err(Error::MeshFormat("cell references missing vertex".into()));
        }
    }
    for v in &vertices {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::MeshFormat("non-finite vertex coordinate".into()));
        }
    }

    // cell geometry (volume, centroid, moments); dr is filled once face
    // areas exist
    let mut geometry: Vec<CellGeometry> = Vec::with_capacity(n_cells);
    for (kind, vs) in &cells {
        let hexv = kind.collapse_to_hex(vs);
        let corners: [Vec3; 8] = std::array::from_fn(|i| vertices[hexv[i]]);
        let vi = volume_integrals(&corners)?;
        geometry.push(CellGeometry {
            volume: vi.volume,
            centroid: vi.centroid,
            moments: vi.moments,
            dr: 0.0,
        });
    }

    // face extraction by sorted-vertex key
    let mut key_to_face: HashMap<Vec<VertexId>, FaceId> = HashMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut cell_faces: Vec<Vec<FaceId>> = vec![Vec::new(); n_cells];
    let mut second_cell: Vec<Option<CellId>> = Vec::new();
    for (c, (kind, vs)) in cells.iter().enumerate() {
        for local in kind.faces() {
            let fverts: Vec<VertexId> = local.iter().map(|&l| vs[l]).collect();
            let mut key = fverts.clone();
            key.sort_unstable();
            match key_to_face.get(&key) {
                None => {
                    let fid = faces.len();
                    key_to_face.insert(key, fid);
                    faces.push(Face {
                        vertices: fverts,
                        owner: c,
                        neighbor: Neighbor::Boundary { tag: usize::MAX, ghost: 0 },
                        quad: FaceQuadrature { points: Vec::new() },
                        area: 0.0,
                        periodic: None,
                    });
                    second_cell.push(None);
                    cell_faces[c].push(fid);
                }
                Some(&fid) => {
                    if second_cell[fid].is_some() {
                        return Err(Error::MeshFormat(format!(
                            "face shared by more than two cells (face {fid})"
                        )));
                    }
                    second_cell[fid] = Some(c);
                    cell_faces[c].push(fid);
                }
            }
        }
    }

    // orientation (outward from owner) and quadrature
    for (fid, face) in faces.iter_mut().enumerate() {
        let fc = face_centroid(&face.vertices, &vertices);
        let own_c = geometry[face.owner].centroid;
        let mut pts: Vec<Vec3> = face.vertices.iter().map(|&v| vertices[v]).collect();
        let q = face_quadrature(&pts)?;
        if dot(mean_normal(&q), sub(fc, own_c)) < 0.0 {
            face.vertices.reverse();
            pts.reverse();
        }
        face.quad = face_quadrature(&pts)?;
        face.area = face.quad.area();
        if let Some(n) = second_cell[fid] {
            face.neighbor = Neighbor::Interior(n);
        }
    }

    // equivalent size dr
    for c in 0..n_cells {
        let areas: Vec<f64> = cell_faces[c].iter().map(|&f| faces[f].area).collect();
        let v = geometry[c].volume;
        geometry[c].dr = match cells[c].0 {
            CellKind::Tet | CellKind::Pyramid => 3.0 * v / areas.iter().sum::<f64>(),
            CellKind::Hex | CellKind::Prism => {
                v / areas.iter().cloned().fold(f64::MIN, f64::max)
            }
        };
    }

    // boundary tags
    let mut boundary_tags: Vec<String> = Vec::new();
    let tag_of = |name: &str, tags: &mut Vec<String>| -> usize {
        if let Some(i) = tags.iter().position(|t| t == name) {
            i
        } else {
            tags.push(name.to_string());
            tags.len() - 1
        }
    };
    let mut explicit: HashMap<Vec<VertexId>, String> = HashMap::new();
    for (vs, tag) in boundary {
        let mut key = vs;
        key.sort_unstable();
        explicit.insert(key, tag);
    }
    for face in faces.iter_mut() {
        if let Neighbor::Boundary { tag, .. } = &mut face.neighbor {
            let mut key = face.vertices.clone();
            key.sort_unstable();
            let name = if let Some(t) = explicit.remove(&key) {
                t
            } else if let Some(f) = auto_tag {
                f(face_centroid(&face.vertices, &vertices))
            } else {
                "untagged".to_string()
            };
            *tag = tag_of(&name, &mut boundary_tags);
        }
    }
    if !explicit.is_empty() {
        return Err(Error::MeshFormat(format!(
            "{} boundary declarations do not match any boundary face",
            explicit.len()
        )));
    }

    // periodic pairing
    let scale_len = {
        let mut lo = [f64::MAX; 3];
        let mut hi = [f64::MIN; 3];
        for v in &vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        norm(sub(hi, lo))
    };
    let tol = 1e-9 * scale_len;
    for (tag_a, tag_b, axis) in &periodic {
        if *axis > 2 {
            return Err(Error::MeshFormat(format!("periodic axis {axis} out of range")));
        }
        let ia = boundary_tags.iter().position(|t| t == tag_a);
        let ib = boundary_tags.iter().position(|t| t == tag_b);
        let (ia, ib) = match (ia, ib) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::MeshFormat(format!(
                    "periodic declaration references unknown tag {tag_a}/{tag_b}"
                )))
            }
        };
        let a_faces: Vec<FaceId> = (0..faces.len())
            .filter(|&f| matches!(faces[f].neighbor, Neighbor::Boundary { tag, .. } if tag == ia))
            .collect();
        let b_faces: Vec<FaceId> = (0..faces.len())
            .filter(|&f| matches!(faces[f].neighbor, Neighbor::Boundary { tag, .. } if tag == ib))
            .collect();
        if a_faces.len() != b_faces.len() || a_faces.is_empty() {
            return Err(Error::MeshFormat(format!(
                "periodic tags {tag_a}/{tag_b} have {} and {} faces",
                a_faces.len(),
                b_faces.len()
            )));
        }
        let offset_len = {
            let ca = face_centroid(&faces[a_faces[0]].vertices, &vertices)[*axis];
            let cb = face_centroid(&faces[b_faces[0]].vertices, &vertices)[*axis];
            cb - ca
        };
        let mut offset = [0.0; 3];
        offset[*axis] = offset_len;
        // match by centroid translated along the axis
        let quant = |x: Vec3| -> [i64; 3] {
            std::array::from_fn(|d| (x[d] / (100.0 * tol).max(1e-300)).round() as i64)
        };
        let mut b_map: HashMap<[i64; 3], FaceId> = HashMap::new();
        for &f in &b_faces {
            b_map.insert(quant(face_centroid(&faces[f].vertices, &vertices)), f);
        }
        for &fa in &a_faces {
            let target = add(face_centroid(&faces[fa].vertices, &vertices), offset);
            let fb = *b_map.get(&quant(target)).ok_or_else(|| {
                Error::MeshFormat(format!(
                    "no periodic partner for a {tag_a} face at {target:?}"
                ))
            })?;
            // match quadrature points pairwise
            let map_ab: Vec<usize> = faces[fa]
                .quad
                .points
                .iter()
                .map(|p| {
                    let t = add(p.position, offset);
                    faces[fb]
                        .quad
                        .points
                        .iter()
                        .position(|q| norm(sub(q.position, t)) < 100.0 * tol)
                        .ok_or_else(|| {
                            Error::MeshFormat("periodic quadrature points do not align".into())
                        })
                })
                .collect::<Result<_>>()?;
            let mut map_ba = vec![0; map_ab.len()];
            for (k, &m) in map_ab.iter().enumerate() {
                map_ba[m] = k;
            }
            faces[fa].periodic = Some(PeriodicLink {
                partner: fb,
                primary: true,
                point_map: map_ab,
                offset,
            });
            faces[fb].periodic = Some(PeriodicLink {
                partner: fa,
                primary: false,
                point_map: map_ba,
                offset: scale(offset, -1.0),
            });
        }
    }

    // ghost cells, one per boundary face
    let mut ghosts: Vec<GhostInfo> = Vec::new();
    for fid in 0..faces.len() {
        let (inner, is_boundary) = match faces[fid].neighbor {
            Neighbor::Boundary { .. } => (faces[fid].owner, true),
            _ => (0, false),
        };
        if !is_boundary {
            continue;
        }
        let gid = n_cells + ghosts.len();
        let geo = if let Some(link) = &faces[fid].periodic {
            let src = faces[link.partner].owner;
            let mut g = geometry[src];
            g.centroid = sub(g.centroid, link.offset);
            ghosts.push(GhostInfo {
                face: fid,
                inner,
                source: GhostSource::Periodic { cell: src },
            });
            g
        } else {
            // mirror across the face plane
            let g0 = geometry[inner];
            let n = mean_normal(&faces[fid].quad);
            let fc = {
                let mut c = [0.0; 3];
                for p in &faces[fid].quad.points {
                    c = add(c, scale(p.position, p.weight));
                }
                scale(c, 1.0 / faces[fid].area)
            };
            let d = sub(g0.centroid, fc);
            let centroid = sub(g0.centroid, scale(n, 2.0 * dot(d, n)));
            // reflect second moments: M' = R M R^T with R = I - 2 n n^T
            let r: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    (if i == j { 1.0 } else { 0.0 }) - 2.0 * n[i] * n[j]
                })
            });
            let m = &g0.moments;
            let mm = [
                [m[3], m[6], m[7]],
                [m[6], m[4], m[8]],
                [m[7], m[8], m[5]],
            ];
            let mut rm = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        rm[i][j] += r[i][k] * mm[k][j];
                    }
                }
            }
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        out[i][j] += rm[i][k] * r[j][k];
                    }
                }
            }
            ghosts.push(GhostInfo {
                face: fid,
                inner,
                source: GhostSource::Mirror,
            });
            CellGeometry {
                volume: g0.volume,
                centroid,
                moments: [
                    0.0, 0.0, 0.0, out[0][0], out[1][1], out[2][2], out[0][1], out[0][2],
                    out[1][2],
                ],
                dr: g0.dr,
            }
        };
        geometry.push(geo);
        if let Neighbor::Boundary { ghost, .. } = &mut faces[fid].neighbor {
            *ghost = gid;
        }
    }

    // adjacency and stencils
    let mut von_neumann: Vec<Vec<CellId>> = vec![Vec::new(); n_cells];
    let mut stencil: Vec<Vec<CellId>> = vec![Vec::new(); n_cells];
    for c in 0..n_cells {
        for &fid in &cell_faces[c] {
            let face = &faces[fid];
            match face.neighbor {
                Neighbor::Interior(other) => {
                    let other = if other == c { face.owner } else { other };
                    von_neumann[c].push(other);
                    stencil[c].push(other);
                }
                Neighbor::Boundary { ghost, .. } => {
                    if let Some(link) = &face.periodic {
                        von_neumann[c].push(faces[link.partner].owner);
                    }
                    stencil[c].push(ghost);
                }
            }
        }
    }

    Ok(Mesh {
        vertices,
        cells: cells
            .into_iter()
            .map(|(kind, vertices)| Cell { kind, vertices })
            .collect(),
        faces,
        cell_faces,
        geometry,
        n_cells,
        ghosts,
        von_neumann,
        stencil,
        boundary_tags,
        periodic_decls: periodic,
    })
}
