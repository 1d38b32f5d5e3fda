//! Triangulated round 2-sphere: icosphere construction, per-face quadrature
//! and gradients, geodesic balls, point location, and stereographic
//! resampling for blow-up analysis.
//!
//! Discretization is piecewise-linear finite elements on flat triangles with
//! vertices on the unit sphere; the round metric enters through the vertex
//! positions only. Face quantities are exact per flat triangle, and sphere
//! integrals converge at O(h^2).

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::warp::WarpFunction;
use std::cell::Cell;
use std::collections::HashMap;
use std::io::{BufRead, Write};

pub const MAX_SUBDIVISION_LEVEL: u32 = 8;

/// Triangulated unit sphere with consistent outward orientation.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_area: Vec<f64>,
    face_barycenter: Vec<Vec3>,
    vertex_dual_area: Vec<f64>,
    /// Hat-function gradients (g1, g2) relative to the face's first vertex;
    /// the gradient of a field u on the face is g1 (u1 - u0) + g2 (u2 - u0).
    shape_gradients: Vec<[Vec3; 2]>,
    face_neighbors: Vec<[usize; 3]>,
    vertex_face_offsets: Vec<usize>,
    vertex_face_indices: Vec<usize>,
    vertex_neighbor_offsets: Vec<usize>,
    vertex_neighbor_indices: Vec<usize>,
    subdivision_level: u32,
    max_edge_len: f64,
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.faces.len() * 3 / 2
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Flat-triangle area per face (approximates the spherical area at O(h^2)).
    pub fn face_area(&self) -> &[f64] {
        &self.face_area
    }

    /// Normalized face barycenters (on the sphere).
    pub fn face_barycenter(&self) -> &[Vec3] {
        &self.face_barycenter
    }

    /// Barycentric dual area per vertex (sum of adjacent face areas / 3).
    pub fn vertex_dual_area(&self) -> &[f64] {
        &self.vertex_dual_area
    }

    pub fn subdivision_level(&self) -> u32 {
        self.subdivision_level
    }

    pub fn max_edge_len(&self) -> f64 {
        self.max_edge_len
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    pub fn shape_gradients(&self, face: usize) -> &[Vec3; 2] {
        &self.shape_gradients[face]
    }

    /// Faces incident to a vertex.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_face_indices[self.vertex_face_offsets[v]..self.vertex_face_offsets[v + 1]]
    }

    /// 1-ring vertex neighbors.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbor_indices
            [self.vertex_neighbor_offsets[v]..self.vertex_neighbor_offsets[v + 1]]
    }

    /// Neighbor face across the edge opposite local vertex slot s.
    pub fn face_neighbors(&self, face: usize) -> &[usize; 3] {
        &self.face_neighbors[face]
    }

    /// Per-face constant gradient of a scalar field (lies in the face plane;
    /// exact for restrictions of affine functions, exactly zero for constants).
    pub fn face_gradient(&self, values: &[f64], face: usize) -> Result<Vec3> {
        if values.len() != self.n_vertices() {
            return Err(Error::FieldLengthMismatch {
                expected: self.n_vertices(),
                got: values.len(),
            });
        }
        if face >= self.n_faces() {
            return Err(Error::BadFaceIndex {
                face,
                n_faces: self.n_faces(),
            });
        }
        Ok(self.face_gradient_unchecked(values, face))
    }

    #[inline]
    pub(crate) fn face_gradient_unchecked(&self, values: &[f64], face: usize) -> Vec3 {
        let [i0, i1, i2] = self.faces[face];
        let [g1, g2] = self.shape_gradients[face];
        let d1 = values[i1] - values[i0];
        let d2 = values[i2] - values[i0];
        [
            g1[0] * d1 + g2[0] * d2,
            g1[1] * d1 + g2[1] * d2,
            g1[2] * d1 + g2[2] * d2,
        ]
    }

    /// Per-face gradient of a 3-vector field: one row per component.
    pub fn face_gradient_vec(&self, values: &[Vec3], face: usize) -> Result<[Vec3; 3]> {
        if values.len() != self.n_vertices() {
            return Err(Error::FieldLengthMismatch {
                expected: self.n_vertices(),
                got: values.len(),
            });
        }
        if face >= self.n_faces() {
            return Err(Error::BadFaceIndex {
                face,
                n_faces: self.n_faces(),
            });
        }
        let [i0, i1, i2] = self.faces[face];
        let [g1, g2] = self.shape_gradients[face];
        let mut rows = [[0.0; 3]; 3];
        for k in 0..3 {
            let d1 = values[i1][k] - values[i0][k];
            let d2 = values[i2][k] - values[i0][k];
            rows[k] = [
                g1[0] * d1 + g2[0] * d2,
                g1[1] * d1 + g2[1] * d2,
                g1[2] * d1 + g2[2] * d2,
            ];
        }
        Ok(rows)
    }

    /// Sum density * area over faces whose barycenter lies within geodesic
    /// distance `radius` of `center`.
    pub fn geodesic_ball_sum(&self, density: &[f64], center: Vec3, radius: f64) -> Result<f64> {
        if density.len() != self.n_faces() {
            return Err(Error::FieldLengthMismatch {
                expected: self.n_faces(),
                got: density.len(),
            });
        }
        if !(radius > 0.0 && radius <= std::f64::consts::PI) {
            return Err(Error::BadBallRadius { radius });
        }
        let c = geom::normalize(center);
        let mut acc = 0.0;
        for f in 0..self.n_faces() {
            if geom::geodesic_dist(self.face_barycenter[f], c) <= radius {
                acc += density[f] * self.face_area[f];
            }
        }
        Ok(acc)
    }

    /// Build from raw data, validating every mesh invariant.
    pub fn from_vertices_faces(
        vertices: Vec<Vec3>,
        faces: Vec<[usize; 3]>,
        subdivision_level: u32,
    ) -> Result<TriMesh> {
        for (i, v) in vertices.iter().enumerate() {
            let n = geom::norm(*v);
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "vertex {i} is off the unit sphere (|v| = {n})"
                )));
            }
        }
        let n_v = vertices.len();
        let n_f = faces.len();
        if n_f % 2 != 0 || n_v as i64 - (3 * n_f / 2) as i64 + n_f as i64 != 2 {
            return Err(Error::Precondition(format!(
                "V - E + F = {} != 2 for V = {n_v}, F = {n_f}",
                n_v as i64 - (3 * n_f / 2) as i64 + n_f as i64
            )));
        }

        let mut face_area = Vec::with_capacity(n_f);
        let mut face_barycenter = Vec::with_capacity(n_f);
        let mut shape_gradients = Vec::with_capacity(n_f);
        let mut max_edge_len: f64 = 0.0;
        for (fi, &[i0, i1, i2]) in faces.iter().enumerate() {
            let (p0, p1, p2) = (vertices[i0], vertices[i1], vertices[i2]);
            // outward orientation: the vertex cone must be positively oriented
            if geom::det3(p0, p1, p2) <= 0.0 {
                return Err(Error::Precondition(format!(
                    "face {fi} is not consistently outward-oriented"
                )));
            }
            let e1 = geom::sub(p1, p0);
            let e2 = geom::sub(p2, p0);
            let n = geom::cross(e1, e2);
            let two_a = geom::norm(n);
            let area = 0.5 * two_a;
            if !(area > 1e-300) {
                return Err(Error::DegenerateFace { face: fi, area });
            }
            let nh = geom::scale(n, 1.0 / two_a);
            // hat gradients: g1 = n x (p0 - p2) / 2A, g2 = n x (p1 - p0) / 2A
            let g1 = geom::scale(geom::cross(nh, geom::sub(p0, p2)), 1.0 / two_a);
            let g2 = geom::scale(geom::cross(nh, geom::sub(p1, p0)), 1.0 / two_a);
            face_area.push(area);
            face_barycenter.push(geom::normalize([
                (p0[0] + p1[0] + p2[0]) / 3.0,
                (p0[1] + p1[1] + p2[1]) / 3.0,
                (p0[2] + p1[2] + p2[2]) / 3.0,
            ]));
            shape_gradients.push([g1, g2]);
            max_edge_len = max_edge_len
                .max(geom::norm(e1))
                .max(geom::norm(e2))
                .max(geom::norm(geom::sub(p2, p1)));
        }

        let mut vertex_dual_area = vec![0.0; n_v];
        for (fi, &[i0, i1, i2]) in faces.iter().enumerate() {
            let third = face_area[fi] / 3.0;
            vertex_dual_area[i0] += third;
            vertex_dual_area[i1] += third;
            vertex_dual_area[i2] += third;
        }

        // adjacency: edge -> (face, opposite slot)
        let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut face_neighbors = vec![[usize::MAX; 3]; n_f];
        for (fi, &f) in faces.iter().enumerate() {
            for s in 0..3 {
                let a = f[(s + 1) % 3];
                let b = f[(s + 2) % 3];
                let key = (a.min(b), a.max(b));
                match edge_map.remove(&key) {
                    None => {
                        edge_map.insert(key, (fi, s));
                    }
                    Some((fj, sj)) => {
                        face_neighbors[fi][s] = fj;
                        face_neighbors[fj][sj] = fi;
                    }
                }
            }
        }
        if !edge_map.is_empty() {
            return Err(Error::Precondition(format!(
                "{} unmatched edges (mesh not closed)",
                edge_map.len()
            )));
        }

        // CSR vertex -> faces
        let mut counts = vec![0usize; n_v + 1];
        for f in &faces {
            for &i in f {
                counts[i + 1] += 1;
            }
        }
        for i in 0..n_v {
            counts[i + 1] += counts[i];
        }
        let vertex_face_offsets = counts.clone();
        let mut cursor = counts;
        let mut vertex_face_indices = vec![0usize; faces.len() * 3];
        for (fi, f) in faces.iter().enumerate() {
            for &i in f {
                vertex_face_indices[cursor[i]] = fi;
                cursor[i] += 1;
            }
        }

        // CSR vertex -> 1-ring neighbors (each edge contributes both ways)
        let mut ncounts = vec![0usize; n_v + 1];
        for (fi, f) in faces.iter().enumerate() {
            for s in 0..3 {
                let a = f[(s + 1) % 3];
                let b = f[(s + 2) % 3];
                // count each undirected edge once: from the face where a < b
                if a < b || face_neighbors[fi][s] == usize::MAX {
                    ncounts[a + 1] += 1;
                    ncounts[b + 1] += 1;
                }
            }
        }
        for i in 0..n_v {
            ncounts[i + 1] += ncounts[i];
        }
        let vertex_neighbor_offsets = ncounts.clone();
        let mut ncursor = ncounts;
        let mut vertex_neighbor_indices =
            vec![0usize; vertex_neighbor_offsets[n_v]];
        for (fi, f) in faces.iter().enumerate() {
            for s in 0..3 {
                let a = f[(s + 1) % 3];
                let b = f[(s + 2) % 3];
                if a < b || face_neighbors[fi][s] == usize::MAX {
                    vertex_neighbor_indices[ncursor[a]] = b;
                    ncursor[a] += 1;
                    vertex_neighbor_indices[ncursor[b]] = a;
                    ncursor[b] += 1;
                }
            }
        }

        Ok(TriMesh {
            vertices,
            faces,
            face_area,
            face_barycenter,
            vertex_dual_area,
            shape_gradients,
            face_neighbors,
            vertex_face_offsets,
            vertex_face_indices,
            vertex_neighbor_offsets,
            vertex_neighbor_indices,
            subdivision_level,
            max_edge_len,
        })
    }
}

/// Icosahedron subdivided `level` times, vertices projected to the sphere.
pub fn build_icosphere(level: u32) -> Result<TriMesh> {
    if level > MAX_SUBDIVISION_LEVEL {
        return Err(Error::LevelTooDeep {
            level,
            max: MAX_SUBDIVISION_LEVEL,
        });
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw: [Vec3; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec3> = raw.iter().map(|&v| geom::normalize(v)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    // enforce outward orientation of the base solid
    for f in faces.iter_mut() {
        let (p0, p1, p2) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        if geom::det3(p0, p1, p2) < 0.0 {
            f.swap(1, 2);
        }
    }

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        let mut mid = |i: usize, j: usize, vs: &mut Vec<Vec3>| -> usize {
            let key = (i.min(j), i.max(j));
            if let Some(&m) = midpoint.get(&key) {
                return m;
            }
            let m = vs.len();
            vs.push(geom::normalize(geom::add(vs[i], vs[j])));
            midpoint.insert(key, m);
            m
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    TriMesh::from_vertices_faces(vertices, faces, level)
}

// --- point location -----------------------------------------------------------

/// Walking point locator with barycentric output (radial projection onto the
/// flat face). Caches the last hit face for coherence.
pub struct FaceLocator<'a> {
    mesh: &'a TriMesh,
    last: Cell<usize>,
}

impl<'a> FaceLocator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        FaceLocator {
            mesh,
            last: Cell::new(0),
        }
    }

    fn signed_weights(&self, face: usize, p: Vec3) -> [f64; 3] {
        let [i0, i1, i2] = self.mesh.faces[face];
        let (p0, p1, p2) = (
            self.mesh.vertices[i0],
            self.mesh.vertices[i1],
            self.mesh.vertices[i2],
        );
        [
            geom::det3(p, p1, p2),
            geom::det3(p0, p, p2),
            geom::det3(p0, p1, p),
        ]
    }

    /// Containing face and normalized barycentric coordinates of `p`.
    pub fn locate(&self, p: Vec3) -> (usize, [f64; 3]) {
        let p = geom::normalize(p);
        let mut face = self.last.get();
        let max_steps = self.mesh.n_faces() * 2 + 16;
        for _ in 0..max_steps {
            let w = self.signed_weights(face, p);
            let (mut worst, mut worst_val) = (0, w[0]);
            for s in 1..3 {
                if w[s] < worst_val {
                    worst = s;
                    worst_val = w[s];
                }
            }
            if worst_val >= -1e-13 {
                self.last.set(face);
                return (face, normalize_bary(w));
            }
            let next = self.mesh.face_neighbors[face][worst];
            debug_assert_ne!(next, usize::MAX);
            face = next;
        }
        // walk got stuck on a numerical fence: global fallback
        let mut best = (0usize, f64::NEG_INFINITY);
        for f in 0..self.mesh.n_faces() {
            let w = self.signed_weights(f, p);
            let m = w[0].min(w[1]).min(w[2]);
            if m > best.1 {
                best = (f, m);
            }
        }
        self.last.set(best.0);
        let w = self.signed_weights(best.0, p);
        (best.0, normalize_bary(w))
    }

    /// Barycentric-linear interpolation of a scalar field at `p`.
    pub fn interp_scalar(&self, values: &[f64], p: Vec3) -> f64 {
        let (face, w) = self.locate(p);
        let [i0, i1, i2] = self.mesh.faces[face];
        w[0] * values[i0] + w[1] * values[i1] + w[2] * values[i2]
    }

    /// Barycentric-linear interpolation of a unit-vector field, re-projected
    /// to the sphere.
    pub fn interp_unit_vec(&self, values: &[Vec3], p: Vec3) -> Vec3 {
        let (face, w) = self.locate(p);
        let [i0, i1, i2] = self.mesh.faces[face];
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = w[0] * values[i0][k] + w[1] * values[i1][k] + w[2] * values[i2][k];
        }
        let n = geom::norm(out);
        if n < 1e-12 {
            // interpolating across a fold; fall back to the dominant corner
            let mut s = i0;
            if w[1] > w[0] && w[1] >= w[2] {
                s = i1;
            } else if w[2] > w[0] && w[2] > w[1] {
                s = i2;
            }
            values[s]
        } else {
            geom::scale(out, 1.0 / n)
        }
    }
}

fn normalize_bary(w: [f64; 3]) -> [f64; 3] {
    let w = [w[0].max(0.0), w[1].max(0.0), w[2].max(0.0)];
    let s = w[0] + w[1] + w[2];
    if s <= 0.0 {
        [1.0 / 3.0; 3]
    } else {
        [w[0] / s, w[1] / s, w[2] / s]
    }
}

// --- planar resampling ----------------------------------------------------------

/// Square grid of map samples over the disk D_R in a rescaled stereographic
/// chart: grid node z holds the map value at the domain point with chart
/// coordinate scale * z.
#[derive(Debug, Clone)]
pub struct PlanarPatch {
    pub center: Vec3,
    pub scale: f64,
    pub radius: f64,
    pub n_grid: usize,
    /// Row-major (j * n_grid + i) sampled v values (unit vectors).
    pub v: Vec<Vec3>,
    /// Row-major sampled f values.
    pub f: Vec<f64>,
}

impl PlanarPatch {
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_grid + i
    }

    #[inline]
    pub fn node_coord(&self, i: usize, j: usize) -> [f64; 2] {
        let n = (self.n_grid - 1) as f64;
        [
            -self.radius + 2.0 * self.radius * i as f64 / n,
            -self.radius + 2.0 * self.radius * j as f64 / n,
        ]
    }

    /// Dirichlet energy of the sampled map over D_R with target density
    /// psi(f): cell-centered finite differences, cells masked to the disk.
    /// The planar chart is conformal, so this equals the spherical energy of
    /// the region the patch covers (up to sampling error).
    pub fn dirichlet_energy(&self, warp: &WarpFunction) -> f64 {
        let n = self.n_grid;
        let h = 2.0 * self.radius / (n as f64 - 1.0);
        let mut acc = 0.0;
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let c = self.node_coord(i, j);
                let cx = c[0] + 0.5 * h;
                let cy = c[1] + 0.5 * h;
                if cx * cx + cy * cy > self.radius * self.radius {
                    continue;
                }
                let (i00, i10, i01, i11) = (
                    self.index(i, j),
                    self.index(i + 1, j),
                    self.index(i, j + 1),
                    self.index(i + 1, j + 1),
                );
                let mut gsq = 0.0;
                for k in 0..3 {
                    let dx = (self.v[i10][k] + self.v[i11][k] - self.v[i00][k] - self.v[i01][k])
                        / (2.0 * h);
                    let dy = (self.v[i01][k] + self.v[i11][k] - self.v[i00][k] - self.v[i10][k])
                        / (2.0 * h);
                    gsq += dx * dx + dy * dy;
                }
                let fdx = (self.f[i10] + self.f[i11] - self.f[i00] - self.f[i01]) / (2.0 * h);
                let fdy = (self.f[i01] + self.f[i11] - self.f[i00] - self.f[i10]) / (2.0 * h);
                gsq += fdx * fdx + fdy * fdy;
                let fbar = 0.25 * (self.f[i00] + self.f[i10] + self.f[i01] + self.f[i11]);
                acc += gsq * warp.value(fbar) * h * h;
            }
        }
        0.5 * acc
    }
}

/// Resample a map over a rescaled stereographic grid around `center`.
///
/// Node z of the patch holds the map value at the domain point with chart
/// coordinate scale * z, interpolated linearly within the containing face;
/// v values are renormalized to the sphere after interpolation.
pub fn resample_stereographic(
    mesh: &TriMesh,
    v: &[Vec3],
    f: &[f64],
    center: Vec3,
    scale: f64,
    radius: f64,
    n_grid: usize,
) -> Result<PlanarPatch> {
    if v.len() != mesh.n_vertices() || f.len() != mesh.n_vertices() {
        return Err(Error::FieldLengthMismatch {
            expected: mesh.n_vertices(),
            got: v.len().min(f.len()),
        });
    }
    if n_grid < 2 {
        return Err(Error::Precondition("n_grid must be >= 2".into()));
    }
    let scale_r = scale * radius;
    if !(scale_r < 1.0) {
        return Err(Error::ChartGuard {
            scale_r,
            suggested_r: 0.99 / scale,
        });
    }
    let chart = geom::Chart::new(center);
    let locator = FaceLocator::new(mesh);
    let mut out_v = Vec::with_capacity(n_grid * n_grid);
    let mut out_f = Vec::with_capacity(n_grid * n_grid);
    let n = (n_grid - 1) as f64;
    for j in 0..n_grid {
        for i in 0..n_grid {
            let z = [
                -radius + 2.0 * radius * i as f64 / n,
                -radius + 2.0 * radius * j as f64 / n,
            ];
            let p = chart.from_plane([scale * z[0], scale * z[1]]);
            out_v.push(locator.interp_unit_vec(v, p));
            out_f.push(locator.interp_scalar(f, p));
        }
    }
    Ok(PlanarPatch {
        center: geom::normalize(center),
        scale,
        radius,
        n_grid,
        v: out_v,
        f: out_f,
    })
}

/// Sum of signed spherical areas of the image triangles of a vertex field;
/// divide by 4 pi for the raw mapping degree.
pub fn signed_image_area_sum(mesh: &TriMesh, v: &[Vec3]) -> Result<f64> {
    if v.len() != mesh.n_vertices() {
        return Err(Error::FieldLengthMismatch {
            expected: mesh.n_vertices(),
            got: v.len(),
        });
    }
    let mut acc = 0.0;
    for &[i0, i1, i2] in mesh.faces() {
        acc += geom::spherical_triangle_signed_area(v[i0], v[i1], v[i2]);
    }
    Ok(acc)
}

// --- flat CSV import/export -----------------------------------------------------

/// Write mesh (and optionally a map) in the flat text format:
/// `v,x,y,z[,vx,vy,vz,f]` per vertex, `f,i,j,k` per face.
pub fn write_csv<W: Write>(
    w: &mut W,
    mesh: &TriMesh,
    map: Option<(&[Vec3], &[f64])>,
) -> Result<()> {
    for (i, p) in mesh.vertices().iter().enumerate() {
        match map {
            None => writeln!(w, "v,{},{},{}", p[0], p[1], p[2])?,
            Some((mv, mf)) => writeln!(
                w,
                "v,{},{},{},{},{},{},{}",
                p[0], p[1], p[2], mv[i][0], mv[i][1], mv[i][2], mf[i]
            )?,
        }
    }
    for f in mesh.faces() {
        writeln!(w, "f,{},{},{}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Read the flat text format back. Returns the mesh and, when the vertex
/// lines carried them, the map fields.
#[allow(clippy::type_complexity)]
pub fn read_csv<R: BufRead>(r: R) -> Result<(TriMesh, Option<(Vec<Vec3>, Vec<f64>)>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut map_v = Vec::new();
    let mut map_f = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let tag = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        match tag {
            "v" => {
                let nums: std::result::Result<Vec<f64>, _> =
                    rest.iter().map(|s| s.trim().parse::<f64>()).collect();
                let nums = nums.map_err(|e| {
                    Error::Config(format!("line {}: bad vertex number: {e}", ln + 1))
                })?;
                match nums.len() {
                    3 => vertices.push([nums[0], nums[1], nums[2]]),
                    7 => {
                        vertices.push([nums[0], nums[1], nums[2]]);
                        map_v.push([nums[3], nums[4], nums[5]]);
                        map_f.push(nums[6]);
                    }
                    n => {
                        return Err(Error::Config(format!(
                            "line {}: vertex line has {n} fields (want 3 or 7)",
                            ln + 1
                        )))
                    }
                }
            }
            "f" => {
                let idx: std::result::Result<Vec<usize>, _> =
                    rest.iter().map(|s| s.trim().parse::<usize>()).collect();
                let idx = idx
                    .map_err(|e| Error::Config(format!("line {}: bad face index: {e}", ln + 1)))?;
                if idx.len() != 3 {
                    return Err(Error::Config(format!(
                        "line {}: face line needs 3 indices",
                        ln + 1
                    )));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown record tag '{other}'",
                    ln + 1
                )))
            }
        }
    }
    let mesh = TriMesh::from_vertices_faces(vertices, faces, 0)?;
    let map = if map_v.is_empty() {
        None
    } else {
        if map_v.len() != mesh.n_vertices() {
            return Err(Error::Config(
                "mixed bare and map vertex lines in one file".into(),
            ));
        }
        Some((map_v, map_f))
    };
    Ok((mesh, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosahedron_combinatorics() {
        let m = build_icosphere(0).unwrap();
        assert_eq!(m.n_vertices(), 12);
        assert_eq!(m.n_faces(), 20);
        assert_eq!(m.n_edges(), 30);
        let m1 = build_icosphere(1).unwrap();
        assert_eq!(m1.n_vertices(), 42);
        assert_eq!(m1.n_faces(), 80);
        assert!(build_icosphere(9).is_err());
    }

    #[test]
    fn areas_approach_sphere_area() {
        // flat-triangle deficit is O(h^2): ~1.2e-3 at level 4, quartering per level
        let m = build_icosphere(4).unwrap();
        let rel = (m.total_area() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 1.5e-3, "level 4 area deficit {rel}");
        let m5 = build_icosphere(5).unwrap();
        let rel5 = (m5.total_area() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel5 < 1e-3, "level 5 area deficit {rel5}");
        let ratio = rel / rel5;
        assert!((3.0..5.0).contains(&ratio), "deficit not O(h^2): ratio {ratio}");
        // dual areas partition the total area
        let dual: f64 = m5.vertex_dual_area().iter().sum();
        assert!((dual - m5.total_area()).abs() < 1e-9);
    }

    #[test]
    fn gradient_exact_for_affine_fields() {
        let m = build_icosphere(3).unwrap();
        let a = [0.3, -1.2, 0.7];
        let field: Vec<f64> = m.vertices().iter().map(|&p| geom::dot(a, p) + 0.4).collect();
        for face in [0usize, 17, 333, m.n_faces() - 1] {
            let g = m.face_gradient(&field, face).unwrap();
            // exact: gradient equals the in-plane projection of a
            let [i0, i1, i2] = m.faces()[face];
            let (p0, p1, p2) = (m.vertices()[i0], m.vertices()[i1], m.vertices()[i2]);
            let n = geom::normalize(geom::cross(geom::sub(p1, p0), geom::sub(p2, p0)));
            let proj = geom::sub(a, geom::scale(n, geom::dot(a, n)));
            assert!(geom::norm(geom::sub(g, proj)) < 1e-10);
            // gradient lies in the face plane
            assert!(geom::dot(g, n).abs() < 1e-12);
        }
        // constant field: exactly zero
        let c = vec![2.5; m.n_vertices()];
        for face in 0..m.n_faces() {
            assert_eq!(m.face_gradient(&c, face).unwrap(), [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn gradient_linear_in_field() {
        let m = build_icosphere(2).unwrap();
        let f1: Vec<f64> = m.vertices().iter().map(|p| p[0] * p[1]).collect();
        let f2: Vec<f64> = m.vertices().iter().map(|p| (3.0 * p[2]).sin()).collect();
        let combo: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        for face in 0..m.n_faces() {
            let g1 = m.face_gradient(&f1, face).unwrap();
            let g2 = m.face_gradient(&f2, face).unwrap();
            let gc = m.face_gradient(&combo, face).unwrap();
            for k in 0..3 {
                assert!((gc[k] - (2.0 * g1[k] - 0.5 * g2[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_dirichlet_integral() {
        // integral of |grad x_1|^2 over S^2 is 8 pi / 3; summing components gives 8 pi
        let m = build_icosphere(5).unwrap();
        let mut per_coord = [0.0; 3];
        for k in 0..3 {
            let field: Vec<f64> = m.vertices().iter().map(|p| p[k]).collect();
            for face in 0..m.n_faces() {
                let g = m.face_gradient(&field, face).unwrap();
                per_coord[k] += geom::dot(g, g) * m.face_area()[face];
            }
        }
        let total: f64 = per_coord.iter().sum();
        assert!((total - 8.0 * PI).abs() / (8.0 * PI) < 0.01);
        for k in 0..3 {
            assert!((per_coord[k] - 8.0 * PI / 3.0).abs() / (8.0 * PI / 3.0) < 0.01);
        }
    }

    #[test]
    fn quadrature_second_order() {
        // refinement slopes of the Y_1 Dirichlet integral stay near 2
        let mut errs = Vec::new();
        for level in 3..=6 {
            let m = build_icosphere(level).unwrap();
            let field: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
            let mut acc = 0.0;
            for face in 0..m.n_faces() {
                let g = m.face_gradient(&field, face).unwrap();
                acc += geom::dot(g, g) * m.face_area()[face];
            }
            errs.push((acc - 8.0 * PI / 3.0).abs());
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((1.7..=2.3).contains(&slope), "slope {slope}");
        }
    }

    #[test]
    fn ball_sums() {
        let m = build_icosphere(4).unwrap();
        let ones = vec![1.0; m.n_faces()];
        let whole = m.geodesic_ball_sum(&ones, [0.0, 0.0, 1.0], PI).unwrap();
        assert!((whole - m.total_area()).abs() < 1e-9);
        let hemi = m.geodesic_ball_sum(&ones, [0.0, 0.0, 1.0], PI / 2.0).unwrap();
        assert!((hemi - 2.0 * PI).abs() / (2.0 * PI) < 0.02);
        // concentrated density missed by a far ball
        let mut conc = vec![0.0; m.n_faces()];
        conc[0] = 7.0;
        let far = geom::neg(m.face_barycenter()[0]);
        assert_eq!(m.geodesic_ball_sum(&conc, far, 0.5).unwrap(), 0.0);
        // monotone in radius
        let density: Vec<f64> = (0..m.n_faces()).map(|i| (i % 7) as f64).collect();
        let mut prev = 0.0;
        for i in 1..=16 {
            let r = PI * i as f64 / 16.0;
            let s = m.geodesic_ball_sum(&density, [1.0, 0.0, 0.0], r).unwrap();
            assert!(s >= prev - 1e-12);
            prev = s;
        }
        assert!(m.geodesic_ball_sum(&ones, [0.0, 0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn locator_finds_containing_face() {
        let m = build_icosphere(3).unwrap();
        let loc = FaceLocator::new(&m);
        for i in 0..200 {
            // deterministic scatter of query points
            let t = i as f64 * 0.61803398875;
            let p = geom::normalize([
                (t * 12.9898).sin(),
                (t * 78.233).cos(),
                (t * 37.719).sin() * 0.8 + 0.1,
            ]);
            let (face, w) = loc.locate(p);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w[0] + w[1] + w[2] - 1.0).abs() < 1e-12);
            // reconstructed point lands back on p
            let [i0, i1, i2] = m.faces()[face];
            let q = geom::normalize(geom::add(
                geom::add(
                    geom::scale(m.vertices()[i0], w[0]),
                    geom::scale(m.vertices()[i1], w[1]),
                ),
                geom::scale(m.vertices()[i2], w[2]),
            ));
            assert!(geom::norm(geom::sub(p, q)) < 1e-10);
        }
    }

    #[test]
    fn resample_constant_map_is_exact() {
        let m = build_icosphere(3).unwrap();
        let v = vec![geom::normalize([0.1, 0.2, 0.97]); m.n_vertices()];
        let f = vec![0.125; m.n_vertices()];
        let patch =
            resample_stereographic(&m, &v, &f, [0.0, 0.0, 1.0], 0.05, 4.0, 17).unwrap();
        for i in 0..patch.v.len() {
            assert!(geom::norm(geom::sub(patch.v[i], v[0])) < 1e-12);
            assert_eq!(patch.f[i], 0.125);
        }
    }

    #[test]
    fn resample_identity_fixes_center() {
        let m = build_icosphere(4).unwrap();
        let v = m.vertices().to_vec();
        let f = vec![0.0; m.n_vertices()];
        let n_grid = 9;
        let patch =
            resample_stereographic(&m, &v, &f, [0.0, 0.0, 1.0], 0.3, 2.0, n_grid).unwrap();
        let mid = patch.index(n_grid / 2, n_grid / 2);
        assert!(geom::geodesic_dist(patch.v[mid], [0.0, 0.0, 1.0]) < 1e-9);
    }

    #[test]
    fn chart_guard_rejected() {
        let m = build_icosphere(2).unwrap();
        let v = m.vertices().to_vec();
        let f = vec![0.0; m.n_vertices()];
        assert!(matches!(
            resample_stereographic(&m, &v, &f, [0.0, 0.0, 1.0], 0.2, 10.0, 9),
            Err(Error::ChartGuard { .. })
        ));
    }

    #[test]
    fn csv_roundtrip() {
        let m = build_icosphere(1).unwrap();
        let v: Vec<Vec3> = m.vertices().iter().map(|&p| geom::normalize([p[1], p[2], p[0]])).collect();
        let f: Vec<f64> = (0..m.n_vertices()).map(|i| 0.001 * i as f64 - 0.01).collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &m, Some((&v, &f))).unwrap();
        let (m2, map) = read_csv(std::io::BufReader::new(&buf[..])).unwrap();
        let (v2, f2) = map.unwrap();
        assert_eq!(m.n_vertices(), m2.n_vertices());
        assert_eq!(m.faces(), m2.faces());
        assert_eq!(v, v2);
        assert_eq!(f, f2);
    }
}
