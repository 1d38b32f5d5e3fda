//! Energy functionals on discrete maps into the warped cylinder: E, the
//! alpha-regularized energy, their exact discrete gradients, and weak-form
//! Euler-Lagrange residuals of the reduced system
//!
//!   -div(psi(f) grad v) + psi(f) |grad v|^2 v = 0,
//!   -div(psi(f) grad f) + (1/2)(|grad v|^2 + |grad f|^2) psi'(f) = 0.
//!
//! Assembly uses face-constant gradients and the barycentric mean of f per
//! face, so all derivatives below are the exact derivatives of the computed
//! discrete functionals.

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::{self, PlanarPatch, TriMesh};
use crate::parallel::map_indexed;
use crate::warp::WarpFunction;
use serde::Serialize;
use std::sync::Arc;

/// Strict margin a map's f field must keep from the warp-domain endpoints.
pub const F_DOMAIN_MARGIN: f64 = 1e-6;

/// A map u = (v, f) sampled at mesh vertices: v a unit 3-vector field into
/// the sphere factor, f a real field into the warp interval.
#[derive(Debug, Clone)]
pub struct DiscreteMap {
    pub mesh: Arc<TriMesh>,
    pub v: Vec<Vec3>,
    pub f: Vec<f64>,
}

impl DiscreteMap {
    pub fn new(mesh: Arc<TriMesh>, v: Vec<Vec3>, f: Vec<f64>) -> Result<Self> {
        if v.len() != mesh.n_vertices() || f.len() != mesh.n_vertices() {
            return Err(Error::FieldLengthMismatch {
                expected: mesh.n_vertices(),
                got: v.len().min(f.len()),
            });
        }
        let mut m = DiscreteMap { mesh, v, f };
        m.renormalize_v();
        Ok(m)
    }

    /// v = identity, f constant.
    pub fn identity(mesh: Arc<TriMesh>, f0: f64) -> Self {
        let v = mesh.vertices().to_vec();
        let f = vec![f0; mesh.n_vertices()];
        DiscreteMap { mesh, v, f }
    }

    /// Constant map.
    pub fn constant(mesh: Arc<TriMesh>, v0: Vec3, f0: f64) -> Self {
        let n = mesh.n_vertices();
        DiscreteMap {
            v: vec![geom::normalize(v0); n],
            f: vec![f0; n],
            mesh,
        }
    }

    /// Project every v back to the unit sphere.
    pub fn renormalize_v(&mut self) {
        for v in self.v.iter_mut() {
            *v = geom::normalize(*v);
        }
    }

    /// Check |v| = 1 and f strictly inside the warp domain, naming the first
    /// offending vertex.
    pub fn validate(&self, warp: &WarpFunction) -> Result<()> {
        for (i, v) in self.v.iter().enumerate() {
            if (geom::norm(*v) - 1.0).abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "|v| = {} at vertex {i} is off the unit sphere",
                    geom::norm(*v)
                )));
            }
        }
        let (lo, hi) = warp.domain();
        for (i, &f) in self.f.iter().enumerate() {
            if !(f >= lo + F_DOMAIN_MARGIN && f <= hi - F_DOMAIN_MARGIN) {
                return Err(Error::FOutsideDomain {
                    vertex: i,
                    value: f,
                    lo,
                    hi,
                    margin: F_DOMAIN_MARGIN,
                });
            }
        }
        Ok(())
    }

    /// Resample this map over a rescaled stereographic grid.
    pub fn resample(
        &self,
        center: Vec3,
        scale: f64,
        radius: f64,
        n_grid: usize,
    ) -> Result<PlanarPatch> {
        mesh::resample_stereographic(&self.mesh, &self.v, &self.f, center, scale, radius, n_grid)
    }
}

/// Per-face densities: (|grad v|^2, |grad f|^2, psi(f_bar)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FaceDensity {
    pub grad_v_sq: f64,
    pub grad_f_sq: f64,
    pub psi: f64,
}

impl FaceDensity {
    /// Full energy density (|grad v|^2 + |grad f|^2) psi(f_bar).
    #[inline]
    pub fn density(&self) -> f64 {
        (self.grad_v_sq + self.grad_f_sq) * self.psi
    }
}

/// Totals and per-face breakdown of E and E_alpha.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyBreakdown {
    pub total_e: f64,
    pub total_e_alpha: f64,
    pub alpha: f64,
    pub v_part: f64,
    pub f_part: f64,
    #[serde(skip)]
    pub per_face: Vec<FaceDensity>,
}

impl EnergyBreakdown {
    /// max over faces of |grad u| = sqrt((|grad v|^2 + |grad f|^2) psi).
    pub fn max_gradient(&self) -> f64 {
        self.per_face
            .iter()
            .map(|d| d.density())
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Index of the face carrying the gradient maximum.
    pub fn argmax_gradient(&self) -> usize {
        let mut best = (0usize, -1.0);
        for (i, d) in self.per_face.iter().enumerate() {
            let e = d.density();
            if e > best.1 {
                best = (i, e);
            }
        }
        best.0
    }

    pub fn write_face_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "face,grad_v_sq,grad_f_sq,psi,density")?;
        for (i, d) in self.per_face.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                d.grad_v_sq,
                d.grad_f_sq,
                d.psi,
                d.density()
            )?;
        }
        Ok(())
    }
}

#[inline]
fn face_quantities(map: &DiscreteMap, warp: &WarpFunction, face: usize) -> (f64, f64, f64, f64) {
    let m = &map.mesh;
    let [i0, i1, i2] = m.faces()[face];
    let [g1, g2] = *m.shape_gradients(face);
    let mut gv = 0.0;
    for k in 0..3 {
        let d1 = map.v[i1][k] - map.v[i0][k];
        let d2 = map.v[i2][k] - map.v[i0][k];
        let gx = g1[0] * d1 + g2[0] * d2;
        let gy = g1[1] * d1 + g2[1] * d2;
        let gz = g1[2] * d1 + g2[2] * d2;
        gv += gx * gx + gy * gy + gz * gz;
    }
    let d1 = map.f[i1] - map.f[i0];
    let d2 = map.f[i2] - map.f[i0];
    let fx = g1[0] * d1 + g2[0] * d2;
    let fy = g1[1] * d1 + g2[1] * d2;
    let fz = g1[2] * d1 + g2[2] * d2;
    let gf = fx * fx + fy * fy + fz * fz;
    let fbar = (map.f[i0] + map.f[i1] + map.f[i2]) / 3.0;
    (gv, gf, fbar, warp.value(fbar))
}

/// (1 + x)^alpha - 1 evaluated as expm1(alpha log1p(x)) for accuracy near 0.
#[inline]
fn pow_alpha_m1(x: f64, alpha: f64) -> f64 {
    (alpha * x.ln_1p()).exp_m1()
}

/// alpha-energy of a discrete map; alpha = 1 reduces bit-exactly to E.
pub fn alpha_energy(map: &DiscreteMap, warp: &WarpFunction, alpha: f64) -> Result<EnergyBreakdown> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            lo: 1.0,
            hi: 2.0,
        });
    }
    map.validate(warp)?;
    let m = &map.mesh;
    let per_face: Vec<FaceDensity> = map_indexed(m.n_faces(), |f| {
        let (gv, gf, _, psi) = face_quantities(map, warp, f);
        FaceDensity {
            grad_v_sq: gv,
            grad_f_sq: gf,
            psi,
        }
    });
    let areas = m.face_area();
    let mut v_part = 0.0;
    let mut f_part = 0.0;
    let mut e_alpha = 0.0;
    for (f, d) in per_face.iter().enumerate() {
        let a = areas[f];
        v_part += 0.5 * d.grad_v_sq * d.psi * a;
        f_part += 0.5 * d.grad_f_sq * d.psi * a;
        if alpha != 1.0 {
            e_alpha += 0.5 * pow_alpha_m1(d.density(), alpha) * a;
        }
    }
    let total_e = v_part + f_part;
    let total_e_alpha = if alpha == 1.0 { total_e } else { e_alpha };
    Ok(EnergyBreakdown {
        total_e,
        total_e_alpha,
        alpha,
        v_part,
        f_part,
        per_face,
    })
}

/// Dirichlet-type energy E (alpha = 1).
pub fn energy(map: &DiscreteMap, warp: &WarpFunction) -> Result<EnergyBreakdown> {
    alpha_energy(map, warp, 1.0)
}

/// Exact gradient of the discrete E_alpha with respect to vertex values.
#[derive(Debug, Clone)]
pub struct MapGradient {
    /// Tangent-projected v-gradient (v . grad_v = 0 per vertex).
    pub v: Vec<Vec3>,
    pub f: Vec<f64>,
    /// Dual-area-weighted l2 norm: sqrt(sum_i a_i (|gv_i|^2 + gf_i^2)).
    pub weighted_norm: f64,
    /// Plain squared l2 norm (used by the Armijo model).
    pub l2_sq: f64,
}

struct FaceGradContrib {
    coeff: f64,
    psi: f64,
    dpsi: f64,
    g_sum: f64,
    rows: [Vec3; 3],
    fgrad: Vec3,
}

/// Exact derivative of the discrete E_alpha; the v-component is projected to
/// the tangent space of the unit-sphere constraint.
pub fn energy_gradient(
    map: &DiscreteMap,
    warp: &WarpFunction,
    alpha: f64,
) -> Result<MapGradient> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            lo: 1.0,
            hi: 2.0,
        });
    }
    map.validate(warp)?;
    let m = &map.mesh;
    let contribs: Vec<FaceGradContrib> = map_indexed(m.n_faces(), |face| {
        let [i0, i1, i2] = m.faces()[face];
        let [g1, g2] = *m.shape_gradients(face);
        let mut rows = [[0.0; 3]; 3];
        let mut gv = 0.0;
        for k in 0..3 {
            let d1 = map.v[i1][k] - map.v[i0][k];
            let d2 = map.v[i2][k] - map.v[i0][k];
            rows[k] = [
                g1[0] * d1 + g2[0] * d2,
                g1[1] * d1 + g2[1] * d2,
                g1[2] * d1 + g2[2] * d2,
            ];
            gv += geom::dot(rows[k], rows[k]);
        }
        let d1 = map.f[i1] - map.f[i0];
        let d2 = map.f[i2] - map.f[i0];
        let fgrad = [
            g1[0] * d1 + g2[0] * d2,
            g1[1] * d1 + g2[1] * d2,
            g1[2] * d1 + g2[2] * d2,
        ];
        let gf = geom::dot(fgrad, fgrad);
        let fbar = (map.f[i0] + map.f[i1] + map.f[i2]) / 3.0;
        let psi = warp.value(fbar);
        let dpsi = warp.derivative(fbar);
        let g_sum = gv + gf;
        let e = g_sum * psi;
        // d/de of (1/2)((1+e)^alpha - 1) is (alpha/2)(1+e)^(alpha-1)
        let coeff = if alpha == 1.0 {
            1.0
        } else {
            ((alpha - 1.0) * e.ln_1p()).exp() * alpha
        };
        FaceGradContrib {
            coeff,
            psi,
            dpsi,
            g_sum,
            rows,
            fgrad,
        }
    });

    let n = m.n_vertices();
    let mut grad_v = vec![[0.0; 3]; n];
    let mut grad_f = vec![0.0; n];
    let areas = m.face_area();
    for (face, c) in contribs.iter().enumerate() {
        let [i0, i1, i2] = m.faces()[face];
        let [g1, g2] = *m.shape_gradients(face);
        let g0 = [-(g1[0] + g2[0]), -(g1[1] + g2[1]), -(g1[2] + g2[2])];
        let a = areas[face];
        let cv = c.coeff * c.psi * a;
        for (slot, &idx) in [i0, i1, i2].iter().enumerate() {
            let gs = [g0, g1, g2][slot];
            for k in 0..3 {
                grad_v[idx][k] += cv * geom::dot(c.rows[k], gs);
            }
            grad_f[idx] +=
                c.coeff * a * (c.psi * geom::dot(c.fgrad, gs) + c.dpsi * c.g_sum / 6.0);
        }
    }

    // project v-gradient to the tangent space and accumulate norms
    let dual = m.vertex_dual_area();
    let mut weighted = 0.0;
    let mut l2_sq = 0.0;
    for i in 0..n {
        let vdotg = geom::dot(map.v[i], grad_v[i]);
        for k in 0..3 {
            grad_v[i][k] -= vdotg * map.v[i][k];
        }
        let sq = geom::dot(grad_v[i], grad_v[i]) + grad_f[i] * grad_f[i];
        weighted += dual[i] * sq;
        l2_sq += sq;
    }
    Ok(MapGradient {
        v: grad_v,
        f: grad_f,
        weighted_norm: weighted.sqrt(),
        l2_sq,
    })
}

/// Weak-form residuals of the reduced Euler-Lagrange system, assembled with
/// the same elements as the energy.
#[derive(Debug, Clone)]
pub struct ElResidual {
    pub residual_v: Vec<Vec3>,
    pub residual_f: Vec<f64>,
    /// Dual-area-weighted l2 norms sqrt(sum_i a_i |R_i|^2).
    pub norm_v: f64,
    pub norm_f: f64,
}

pub fn el_residual(map: &DiscreteMap, warp: &WarpFunction) -> Result<ElResidual> {
    map.validate(warp)?;
    let m = &map.mesh;
    let contribs: Vec<FaceGradContrib> = map_indexed(m.n_faces(), |face| {
        let [i0, i1, i2] = m.faces()[face];
        let [g1, g2] = *m.shape_gradients(face);
        let mut rows = [[0.0; 3]; 3];
        let mut gv = 0.0;
        for k in 0..3 {
            let d1 = map.v[i1][k] - map.v[i0][k];
            let d2 = map.v[i2][k] - map.v[i0][k];
            rows[k] = [
                g1[0] * d1 + g2[0] * d2,
                g1[1] * d1 + g2[1] * d2,
                g1[2] * d1 + g2[2] * d2,
            ];
            gv += geom::dot(rows[k], rows[k]);
        }
        let d1 = map.f[i1] - map.f[i0];
        let d2 = map.f[i2] - map.f[i0];
        let fgrad = [
            g1[0] * d1 + g2[0] * d2,
            g1[1] * d1 + g2[1] * d2,
            g1[2] * d1 + g2[2] * d2,
        ];
        let fbar = (map.f[i0] + map.f[i1] + map.f[i2]) / 3.0;
        let psi = warp.value(fbar);
        let dpsi = warp.derivative(fbar);
        FaceGradContrib {
            coeff: gv, // |grad v|^2 reused by the multiplier term
            psi,
            dpsi,
            g_sum: gv + geom::dot(fgrad, fgrad),
            rows,
            fgrad,
        }
    });

    let n = m.n_vertices();
    let mut res_v = vec![[0.0; 3]; n];
    let mut res_f = vec![0.0; n];
    let areas = m.face_area();
    for (face, c) in contribs.iter().enumerate() {
        let [i0, i1, i2] = m.faces()[face];
        let [g1, g2] = *m.shape_gradients(face);
        let g0 = [-(g1[0] + g2[0]), -(g1[1] + g2[1]), -(g1[2] + g2[2])];
        let a = areas[face];
        for (slot, &idx) in [i0, i1, i2].iter().enumerate() {
            let gs = [g0, g1, g2][slot];
            // stiffness terms int psi grad . grad(hat)
            for k in 0..3 {
                res_v[idx][k] += a * c.psi * geom::dot(c.rows[k], gs);
            }
            res_f[idx] += a * c.psi * geom::dot(c.fgrad, gs);
            // lumped zero-order terms: psi |grad v|^2 v and (1/2) G psi'(fbar)
            let third = a / 3.0;
            for k in 0..3 {
                res_v[idx][k] += third * c.psi * c.coeff * map.v[idx][k];
            }
            res_f[idx] += third * 0.5 * c.g_sum * c.dpsi;
        }
    }

    let dual = m.vertex_dual_area();
    let mut nv = 0.0;
    let mut nf = 0.0;
    for i in 0..n {
        nv += dual[i] * geom::dot(res_v[i], res_v[i]);
        nf += dual[i] * res_f[i] * res_f[i];
    }
    Ok(ElResidual {
        residual_v: res_v,
        residual_f: res_f,
        norm_v: nv.sqrt(),
        norm_f: nf.sqrt(),
    })
}
