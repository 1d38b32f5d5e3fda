//! Small 3-vector and sphere-chart helpers shared across the crate.

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

#[inline]
pub fn neg(a: Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

/// Geodesic distance on the unit sphere.
#[inline]
pub fn geodesic_dist(a: Vec3, b: Vec3) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

#[inline]
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    dot(a, cross(b, c))
}

/// Signed solid angle of the spherical triangle (a, b, c), via Van Oosterom-Strackee.
/// Positive when (a, b, c) is counterclockwise seen from outside.
pub fn spherical_triangle_signed_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = det3(a, b, c);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2 at both ends.
#[inline]
pub fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (x * 6.0 - 15.0) + 10.0)
}

/// Derivative of [`smootherstep`] (zero outside (0, 1)).
#[inline]
pub fn smootherstep_deriv(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (x - 1.0) * (x - 1.0)
}

/// Stereographic chart of the unit sphere centered at `center`.
///
/// `center` maps to the origin and its antipode to infinity; the chart radius
/// of a point at geodesic distance d from the center is tan(d/2).
#[derive(Debug, Clone)]
pub struct Chart {
    pub center: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl Chart {
    pub fn new(center: Vec3) -> Self {
        let center = normalize(center);
        let seed = if center[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = normalize(sub(seed, scale(center, dot(seed, center))));
        let e2 = cross(center, e1);
        Chart { center, e1, e2 }
    }

    /// Chart coordinates of a sphere point; `None` at the antipode.
    pub fn to_plane(&self, p: Vec3) -> Option<[f64; 2]> {
        let w = 1.0 + dot(p, self.center);
        if w <= 1e-14 {
            return None;
        }
        Some([dot(p, self.e1) / w, dot(p, self.e2) / w])
    }

    /// Inverse chart map.
    pub fn from_plane(&self, z: [f64; 2]) -> Vec3 {
        let q = z[0] * z[0] + z[1] * z[1];
        let s = 1.0 / (1.0 + q);
        let p = add(
            add(scale(self.e1, 2.0 * z[0] * s), scale(self.e2, 2.0 * z[1] * s)),
            scale(self.center, (1.0 - q) * s),
        );
        normalize(p)
    }

    /// Chart radius |z| of a point, infinite at the antipode.
    pub fn radius(&self, p: Vec3) -> f64 {
        match self.to_plane(p) {
            Some(z) => (z[0] * z[0] + z[1] * z[1]).sqrt(),
            None => f64::INFINITY,
        }
    }
}

/// Complex multiplication for chart coordinates.
#[inline]
pub fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

/// z^d in polar form; `None` encodes the point at infinity.
pub fn cpow(z: Option<[f64; 2]>, d: i32) -> Option<[f64; 2]> {
    if d == 0 {
        return Some([1.0, 0.0]);
    }
    match z {
        None => {
            if d > 0 {
                None
            } else {
                Some([0.0, 0.0])
            }
        }
        Some(z) => {
            let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
            if rho == 0.0 {
                return if d > 0 { Some([0.0, 0.0]) } else { None };
            }
            let theta = z[1].atan2(z[0]);
            let r = rho.powi(d);
            if !r.is_finite() {
                return None;
            }
            let a = theta * d as f64;
            Some([r * a.cos(), r * a.sin()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_roundtrip() {
        let c = Chart::new([0.3, -0.5, 0.81]);
        let p = normalize([0.2, 0.9, -0.1]);
        let z = c.to_plane(p).unwrap();
        let q = c.from_plane(z);
        assert!(geodesic_dist(p, q) < 1e-12);
        // center maps to the origin
        let z0 = c.to_plane(c.center).unwrap();
        assert!(z0[0].abs() < 1e-15 && z0[1].abs() < 1e-15);
    }

    #[test]
    fn chart_radius_is_tan_half_distance() {
        let c = Chart::new([0.0, 0.0, 1.0]);
        for &d in &[0.1f64, 0.5, 1.0, 2.0, 3.0] {
            let p = [d.sin(), 0.0, d.cos()];
            let rho = c.radius(p);
            assert!((rho - (d / 2.0).tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn octant_solid_angle() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let c = [0.0, 0.0, 1.0];
        let area = spherical_triangle_signed_area(a, b, c);
        assert!((area - std::f64::consts::PI / 2.0).abs() < 1e-12);
        let flipped = spherical_triangle_signed_area(b, a, c);
        assert!((flipped + std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cpow_poles() {
        assert_eq!(cpow(None, 2), None);
        assert_eq!(cpow(None, -1), Some([0.0, 0.0]));
        assert_eq!(cpow(Some([0.0, 0.0]), -2), None);
        assert_eq!(cpow(Some([2.0, 0.0]), 0), Some([1.0, 0.0]));
    }
}
