//! Warp profiles psi and the warped-product cylinder geometry.
//!
//! A warp function is a positive profile psi on an interval; the target
//! carries the metric psi(t) (ds^2 + dt^2) on S^2 x domain. The module also
//! holds the exact arithmetic behind the energy-quantization ledger:
//! 4*pi*psi(0) <= 16*pi*r^2, 12*pi*psi(0) < 48*pi*r^2 < pi*(pi-2r)^2 and
//! r < pi/(4*sqrt(3)+2).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

/// Largest admissible tube radius, pi / (4 sqrt(3) + 2).
pub fn tube_radius_max() -> f64 {
    PI / (4.0 * 3.0_f64.sqrt() + 2.0)
}

/// Smoothness order of the tube blend on (-log 2, log 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlendOrder {
    C2,
    C4,
}

impl std::str::FromStr for BlendOrder {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C2" => Ok(BlendOrder::C2),
            "C4" => Ok(BlendOrder::C4),
            other => Err(format!("unknown blend order '{other}' (expected C2 or C4)")),
        }
    }
}

type WarpFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WarpKind {
    Tube { r: f64, blend: BlendOrder },
    Spectrum { beta: f64 },
    Custom,
}

impl std::fmt::Debug for WarpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WarpKind::Tube { r, blend } => write!(f, "tube(r={r}, {blend:?})"),
            WarpKind::Spectrum { beta } => write!(f, "spectrum(beta={beta})"),
            WarpKind::Custom => write!(f, "custom"),
        }
    }
}

/// Serializable descriptor; enough to rebuild tube and spectrum warps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WarpDescriptor {
    Tube {
        r: f64,
        blend_order: String,
        domain: (f64, f64),
    },
    Spectrum {
        beta: f64,
        domain: (f64, f64),
    },
    Custom {
        domain: (f64, f64),
    },
}

/// A warp profile: positive value and derivative on an open interval.
#[derive(Clone)]
pub struct WarpFunction {
    kind: WarpKind,
    domain: (f64, f64),
    custom_value: Option<WarpFn>,
    custom_derivative: Option<WarpFn>,
}

impl std::fmt::Debug for WarpFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WarpFunction({:?} on {:?})", self.kind, self.domain)
    }
}

impl WarpFunction {
    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn psi0(&self) -> f64 {
        self.value(0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            WarpKind::Tube { r, blend } => tube_value(*r, *blend, t),
            WarpKind::Spectrum { beta } => spectrum_value(*beta, t),
            WarpKind::Custom => (self.custom_value.as_ref().expect("custom warp value"))(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            WarpKind::Tube { r, blend } => tube_derivative(*r, *blend, t),
            WarpKind::Spectrum { beta } => spectrum_derivative(*beta, t),
            WarpKind::Custom => {
                (self.custom_derivative.as_ref().expect("custom warp derivative"))(t)
            }
        }
    }

    /// User-supplied profile. The caller is responsible for positivity.
    pub fn custom(domain: (f64, f64), value: WarpFn, derivative: WarpFn) -> Self {
        WarpFunction {
            kind: WarpKind::Custom,
            domain,
            custom_value: Some(value),
            custom_derivative: Some(derivative),
        }
    }

    pub fn descriptor(&self) -> WarpDescriptor {
        match &self.kind {
            WarpKind::Tube { r, blend } => WarpDescriptor::Tube {
                r: *r,
                blend_order: format!("{blend:?}"),
                domain: self.domain,
            },
            WarpKind::Spectrum { beta } => WarpDescriptor::Spectrum {
                beta: *beta,
                domain: self.domain,
            },
            WarpKind::Custom => WarpDescriptor::Custom {
                domain: self.domain,
            },
        }
    }

    pub fn from_descriptor(d: &WarpDescriptor) -> Result<Self> {
        match d {
            WarpDescriptor::Tube { r, blend_order, .. } => {
                let blend: BlendOrder = blend_order
                    .parse()
                    .map_err(Error::Config)?;
                make_tube_warp(*r, blend)
            }
            WarpDescriptor::Spectrum { beta, .. } => make_spectrum_warp(*beta),
            WarpDescriptor::Custom { .. } => Err(Error::Config(
                "custom warps cannot be rebuilt from a descriptor".into(),
            )),
        }
    }
}

// --- tube warp -------------------------------------------------------------

// Even C^2 blend of |t| on [-L, L], L = log 2:
//   sigma(t) = 3L/8 + 3 t^2 / (4L) - t^4 / (8 L^3),
// matching value, first and second derivative of |t| at |t| = L, with
// sigma'(0) = 0 and sigma' > 0 on (0, L). The C4 variant is the analogous
// even degree-8 blend matching four derivatives.
fn tube_sigma(blend: BlendOrder, a: f64) -> f64 {
    let l = LN_2;
    if a >= l {
        return a;
    }
    let x = a / l;
    let x2 = x * x;
    match blend {
        BlendOrder::C2 => l * (0.375 + x2 * (0.75 - 0.125 * x2)),
        BlendOrder::C4 => {
            // 35L/128 + 35 t^2/(32 L) - 35 t^4/(64 L^3) + 7 t^6/(32 L^5) - 5 t^8/(128 L^7)
            l * (35.0 / 128.0
                + x2 * (35.0 / 32.0 + x2 * (-35.0 / 64.0 + x2 * (7.0 / 32.0 - x2 * 5.0 / 128.0))))
        }
    }
}

fn tube_sigma_deriv(blend: BlendOrder, a: f64) -> f64 {
    let l = LN_2;
    if a >= l {
        return 1.0;
    }
    let x = a / l;
    let x2 = x * x;
    match blend {
        BlendOrder::C2 => x * (1.5 - 0.5 * x2),
        BlendOrder::C4 => x * (35.0 / 16.0 + x2 * (-35.0 / 16.0 + x2 * (21.0 / 16.0 - x2 * 5.0 / 16.0))),
    }
}

fn tube_value(r: f64, blend: BlendOrder, t: f64) -> f64 {
    let a = t.abs();
    if a >= LN_2 {
        // exact exponential branch: e^{2|t| + 2 log r}
        (2.0 * a + 2.0 * r.ln()).exp()
    } else {
        r * r * (2.0 * tube_sigma(blend, a)).exp()
    }
}

fn tube_derivative(r: f64, blend: BlendOrder, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let a = t.abs();
    t.signum() * 2.0 * tube_sigma_deriv(blend, a) * tube_value(r, blend, t)
}

/// Tube warp psi(t) = e^{2|t| + 2 log r} outside (-log 2, log 2), blended to
/// an even profile with a single critical point at 0 inside.
pub fn make_tube_warp(r: f64, blend_order: BlendOrder) -> Result<WarpFunction> {
    let r_max = tube_radius_max();
    if !(r > 0.0 && r < r_max) {
        return Err(Error::InvalidWarpParameter {
            name: "r",
            value: r,
            constraint: format!("0 < r < pi/(4 sqrt(3) + 2) = {r_max:.6}"),
        });
    }
    let half = (PI / r).ln();
    let warp = WarpFunction {
        kind: WarpKind::Tube { r, blend: blend_order },
        domain: (-half, half),
        custom_value: None,
        custom_derivative: None,
    };
    // internal assertions: monotone blend and the ledger bound psi(0) < 4 r^2
    for i in 1..64 {
        let t = LN_2 * i as f64 / 64.0;
        assert!(
            warp.derivative(t) > 0.0 && warp.derivative(-t) < 0.0,
            "tube blend violates psi'*t > 0 at t = {t}"
        );
    }
    assert!(warp.psi0() < 4.0 * r * r, "tube blend violates psi(0) < 4 r^2");
    Ok(warp)
}

// --- spectrum warp ----------------------------------------------------------

// psi(t) = e^{-beta/t^2} sin(1/t) + 1 on |t| < 1/2 (removable value 1 at 0),
// frozen to the constant psi(+-1/2) beyond |t| = 1/2 with a C^2 blend over
// |t| in [0.45, 0.5]. Experiments only probe |t| well below 1/2.
const SPECTRUM_BLEND_LO: f64 = 0.45;
const SPECTRUM_BLEND_HI: f64 = 0.5;

fn spectrum_raw(beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    (-beta / (t * t)).exp() * (1.0 / t).sin() + 1.0
}

fn spectrum_raw_deriv(beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let e = (-beta / (t * t)).exp();
    if e == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / t;
    e * (2.0 * beta * inv * inv * inv * inv.sin() - inv * inv * inv.cos())
}

fn spectrum_value(beta: f64, t: f64) -> f64 {
    let a = t.abs();
    if a <= SPECTRUM_BLEND_LO {
        spectrum_raw(beta, t)
    } else {
        let frozen = spectrum_raw(beta, t.signum() * SPECTRUM_BLEND_HI);
        if a >= SPECTRUM_BLEND_HI {
            frozen
        } else {
            let w = crate::geom::smootherstep((a - SPECTRUM_BLEND_LO) / (SPECTRUM_BLEND_HI - SPECTRUM_BLEND_LO));
            (1.0 - w) * spectrum_raw(beta, t) + w * frozen
        }
    }
}

fn spectrum_derivative(beta: f64, t: f64) -> f64 {
    let a = t.abs();
    if a <= SPECTRUM_BLEND_LO {
        spectrum_raw_deriv(beta, t)
    } else if a >= SPECTRUM_BLEND_HI {
        0.0
    } else {
        let frozen = spectrum_raw(beta, t.signum() * SPECTRUM_BLEND_HI);
        let width = SPECTRUM_BLEND_HI - SPECTRUM_BLEND_LO;
        let x = (a - SPECTRUM_BLEND_LO) / width;
        let w = crate::geom::smootherstep(x);
        let dw = crate::geom::smootherstep_deriv(x) / width * t.signum();
        (1.0 - w) * spectrum_raw_deriv(beta, t) + dw * (frozen - spectrum_raw(beta, t))
    }
}

/// Spectrum warp on (-1, 1); beta = 1 reproduces the oscillatory profile
/// whose critical points satisfy tan(1/t) = t/2. Smaller beta makes the
/// accumulation of the energies 4 pi psi(t_k) at 4 pi visible in f64.
pub fn make_spectrum_warp(beta: f64) -> Result<WarpFunction> {
    if !(beta > 0.0) {
        return Err(Error::InvalidWarpParameter {
            name: "beta",
            value: beta,
            constraint: "beta > 0".into(),
        });
    }
    Ok(WarpFunction {
        kind: WarpKind::Spectrum { beta },
        domain: (-1.0, 1.0),
        custom_value: None,
        custom_derivative: None,
    })
}

// --- warped cylinder ---------------------------------------------------------

/// The target S^2 x domain with metric psi(t)(ds^2 + dt^2).
#[derive(Debug, Clone)]
pub struct WarpedCylinder {
    pub warp: WarpFunction,
}

impl WarpedCylinder {
    pub fn new(warp: WarpFunction) -> Self {
        WarpedCylinder { warp }
    }

    /// Energy density of a chart map (v, f): (|grad v|^2 + |grad f|^2) psi(f).
    pub fn chart_energy_density(&self, grad_v_sq: f64, grad_f_sq: f64, f: f64) -> f64 {
        (grad_v_sq + grad_f_sq) * self.warp.value(f)
    }

    pub fn describe(&self) -> String {
        let (lo, hi) = self.warp.domain();
        format!("psi(t)(ds^2 + dt^2) on S^2 x ({lo:.4}, {hi:.4}), {:?}", self.warp.kind())
    }
}

// --- ledger -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LedgerVerdicts {
    /// 4 pi psi(0) <= 16 pi r^2
    pub a: bool,
    /// 12 pi psi(0) < 48 pi r^2
    pub b: bool,
    /// 48 pi r^2 < pi (pi - 2r)^2
    pub c: bool,
    /// r < pi / (4 sqrt(3) + 2)
    pub d: bool,
}

/// Deterministic arithmetic report on the quantization inequality chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerReport {
    pub r: f64,
    pub psi0: f64,
    /// 4 pi psi(0)
    pub quantum: f64,
    /// 16 pi r^2
    pub tube_bound: f64,
    /// 48 pi r^2
    pub triple_tube_bound: f64,
    /// pi (pi - 2r)^2
    pub monotonicity_bound: f64,
    pub r_max: f64,
    pub verdicts: LedgerVerdicts,
    pub all_hold: bool,
}

/// Evaluate the inequality chain for a given radius and psi(0).
///
/// Verdicts are evaluated through the algebraically reduced forms
/// (psi0 <= 4 r^2, psi0 < 4 r^2, r < r_max) so boundary cases are exact;
/// the four raw bound values are reported alongside.
pub fn ledger(r: f64, psi0: f64) -> Result<LedgerReport> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("ledger needs r > 0, got {r}")));
    }
    if !(psi0 > 0.0) {
        return Err(Error::Precondition(format!("ledger needs psi0 > 0, got {psi0}")));
    }
    let r_max = tube_radius_max();
    let verdicts = LedgerVerdicts {
        a: psi0 <= 4.0 * r * r,
        b: psi0 < 4.0 * r * r,
        // 48 r^2 < (pi - 2r)^2 for r > 0 reduces to r (4 sqrt(3) + 2) < pi
        c: r < r_max,
        d: r < r_max,
    };
    let all_hold = verdicts.a && verdicts.b && verdicts.c && verdicts.d;
    Ok(LedgerReport {
        r,
        psi0,
        quantum: 4.0 * PI * psi0,
        tube_bound: 16.0 * PI * r * r,
        triple_tube_bound: 48.0 * PI * r * r,
        monotonicity_bound: PI * (PI - 2.0 * r) * (PI - 2.0 * r),
        r_max,
        verdicts,
        all_hold,
    })
}

/// The harmonic-sphere energy quanta 4 m pi psi(0), m = 1..m_max.
pub fn quantization_values(psi0: f64, m_max: usize) -> Result<Vec<f64>> {
    if !(psi0 > 0.0) {
        return Err(Error::Precondition(format!(
            "quantization_values needs psi0 > 0, got {psi0}"
        )));
    }
    if m_max < 1 {
        return Err(Error::Precondition("quantization_values needs m_max >= 1".into()));
    }
    Ok((1..=m_max).map(|m| 4.0 * PI * psi0 * m as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tube_matches_exponential_branch() {
        let r = 0.3;
        let w = make_tube_warp(r, BlendOrder::C2).unwrap();
        // psi(log 2) = 4 r^2, forced by the formula
        assert!((w.value(LN_2) - 4.0 * r * r).abs() < 1e-14);
        // deep in the exponential branch
        let t = 1.7;
        assert!((w.value(t) - (2.0 * t + 2.0 * r.ln()).exp()).abs() < 1e-15);
    }

    #[test]
    fn tube_center_value_from_quartic_blend() {
        // evaluating the quartic blend at t = 0 gives sigma(0) = 3 log2 / 8,
        // hence psi(0) = r^2 * 2^(3/4)
        let r = 0.3;
        let w = make_tube_warp(r, BlendOrder::C2).unwrap();
        let expected = r * r * 2.0_f64.powf(0.75);
        assert!((w.psi0() - expected).abs() < 1e-15, "psi0 = {}", w.psi0());
        assert!(w.psi0() < 4.0 * r * r);
        assert_eq!(w.derivative(0.0), 0.0);
    }

    #[test]
    fn tube_c4_center_value() {
        let r = 0.2;
        let w = make_tube_warp(r, BlendOrder::C4).unwrap();
        // sigma(0) = 35 log2 / 128 for the degree-8 blend
        let expected = r * r * 2.0_f64.powf(35.0 / 64.0);
        assert!((w.psi0() - expected).abs() < 1e-15);
        assert!(w.psi0() < 4.0 * r * r);
    }

    #[test]
    fn tube_seam_continuity() {
        for blend in [BlendOrder::C2, BlendOrder::C4] {
            let r = 0.25;
            let w = make_tube_warp(r, blend).unwrap();
            let eps = 1e-9;
            let below = w.value(LN_2 - eps);
            let above = w.value(LN_2 + eps);
            assert!((below - above).abs() < 1e-8 * above);
            let d_below = w.derivative(LN_2 - eps);
            let d_above = w.derivative(LN_2 + eps);
            assert!((d_below - d_above).abs() < 1e-7 * d_above.abs());
            // second derivative via central differences across the seam
            let h = 1e-4;
            let dd = |t: f64| (w.value(t + h) - 2.0 * w.value(t) + w.value(t - h)) / (h * h);
            assert!(
                (dd(LN_2 - 10.0 * h) - dd(LN_2 + 10.0 * h)).abs()
                    < 0.05 * dd(LN_2 + 10.0 * h).abs()
            );
        }
    }

    #[test]
    fn tube_even_symmetry_exact() {
        let w = make_tube_warp(0.31, BlendOrder::C2).unwrap();
        for i in 0..200 {
            let t = w.domain().1 * (i as f64 + 0.3) / 201.0;
            assert_eq!(w.value(t), w.value(-t));
            assert_eq!(w.derivative(t), -w.derivative(-t));
        }
    }

    #[test]
    fn tube_single_critical_point() {
        let w = make_tube_warp(0.12, BlendOrder::C4).unwrap();
        let (lo, hi) = w.domain();
        let mut sign_changes = 0;
        let mut prev = w.derivative(lo + 1e-6);
        for i in 1..4000 {
            let t = lo + 1e-6 + (hi - lo - 2e-6) * i as f64 / 4000.0;
            let d = w.derivative(t);
            if d != 0.0 {
                if prev != 0.0 && d.signum() != prev.signum() {
                    sign_changes += 1;
                    assert!(t.abs() < 2e-3, "psi' changed sign away from 0 at t = {t}");
                }
                prev = d;
            }
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn tube_rejects_bad_radius() {
        assert!(make_tube_warp(0.0, BlendOrder::C2).is_err());
        assert!(make_tube_warp(-0.2, BlendOrder::C2).is_err());
        assert!(make_tube_warp(tube_radius_max(), BlendOrder::C2).is_err());
        assert!(make_tube_warp(0.5, BlendOrder::C2).is_err());
    }

    #[test]
    fn spectrum_values() {
        let w = make_spectrum_warp(1.0).unwrap();
        // direct high-precision evaluation of the closed form at t = 1/2
        let expected = (-4.0_f64).exp() * 2.0_f64.sin() + 1.0;
        assert!((w.value(0.5) - expected).abs() < 1e-15);
        assert!((expected - 1.0166547).abs() < 1e-6);
        assert_eq!(w.value(0.0), 1.0);
        // parity: sin(1/t) is odd, so psi(-t) + psi(t) = 2 on the raw branch
        let t = 0.37;
        assert!((w.value(t) + w.value(-t) - 2.0).abs() < 1e-15);
        assert!((w.value(t) - w.value(-t)).abs() > 1e-8);
    }

    #[test]
    fn spectrum_frozen_tail() {
        let w = make_spectrum_warp(1.0).unwrap();
        let frozen = (-4.0_f64).exp() * 2.0_f64.sin() + 1.0;
        assert_eq!(w.value(0.7), frozen);
        assert_eq!(w.value(0.99), frozen);
        assert_eq!(w.derivative(0.8), 0.0);
        // C^2 blend: derivative matches a central difference inside the band
        let t = 0.47;
        let h = 1e-6;
        let fd = (w.value(t + h) - w.value(t - h)) / (2.0 * h);
        assert!((w.derivative(t) - fd).abs() < 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn spectrum_positive_on_dense_grid() {
        for &beta in &[1.0, 0.3, 0.05] {
            let w = make_spectrum_warp(beta).unwrap();
            for i in 0..10000 {
                let t = -1.0 + 2.0 * (i as f64 + 0.5) / 10000.0;
                assert!(w.value(t) > 0.0, "psi({t}) <= 0 at beta = {beta}");
            }
        }
        assert!(make_spectrum_warp(0.0).is_err());
        assert!(make_spectrum_warp(-1.0).is_err());
    }

    #[test]
    fn spectrum_underflow_near_zero() {
        let w = make_spectrum_warp(1.0).unwrap();
        assert_eq!(w.value(1e-3), 1.0);
        assert_eq!(w.derivative(1e-3), 0.0);
    }

    #[test]
    fn ledger_examples() {
        // r = 0.3 with the C2-blend psi0
        let w = make_tube_warp(0.3, BlendOrder::C2).unwrap();
        let rep = ledger(0.3, w.psi0()).unwrap();
        assert!(rep.all_hold);
        assert!((rep.tube_bound - 16.0 * PI * 0.09).abs() < 1e-12);
        assert!((rep.monotonicity_bound - PI * (PI - 0.6) * (PI - 0.6)).abs() < 1e-12);
        assert!((rep.r_max - 0.35187).abs() < 1e-4);

        // boundary case: strict inequalities fail exactly at r_max
        let rep = ledger(tube_radius_max(), 0.1).unwrap();
        assert!(!rep.verdicts.c && !rep.verdicts.d);

        // r = 0.4: 48 * 0.16 = 7.68 > (pi - 0.8)^2 ~ 5.484
        let rep = ledger(0.4, 0.45).unwrap();
        assert!(!rep.verdicts.c && !rep.verdicts.d);
        assert!(rep.triple_tube_bound > rep.monotonicity_bound);

        assert!(ledger(-1.0, 0.1).is_err());
        assert!(ledger(0.3, 0.0).is_err());
    }

    #[test]
    fn quantization_examples() {
        let q = quantization_values(1.0, 2).unwrap();
        assert!((q[0] - 4.0 * PI).abs() < 1e-14);
        assert!((q[1] - 8.0 * PI).abs() < 1e-14);
        let q = quantization_values(0.254558, 3).unwrap();
        assert!((q[0] - 3.1985).abs() < 1e-3);
        assert!((q[1] - 6.3970).abs() < 1e-3);
        assert!((q[2] - 9.5955).abs() < 1e-3);
        assert!(quantization_values(0.0, 1).is_err());
        assert!(quantization_values(1.0, 0).is_err());
    }

    #[test]
    fn warp_descriptor_roundtrip() {
        let w = make_tube_warp(0.28, BlendOrder::C4).unwrap();
        let d = w.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        let back: WarpDescriptor = serde_json::from_str(&json).unwrap();
        let w2 = WarpFunction::from_descriptor(&back).unwrap();
        assert_eq!(w.value(0.17), w2.value(0.17));
        assert_eq!(w.domain(), w2.domain());

        let s = make_spectrum_warp(0.4).unwrap();
        let s2 = WarpFunction::from_descriptor(&s.descriptor()).unwrap();
        assert_eq!(s.value(0.21), s2.value(0.21));
    }

    #[test]
    fn ledger_holds_across_radius_grid() {
        // for every admissible tube warp the full chain holds
        for i in 0..40 {
            let r = 0.05 + (0.30 - 1e-9) * i as f64 / 39.0;
            for blend in [BlendOrder::C2, BlendOrder::C4] {
                let w = make_tube_warp(r, blend).unwrap();
                let rep = ledger(r, w.psi0()).unwrap();
                assert!(rep.all_hold, "ledger failed at r = {r}, {blend:?}");
            }
        }
    }
}
