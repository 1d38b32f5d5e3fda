//! High-precision study of the oscillatory warp's critical points: roots t_k
//! of tan(1/t) = t/2, the energies 4 pi psi(t_k), and the accumulation of the
//! harmonic-sphere energy set at 4 pi.
//!
//! Roots are found by bisection plus safeguarded Newton in arbitrary
//! precision; the gap |4 pi psi(t_k) - 4 pi| = 4 pi e^{-beta/t_k^2}|sin(1/t_k)|
//! is computed directly from the product form, which has no cancellation.

use crate::energy::{el_residual, DiscreteMap};
use crate::error::{Error, Result};
use crate::mesh::build_icosphere;
use crate::warp::make_spectrum_warp;
use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use serde::Serialize;
use std::sync::Arc;

const RM: RoundingMode = RoundingMode::ToEven;
pub const MAX_K: usize = 50;
pub const MIN_BITS: usize = 64;

/// Arbitrary-precision context: precision plus a shared constants cache.
pub struct BigCtx {
    pub p: usize,
    cc: Consts,
}

impl BigCtx {
    pub fn new(precision_bits: usize) -> Self {
        BigCtx {
            p: precision_bits,
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn recip(&self, a: &BigFloat) -> BigFloat {
        self.from_f64(1.0).div(a, self.p, RM)
    }

    pub fn tan(&mut self, a: &BigFloat) -> BigFloat {
        a.tan(self.p, RM, &mut self.cc)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, RM, &mut self.cc)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }

    pub fn abs(&self, a: &BigFloat) -> BigFloat {
        if a.sign() == Some(Sign::Neg) {
            a.neg()
        } else {
            a.clone()
        }
    }

    /// Three-way comparison; both operands are finite by construction.
    pub fn cmp(&self, a: &BigFloat, b: &BigFloat) -> i128 {
        a.cmp(b).expect("finite comparison")
    }
}

/// Round-trip a BigFloat to f64 through its full decimal form.
pub fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

/// Bits needed so e^{-beta/t^2} keeps >= 64 significant bits.
pub fn required_bits(t: f64, beta: f64) -> usize {
    ((beta / (t * t)) / std::f64::consts::LN_2).ceil() as usize + 64
}

/// g(x) = tan x - 1/(2x); roots with x = 1/t in (k pi, k pi + pi/2) are the
/// critical points of the oscillatory warp.
fn g_eval(ctx: &mut BigCtx, x: &BigFloat) -> BigFloat {
    let tanx = ctx.tan(x);
    let two_x = ctx.add(x, x);
    let inv = ctx.recip(&two_x);
    ctx.sub(&tanx, &inv)
}

fn g_deriv(ctx: &mut BigCtx, x: &BigFloat) -> BigFloat {
    // 1 + tan^2 x + 1/(2 x^2)
    let tanx = ctx.tan(x);
    let t2 = ctx.mul(&tanx, &tanx);
    let x2 = ctx.mul(x, x);
    let two_x2 = ctx.add(&x2, &x2);
    let inv = ctx.recip(&two_x2);
    let one = ctx.from_f64(1.0);
    ctx.add(&ctx.add(&one, &t2), &inv)
}

/// Roots t_k of tan(1/t) = t/2 for k = 1..k_max, with 1/t_k in
/// (k pi, k pi + pi/2), via bisection plus safeguarded Newton.
pub fn critical_points(k_max: usize, precision_bits: usize) -> Result<Vec<BigFloat>> {
    if k_max == 0 || k_max > MAX_K {
        return Err(Error::Precondition(format!(
            "k_max must be in 1..={MAX_K}, got {k_max}"
        )));
    }
    if precision_bits < MIN_BITS {
        return Err(Error::InsufficientPrecision {
            required: MIN_BITS,
            got: precision_bits,
            t: f64::NAN,
        });
    }
    let mut ctx = BigCtx::new(precision_bits);
    let pi = ctx.pi();
    let mut roots = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let kf = ctx.from_f64(k as f64);
        let kpi = ctx.mul(&kf, &pi);
        // bracket: g < 0 just above k pi, g > 0 close to k pi + pi/2
        let offset_lo = {
            let four_kpi = ctx.mul(&ctx.from_f64(4.0), &kpi);
            ctx.recip(&four_kpi)
        };
        let mut lo = ctx.add(&kpi, &offset_lo);
        let mut hi = ctx.add(&kpi, &ctx.from_f64(1.55));
        let g_lo = g_eval(&mut ctx, &lo);
        let g_hi = g_eval(&mut ctx, &hi);
        if !(g_lo.sign() == Some(Sign::Neg) && g_hi.sign() == Some(Sign::Pos)) {
            return Err(Error::BracketFailure { k });
        }
        let bracket = (lo.clone(), hi.clone());
        // bisection to seed Newton
        let half = ctx.from_f64(0.5);
        for _ in 0..80 {
            let mid = ctx.mul(&ctx.add(&lo, &hi), &half);
            let gm = g_eval(&mut ctx, &mid);
            if gm.sign() == Some(Sign::Neg) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish, safeguarded against the verified bracket; the
        // iterate with the smallest |g| wins (the end game wobbles within
        // an ulp of the root)
        let ulp_tol = BigFloat::from_f64(2.0_f64.powi(-(precision_bits as i32) + 4), precision_bits);
        let mut x = ctx.mul(&ctx.add(&lo, &hi), &half);
        let mut best = x.clone();
        let mut best_resid = ctx.abs(&g_eval(&mut ctx, &x));
        for _ in 0..16 {
            let gx = g_eval(&mut ctx, &x);
            let dgx = g_deriv(&mut ctx, &x);
            let step = ctx.div(&gx, &dgx);
            let mut cand = ctx.sub(&x, &step);
            if !(ctx.cmp(&cand, &bracket.0) > 0 && ctx.cmp(&cand, &bracket.1) < 0) {
                cand = ctx.mul(&ctx.add(&lo, &hi), &half);
            }
            let resid = ctx.abs(&g_eval(&mut ctx, &cand));
            if ctx.cmp(&resid, &best_resid) < 0 {
                best = cand.clone();
                best_resid = resid;
            }
            let delta = ctx.abs(&ctx.sub(&cand, &x));
            let tol = ctx.abs(&ctx.mul(&cand, &ulp_tol));
            x = cand;
            if ctx.cmp(&delta, &tol) <= 0 {
                break;
            }
        }
        roots.push(ctx.recip(&best));
    }
    Ok(roots)
}

/// f64 projections of the roots.
pub fn critical_points_f64(k_max: usize, precision_bits: usize) -> Result<Vec<f64>> {
    Ok(critical_points(k_max, precision_bits)?.iter().map(to_f64).collect())
}

/// |tan(1/t) - t/2| at the working precision.
pub fn root_residual(ctx: &mut BigCtx, t: &BigFloat) -> BigFloat {
    let inv = ctx.recip(t);
    let tan = ctx.tan(&inv);
    let half_t = ctx.mul(t, &ctx.from_f64(0.5));
    ctx.abs(&ctx.sub(&tan, &half_t))
}

/// psi(t_k), 4 pi psi(t_k), and the cancellation-free gap 4 pi |psi - 1|.
pub struct RootEnergy {
    pub psi: BigFloat,
    pub energy: BigFloat,
    pub gap: BigFloat,
    /// e^{-beta/t^2} sin(1/t), the signed deviation of psi from 1.
    pub term: BigFloat,
}

pub fn energy_of_root(t: &BigFloat, beta: f64, precision_bits: usize) -> Result<RootEnergy> {
    let t_f64 = to_f64(t);
    let required = required_bits(t_f64, beta);
    if precision_bits < required {
        return Err(Error::InsufficientPrecision {
            required,
            got: precision_bits,
            t: t_f64,
        });
    }
    let mut ctx = BigCtx::new(precision_bits);
    let t2 = ctx.mul(t, t);
    let betab = ctx.from_f64(beta);
    let expo = ctx.div(&betab, &t2).neg();
    let decay = ctx.exp(&expo);
    let inv = ctx.recip(t);
    let sin = ctx.sin(&inv);
    let term = ctx.mul(&decay, &sin);
    let one = ctx.from_f64(1.0);
    let psi = ctx.add(&one, &term);
    let pi = ctx.pi();
    let four_pi = ctx.mul(&ctx.from_f64(4.0), &pi);
    let energy = ctx.mul(&four_pi, &psi);
    let gap = ctx.mul(&four_pi, &ctx.abs(&term));
    Ok(RootEnergy {
        psi,
        energy,
        gap,
        term,
    })
}

/// One row of the spectrum table, with full-precision decimal strings.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub k: usize,
    pub t: String,
    pub residual: String,
    pub psi: String,
    pub energy: String,
    pub gap: String,
    pub t_f64: f64,
    pub gap_f64: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub beta: f64,
    pub precision_bits: usize,
    pub rows: Vec<SpectrumRow>,
    /// Verified at scale k_max: gaps strictly positive and strictly
    /// decreasing, so 4 pi is approached but never attained.
    pub accumulation_verified: bool,
}

impl SpectrumTable {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,t,residual,psi,energy,gap")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{},{}", r.k, r.t, r.residual, r.psi, r.energy, r.gap)?;
        }
        Ok(())
    }

    /// Fixed-width console rendering (f64 digits; full precision lives in the CSV).
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "spectrum table: beta = {}, {} bits\n",
            self.beta, self.precision_bits
        ));
        s.push_str("  k            t_k        |4 pi psi - 4 pi|\n");
        for r in &self.rows {
            s.push_str(&format!("{:>3}  {:>16.12}  {:>12.5e}\n", r.k, r.t_f64, r.gap_f64));
        }
        s.push_str(&format!(
            "accumulation at 4 pi verified at k_max = {}: {}\n",
            self.rows.len(),
            self.accumulation_verified
        ));
        s
    }
}

/// Assemble the spectrum table and hard-check its invariants: residuals below
/// 10^(-0.2 * bits), gaps strictly positive and strictly decreasing.
pub fn accumulation_report(k_max: usize, beta: f64, precision_bits: usize) -> Result<SpectrumTable> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("beta must be > 0, got {beta}")));
    }
    let roots = critical_points(k_max, precision_bits)?;
    let mut ctx = BigCtx::new(precision_bits);
    // residual threshold 10^(-0.2 * bits) = exp(-0.2 * bits * ln 10)
    let ln10 = ctx.ln(&ctx.from_f64(10.0));
    let expo = ctx.mul(&ctx.from_f64(-(precision_bits as f64) * 0.2), &ln10);
    let threshold = ctx.exp(&expo);

    let mut rows = Vec::with_capacity(k_max);
    let mut prev_t: Option<BigFloat> = None;
    let mut prev_gap: Option<BigFloat> = None;
    for (i, t) in roots.iter().enumerate() {
        let k = i + 1;
        let residual = root_residual(&mut ctx, t);
        if ctx.cmp(&residual, &threshold) >= 0 {
            return Err(Error::TheoremCheck(format!(
                "residual at k = {k} is {} >= 10^(-0.2 * {precision_bits})",
                residual
            )));
        }
        let re = energy_of_root(t, beta, precision_bits)?;
        if re.term.is_zero() || re.gap.sign() != Some(Sign::Pos) || re.gap.is_zero() {
            return Err(Error::TheoremCheck(format!(
                "gap at k = {k} is not strictly positive"
            )));
        }
        if let Some(pt) = &prev_t {
            if ctx.cmp(t, pt) >= 0 {
                return Err(Error::TheoremCheck(format!("t_{k} is not decreasing")));
            }
        }
        if let Some(pg) = &prev_gap {
            if ctx.cmp(&re.gap, pg) >= 0 {
                return Err(Error::TheoremCheck(format!(
                    "gap at k = {k} is not strictly decreasing"
                )));
            }
        }
        prev_t = Some(t.clone());
        prev_gap = Some(re.gap.clone());
        rows.push(SpectrumRow {
            k,
            t: t.to_string(),
            residual: residual.to_string(),
            psi: re.psi.to_string(),
            energy: re.energy.to_string(),
            gap: re.gap.to_string(),
            t_f64: to_f64(t),
            gap_f64: to_f64(&re.gap),
        });
    }
    Ok(SpectrumTable {
        beta,
        precision_bits,
        rows,
        accumulation_verified: true,
    })
}

/// Mesh-level harmonicity check at a root: the f-equation residual of
/// (identity, f = t_k) must vanish under refinement, and must be far smaller
/// than at a non-critical constant.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicityReport {
    pub t: f64,
    pub beta: f64,
    pub levels: Vec<u32>,
    pub root_norms: Vec<f64>,
    /// root_norms[i+1] / root_norms[i]
    pub ratios: Vec<f64>,
    pub offroot_value: f64,
    pub offroot_norm: f64,
    /// offroot_norm / root norm at the finest level
    pub offroot_factor: f64,
}

pub fn verify_harmonic_root(t: f64, beta: f64, levels: &[u32]) -> Result<HarmonicityReport> {
    if levels.is_empty() {
        return Err(Error::Precondition("need at least one mesh level".into()));
    }
    let warp = make_spectrum_warp(beta)?;
    let mut root_norms = Vec::with_capacity(levels.len());
    let mut finest_offroot = 0.0;
    let offroot_value = t + 0.05;
    for &level in levels {
        let mesh = Arc::new(build_icosphere(level)?);
        let map = DiscreteMap::identity(mesh.clone(), t);
        let r = el_residual(&map, &warp)?;
        root_norms.push(r.norm_f);
        let off = DiscreteMap::identity(mesh, offroot_value);
        finest_offroot = el_residual(&off, &warp)?.norm_f;
    }
    let ratios = root_norms
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    let last = *root_norms.last().unwrap();
    Ok(HarmonicityReport {
        t,
        beta,
        levels: levels.to_vec(),
        root_norms,
        ratios,
        offroot_value,
        offroot_norm: finest_offroot,
        offroot_factor: if last == 0.0 {
            f64::INFINITY
        } else {
            finest_offroot / last
        },
    })
}
