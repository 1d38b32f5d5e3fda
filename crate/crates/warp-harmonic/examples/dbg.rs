use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

fn main() {
    let p = 256usize;
    let mut cc = Consts::new().unwrap();
    let pi = cc.pi(p, RM);
    let from = |v: f64| BigFloat::from_f64(v, p);
    let g = |x: &BigFloat, cc: &mut Consts| -> BigFloat {
        let tanx = x.tan(p, RM, cc);
        let twox = x.add(x, p, RM);
        let inv = BigFloat::from_f64(1.0, p).div(&twox, p, RM);
        tanx.sub(&inv, p, RM)
    };
    let k = 1usize;
    let kf = from(k as f64);
    let kpi = kf.mul(&pi, p, RM);
    let four_kpi = from(4.0).mul(&kpi, p, RM);
    let offset_lo = BigFloat::from_f64(1.0, p).div(&four_kpi, p, RM);
    let mut lo = kpi.add(&offset_lo, p, RM);
    let mut hi = kpi.add(&from(1.55), p, RM);
    println!("signs: {:?} {:?}", g(&lo, &mut cc).sign(), g(&hi, &mut cc).sign());
    let half = from(0.5);
    for _ in 0..80 {
        let mid = lo.add(&hi, p, RM).mul(&half, p, RM);
        if g(&mid, &mut cc).sign() == Some(Sign::Neg) { lo = mid; } else { hi = mid; }
    }
    let width = hi.sub(&lo, p, RM);
    println!("bracket width after bisection: {}", fmt(&width));
    let mut x = lo.add(&hi, p, RM).mul(&half, p, RM);
    for it in 0..10 {
        let gx = g(&x, &mut cc);
        let dgx = {
            let t = x.tan(p, RM, &mut cc);
            let t2 = t.mul(&t, p, RM);
            let x2 = x.mul(&x, p, RM);
            let tx2 = x2.add(&x2, p, RM);
            let inv = BigFloat::from_f64(1.0, p).div(&tx2, p, RM);
            BigFloat::from_f64(1.0, p).add(&t2, p, RM).add(&inv, p, RM)
        };
        let step = gx.div(&dgx, p, RM);
        let cand = x.sub(&step, p, RM);
        let inside = cand.cmp(&lo).unwrap() > 0 && cand.cmp(&hi).unwrap() < 0;
        let next = if inside { cand } else { lo.add(&hi, p, RM).mul(&half, p, RM) };
        let gn = g(&next, &mut cc);
        if gn.sign() == Some(Sign::Neg) { lo = next.clone(); } else { hi = next.clone(); }
        let delta = next.sub(&x, p, RM).abs();
        let tol = next.mul(&BigFloat::from_f64(2.0_f64.powi(-(p as i32) + 4), p), p, RM).abs();
        println!("it {it}: inside={inside} delta={} tol={} resid={}", fmt(&delta), fmt(&tol), fmt(&gn));
        x = next;
        if delta.cmp(&tol).unwrap() <= 0 { println!("break"); break; }
    }
}

fn fmt(b: &BigFloat) -> String {
    let s = b.to_string();
    let head: String = s.chars().take(7).collect();
    let tail: String = s.chars().rev().take(6).collect::<String>().chars().rev().collect();
    format!("{head}..{tail}")
}
