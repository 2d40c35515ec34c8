//! Rotation numbers of circle maps and rational plateaus (Arnold tongues).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::FoliationMap;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RotationNumber {
    /// In `[0, 1)`.
    pub rho: f64,
    /// Limit of `(lift^m(theta0) - theta0) / m` without reduction.
    pub unwrapped: f64,
    pub error: f64,
    pub converged: bool,
}

/// Fails at the first grid point where the lift does not increase.
pub fn check_monotone(lift: impl Fn(f64) -> f64, samples: usize) -> Result<()> {
    let mut last = lift(0.0);
    for i in 1..=samples {
        let theta = i as f64 / samples as f64;
        let v = lift(theta);
        if !(v > last) {
            return Err(Error::NonMonotoneLift { theta });
        }
        last = v;
    }
    Ok(())
}

/// Weighted Birkhoff averages of the increments `x_{k+1} - x_k` with the bump weight
/// `exp(-1/(t(1-t)))`; returns the averages over the first half and the full orbit.
fn weighted_average(lift: &impl Fn(f64) -> f64, theta0: f64, n: usize) -> (f64, f64) {
    let bump = |k: usize, len: usize| {
        let t = (k as f64 + 0.5) / len as f64;
        (-1.0 / (t * (1.0 - t))).exp()
    };
    let half = n / 2;
    let (mut s_half, mut w_half, mut s_full, mut w_full) = (0.0, 0.0, 0.0, 0.0);
    let mut x = theta0;
    for k in 0..n {
        let next = lift(x);
        let step = next - x;
        if k < half {
            let w = bump(k, half);
            s_half += w * step;
            w_half += w;
        }
        let w = bump(k, n);
        s_full += w * step;
        w_full += w;
        x = next;
    }
    (s_half / w_half, s_full / w_full)
}

/// Rotation number of a lift of a circle homeomorphism.
pub fn rotation_number(lift: impl Fn(f64) -> f64, theta0: f64, iterations: usize, tol: f64) -> Result<RotationNumber> {
    check_monotone(&lift, 1024)?;
    let n = iterations.max(64);
    let (half, full) = weighted_average(&lift, theta0, n);
    let error = (full - half).abs();
    Ok(RotationNumber { rho: full.rem_euclid(1.0), unwrapped: full, error, converged: error <= tol })
}

/// Arnold lift `theta + s + t sin 2 pi theta`.
pub fn arnold_lift(s: f64, t: f64) -> impl Fn(f64) -> f64 {
    move |x| x + s + t * (TAU * x).sin()
}

/// `(min, max)` of `lift^q(theta) - theta - p` over one period.
pub fn displacement_range(lift: &impl Fn(f64) -> f64, p: i64, q: u64) -> (f64, f64) {
    let disp = |x: f64| {
        let mut y = x;
        for _ in 0..q {
            y = lift(y);
        }
        y - x - p as f64
    };
    let n = 128 * q as usize;
    let vals: Vec<f64> = (0..n).map(|i| disp(i as f64 / n as f64)).collect();
    let refine = |sign: f64| {
        let (k, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if sign * v > best.1 { (i, sign * v) } else { best });
        // golden-section search for the extremum around the best sample
        let h = 1.0 / n as f64;
        let (mut a, mut b) = (k as f64 * h - h, k as f64 * h + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (sign * disp(c), sign * disp(d));
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = sign * disp(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = sign * disp(d);
            }
        }
        sign * fc.max(fd).max(sign * vals[k])
    };
    (refine(-1.0), refine(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Below,
    Locked,
    Above,
}

fn side(range: (f64, f64)) -> Side {
    if range.1 < 0.0 {
        Side::Below
    } else if range.0 > 0.0 {
        Side::Above
    } else {
        Side::Locked
    }
}

/// Interval of parameters on which the rotation number equals `p/q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub p: i64,
    pub q: u64,
    /// Fixed second parameter (`t` for the Arnold slice).
    pub t: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    /// `hi - lo`, reported as 0 below the bisection resolution.
    pub width: f64,
    /// The plateau reaches an end of the scanned range.
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub q_max: u64,
    pub iterations: usize,
    /// Parameter resolution of plateau boundaries.
    pub resolution: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { q_max: 8, iterations: 1 << 13, resolution: 1e-12 }
    }
}

/// Scan of one parameter line.
#[derive(Clone, Debug, Serialize)]
pub struct LineScan {
    pub t: Option<f64>,
    pub params: Vec<f64>,
    pub rho: Vec<f64>,
    pub plateaus: Vec<Plateau>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rotation numbers along `params` for the lift family `family(param)` and plateau
/// boundaries for every `p/q`, `q <= q_max`, in the range met.
pub fn scan_line<L, G>(family: G, params: &[f64], t: Option<f64>, opts: &ScanOptions) -> Result<LineScan>
where
    L: Fn(f64) -> f64,
    G: Fn(f64) -> L + Sync,
{
    let rot: Vec<RotationNumber> = params
        .par_iter()
        .map(|&x| rotation_number(family(x), 0.0, opts.iterations, 1e-9))
        .collect::<Result<_>>()?;
    let unwrapped: Vec<f64> = rot.iter().map(|r| r.unwrapped).collect();
    let lo = unwrapped.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = unwrapped.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut fractions = Vec::new();
    for q in 1..=opts.q_max {
        let p_lo = (lo * q as f64 - 1e-9).ceil() as i64;
        let p_hi = (hi * q as f64 + 1e-9).floor() as i64;
        for p in p_lo..=p_hi {
            if gcd(p.unsigned_abs(), q) == 1 {
                fractions.push((p, q));
            }
        }
    }
    let plateaus: Vec<Vec<Plateau>> =
        fractions.par_iter().map(|&(p, q)| plateaus_for(&family, params, &unwrapped, p, q, t, opts)).collect();
    let mut plateaus: Vec<Plateau> = plateaus.into_iter().flatten().collect();
    plateaus.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.q.cmp(&b.q)));
    Ok(LineScan { t, params: params.to_vec(), rho: rot.iter().map(|r| r.rho).collect(), plateaus })
}

fn plateaus_for<L, G>(family: &G, params: &[f64], rho: &[f64], p: i64, q: u64, t: Option<f64>, opts: &ScanOptions) -> Vec<Plateau>
where
    L: Fn(f64) -> f64,
    G: Fn(f64) -> L,
{
    let target = p as f64 / q as f64;
    let range = |x: f64| displacement_range(&family(x), p, q);
    // classify by rotation number away from the target, exactly near it
    let sides: Vec<Side> = params
        .iter()
        .zip(rho)
        .map(|(&x, &r)| {
            if r < target - 1e-6 {
                Side::Below
            } else if r > target + 1e-6 {
                Side::Above
            } else {
                side(range(x))
            }
        })
        .collect();
    let root = |a: f64, b: f64, pick: fn((f64, f64)) -> f64| -> f64 {
        let (mut a, mut b) = (a, b);
        let fa = pick(range(a));
        for _ in 0..200 {
            if (b - a).abs() <= opts.resolution {
                break;
            }
            let mid = 0.5 * (a + b);
            if (pick(range(mid)) <= 0.0) == (fa <= 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let edge = |a: f64, b: f64| -> f64 {
        // a locked, b not: bisect on the locked predicate
        let (mut a, mut b) = (a, b);
        for _ in 0..200 {
            if (b - a).abs() <= opts.resolution {
                break;
            }
            let mid = 0.5 * (a + b);
            if side(range(mid)) == Side::Locked {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let make = |lo: f64, hi: f64, truncated: bool| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let w = hi - lo;
        Plateau { p, q, t, lo, hi, width: if w <= 4.0 * opts.resolution { 0.0 } else { w }, truncated }
    };
    let mut out = Vec::new();
    let mut start: Option<(f64, bool)> = None;
    if sides[0] == Side::Locked {
        start = Some((params[0], true));
    }
    for i in 1..params.len() {
        let (a, b) = (params[i - 1], params[i]);
        match (sides[i - 1], sides[i]) {
            (x, y) if x == y => {}
            (Side::Locked, _) => {
                let end = edge(a, b);
                let (s, trunc) = start.take().unwrap_or((a, true));
                out.push(make(s, end, trunc));
            }
            (_, Side::Locked) => start = Some((edge(b, a), false)),
            _ => {
                // crossed a plateau narrower than the grid spacing
                let r_max = root(a, b, |r| r.1);
                let r_min = root(a, b, |r| r.0);
                out.push(make(r_max, r_min, false));
            }
        }
    }
    if let Some((s, _)) = start {
        out.push(make(s, params[params.len() - 1], true));
    }
    out
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    /// `theta + s + t sin 2 pi theta` over `(s, t)`.
    Arnold,
    /// Angular lifts of a foliation map on circles of radius `r`.
    Radius,
}

#[derive(Clone, Debug, Serialize)]
pub struct TongueScan {
    pub kind: ScanKind,
    pub lines: Vec<LineScan>,
}

impl TongueScan {
    pub fn plateaus(&self) -> impl Iterator<Item = &Plateau> {
        self.lines.iter().flat_map(|l| l.plateaus.iter())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.kind {
            ScanKind::Arnold => {
                out.push_str("s,t,rho\n");
                for line in &self.lines {
                    for (s, r) in line.params.iter().zip(&line.rho) {
                        out.push_str(&format!("{},{},{}\n", s, line.t.unwrap_or(0.0), r));
                    }
                }
            }
            ScanKind::Radius => {
                out.push_str("r,rho\n");
                for line in &self.lines {
                    for (x, r) in line.params.iter().zip(&line.rho) {
                        out.push_str(&format!("{x},{r}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn plateaus_csv(&self) -> String {
        let mut out = String::from("p,q,t,lo,hi,width,truncated\n");
        for p in self.plateaus() {
            let t = p.t.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{},{},{}\n", p.p, p.q, t, p.lo, p.hi, p.width, p.truncated));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        super::svg::tongue_svg(self)
    }
}

/// Tongues of the Arnold family on the grid `s_values x t_values`.
pub fn arnold_tongues(s_values: &[f64], t_values: &[f64], opts: &ScanOptions) -> Result<TongueScan> {
    let lines = t_values
        .iter()
        .map(|&t| scan_line(|s| arnold_lift(s, t), s_values, Some(t), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(TongueScan { kind: ScanKind::Arnold, lines })
}

/// Rotation numbers of `theta -> theta + omega + g(r e^{2 pi i theta})` over radii.
pub fn radius_tongues(map: &FoliationMap, radii: &[f64], opts: &ScanOptions) -> Result<TongueScan> {
    let omega = map.omega_f64();
    let family = |r: f64| move |x: f64| x + omega + map.angle_c64(num_complex::Complex64::from_polar(r, TAU * x));
    let line = scan_line(family, radii, None, opts)?;
    Ok(TongueScan { kind: ScanKind::Radius, lines: vec![line] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_rotation() {
        let r = rotation_number(arnold_lift(0.3, 0.0), 0.0, 1000, 1e-12).unwrap();
        assert!((r.rho - 0.3).abs() < 1e-13);
        let r = rotation_number(arnold_lift(1.25, 0.0), 0.0, 1000, 1e-12).unwrap();
        assert!((r.rho - 0.25).abs() < 1e-13);
    }

    #[test]
    fn non_monotone_rejected() {
        assert!(matches!(
            rotation_number(arnold_lift(0.3, 0.5), 0.0, 100, 1e-9),
            Err(Error::NonMonotoneLift { .. })
        ));
    }

    #[test]
    fn displacement_of_arnold() {
        let (lo, hi) = displacement_range(&arnold_lift(0.01, 0.05), 0, 1);
        assert!((lo - (0.01 - 0.05)).abs() < 1e-14);
        assert!((hi - (0.01 + 0.05)).abs() < 1e-14);
    }

    #[test]
    fn zero_one_tongue() {
        let s = linspace(-0.2, 0.2, 41);
        let opts = ScanOptions { q_max: 2, iterations: 2048, ..ScanOptions::default() };
        let scan = arnold_tongues(&s, &[0.05], &opts).unwrap();
        let p = scan.plateaus().find(|p| p.p == 0 && p.q == 1).unwrap();
        assert!((p.lo + 0.05).abs() < 1e-9 && (p.hi - 0.05).abs() < 1e-9, "{p:?}");
        let flat = arnold_tongues(&linspace(0.0, 1.0, 31), &[0.0], &ScanOptions { q_max: 4, ..opts }).unwrap();
        assert!(flat.plateaus().count() >= 5);
        assert!(flat.plateaus().all(|p| p.width == 0.0));
    }
}
