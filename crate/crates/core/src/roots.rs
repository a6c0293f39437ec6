//! Zero finding for characteristic functions: a real-axis scan with
//! safeguarded Newton refinement, argument-principle counting, and
//! rectangle subdivision for zeros off the real axis.
//!
//! Every parallel stage collects its results in input order, so the output
//! does not depend on the number of threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{order, Characteristic, Scaled};

#[derive(Clone, Debug)]
pub struct RootOptions {
    /// Scan points per nominal zero spacing `π/(γ + l)` in `ρ`.
    pub scan_density: usize,
    pub newton_max_iter: usize,
    /// Certify each zero by a winding count on a small box.
    pub certify: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { scan_density: 16, newton_max_iter: 50, certify: true }
    }
}

const MAX_ARG_STEP: f64 = PI / 3.0;

fn mantissa<C: Characteristic + ?Sized>(ch: &C, lambda: Complex64) -> Result<Complex64> {
    let m = ch.scaled(lambda).mant;
    if m.re.is_finite() && m.im.is_finite() {
        Ok(m)
    } else {
        Err(Error::Numeric(format!("characteristic function not finite at λ = {lambda}")))
    }
}

/// Winding number of `Δ` along the closed path `path(s)`, `s ∈ [0, 1]`,
/// sampled adaptively so that the argument moves less than π/3 per step.
pub fn winding<C, P>(ch: &C, path: P, initial: usize) -> Result<i64>
where
    C: Characteristic + ?Sized,
    P: Fn(f64) -> Complex64 + Sync,
{
    winding_seeded(ch, path, initial, &[])
}

/// [`winding`] with extra initial parameter values, used to pin samples
/// next to known zeros lying just outside the path.
pub fn winding_seeded<C, P>(ch: &C, path: P, initial: usize, extra: &[f64]) -> Result<i64>
where
    C: Characteristic + ?Sized,
    P: Fn(f64) -> Complex64 + Sync,
{
    let n0 = initial.max(8);
    let mut s: Vec<f64> = (0..=n0).map(|k| k as f64 / n0 as f64).collect();
    s.extend(phase_marks(ch.geometry(), &path));
    s.extend(extra.iter().copied().filter(|x| *x > 0.0 && *x < 1.0));
    s.sort_by(f64::total_cmp);
    s.dedup();
    let eval = |x: f64| -> Result<Complex64> {
        let m = mantissa(ch, path(x))?;
        if m.norm() == 0.0 {
            Err(Error::Numeric(format!("zero on the contour at λ = {}", path(x))))
        } else {
            Ok(m)
        }
    };
    let mut v: Vec<Complex64> = s.par_iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    for _round in 0..60 {
        let bad: Vec<usize> = (0..s.len() - 1)
            .filter(|&i| (v[i + 1] * v[i].conj()).arg().abs() > MAX_ARG_STEP)
            .collect();
        if bad.is_empty() {
            let total: f64 = (0..s.len() - 1).map(|i| (v[i + 1] * v[i].conj()).arg()).sum();
            let w = total / (2.0 * PI);
            let r = w.round();
            if (w - r).abs() > 0.1 {
                return Err(Error::Numeric(format!("winding number {w} is not an integer")));
            }
            return Ok(r as i64);
        }
        if bad.iter().any(|&i| s[i + 1] - s[i] < 1e-13) {
            let i = bad[0];
            return Err(Error::Numeric(format!("zero on the contour near λ = {}", path(s[i]))));
        }
        let mids: Vec<f64> = bad.iter().map(|&i| 0.5 * (s[i] + s[i + 1])).collect();
        let mv: Vec<Complex64> = mids.par_iter().map(|&x| eval(x)).collect::<Result<_>>()?;
        let mut ns = Vec::with_capacity(s.len() + mids.len());
        let mut nv = Vec::with_capacity(s.len() + mids.len());
        let mut k = 0;
        for i in 0..s.len() {
            ns.push(s[i]);
            nv.push(v[i]);
            if k < bad.len() && bad[k] == i {
                ns.push(mids[k]);
                nv.push(mv[k]);
                k += 1;
            }
        }
        s = ns;
        v = nv;
    }
    Err(Error::Numeric("winding refinement did not settle".into()))
}

/// Parameter values spaced so that `ρ(γ+l)` moves by at most π/4 between
/// them. Characteristic functions oscillate at that rate, and sampling
/// below it could alias whole turns of the argument.
fn phase_marks<P: Fn(f64) -> Complex64>(g: &crate::geometry::Geometry, path: &P) -> Vec<f64> {
    const FINE: usize = 2048;
    let len = g.gamma + g.l;
    let rho = |s: f64| {
        let r = path(s).sqrt();
        Complex64::new(r.re, r.im.abs())
    };
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut prev = rho(0.0);
    for k in 1..FINE {
        let s = k as f64 / FINE as f64;
        let cur = rho(s);
        acc += (cur - prev).norm() * len;
        prev = cur;
        if acc >= PI / 4.0 {
            out.push(s);
            acc = 0.0;
        }
    }
    out
}

/// Axis-aligned box `[lo.re, hi.re] × [lo.im, hi.im]` in the λ-plane.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Rect {
    pub fn around(c: Complex64, half: f64) -> Self {
        Self { lo: c - Complex64::new(half, half), hi: c + Complex64::new(half, half) }
    }

    pub fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }

    fn diag(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    /// Counter-clockwise boundary, parametrized by arc length on `[0, 1]`.
    pub fn point(&self, s: f64) -> Complex64 {
        let (w, h) = (self.hi.re - self.lo.re, self.hi.im - self.lo.im);
        let per = 2.0 * (w + h);
        let u = (s * per).clamp(0.0, per);
        if u <= w {
            Complex64::new(self.lo.re + u, self.lo.im)
        } else if u <= w + h {
            Complex64::new(self.hi.re, self.lo.im + (u - w))
        } else if u <= 2.0 * w + h {
            Complex64::new(self.hi.re - (u - w - h), self.hi.im)
        } else {
            Complex64::new(self.lo.re, self.hi.im - (u - 2.0 * w - h))
        }
    }
}

pub fn winding_rect<C: Characteristic + ?Sized>(ch: &C, r: &Rect, initial: usize) -> Result<i64> {
    winding(ch, |s| r.point(s), initial)
}

/// Winding around `r` with samples forced at the real parts `marks` along
/// the bottom edge. A row of zeros just below that edge would otherwise
/// alias: two half-turns inside one sample interval look like no turn.
fn winding_rect_marked<C: Characteristic + ?Sized>(
    ch: &C,
    r: &Rect,
    initial: usize,
    marks: &[f64],
) -> Result<i64> {
    let (w, h) = (r.hi.re - r.lo.re, r.hi.im - r.lo.im);
    let per = 2.0 * (w + h);
    let extra: Vec<f64> = marks.iter().map(|x| (x - r.lo.re) / per).filter(|s| *s * per < w).collect();
    winding_seeded(ch, |s| r.point(s), initial, &extra)
}

/// Zeros inside the disk `|λ| < radius`, counted with multiplicity.
pub fn count_in_disk<C: Characteristic + ?Sized>(ch: &C, radius: f64, initial: usize) -> Result<i64> {
    winding(ch, |s| Complex64::from_polar(radius, 2.0 * PI * s), initial)
}

/// Complex Newton with a central-difference derivative.
pub fn newton<C: Characteristic + ?Sized>(ch: &C, z0: Complex64, max_iter: usize) -> Option<Complex64> {
    let mut z = z0;
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let f = ch.scaled(z);
        if f.mant.norm() == 0.0 {
            return Some(z);
        }
        let h = 1e-7 * (1.0 + z.norm());
        let fp = ch.scaled(z + h);
        let fm = ch.scaled(z - h);
        let d = (fp.rescaled(f.log) - fm.rescaled(f.log)) / (2.0 * h);
        if !(d.norm() > 0.0) || !d.re.is_finite() {
            return None;
        }
        let step = f.mant / d;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        last = step.norm();
        if last <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    // Multiple zeros converge only linearly; accept a small final step.
    (last <= 1e-9 * (1.0 + z.norm())).then_some(z)
}

fn lam_of(t: f64) -> f64 {
    t * t.abs()
}

fn real_value<C: Characteristic + ?Sized>(ch: &C, t: f64) -> f64 {
    ch.scaled(Complex64::new(lam_of(t), 0.0)).mant.re
}

/// Safeguarded Newton on `t ↦ Δ(t|t|)` inside a sign-change bracket.
fn refine_bracket<C: Characteristic + ?Sized>(
    ch: &C,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    fb: f64,
    max_iter: usize,
) -> f64 {
    let mut t = (a * fb.abs() + b * fa.abs()) / (fa.abs() + fb.abs());
    for _ in 0..max_iter {
        let ft = real_value(ch, t);
        if ft == 0.0 {
            return t;
        }
        if ft.signum() == fa.signum() {
            a = t;
            fa = ft;
        } else {
            b = t;
        }
        let tol = 4.0 * f64::EPSILON * (1.0 + t.abs());
        if (b - a).abs() <= tol {
            return 0.5 * (a + b);
        }
        let h = (1e-6 * (1.0 + t.abs())).min(0.25 * (b - a).abs()).max(tol);
        let d = (real_value(ch, t + h) - real_value(ch, t - h)) / (2.0 * h);
        let mut next = t - ft / d;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(next > lo && next < hi) {
            next = 0.5 * (a + b);
        }
        if (next - t).abs() <= tol {
            return next;
        }
        t = next;
    }
    t
}

struct Scan {
    t: Vec<f64>,
    f: Vec<f64>,
}

impl Scan {
    fn new<C: Characteristic + ?Sized>(ch: &C, reach: f64, h: f64) -> Self {
        let j = (reach / h).ceil() as i64;
        let t: Vec<f64> = (-j..=j).map(|k| k as f64 * h).collect();
        let f: Vec<f64> = t.par_iter().map(|&x| real_value(ch, x)).collect();
        Self { t, f }
    }

    fn real_roots<C: Characteristic + ?Sized>(&self, ch: &C, max_iter: usize) -> Vec<f64> {
        let mut brackets = Vec::new();
        for i in 0..self.t.len() - 1 {
            if self.f[i] == 0.0 {
                brackets.push((self.t[i], self.t[i], 0.0, 0.0));
                // A zero sample without a sign change is an even-order zero.
                if i > 0 && self.f[i - 1] * self.f[i + 1] > 0.0 {
                    brackets.push((self.t[i], self.t[i], 0.0, 0.0));
                }
            } else if self.f[i] * self.f[i + 1] < 0.0 {
                brackets.push((self.t[i], self.t[i + 1], self.f[i], self.f[i + 1]));
            }
        }
        brackets
            .par_iter()
            .map(|&(a, b, fa, fb)| if a == b { a } else { refine_bracket(ch, a, b, fa, fb, max_iter) })
            .collect()
    }

    /// Interior local minima of `|f|` without a sign change around them.
    fn quiet_minima(&self) -> Vec<usize> {
        (1..self.t.len() - 1)
            .filter(|&i| {
                let (a, b, c) = (self.f[i - 1], self.f[i], self.f[i + 1]);
                b.abs() < a.abs() && b.abs() <= c.abs() && a * b > 0.0 && b * c > 0.0
            })
            .collect()
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// All zeros inside `r` by recursive subdivision.
pub fn roots_in_box<C: Characteristic + ?Sized>(ch: &C, r: Rect, max_iter: usize) -> Result<Vec<Complex64>> {
    roots_in_box_marked(ch, r, &[], max_iter)
}

/// [`roots_in_box`] for a box whose bottom edge runs just above known
/// zeros at the real parts `marks` (see [`winding_rect_marked`]).
pub fn roots_in_box_marked<C: Characteristic + ?Sized>(
    ch: &C,
    r: Rect,
    marks: &[f64],
    max_iter: usize,
) -> Result<Vec<Complex64>> {
    let count = winding_rect_marked(ch, &r, 32, marks)?;
    subdivide(ch, r, count, 0, marks, max_iter)
}

fn subdivide<C: Characteristic + ?Sized>(
    ch: &C,
    r: Rect,
    count: i64,
    depth: usize,
    marks: &[f64],
    max_iter: usize,
) -> Result<Vec<Complex64>> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    let c = r.center();
    if count == 1 && depth >= 2 {
        if let Some(z) = newton(ch, c, max_iter) {
            if r.contains(z) {
                return Ok(vec![z]);
            }
        }
    }
    if r.diag() <= 1e-11 * (1.0 + c.norm()) {
        let z = newton(ch, c, max_iter).filter(|z| r.contains(*z)).unwrap_or(c);
        return Ok(vec![z; count as usize]);
    }
    if depth > 80 {
        return Err(Error::IncompleteSpectrum(format!(
            "subdivision did not isolate {count} zero(s) in [{}, {}]",
            r.lo, r.hi
        )));
    }
    for frac in [0.5123, 0.4671, 0.5389, 0.4417] {
        let xm = r.lo.re + frac * (r.hi.re - r.lo.re);
        let ym = r.lo.im + (1.0 - frac) * (r.hi.im - r.lo.im);
        let kids = [
            Rect { lo: r.lo, hi: Complex64::new(xm, ym) },
            Rect { lo: Complex64::new(xm, r.lo.im), hi: Complex64::new(r.hi.re, ym) },
            Rect { lo: Complex64::new(xm, ym), hi: r.hi },
            Rect { lo: Complex64::new(r.lo.re, ym), hi: Complex64::new(xm, r.hi.im) },
        ];
        let counts: Result<Vec<i64>> = kids
            .iter()
            .map(|k| {
                let m: &[f64] = if k.lo.im == r.lo.im { marks } else { &[] };
                winding_rect_marked(ch, k, 16, m)
            })
            .collect();
        let Ok(counts) = counts else { continue };
        if counts.iter().sum::<i64>() != count {
            continue;
        }
        let mut out = Vec::new();
        for (k, n) in kids.iter().zip(counts) {
            let m: &[f64] = if k.lo.im == r.lo.im { marks } else { &[] };
            out.extend(subdivide(ch, *k, n, depth + 1, m, max_iter)?);
        }
        return Ok(out);
    }
    Err(Error::IncompleteSpectrum(format!(
        "could not split [{}, {}] holding {count} zero(s)",
        r.lo, r.hi
    )))
}

fn nearest_gap(values: &[Complex64], i: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| (v - values[i]).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Resolves the zeros hiding near a quiet minimum of `|Δ|` on the real
/// axis: two close real zeros, a double zero, or a near-real complex pair.
fn resolve_quiet<C: Characteristic + ?Sized>(
    ch: &C,
    scan: &Scan,
    i: usize,
    max_iter: usize,
) -> Result<Vec<Complex64>> {
    let (a, b) = (scan.t[i - 1], scan.t[i + 1]);
    let (fa, fb) = (scan.f[i - 1], scan.f[i + 1]);
    let s = scan.f[i].signum();
    let tm = golden_min(|t| s * real_value(ch, t), a, b);
    let fm = real_value(ch, tm);
    let lm = lam_of(tm);
    if fm == 0.0 {
        return Ok(vec![Complex64::new(lm, 0.0); 2]);
    }
    if fm * s < 0.0 {
        return Ok(vec![
            Complex64::new(lam_of(refine_bracket(ch, a, tm, fa, fm, max_iter)), 0.0),
            Complex64::new(lam_of(refine_bracket(ch, tm, b, fm, fb, max_iter)), 0.0),
        ]);
    }
    let half = (0.9 * (lm - lam_of(a)).min(lam_of(b) - lm)).max(1e-12 * (1.0 + lm.abs()));
    let rect = Rect::around(Complex64::new(lm, 0.0), half);
    let count = winding_rect(ch, &rect, 32)?;
    if count <= 0 {
        return Ok(Vec::new());
    }
    if count == 2 {
        if let Some(z) = newton(ch, Complex64::new(lm, 0.25 * half), max_iter) {
            if rect.contains(z) {
                if z.im.abs() <= 1e-7 * (1.0 + z.norm()) {
                    return Ok(vec![Complex64::new(z.re, 0.0); 2]);
                }
                let z = Complex64::new(z.re, z.im.abs());
                return Ok(vec![z.conj(), z]);
            }
        }
    }
    roots_in_box(ch, rect, max_iter)
}

/// The `n` zeros of smallest modulus, each certified by a winding count.
/// The real axis is scanned in `t` with `λ = t|t|`; the disk of radius `R`
/// holding them is counted by the argument principle, and any deficit is
/// searched for near the real axis and then in the upper half-plane
/// (zeros of a real potential's Δ come in conjugate pairs).
pub fn find_zeros<C: Characteristic + ?Sized>(ch: &C, n: usize, opts: &RootOptions) -> Result<Vec<Complex64>> {
    let g = ch.geometry();
    let len = g.gamma + g.l;
    let h = PI / (opts.scan_density as f64 * len);
    let mut reach = PI * (n as f64 + 4.0) / len + 4.0;
    let (scan, reals) = loop {
        let scan = Scan::new(ch, reach, h);
        let reals = scan.real_roots(ch, opts.newton_max_iter);
        if reals.len() > n {
            break (scan, reals);
        }
        reach *= 1.5;
        if reach > 1e7 {
            return Err(Error::IncompleteSpectrum(format!(
                "found only {} real zeros while scanning up to |λ| = {:.3e}",
                reals.len(),
                reach * reach
            )));
        }
    };
    let mut mods: Vec<f64> = reals.iter().map(|t| t * t).collect();
    mods.sort_by(f64::total_cmp);
    let mut k = n;
    while k + 1 < mods.len() && mods[k] <= mods[n - 1] * (1.0 + 1e-9) {
        k += 1;
    }
    let (inner, outer) = (mods[n - 1], mods[k]);

    let mut radius = None;
    let mut winding_total = 0;
    for frac in [0.5, 0.37, 0.63, 0.21, 0.79] {
        let r = inner + frac * (outer - inner);
        let expected = mods.iter().filter(|&&m| m < r).count();
        if let Ok(w) = count_in_disk(ch, r, 8 * (expected + 4)) {
            radius = Some(r);
            winding_total = w;
            break;
        }
    }
    let radius = radius.ok_or_else(|| {
        Error::IncompleteSpectrum(format!("no clean counting circle between |λ| = {inner} and {outer}"))
    })?;

    let mut zeros: Vec<Complex64> = reals
        .iter()
        .filter(|t| (*t * *t) < radius)
        .map(|&t| Complex64::new(lam_of(t), 0.0))
        .collect();

    if (zeros.len() as i64) < winding_total {
        let cands: Vec<usize> = scan
            .quiet_minima()
            .into_iter()
            .filter(|&i| scan.t[i] * scan.t[i] < radius)
            .collect();
        let found: Vec<Vec<Complex64>> = cands
            .par_iter()
            .map(|&i| resolve_quiet(ch, &scan, i, opts.newton_max_iter))
            .collect::<Result<_>>()?;
        zeros.extend(found.into_iter().flatten().filter(|z| z.norm() < radius));
    }
    if (zeros.len() as i64) < winding_total {
        let eta = 1e-6 * (1.0 + radius);
        let upper = Rect { lo: Complex64::new(-radius, eta), hi: Complex64::new(radius, radius) };
        let mut marks: Vec<f64> = zeros.iter().map(|z| z.re).collect();
        marks.sort_by(f64::total_cmp);
        let mids: Vec<f64> = marks.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        marks.extend(mids);
        let extra = roots_in_box_marked(ch, upper, &marks, opts.newton_max_iter)?;
        for z in extra.into_iter().filter(|z| z.norm() < radius) {
            if zeros.iter().all(|w| (w - z).norm() > 1e-8 * (1.0 + z.norm())) {
                zeros.push(z);
                zeros.push(z.conj());
            }
        }
    }
    if zeros.len() as i64 != winding_total {
        return Err(Error::IncompleteSpectrum(format!(
            "the disk |λ| < {radius:.6e} holds {winding_total} zeros but {} were located",
            zeros.len()
        )));
    }

    zeros.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(order(a, b)));
    // Zeros past the cut still bound the certification boxes of the last
    // ones kept.
    let beyond: Vec<Complex64> = zeros[n.min(zeros.len())..]
        .iter()
        .copied()
        .chain(reals.iter().map(|&t| Complex64::new(lam_of(t), 0.0)).filter(|z| z.norm() >= radius))
        .collect();
    zeros.truncate(n);

    if opts.certify {
        certify_among(ch, &zeros, &beyond)?;
    }
    Ok(zeros)
}

/// Checks that a small box around each zero winds once per copy.
pub fn certify<C: Characteristic + ?Sized>(ch: &C, zeros: &[Complex64]) -> Result<()> {
    certify_among(ch, zeros, &[])
}

/// [`certify`], with boxes also kept clear of the known zeros `others`.
fn certify_among<C: Characteristic + ?Sized>(ch: &C, zeros: &[Complex64], others: &[Complex64]) -> Result<()> {
    let groups: Vec<(usize, Complex64, usize)> = {
        let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
        for (i, z) in zeros.iter().enumerate() {
            if let Some(g) = out.iter_mut().find(|g| (g.1 - z).norm() <= 1e-9 * (1.0 + z.norm())) {
                g.2 += 1;
            } else {
                out.push((i, *z, 1));
            }
        }
        out
    };
    let centers: Vec<Complex64> = groups.iter().map(|g| g.1).chain(others.iter().copied()).collect();
    groups.par_iter().enumerate().try_for_each(|(gi, &(_, z, mult))| {
        let gap = nearest_gap(&centers, gi);
        let half = (0.3 * gap).min(1e-2 * (1.0 + z.norm())).max(1e-12 * (1.0 + z.norm()));
        let w = winding_rect(ch, &Rect::around(z, half), 16)?;
        if w == mult as i64 {
            Ok(())
        } else {
            Err(Error::IncompleteSpectrum(format!(
                "box of half-width {half:.3e} around λ = {z} winds {w} times, expected {mult}"
            )))
        }
    })
}

/// Scaled value helper for callers that need `Δ` itself.
pub fn value_scaled<C: Characteristic + ?Sized>(ch: &C, lambda: Complex64) -> Scaled {
    ch.scaled(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::FnChar;
    use crate::geometry::Geometry;
    use crate::trig::Wave;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn base() -> Geometry {
        Geometry::new(1.0, 1.0, 1.0).unwrap()
    }

    /// sin(2ρ)/ρ has zeros (πk/2)², k ≥ 1.
    fn sine_zero(k: usize) -> f64 {
        (PI * k as f64 / 2.0).powi(2)
    }

    #[test]
    fn winding_counts_simple_zeros() {
        let ch = FnChar { geom: base(), f: |z: Complex64| (z - 1.0) * (z - c(2.0, 3.0)) * (z + 5.0) };
        assert_eq!(count_in_disk(&ch, 4.0, 32).unwrap(), 2);
        assert_eq!(count_in_disk(&ch, 10.0, 32).unwrap(), 3);
        assert_eq!(winding_rect(&ch, &Rect::around(c(2.0, 3.0), 0.5), 16).unwrap(), 1);
    }

    #[test]
    fn finds_sine_zeros() {
        let ch = FnChar { geom: base(), f: |z: Complex64| Wave::new(z).cs_plain(2.0).1 };
        let zs = find_zeros(&ch, 12, &RootOptions::default()).unwrap();
        for (k, z) in zs.iter().enumerate() {
            assert!((z - c(sine_zero(k + 1), 0.0)).norm() < 1e-10 * sine_zero(k + 1), "{k}: {z}");
        }
    }

    #[test]
    fn recovers_complex_pair_and_double_root() {
        // Move two sine zeros into a conjugate pair and double a third one.
        let pair = c(30.0, 4.0);
        let f = move |z: Complex64| {
            Wave::new(z).cs_plain(2.0).1 * (z - pair) * (z - pair.conj()) * (z - sine_zero(5))
                / ((z - sine_zero(3)) * (z - sine_zero(4)) * (z - sine_zero(6)))
        };
        let ch = FnChar { geom: base(), f };
        let zs = find_zeros(&ch, 8, &RootOptions::default()).unwrap();
        let expect = [
            c(sine_zero(1), 0.0),
            c(sine_zero(2), 0.0),
            pair.conj(),
            pair,
            c(sine_zero(5), 0.0),
            c(sine_zero(5), 0.0),
            c(sine_zero(7), 0.0),
            c(sine_zero(8), 0.0),
        ];
        let mut got = zs.clone();
        got.sort_by(order);
        for (g, e) in got.iter().zip(expect.iter()) {
            assert!((g - e).norm() < 1e-6 * (1.0 + e.norm()), "{g} vs {e}");
        }
    }

    #[test]
    fn close_real_pair_inside_one_scan_step() {
        let f = |z: Complex64| {
            Wave::new(z).cs_plain(2.0).1 * (z - 20.0) * (z - 20.001) / ((z - sine_zero(3)) * (z - sine_zero(4)))
        };
        let ch = FnChar { geom: base(), f };
        let zs = find_zeros(&ch, 4, &RootOptions::default()).unwrap();
        let mut got = zs.clone();
        got.sort_by(order);
        assert!((got[2] - c(20.0, 0.0)).norm() < 1e-9);
        assert!((got[3] - c(20.001, 0.0)).norm() < 1e-9);
    }
}
