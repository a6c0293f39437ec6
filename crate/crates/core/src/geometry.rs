//! The two-segment closed set, its jump operators, and potentials on it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::spline::UniformSpline;

pub type Rational = Ratio<i64>;

/// Optional exact-rational shadow of the geometry. Rationality cannot be
/// decided from floats, so the uniqueness checker only trusts these.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Exactness {
    pub l_over_gamma: Option<Rational>,
    pub pi_l_over_gamma: Option<Rational>,
    pub pi_d_over_gamma: Option<Rational>,
}

/// `T = [0, γ] ∪ [a, b]` with `a = γ + d`, `b = a + l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub gamma: f64,
    pub d: f64,
    pub l: f64,
    pub exact: Exactness,
}

fn ratio_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn agrees(r: &Rational, x: f64) -> bool {
    (ratio_f64(r) - x).abs() <= 1e-12 * x.abs().max(f64::MIN_POSITIVE)
}

impl Geometry {
    pub fn new(gamma: f64, d: f64, l: f64) -> Result<Self> {
        Self::with_exact(gamma, d, l, Exactness::default())
    }

    pub fn with_exact(gamma: f64, d: f64, l: f64, exact: Exactness) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("d", d), ("l", l)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let checks = [
            ("l_over_gamma", &exact.l_over_gamma, l / gamma),
            ("pi_l_over_gamma", &exact.pi_l_over_gamma, PI * l / gamma),
            ("pi_d_over_gamma", &exact.pi_d_over_gamma, PI * d / gamma),
        ];
        for (name, r, x) in checks {
            if let Some(r) = r {
                if !agrees(r, x) {
                    return Err(Error::Domain(format!(
                        "declared {name} = {r} disagrees with the float value {x}"
                    )));
                }
            }
        }
        Ok(Self { gamma, d, l, exact })
    }

    pub fn a(&self) -> f64 {
        self.gamma + self.d
    }

    pub fn b(&self) -> f64 {
        self.a() + self.l
    }

    /// Whether `l = γ` within 1e-12 relative.
    pub fn is_lg(&self) -> bool {
        (self.l - self.gamma).abs() <= 1e-12 * self.gamma
    }

    pub fn contains(&self, t: f64) -> bool {
        (0.0..=self.gamma).contains(&t) || (self.a()..=self.b()).contains(&t)
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} lies outside T = [0, {}] ∪ [{}, {}]",
                self.gamma,
                self.a(),
                self.b()
            )))
        }
    }

    /// Forward jump: the next point of T, or `b` at `b`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(if t == self.gamma { self.a() } else { t })
    }

    /// Backward jump: the previous point of T, or `0` at `0`.
    pub fn sigma_minus(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(if t == self.a() { self.gamma } else { t })
    }

    /// Δ-derivative of `f` with classical derivative `df`: the divided
    /// difference across the gap at `γ`, `df(t)` everywhere else.
    pub fn delta_derivative(
        &self,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        t: f64,
    ) -> Result<f64> {
        self.check(t)?;
        if t == self.gamma {
            Ok((f(self.a()) - f(self.gamma)) / self.d)
        } else {
            Ok(df(t))
        }
    }
}

/// Uniform samples of a profile on `[from, to]`, interpolated by a spline.
#[derive(Clone, Debug)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    spline: UniformSpline,
}

impl Grid {
    pub fn new(from: f64, to: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("a grid needs at least 2 samples".into()));
        }
        if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite potential sample {v}")));
        }
        Ok(Self { from, to, spline: UniformSpline::new(from, to, samples) })
    }

    pub fn samples(&self) -> &[f64] {
        self.spline.samples()
    }

    pub fn cells(&self) -> usize {
        self.spline.len() - 1
    }
}

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One segment of a potential, in absolute coordinates.
#[derive(Clone)]
pub enum Profile {
    Zero,
    Func(ProfileFn),
    Grid(Grid),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Func(_) => write!(f, "Func(..)"),
            Profile::Grid(g) => write!(f, "Grid({} samples on [{}, {}])", g.cells() + 1, g.from, g.to),
        }
    }
}

impl Profile {
    pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Func(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Func(f) => f(x),
            Profile::Grid(g) => g.spline.eval(x),
        }
    }

    /// Derivative; closures are differentiated with a fourth-order stencil
    /// that stays inside `[lo, hi]`.
    pub fn derivative(&self, x: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Grid(g) => g.spline.derivative(x),
            Profile::Func(f) => {
                let h = 1e-3 * (hi - lo).max(f64::EPSILON);
                if x - 2.0 * h >= lo && x + 2.0 * h <= hi {
                    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
                } else {
                    let s = if x - 2.0 * h < lo { 1.0 } else { -1.0 };
                    let p = |k: f64| f(x + s * k * h);
                    s * (-25.0 * p(0.0) + 48.0 * p(1.0) - 36.0 * p(2.0) + 16.0 * p(3.0) - 3.0 * p(4.0))
                        / (12.0 * h)
                }
            }
        }
    }

    /// Panel breakpoints on `[lo, hi]` with at least `panels` panels. Grid
    /// profiles align breakpoints with spline cells.
    pub fn breakpoints(&self, lo: f64, hi: f64, panels: usize) -> Vec<f64> {
        let panels = panels.max(1);
        match self {
            Profile::Grid(g) => {
                let cells = g.cells();
                let per = panels.div_ceil(cells);
                let n = cells * per;
                (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
            }
            _ => (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect(),
        }
    }
}

/// A potential on T: `left` lives on `[0, γ]`, `right` on `[a, b]`.
#[derive(Clone, Debug)]
pub struct Potential {
    pub left: Profile,
    pub right: Profile,
    pub q_at_gamma: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Self { left: Profile::Zero, right: Profile::Zero, q_at_gamma: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_zero() && self.right.is_zero() && self.q_at_gamma == 0.0
    }

    /// Closed-form potential; `q(γ)` is read off the left profile.
    pub fn from_fns(
        geom: &Geometry,
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let q_at_gamma = left(geom.gamma);
        Self { left: Profile::func(left), right: Profile::func(right), q_at_gamma }
    }

    /// Grid-backed potential; `q_at_gamma` must match the last left sample.
    pub fn from_grids(geom: &Geometry, left: Vec<f64>, right: Vec<f64>, q_at_gamma: f64) -> Result<Self> {
        let left = Grid::new(0.0, geom.gamma, left)?;
        let right = Grid::new(geom.a(), geom.b(), right)?;
        let last = *left.samples().last().unwrap();
        if (last - q_at_gamma).abs() > 1e-12 * (1.0 + last.abs()) {
            return Err(Error::Domain(format!(
                "q_at_gamma = {q_at_gamma} differs from the last left sample {last}"
            )));
        }
        if !q_at_gamma.is_finite() {
            return Err(Error::Domain("q_at_gamma must be finite".into()));
        }
        Ok(Self { left: Profile::Grid(left), right: Profile::Grid(right), q_at_gamma })
    }

    /// `q(x)` at any point of T.
    pub fn eval(&self, geom: &Geometry, x: f64) -> Result<f64> {
        if (0.0..=geom.gamma).contains(&x) {
            Ok(if x == geom.gamma { self.q_at_gamma } else { self.left.eval(x) })
        } else if (geom.a()..=geom.b()).contains(&x) {
            Ok(self.right.eval(x))
        } else {
            Err(Error::Domain(format!("x = {x} lies outside T")))
        }
    }

    pub fn left_derivative(&self, geom: &Geometry, t: f64) -> f64 {
        self.left.derivative(t, 0.0, geom.gamma)
    }

    pub fn right_derivative(&self, geom: &Geometry, x: f64) -> f64 {
        self.right.derivative(x, geom.a(), geom.b())
    }
}
