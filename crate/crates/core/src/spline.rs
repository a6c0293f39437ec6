//! Interpolation of uniformly sampled profiles.

/// Cubic spline with not-a-knot ends on a uniform grid. Fewer than four
/// samples fall back to piecewise-linear interpolation.
#[derive(Clone, Debug)]
pub struct UniformSpline {
    from: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots; empty for linear interpolation.
    m: Vec<f64>,
}

impl UniformSpline {
    pub fn new(from: f64, to: f64, y: Vec<f64>) -> Self {
        assert!(y.len() >= 2, "spline needs at least two samples");
        let n = y.len();
        let h = (to - from) / (n - 1) as f64;
        let m = if n >= 4 { not_a_knot(&y, h) } else { Vec::new() };
        Self { from, h, y, m }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let cells = self.y.len() - 1;
        let s = ((x - self.from) / self.h).clamp(0.0, cells as f64);
        let i = (s.floor() as usize).min(cells - 1);
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        if self.m.is_empty() {
            return y0 + u * (y1 - y0);
        }
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = 1.0 - u;
        let h2 = self.h * self.h;
        v * y0 + u * y1 + h2 / 6.0 * ((v * v * v - v) * m0 + (u * u * u - u) * m1)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, u) = self.locate(x);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let slope = (y1 - y0) / self.h;
        if self.m.is_empty() {
            return slope;
        }
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = 1.0 - u;
        slope + self.h / 6.0 * (-(3.0 * v * v - 1.0) * m0 + (3.0 * u * u - 1.0) * m1)
    }
}

/// Knot second derivatives. The not-a-knot rows decouple: row 1 and row
/// n-2 each pin one unknown, the rest is a plain tridiagonal solve.
fn not_a_knot(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let r = |i: usize| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
    let mut m = vec![0.0; n];
    m[1] = r(1) / 6.0;
    m[n - 2] = r(n - 2) / 6.0;
    if n > 4 {
        // Unknowns m[2..=n-3].
        let k = n - 4;
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<f64> = (2..=n - 3).map(r).collect();
        rhs[0] -= m[1];
        rhs[k - 1] -= m[n - 2];
        for j in 1..k {
            let w = 1.0 / diag[j - 1];
            diag[j] -= w;
            rhs[j] -= w * rhs[j - 1];
        }
        m[n - 3] = rhs[k - 1] / diag[k - 1];
        for j in (0..k - 1).rev() {
            m[j + 2] = (rhs[j] - m[j + 3]) / diag[j];
        }
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    m
}
