//! Discrete-time LTI machinery: realization, zero-order-hold discretization,
//! simulation, and impulse responses.
//!
//! Everything downstream leans on this module twice over: it generates the
//! offline data that the behavioral side consumes, and it provides the exact
//! parametric reference that the data-driven predictions are checked against.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};

/// Polynomial helpers on coefficient slices in descending powers; handy for
/// composing transfer functions when building interconnection references.
pub mod poly {
    /// Product of two polynomials.
    pub fn mul(p: &[f64], q: &[f64]) -> Vec<f64> {
        if p.is_empty() || q.is_empty() {
            return vec![0.0];
        }
        let mut out = vec![0.0; p.len() + q.len() - 1];
        for (i, &a) in p.iter().enumerate() {
            for (j, &b) in q.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }

    /// Difference p - q, aligning the constant terms.
    pub fn sub(p: &[f64], q: &[f64]) -> Vec<f64> {
        let n = p.len().max(q.len());
        let mut out = vec![0.0; n];
        for (i, &a) in p.iter().enumerate() {
            out[n - p.len() + i] += a;
        }
        for (i, &b) in q.iter().enumerate() {
            out[n - q.len() + i] -= b;
        }
        out
    }

    /// Drop leading coefficients that are exactly zero (keeps at least one).
    pub fn trim_leading(p: &[f64]) -> Vec<f64> {
        let start = p.iter().position(|&c| c != 0.0).unwrap_or(p.len() - 1);
        p[start..].to_vec()
    }

    pub fn eval_complex(p: &[f64], z: nalgebra::Complex<f64>) -> nalgebra::Complex<f64> {
        let mut acc = nalgebra::Complex::new(0.0, 0.0);
        for &c in p {
            acc = acc * z + nalgebra::Complex::new(c, 0.0);
        }
        acc
    }
}

/// Rational transfer function in the Laplace variable, coefficients in
/// descending powers of s.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl ContinuousTransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let num = poly::trim_leading(&num);
        let den = poly::trim_leading(&den);
        if den.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroLeadingDenominator);
        }
        if num.len() > den.len() {
            return Err(Error::ImproperTransferFunction {
                num_deg: num.len() - 1,
                den_deg: den.len() - 1,
            });
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// System order n: degree of the denominator.
    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    /// Relative degree (the delay L in the SISO case): denominator degree
    /// minus numerator degree.
    pub fn relative_degree(&self) -> usize {
        self.den.len() - self.num.len()
    }

    pub fn eval(&self, s: nalgebra::Complex<f64>) -> nalgebra::Complex<f64> {
        poly::eval_complex(&self.num, s) / poly::eval_complex(&self.den, s)
    }
}

/// Continuous state-space realization (A, B, C, D) of a SISO system.
#[derive(Debug, Clone)]
pub struct ContinuousStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

/// Discrete state-space realization of a SISO system with its sampling period.
#[derive(Debug, Clone)]
pub struct DiscreteStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub ts: f64,
}

/// Controllable-canonical realization: companion A with the negated
/// denominator coefficients in the last row, B = e_n.
fn canonical_from_normalized(num_full: &[f64], den: &[f64]) -> Realization {
    let n = den.len() - 1;
    let d = num_full[0];
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        // den[1..] holds a_1..a_n; state ordering puts the oldest power first
        a[(n - 1, j)] = -den[n - j];
    }
    let mut b = DVector::zeros(n);
    if n > 0 {
        b[n - 1] = 1.0;
    }
    let mut c = RowDVector::zeros(n);
    for j in 0..n {
        // remainder b_i - d*a_i, reversed into state order
        c[j] = num_full[n - j] - d * den[n - j];
    }
    (a, b, c, d)
}

type Realization = (DMatrix<f64>, DVector<f64>, RowDVector<f64>, f64);

fn realize_polys(num: &[f64], den: &[f64]) -> Result<Realization> {
    let num = poly::trim_leading(num);
    let den = poly::trim_leading(den);
    if den.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroLeadingDenominator);
    }
    if num.len() > den.len() {
        return Err(Error::ImproperTransferFunction {
            num_deg: num.len() - 1,
            den_deg: den.len() - 1,
        });
    }
    let lead = den[0];
    let den_n: Vec<f64> = den.iter().map(|c| c / lead).collect();
    let mut num_full = vec![0.0; den.len()];
    for (i, &c) in num.iter().enumerate() {
        num_full[den.len() - num.len() + i] = c / lead;
    }
    Ok(canonical_from_normalized(&num_full, &den_n))
}

/// Controllable-canonical realization of a proper continuous transfer function.
pub fn realize(tf: &ContinuousTransferFunction) -> Result<ContinuousStateSpace> {
    let (a, b, c, d) = realize_polys(tf.num(), tf.den())?;
    Ok(ContinuousStateSpace { a, b, c, d })
}

/// Controllable-canonical realization of a proper discrete transfer function
/// (coefficients in descending powers of z).
pub fn realize_discrete(num: &[f64], den: &[f64], ts: f64) -> Result<DiscreteStateSpace> {
    let (a, b, c, d) = realize_polys(num, den)?;
    Ok(DiscreteStateSpace { a, b, c, d, ts })
}

/// Zero-order-hold discretization via the augmented matrix exponential
/// exp([[A, B], [0, 0]]·Ts); exact for piecewise-constant inputs.
pub fn zoh_discretize(ssc: &ContinuousStateSpace, ts: f64) -> Result<DiscreteStateSpace> {
    if ts <= 0.0 {
        return Err(Error::DimensionMismatch(format!(
            "sampling period must be positive, got {ts}"
        )));
    }
    let n = ssc.a.nrows();
    if n == 0 {
        return Ok(DiscreteStateSpace {
            a: ssc.a.clone(),
            b: ssc.b.clone(),
            c: ssc.c.clone(),
            d: ssc.d,
            ts,
        });
    }
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&ssc.a);
    aug.view_mut((0, n), (n, 1)).copy_from(&ssc.b);
    let e = (aug * ts).exp();
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = DVector::from_fn(n, |i, _| e[(i, n)]);
    Ok(DiscreteStateSpace {
        a,
        b,
        c: ssc.c.clone(),
        d: ssc.d,
        ts,
    })
}

impl DiscreteStateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Largest eigenvalue magnitude of A.
    pub fn spectral_radius(&self) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Steady-state gain C(I - A)^{-1}B + D.
    pub fn dc_gain(&self) -> f64 {
        let n = self.order();
        if n == 0 {
            return self.d;
        }
        let eye = DMatrix::identity(n, n);
        let sol = (eye - &self.a)
            .lu()
            .solve(&self.b)
            .expect("I - A singular: system has a pole at z = 1");
        (&self.c * sol)[(0, 0)] + self.d
    }

    pub fn output(&self, x: &DVector<f64>, u: f64) -> f64 {
        (&self.c * x)[(0, 0)] + self.d * u
    }

    pub fn next_state(&self, x: &DVector<f64>, u: f64) -> DVector<f64> {
        &self.a * x + &self.b * u
    }

    pub fn zero_state(&self) -> DVector<f64> {
        DVector::zeros(self.order())
    }

    /// Exact recursion y(t) = Cx(t) + Du(t), x(t+1) = Ax(t) + Bu(t).
    pub fn simulate(&self, u: &[f64], x0: &DVector<f64>) -> Result<Vec<f64>> {
        if x0.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has dimension {} but system order is {}",
                x0.len(),
                self.order()
            )));
        }
        let mut x = x0.clone();
        let mut y = Vec::with_capacity(u.len());
        for &uk in u {
            y.push(self.output(&x, uk));
            x = self.next_state(&x, uk);
        }
        Ok(y)
    }

    /// Zero-initial-condition simulation.
    pub fn simulate_from_rest(&self, u: &[f64]) -> Vec<f64> {
        self.simulate(u, &self.zero_state())
            .expect("zero state always matches the system order")
    }

    /// Markov parameters f(0) = D, f(k) = C A^{k-1} B.
    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let mut f = Vec::with_capacity(len);
        if len == 0 {
            return f;
        }
        f.push(self.d);
        let mut v = self.b.clone();
        for _ in 1..len {
            f.push((&self.c * &v)[(0, 0)]);
            v = &self.a * v;
        }
        f
    }

    /// Transfer function (num, den) in descending powers of z via the
    /// Leverrier-Faddeev recursion on (zI - A).
    pub fn to_tf(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.order();
        let mut den = vec![1.0];
        let mut num = vec![self.d];
        let mut m = DMatrix::<f64>::identity(n, n);
        for k in 1..=n {
            let cmb = (&self.c * (&m * &self.b))[(0, 0)];
            let am = &self.a * &m;
            let ak = -am.trace() / k as f64;
            den.push(ak);
            num.push(cmb + self.d * ak);
            m = am + DMatrix::identity(n, n) * ak;
        }
        (num, den)
    }

    /// Frequency response at z = e^{j w Ts}.
    pub fn eval(&self, z: nalgebra::Complex<f64>) -> nalgebra::Complex<f64> {
        let (num, den) = self.to_tf();
        poly::eval_complex(&num, z) / poly::eval_complex(&den, z)
    }
}

/// Zero-initial-condition filtering of a signal through a discrete system;
/// identical to truncated convolution with the impulse response.
pub fn filter_signal(sys: &DiscreteStateSpace, v: &[f64]) -> Vec<f64> {
    sys.simulate_from_rest(v)
}
