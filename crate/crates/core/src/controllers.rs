//! The three closed-loop controllers behind one step interface: the
//! component-by-component data-driven controller (separate forward and
//! inverse predictors plus the advanced filter), the unified data-driven
//! controller (a single predictor over the controller trajectory), and the
//! classical model-based internal-model controller used as the parametric
//! reference.
//!
//! Timing convention shared by all three: within one loop iteration the
//! controller sees the measurement y(t), compares it against the internal
//! model's output for the same sample index, and produces u(t). The
//! model output at index t depends only on inputs up to u(t-1) (the plant is
//! strictly proper), so it is available before u(t) is computed; the
//! data-driven forward predictor realizes this by passing a zero for the
//! yet-unknown current input, whose coefficient in the prediction functional
//! vanishes for strictly proper systems. Keeping the comparison on the same
//! sample index is what makes both data-driven variants reproduce the
//! model-based controller sample for sample.

use std::collections::VecDeque;

use nalgebra::{DVector, RowDVector};

use crate::error::{Error, Result};
use crate::filter::{make_advanced_filter, make_imc_filter};
use crate::hankel::{build_controller_matrix, build_forward, build_inverse, ControllerDataMatrix};
use crate::interconnect::unified_controller_trajectory;
use crate::lti::{poly, realize_discrete, DiscreteStateSpace};
use crate::predictors::{ForwardPredictor, InversePredictor};
use crate::solve::pinv;
use crate::trajectory::Trajectory;

/// Closed-loop controller interface: one control command per measurement.
pub trait Controller {
    /// Consume the current reference and measurement, produce u(t).
    fn step(&mut self, r: f64, y: f64) -> f64;

    /// Model-path diagnostics of the last step, (y_hat, e), when the
    /// controller maintains an internal model.
    fn diagnostics(&self) -> Option<(f64, f64)>;

    /// Past signal pairs the controller must retain between steps.
    fn online_memory_pairs(&self) -> usize;

    fn reset(&mut self);

    fn name(&self) -> &'static str;
}

/// Fixed-length window of the most recent samples, oldest first.
#[derive(Debug, Clone)]
pub(crate) struct RingWindow {
    buf: VecDeque<f64>,
}

impl RingWindow {
    fn zeros(len: usize) -> Self {
        Self {
            buf: VecDeque::from(vec![0.0; len]),
        }
    }

    fn push(&mut self, v: f64) {
        self.buf.pop_front();
        self.buf.push_back(v);
    }

    fn as_vec(&self) -> Vec<f64> {
        self.buf.iter().copied().collect()
    }

    fn reset(&mut self) {
        for v in self.buf.iter_mut() {
            *v = 0.0;
        }
    }
}

/// Component-by-component controller: forward predictor for the model path,
/// inverse predictor for the model-inverse path, advanced filter z^L F.
#[derive(Debug)]
pub struct CbcController {
    forward: ForwardPredictor,
    inverse: InversePredictor,
    adv_filter: DiscreteStateSpace,
    filter_state: DVector<f64>,
    tp: usize,
    delay: usize,
    // windows named for the loop signals they hold
    u_win: RingWindow,
    yhat_win: RingWindow,
    s1_win: RingWindow,
    s2_win: RingWindow,
    last_yhat: f64,
    last_e: f64,
}

/// Construct the component-by-component controller from inverse-ready
/// offline data (output exactly L samples longer than the input).
pub fn build_cbc(
    offline: &Trajectory,
    tp: usize,
    order: usize,
    delay: usize,
    tau: f64,
    rank_tol: f64,
) -> Result<CbcController> {
    if tp < order {
        return Err(Error::Config(format!(
            "window depth T_p = {tp} must be at least the system order n = {order}"
        )));
    }
    let mut forward_data = build_forward(&offline.prefix(offline.input_len())?, tp)?;
    forward_data.certify(order, rank_tol)?;
    let mut inverse_data = build_inverse(offline, tp, delay)?;
    inverse_data.certify(order, rank_tol)?;
    let adv_filter = make_advanced_filter(tau, offline.ts, delay)?;
    let filter_state = adv_filter.zero_state();
    Ok(CbcController {
        forward: ForwardPredictor::new(&forward_data)?,
        inverse: InversePredictor::new(&inverse_data)?,
        filter_state,
        adv_filter,
        tp,
        delay,
        u_win: RingWindow::zeros(tp),
        yhat_win: RingWindow::zeros(tp),
        s1_win: RingWindow::zeros(tp + delay),
        s2_win: RingWindow::zeros(tp),
        last_yhat: 0.0,
        last_e: 0.0,
    })
}

impl Controller for CbcController {
    fn step(&mut self, r: f64, y: f64) -> f64 {
        let u_hist = self.u_win.as_vec();
        let yhat_hist = self.yhat_win.as_vec();
        // model output for the current index; the current input has no
        // influence on it, so a placeholder zero is exact here
        let yhat = self
            .forward
            .predict(&u_hist, &yhat_hist, 0.0)
            .expect("window sizes fixed at construction");
        let e = y - yhat;
        let s1 = r - e;

        // inverse prediction: the s1 window plays the output role, the s2
        // window the (delayed) input role
        let s1_hist = self.s1_win.as_vec();
        let mut s1_recent = s1_hist[self.tp..].to_vec();
        s1_recent.push(s1);
        let s2 = self
            .inverse
            .predict(&self.s2_win.as_vec(), &s1_hist[..self.tp], &s1_recent)
            .expect("window sizes fixed at construction");

        // u(t) from the advanced filter driven by s2
        let u = self.adv_filter.output(&self.filter_state, s2);
        self.filter_state = self.adv_filter.next_state(&self.filter_state, s2);

        self.u_win.push(u);
        self.yhat_win.push(yhat);
        self.s1_win.push(s1);
        self.s2_win.push(s2);
        self.last_yhat = yhat;
        self.last_e = e;
        u
    }

    fn diagnostics(&self) -> Option<(f64, f64)> {
        Some((self.last_yhat, self.last_e))
    }

    fn online_memory_pairs(&self) -> usize {
        // forward prediction keeps T_p pairs, inverse prediction T_p + L
        2 * self.tp + self.delay
    }

    fn reset(&mut self) {
        self.u_win.reset();
        self.yhat_win.reset();
        self.s1_win.reset();
        self.s2_win.reset();
        self.filter_state = self.adv_filter.zero_state();
        self.last_yhat = 0.0;
        self.last_e = 0.0;
    }

    fn name(&self) -> &'static str {
        "cbc"
    }
}

#[cfg(test)]
impl CbcController {
    pub(crate) fn windows(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            self.u_win.as_vec(),
            self.yhat_win.as_vec(),
            self.s1_win.as_vec(),
            self.s2_win.as_vec(),
        )
    }
}

/// Unified controller: one data-enabled prediction through the controller
/// data matrix per loop.
#[derive(Debug)]
pub struct UnifiedController {
    /// F_f [E_p; F_p; E_f]^+ collapsed into a single functional.
    map: RowDVector<f64>,
    tp: usize,
    u_win: RingWindow,
    s3_win: RingWindow,
}

/// Construct the unified controller from equal-length offline plant data;
/// `delay` is the filter order L, same as everywhere else.
pub fn build_unified(
    offline: &Trajectory,
    tp: usize,
    order: usize,
    delay: usize,
    tau: f64,
    rank_tol: f64,
) -> Result<UnifiedController> {
    if tp < order {
        return Err(Error::Config(format!(
            "window depth T_p = {tp} must be at least the system order n = {order}"
        )));
    }
    if offline.output_surplus() != 0 {
        return Err(Error::TrajectoryLength(
            "unified controller needs equal-length input and output records".into(),
        ));
    }
    let filter = make_imc_filter(tau, offline.ts, delay)?;
    let wc = unified_controller_trajectory(&offline.u, &offline.y, &filter)?;
    let mut data = build_controller_matrix(&wc.u, &wc.y, tp)?;
    data.certify(order, rank_tol)?;
    Ok(UnifiedController::from_matrix(&data))
}

impl UnifiedController {
    fn from_matrix(data: &ControllerDataMatrix) -> Self {
        let tp = data.depth;
        let cols = data.cols();
        let mut stack = nalgebra::DMatrix::zeros(2 * tp + 1, cols);
        stack.view_mut((0, 0), (tp, cols)).copy_from(&data.ep);
        stack.view_mut((tp, 0), (tp, cols)).copy_from(&data.fp);
        stack.view_mut((2 * tp, 0), (1, cols)).copy_from(&data.ef);
        let ff = RowDVector::from_row_slice(data.ff.row(0).transpose().as_slice());
        let map = ff * pinv(&stack, data.tol());
        Self {
            map,
            tp,
            u_win: RingWindow::zeros(tp),
            s3_win: RingWindow::zeros(tp),
        }
    }
}

impl Controller for UnifiedController {
    fn step(&mut self, r: f64, y: f64) -> f64 {
        let s3 = r - y;
        let mut rhs = DVector::zeros(2 * self.tp + 1);
        for (i, v) in self.s3_win.as_vec().into_iter().enumerate() {
            rhs[i] = v;
        }
        for (i, v) in self.u_win.as_vec().into_iter().enumerate() {
            rhs[self.tp + i] = v;
        }
        rhs[2 * self.tp] = s3;
        let u = (&self.map * rhs)[(0, 0)];
        self.u_win.push(u);
        self.s3_win.push(s3);
        u
    }

    fn diagnostics(&self) -> Option<(f64, f64)> {
        None
    }

    fn online_memory_pairs(&self) -> usize {
        self.tp
    }

    fn reset(&mut self) {
        self.u_win.reset();
        self.s3_win.reset();
    }

    fn name(&self) -> &'static str {
        "unified"
    }
}

/// Classical internal-model controller: parametric model of the plant in
/// the feedback path and a realization of model-inverse-times-filter in the
/// forward path. Serves as the exact reference the data-driven controllers
/// are checked against.
pub struct ImcController {
    model: DiscreteStateSpace,
    q: DiscreteStateSpace,
    model_state: DVector<f64>,
    q_state: DVector<f64>,
    last_yhat: f64,
    last_e: f64,
}

/// Build the reference controller from the discrete plant model and the
/// filter parameters. Rejects plants whose inverse cannot be realized
/// stably or causally.
pub fn build_imc(model: &DiscreteStateSpace, tau: f64, delay: usize) -> Result<ImcController> {
    if !model.is_stable() {
        return Err(Error::UnstablePlant(model.spectral_radius()));
    }
    if model.d != 0.0 {
        return Err(Error::Config(
            "internal-model reference assumes a strictly proper plant".into(),
        ));
    }
    let (num, den) = model.to_tf();
    let num = poly::trim_leading(&num);
    // the inverse path model^{-1} F is proper only when the filter order
    // covers the model's relative degree
    let rel_deg = den.len() - num.len();
    if delay < rel_deg {
        return Err(Error::Config(format!(
            "filter order {delay} too low for the model's relative degree {rel_deg}"
        )));
    }
    // zeros of the model must sit inside the unit circle for a stable inverse
    if let Some(radius) = largest_root_magnitude(&num) {
        if radius >= 1.0 {
            return Err(Error::NonMinimumPhase(radius));
        }
    }
    let filter = make_imc_filter(tau, model.ts, delay)?;
    let (fnum, fden) = filter.sys.to_tf();
    // Q = model^{-1} F: numerator den_G * num_F, denominator num_G * den_F
    let qnum = poly::mul(&den, &poly::trim_leading(&fnum));
    let qden = poly::mul(&num, &fden);
    let q = realize_discrete(&qnum, &qden, model.ts)?;
    let model_state = model.zero_state();
    let q_state = q.zero_state();
    Ok(ImcController {
        model: model.clone(),
        q,
        model_state,
        q_state,
        last_yhat: 0.0,
        last_e: 0.0,
    })
}

/// Largest root magnitude of a monic-normalizable polynomial in descending
/// powers, via companion-matrix eigenvalues; None for constants.
fn largest_root_magnitude(p: &[f64]) -> Option<f64> {
    let p = poly::trim_leading(p);
    let m = p.len().checked_sub(1)?;
    if m == 0 {
        return None;
    }
    let lead = p[0];
    let mut comp = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for j in 0..m {
        comp[(0, j)] = -p[j + 1] / lead;
    }
    Some(
        comp.complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max),
    )
}

impl Controller for ImcController {
    fn step(&mut self, r: f64, y: f64) -> f64 {
        // model output for the current index (D = 0, so u(t) is not needed)
        let yhat = self.model.output(&self.model_state, 0.0);
        let e = y - yhat;
        let s1 = r - e;
        let u = self.q.output(&self.q_state, s1);
        self.q_state = self.q.next_state(&self.q_state, s1);
        self.model_state = self.model.next_state(&self.model_state, u);
        self.last_yhat = yhat;
        self.last_e = e;
        u
    }

    fn diagnostics(&self) -> Option<(f64, f64)> {
        Some((self.last_yhat, self.last_e))
    }

    fn online_memory_pairs(&self) -> usize {
        self.model.order() + self.q.order()
    }

    fn reset(&mut self) {
        self.model_state = self.model.zero_state();
        self.q_state = self.q.zero_state();
        self.last_yhat = 0.0;
        self.last_e = 0.0;
    }

    fn name(&self) -> &'static str {
        "imc"
    }
}
