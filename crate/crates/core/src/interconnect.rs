//! Data-driven composition of systems recorded in isolation.
//!
//! The workhorse is the regeneration map: given offline data of a system and
//! an arbitrary new input, it re-rolls the zero-initial-condition output one
//! sample at a time through the forward predictor, seeding the recursion with
//! a window of zeros. Series and feedback interconnections then reduce to
//! regenerating the second system's output against the first system's
//! recorded output, and the one-shot controller trajectory to filtering the
//! plant data.

use crate::error::{Error, Result};
use crate::filter::ImcFilter;
use crate::hankel::build_forward;
use crate::lti::filter_signal;
use crate::predictors::ForwardPredictor;
use crate::trajectory::Trajectory;

/// Which composition produced an [`InterconnectionTrajectory`]; downstream
/// rank expectations differ (n of the series, loop, or controller system).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterconnectionKind {
    Series,
    Feedback,
    NegativeFeedback,
    Parallel,
    Controller,
}

/// A trajectory of an interconnected system, assembled purely from the
/// component data. It carries no rank certificate of its own: whether it is
/// exciting enough for further prediction is the caller's explicit check.
#[derive(Debug, Clone)]
pub struct InterconnectionTrajectory {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub kind: InterconnectionKind,
    /// Labels of the source records, first system then second.
    pub provenance: (String, String),
}

impl InterconnectionTrajectory {
    pub fn to_trajectory(&self, ts: f64) -> Result<Trajectory> {
        Trajectory::new(self.u.clone(), self.y.clone(), ts)
    }
}

/// A certified forward predictor together with its depth, ready to re-roll
/// zero-initial-condition responses of the data-generating system.
#[derive(Debug, Clone)]
pub struct RegenerationContext {
    predictor: ForwardPredictor,
    depth: usize,
}

impl RegenerationContext {
    /// Build and certify the forward data matrix of `traj` at depth `tp` for
    /// a system of order `n`, then fix the predictor. Records whose output
    /// channel runs longer are reduced to their equal-length slice.
    pub fn new(traj: &Trajectory, tp: usize, order: usize, tol: f64) -> Result<Self> {
        let equal = traj.prefix(traj.input_len())?;
        let mut m = build_forward(&equal, tp)?;
        m.certify(order, tol)?;
        Ok(Self {
            predictor: ForwardPredictor::new(&m)?,
            depth: tp,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Zero-IC output of the data-generating system under `u_star`: prepend
    /// T_p zeros, run the predictor recursively with its own outputs as the
    /// output history, drop the padding.
    pub fn regenerate(&self, u_star: &[f64]) -> Vec<f64> {
        let tp = self.depth;
        let mut u_mod = vec![0.0; tp + u_star.len()];
        u_mod[tp..].copy_from_slice(u_star);
        let mut y_mod = vec![0.0; tp + u_star.len()];
        for t in tp..u_mod.len() {
            y_mod[t] = self
                .predictor
                .predict(&u_mod[t - tp..t], &y_mod[t - tp..t], u_mod[t])
                .expect("window lengths fixed by construction");
        }
        y_mod.split_off(tp)
    }
}

/// Same inputs, outputs re-rolled from rest: col(u, Z(u, u, y)). If the data
/// was recorded from rest the result reproduces the record. Inverse-ready
/// records are reduced to their equal-length slice first.
pub fn zero_ic_trajectory(traj: &Trajectory, tp: usize, order: usize, tol: f64) -> Result<Trajectory> {
    let equal = traj.prefix(traj.input_len())?;
    let ctx = RegenerationContext::new(&equal, tp, order, tol)?;
    let y0 = ctx.regenerate(&equal.u);
    Trajectory::new(equal.u, y0, traj.ts)
}

/// Series interconnection trajectory col(u_1, Z(y_1, u_2, y_2)): the second
/// system runs from rest on the first system's recorded output. Only the
/// second record needs the rank certificate.
pub fn series(w1: &Trajectory, w2: &Trajectory, tp: usize, order2: usize, tol: f64) -> Result<InterconnectionTrajectory> {
    let ctx2 = RegenerationContext::new(w2, tp, order2, tol)?;
    let (u1, y1) = w1.forward_slices();
    let ys = ctx2.regenerate(y1);
    Ok(InterconnectionTrajectory {
        u: u1.to_vec(),
        y: ys,
        kind: InterconnectionKind::Series,
        provenance: ("w1".into(), "w2".into()),
    })
}

fn feedback_with_sign(
    w1: &Trajectory,
    w2: &Trajectory,
    tp: usize,
    order2: usize,
    tol: f64,
    positive: bool,
) -> Result<InterconnectionTrajectory> {
    let ctx2 = RegenerationContext::new(w2, tp, order2, tol)?;
    let (u1, y1) = w1.forward_slices();
    let y2_check = ctx2.regenerate(y1);
    let u: Vec<f64> = u1
        .iter()
        .zip(&y2_check)
        .map(|(&a, &b)| if positive { a - b } else { a + b })
        .collect();
    Ok(InterconnectionTrajectory {
        u,
        y: y1.to_vec(),
        kind: if positive {
            InterconnectionKind::Feedback
        } else {
            InterconnectionKind::NegativeFeedback
        },
        provenance: ("w1".into(), "w2".into()),
    })
}

/// Positive-feedback loop trajectory col(u_1 - y2_check, y_1) with
/// y2_check = Z(y_1, u_2, y_2).
pub fn feedback(w1: &Trajectory, w2: &Trajectory, tp: usize, order2: usize, tol: f64) -> Result<InterconnectionTrajectory> {
    feedback_with_sign(w1, w2, tp, order2, tol, true)
}

/// Negative-feedback variant: the regenerated output is added back instead.
pub fn negative_feedback(w1: &Trajectory, w2: &Trajectory, tp: usize, order2: usize, tol: f64) -> Result<InterconnectionTrajectory> {
    feedback_with_sign(w1, w2, tp, order2, tol, false)
}

/// Parallel interconnection col(u_1, y_1 + Z(u_1, u_2, y_2)): both systems
/// driven by the first record's input, the second from rest.
pub fn parallel(w1: &Trajectory, w2: &Trajectory, tp: usize, order2: usize, tol: f64) -> Result<InterconnectionTrajectory> {
    let ctx2 = RegenerationContext::new(w2, tp, order2, tol)?;
    let (u1, y1) = w1.forward_slices();
    let y2 = ctx2.regenerate(u1);
    Ok(InterconnectionTrajectory {
        u: u1.to_vec(),
        y: y1.iter().zip(&y2).map(|(&a, &b)| a + b).collect(),
        kind: InterconnectionKind::Parallel,
        provenance: ("w1".into(), "w2".into()),
    })
}

/// Trajectory of the one-block controller assembled from plant data and the
/// filter: input y - f*y, output f*u. Valid whenever the plant data was
/// recorded from rest.
pub fn unified_controller_trajectory(u_d: &[f64], y_d: &[f64], filter: &ImcFilter) -> Result<InterconnectionTrajectory> {
    if u_d.len() != y_d.len() {
        return Err(Error::TrajectoryLength(format!(
            "controller trajectory needs equal channel lengths ({} vs {})",
            u_d.len(),
            y_d.len()
        )));
    }
    let ybar = filter_signal(&filter.sys, y_d);
    let ubar = filter_signal(&filter.sys, u_d);
    let e: Vec<f64> = y_d.iter().zip(&ybar).map(|(&y, &f)| y - f).collect();
    Ok(InterconnectionTrajectory {
        u: e,
        y: ubar,
        kind: InterconnectionKind::Controller,
        provenance: ("plant data".into(), "filter".into()),
    })
}
