//! Behavioral data matrices: Hankel blocks partitioned for forward
//! prediction, inverse prediction, and the one-shot controller predictor,
//! each carrying an explicit numerical rank certificate.
//!
//! A matrix is unusable by the predictors until `certify` has confirmed
//! rank = T_p + 1 + n; that rank equality is the premise of every exactness
//! guarantee downstream, so failures are loud and carry the full singular
//! spectrum.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Default relative singular-value threshold; the data is noise-free by
/// assumption, so true and spurious singular values sit many orders apart.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Hankel matrix of block depth T over a signal: entry (i, j) = v[j + i].
pub fn hankel(v: &[f64], depth: usize) -> Result<DMatrix<f64>> {
    if depth == 0 || depth > v.len() {
        return Err(Error::DimensionMismatch(format!(
            "hankel depth {depth} invalid for a signal of {} samples",
            v.len()
        )));
    }
    let cols = v.len() - depth + 1;
    Ok(DMatrix::from_fn(depth, cols, |i, j| v[j + i]))
}

/// Outcome of a numerical rank check.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    pub expected: usize,
    pub passed: bool,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    pub tol: f64,
}

/// Numerical rank = number of singular values above tol * sigma_max,
/// compared against the expected rank. Diagnostic, never silent.
pub fn check_rank(m: &DMatrix<f64>, expected: usize, tol: f64) -> RankReport {
    debug_assert!(tol > 0.0 && tol < 1.0, "relative tolerance outside (0, 1)");
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > tol * smax).count()
    };
    RankReport {
        rank,
        expected,
        passed: rank == expected,
        singular_values: sv,
        tol,
    }
}

/// Shared state of the three partitioned data-matrix kinds.
#[derive(Debug, Clone)]
struct Certification {
    tol: f64,
    report: Option<RankReport>,
}

impl Certification {
    fn new() -> Self {
        Self {
            tol: DEFAULT_RANK_TOL,
            report: None,
        }
    }

    fn run(&mut self, stacked: &DMatrix<f64>, expected: usize, tol: f64, context: &str) -> Result<&RankReport> {
        let report = check_rank(stacked, expected, tol);
        self.tol = tol;
        if !report.passed {
            let err = Error::RankCertification {
                context: context.into(),
                got: report.rank,
                expected,
                sv: report.singular_values.clone(),
            };
            self.report = Some(report);
            return Err(err);
        }
        self.report = Some(report);
        Ok(self.report.as_ref().unwrap())
    }

    fn certified(&self) -> bool {
        self.report.as_ref().map(|r| r.passed).unwrap_or(false)
    }
}

/// Hankel blocks for one-step forward prediction: U_p, U_f over the input,
/// Y_p, Y_f over the output, all of depth T_p + 1 split T_p / 1.
#[derive(Debug, Clone)]
pub struct ForwardDataMatrix {
    pub up: DMatrix<f64>,
    pub uf: DMatrix<f64>,
    pub yp: DMatrix<f64>,
    pub yf: DMatrix<f64>,
    pub depth: usize,
    cert: Certification,
}

/// Hankel blocks for inverse prediction: the output blocks run L deeper,
/// split T_p / (1 + L).
#[derive(Debug, Clone)]
pub struct InverseDataMatrix {
    pub up: DMatrix<f64>,
    pub uf: DMatrix<f64>,
    pub yp: DMatrix<f64>,
    pub yfl: DMatrix<f64>,
    pub depth: usize,
    pub delay: usize,
    cert: Certification,
}

/// Hankel blocks over a controller trajectory: E-blocks from the controller
/// input, F-blocks from the controller output, partitioned as the forward
/// case.
#[derive(Debug, Clone)]
pub struct ControllerDataMatrix {
    pub ep: DMatrix<f64>,
    pub ef: DMatrix<f64>,
    pub fp: DMatrix<f64>,
    pub ff: DMatrix<f64>,
    pub depth: usize,
    cert: Certification,
}

fn split_rows(m: &DMatrix<f64>, top: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        m.view((0, 0), (top, m.ncols())).into_owned(),
        m.view((top, 0), (m.nrows() - top, m.ncols())).into_owned(),
    )
}

fn vstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|m| m.nrows()).sum();
    let cols = parts[0].ncols();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for m in parts {
        out.view_mut((r, 0), (m.nrows(), cols)).copy_from(*m);
        r += m.nrows();
    }
    out
}

/// Forward data matrix from an equal-length trajectory, at depth T_p.
pub fn build_forward(traj: &Trajectory, tp: usize) -> Result<ForwardDataMatrix> {
    let (u, y) = traj.forward_slices();
    if traj.output_surplus() != 0 {
        return Err(Error::TrajectoryLength(format!(
            "forward data needs equal channel lengths; output runs {} samples past the input",
            traj.output_surplus()
        )));
    }
    if tp + 1 > u.len() {
        return Err(Error::TrajectoryLength(format!(
            "need at least T_p + 1 = {} samples, have {}",
            tp + 1,
            u.len()
        )));
    }
    let hu = hankel(u, tp + 1)?;
    let hy = hankel(y, tp + 1)?;
    let (up, uf) = split_rows(&hu, tp);
    let (yp, yf) = split_rows(&hy, tp);
    Ok(ForwardDataMatrix {
        up,
        uf,
        yp,
        yf,
        depth: tp,
        cert: Certification::new(),
    })
}

/// Inverse data matrix: the output record must run exactly L samples past
/// the input record.
pub fn build_inverse(traj: &Trajectory, tp: usize, delay: usize) -> Result<InverseDataMatrix> {
    if traj.output_surplus() != delay {
        return Err(Error::TrajectoryLength(format!(
            "inverse data needs the output exactly {delay} samples longer than the input, got surplus {}",
            traj.output_surplus()
        )));
    }
    if tp + 1 > traj.u.len() {
        return Err(Error::TrajectoryLength(format!(
            "need at least T_p + 1 = {} input samples, have {}",
            tp + 1,
            traj.u.len()
        )));
    }
    let hu = hankel(&traj.u, tp + 1)?;
    let hy = hankel(&traj.y, tp + 1 + delay)?;
    let (up, uf) = split_rows(&hu, tp);
    let (yp, yfl) = split_rows(&hy, tp);
    Ok(InverseDataMatrix {
        up,
        uf,
        yp,
        yfl,
        depth: tp,
        delay,
        cert: Certification::new(),
    })
}

/// Controller data matrix from the controller-side signals (input e, output ubar).
pub fn build_controller_matrix(e: &[f64], ubar: &[f64], tp: usize) -> Result<ControllerDataMatrix> {
    if e.len() != ubar.len() {
        return Err(Error::TrajectoryLength(format!(
            "controller signals must have equal lengths ({} vs {})",
            e.len(),
            ubar.len()
        )));
    }
    if tp + 1 > e.len() {
        return Err(Error::TrajectoryLength(format!(
            "need at least T_p + 1 = {} samples, have {}",
            tp + 1,
            e.len()
        )));
    }
    let he = hankel(e, tp + 1)?;
    let hf = hankel(ubar, tp + 1)?;
    let (ep, ef) = split_rows(&he, tp);
    let (fp, ff) = split_rows(&hf, tp);
    Ok(ControllerDataMatrix {
        ep,
        ef,
        fp,
        ff,
        depth: tp,
        cert: Certification::new(),
    })
}

impl ForwardDataMatrix {
    /// Full stacked matrix [U_p; U_f; Y_p; Y_f], 2(T_p+1) rows.
    pub fn stacked(&self) -> DMatrix<f64> {
        vstack(&[&self.up, &self.uf, &self.yp, &self.yf])
    }

    pub fn cols(&self) -> usize {
        self.up.ncols()
    }

    /// Certify rank = T_p + 1 + n for a system of order n.
    pub fn certify(&mut self, order: usize, tol: f64) -> Result<&RankReport> {
        let stacked = self.stacked();
        self.cert
            .run(&stacked, self.depth + 1 + order, tol, "forward data matrix")
    }

    pub fn is_certified(&self) -> bool {
        self.cert.certified()
    }

    pub fn certificate(&self) -> Option<&RankReport> {
        self.cert.report.as_ref()
    }

    pub fn tol(&self) -> f64 {
        self.cert.tol
    }
}

impl InverseDataMatrix {
    /// Full stacked matrix [U_p; U_f; Y_p; Y_fL], 2T_p + 2 + L rows.
    pub fn stacked(&self) -> DMatrix<f64> {
        vstack(&[&self.up, &self.uf, &self.yp, &self.yfl])
    }

    pub fn cols(&self) -> usize {
        self.up.ncols()
    }

    /// The rank condition for the inverse case is the same T_p + 1 + n.
    pub fn certify(&mut self, order: usize, tol: f64) -> Result<&RankReport> {
        let stacked = self.stacked();
        self.cert
            .run(&stacked, self.depth + 1 + order, tol, "inverse data matrix")
    }

    pub fn is_certified(&self) -> bool {
        self.cert.certified()
    }

    pub fn certificate(&self) -> Option<&RankReport> {
        self.cert.report.as_ref()
    }

    pub fn tol(&self) -> f64 {
        self.cert.tol
    }
}

impl ControllerDataMatrix {
    /// Full stacked matrix [E_p; E_f; F_p; F_f].
    pub fn stacked(&self) -> DMatrix<f64> {
        vstack(&[&self.ep, &self.ef, &self.fp, &self.ff])
    }

    pub fn cols(&self) -> usize {
        self.ep.ncols()
    }

    /// The controller inherits the plant order, so the expected rank is the
    /// same T_p + 1 + n.
    pub fn certify(&mut self, order: usize, tol: f64) -> Result<&RankReport> {
        let stacked = self.stacked();
        self.cert
            .run(&stacked, self.depth + 1 + order, tol, "controller data matrix")
    }

    pub fn is_certified(&self) -> bool {
        self.cert.certified()
    }

    pub fn certificate(&self) -> Option<&RankReport> {
        self.cert.report.as_ref()
    }

    pub fn tol(&self) -> f64 {
        self.cert.tol
    }
}

/// Rank of the forward data matrix at each depth 1..=max_depth; lets a user
/// sanity-check the assumed system order n against rank - depth - 1.
pub fn rank_profile(traj: &Trajectory, max_depth: usize, tol: f64) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for tp in 1..=max_depth {
        let m = build_forward(traj, tp)?;
        let report = check_rank(&m.stacked(), 0, tol);
        out.push((tp, report.rank));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hankel_by_definition() {
        let m = hankel(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0]));
        let single = hankel(&[5.0], 1).unwrap();
        assert_eq!(single, DMatrix::from_row_slice(1, 1, &[5.0]));
        let column = hankel(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(column.ncols(), 1);
        assert_eq!(column.as_slice(), &[1.0, 2.0, 3.0]);
        assert!(hankel(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn check_rank_on_small_matrices() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(check_rank(&id, 3, 1e-8).passed);
        // rank-1 outer product
        let outer = DMatrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let rep = check_rank(&outer, 2, 1e-8);
        assert!(!rep.passed);
        assert_eq!(rep.rank, 1);
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(check_rank(&zero, 0, 1e-8).rank, 0);
    }

    #[test]
    fn zero_trajectory_fails_certification() {
        let tr = Trajectory::new(vec![0.0; 8], vec![0.0; 8], 0.01).unwrap();
        let mut m = build_forward(&tr, 2).unwrap();
        assert!(m.certify(2, 1e-8).is_err());
        assert!(!m.is_certified());
        assert_eq!(m.certificate().unwrap().rank, 0);
    }

    #[test]
    fn inverse_with_zero_delay_collapses_to_forward() {
        let u: Vec<f64> = (0..9).map(|k| (k as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..9).map(|k| (k as f64 * 1.3).cos()).collect();
        let tr = Trajectory::new(u, y, 0.01).unwrap();
        let f = build_forward(&tr, 3).unwrap();
        let i = build_inverse(&tr, 3, 0).unwrap();
        assert_eq!(f.stacked(), i.stacked());
    }

    #[test]
    fn inverse_length_convention_enforced() {
        let tr = Trajectory::new(vec![1.0; 8], vec![1.0; 8], 0.01).unwrap();
        assert!(build_inverse(&tr, 2, 1).is_err());
    }

    #[test]
    fn rank_profile_reveals_the_order() {
        // rank = min(2(tp+1), tp+1+n) on rich data, so rank - tp - 1
        // stabilizes at n once tp >= n
        let mut s = 0xDEAD_BEEF_u64;
        let mut rnd = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let n = 40;
        let u: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let mut y = vec![0.0; n];
        for t in 0..n {
            let y1 = if t >= 1 { y[t - 1] } else { 0.0 };
            let y2 = if t >= 2 { y[t - 2] } else { 0.0 };
            let u1 = if t >= 1 { u[t - 1] } else { 0.0 };
            y[t] = 1.5 * y1 - 0.7 * y2 + 0.4 * u1;
        }
        let traj = Trajectory::new(u, y, 1.0).unwrap();
        let profile = rank_profile(&traj, 4, 1e-8).unwrap();
        assert_eq!(profile, vec![(1, 4), (2, 5), (3, 6), (4, 7)]);
    }

    #[test]
    fn source_windows_lie_in_the_certified_column_space() {
        // every (T_p+1)-long window of the source record, stacked as
        // col(u-window, y-window), sits in the certified matrix's column space
        let mut s = 0x1234_5678_u64;
        let mut rnd = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let n = 24;
        let u: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let mut y = vec![0.0; n];
        for t in 0..n {
            let y1 = if t >= 1 { y[t - 1] } else { 0.0 };
            let y2 = if t >= 2 { y[t - 2] } else { 0.0 };
            let u1 = if t >= 1 { u[t - 1] } else { 0.0 };
            let u2 = if t >= 2 { u[t - 2] } else { 0.0 };
            y[t] = 1.4 * y1 - 0.5 * y2 + 0.2 * u1 + 0.1 * u2;
        }
        let traj = Trajectory::new(u.clone(), y.clone(), 1.0).unwrap();
        let tp = 2;
        let mut m = build_forward(&traj, tp).unwrap();
        m.certify(2, 1e-8).unwrap();
        let stacked = m.stacked();
        let pinv = crate::solve::pinv(&stacked, 1e-8);
        for start in 0..n - tp {
            let mut w = nalgebra::DVector::zeros(2 * (tp + 1));
            for i in 0..=tp {
                w[i] = u[start + i];
                w[tp + 1 + i] = y[start + i];
            }
            let residual = (&stacked * (&pinv * &w) - &w).norm();
            assert!(residual < 1e-8 * w.norm().max(1e-12), "window at {start}");
        }
    }

    proptest! {
        #[test]
        fn hankel_antidiagonals_are_constant(
            v in proptest::collection::vec(-10.0f64..10.0, 4..30),
            depth in 2usize..5,
        ) {
            prop_assume!(depth < v.len());
            let m = hankel(&v, depth).unwrap();
            for i in 0..m.nrows() - 1 {
                for j in 1..m.ncols() {
                    prop_assert_eq!(m[(i, j)], m[(i + 1, j - 1)]);
                }
            }
        }

        #[test]
        fn rank_never_decreases_with_more_columns(
            seed in 0u64..1000,
            extra in 1usize..6,
        ) {
            // generic data from a fixed second-order recursion
            let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
            let mut rnd = || {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            let n = 10 + extra;
            let u: Vec<f64> = (0..n).map(|_| rnd()).collect();
            let mut y = vec![0.0; n];
            for t in 0..n {
                let y1 = if t >= 1 { y[t - 1] } else { 0.0 };
                let y2 = if t >= 2 { y[t - 2] } else { 0.0 };
                let u1 = if t >= 1 { u[t - 1] } else { 0.0 };
                y[t] = 1.5 * y1 - 0.6 * y2 + 0.3 * u1;
            }
            let short = Trajectory::new(u[..10].to_vec(), y[..10].to_vec(), 1.0).unwrap();
            let long = Trajectory::new(u.clone(), y.clone(), 1.0).unwrap();
            let r_short = check_rank(&build_forward(&short, 2).unwrap().stacked(), 0, 1e-8).rank;
            let r_long = check_rank(&build_forward(&long, 2).unwrap().stacked(), 0, 1e-8).rank;
            prop_assert!(r_long >= r_short);
        }
    }
}
