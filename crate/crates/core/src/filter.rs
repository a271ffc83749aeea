//! The low-pass filter F(z) = 1 / ((tau/Ts) z + (1 - tau/Ts))^L used by the
//! internal-model structure, and its L-step-advanced biproper variant.

use crate::error::{Error, Result};
use crate::lti::{realize_discrete, DiscreteStateSpace};

/// Unity-DC-gain low-pass filter of order L realized in state space.
#[derive(Debug, Clone)]
pub struct ImcFilter {
    pub tau: f64,
    pub ts: f64,
    pub order: usize,
    pub sys: DiscreteStateSpace,
}

fn filter_denominator(tau: f64, ts: f64, order: usize) -> Vec<f64> {
    let a = tau / ts;
    let factor = [a, 1.0 - a];
    let mut den = vec![1.0];
    for _ in 0..order {
        den = crate::lti::poly::mul(&den, &factor);
    }
    den
}

fn check_parameters(tau: f64, ts: f64, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::ZeroFilterOrder);
    }
    // pole of each first-order factor sits at 1 - Ts/tau
    if tau.is_nan() || tau <= ts / 2.0 {
        return Err(Error::UnstableFilter { tau, ts });
    }
    Ok(())
}

/// F(z) = 1 / ((tau/Ts) z + (1 - tau/Ts))^L, with unity DC gain by construction.
pub fn make_imc_filter(tau: f64, ts: f64, order: usize) -> Result<ImcFilter> {
    check_parameters(tau, ts, order)?;
    let den = filter_denominator(tau, ts, order);
    let sys = realize_discrete(&[1.0], &den, ts)?;
    debug_assert!((sys.dc_gain() - 1.0).abs() < 1e-12);
    Ok(ImcFilter {
        tau,
        ts,
        order,
        sys,
    })
}

/// z^L F(z): the filter advanced by its own order, biproper and therefore
/// causally implementable; compensates the L-step delay of the inverse
/// prediction.
pub fn make_advanced_filter(tau: f64, ts: f64, order: usize) -> Result<DiscreteStateSpace> {
    check_parameters(tau, ts, order)?;
    let den = filter_denominator(tau, ts, order);
    let mut num = vec![0.0; order + 1];
    num[0] = 1.0;
    realize_discrete(&num, &den, ts)
}
