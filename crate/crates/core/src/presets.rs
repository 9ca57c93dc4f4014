//! Ready-made experiment configurations.
//!
//! * `ex1_1_case2` / `ex1_1_case3`: the delayed integrating plant with
//!   colored noise, tracked by the minimum-phase design with and without the
//!   noise slot in the model;
//! * `ex1_2`: the same plant without noise;
//! * `ex2_1_istc` / `ex2_1_mfac`: unit ramp on the first-order incremental
//!   plant with an integrator in `H` or without one;
//! * `ex2_2`: MFAC tracking `k¹⁰` on the same plant.

use crate::error::{Error, Result};
use crate::estimate::EstimatorConfig;
use crate::model::{ArmaxModel, ModelOrders};
use crate::poly::DelayPoly;
use crate::sim::{ControllerCase, ExperimentConfig, Trajectory};
use crate::synth::PidSpec;

pub const PRESET_NAMES: [&str; 6] = [
    "ex1_1_case2",
    "ex1_1_case3",
    "ex1_2",
    "ex2_1_istc",
    "ex2_1_mfac",
    "ex2_2",
];

/// λ values swept for `ex2_2`.
pub const EX2_2_LAMBDAS: [f64; 3] = [0.0, 1.0, 5.0];

/// `y(k+1) = 1.5y(k) − 0.5y(k−1) + 0.1u(k−5) + 0.05u(k−6) + ξ(k+1) + 0.4ξ(k)`.
pub fn plant_delayed_integrator(noise_variance: f64) -> ArmaxModel<f64> {
    ArmaxModel {
        a: DelayPoly::from_f64(&[1.0, -1.5, 0.5]),
        b: DelayPoly::from_f64(&[0.1, 0.05]),
        c: Some(DelayPoly::from_f64(&[1.0, 0.4])),
        d: 6,
        noise_variance,
    }
}

/// `Δy(k+1) = −0.8Δy(k) − 0.5Δu(k) + 0.2Δu(k−1)`, simulated in absolute
/// form from rest.
pub fn plant_incremental() -> ArmaxModel<f64> {
    ArmaxModel {
        a: DelayPoly::from_f64(&[1.0, 0.8]),
        b: DelayPoly::from_f64(&[-0.5, 0.2]),
        c: None,
        d: 1,
        noise_variance: 0.0,
    }
}

fn example1(
    name: &str,
    lw: usize,
    noise_variance: f64,
    pid: PidSpec<f64>,
) -> ExperimentConfig<f64> {
    let orders = ModelOrders {
        ly: 2,
        lu: 2,
        lw,
        d: 6,
    };
    ExperimentConfig {
        name: name.into(),
        plant: plant_delayed_integrator(noise_variance),
        orders,
        estimator: EstimatorConfig::Rls {
            init: vec![0.001; orders.dim()],
            p0: 1e6,
        },
        controller: ControllerCase::MinPhase {
            target_t1: DelayPoly::one(),
            pid,
        },
        trajectory: Trajectory::SquareWave {
            amplitude: 10.0,
            half_period: 100,
        },
        horizon: 400,
        seed: 1,
        disturbance: None,
        input_clamp: None,
    }
}

pub fn ex1_1_case2() -> ExperimentConfig<f64> {
    example1(
        "ex1_1_case2",
        1,
        0.01,
        PidSpec {
            kp: 0.3,
            ki: 0.2,
            kd: 0.0,
        },
    )
}

pub fn ex1_1_case3() -> ExperimentConfig<f64> {
    example1(
        "ex1_1_case3",
        0,
        0.01,
        PidSpec {
            kp: 0.3,
            ki: 0.2,
            kd: 0.0,
        },
    )
}

/// Noise-free run of the first example with the given PID gains.
pub fn ex1_2_with(kp: f64, ki: f64) -> ExperimentConfig<f64> {
    example1("ex1_2", 1, 0.0, PidSpec { kp, ki, kd: 0.0 })
}

pub fn ex1_2() -> ExperimentConfig<f64> {
    ex1_2_with(0.3, 0.2)
}

fn example2(
    name: &str,
    lambda: f64,
    m: usize,
    trajectory: Trajectory<f64>,
    horizon: usize,
) -> ExperimentConfig<f64> {
    ExperimentConfig {
        name: name.into(),
        plant: plant_incremental(),
        orders: ModelOrders {
            ly: 1,
            lu: 2,
            lw: 0,
            d: 1,
        },
        estimator: EstimatorConfig::Projection {
            init: vec![-0.1; 3],
            eta: 0.2,
            mu: 1.0,
            eps_reset: 1e-5,
        },
        controller: ControllerCase::Mfac { lambda, m },
        trajectory,
        horizon,
        seed: 1,
        disturbance: None,
        input_clamp: None,
    }
}

pub fn ex2_1_istc() -> ExperimentConfig<f64> {
    example2("ex2_1_istc", 5.0, 1, Trajectory::Ramp { ts: 1.0 }, 2001)
}

pub fn ex2_1_mfac() -> ExperimentConfig<f64> {
    example2("ex2_1_mfac", 5.0, 0, Trajectory::Ramp { ts: 1.0 }, 2001)
}

/// MFAC tracking `kⁿ` with the given λ.
pub fn ex2_2_with(lambda: f64, n: u32) -> ExperimentConfig<f64> {
    example2("ex2_2", lambda, 0, Trajectory::Power { n }, 700)
}

pub fn ex2_2() -> ExperimentConfig<f64> {
    ex2_2_with(0.0, 10)
}

/// `ex2_2` once per λ in [`EX2_2_LAMBDAS`].
pub fn ex2_2_sweep(n: u32) -> Vec<ExperimentConfig<f64>> {
    EX2_2_LAMBDAS.iter().map(|&l| ex2_2_with(l, n)).collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig<f64>> {
    match name {
        "ex1_1_case2" => Ok(ex1_1_case2()),
        "ex1_1_case3" => Ok(ex1_1_case3()),
        "ex1_2" => Ok(ex1_2()),
        "ex2_1_istc" => Ok(ex2_1_istc()),
        "ex2_1_mfac" => Ok(ex2_1_mfac()),
        "ex2_2" => Ok(ex2_2()),
        _ => Err(Error::UnknownPreset {
            name: name.into(),
            available: PRESET_NAMES.join(", "),
        }),
    }
}
