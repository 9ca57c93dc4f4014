//! Closed-loop experiments: plant, estimator, per-step synthesis and the
//! control law, driven by a reference trajectory and seeded noise.

use std::fmt;
use std::io::{self, Write};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::ControllerState;
use crate::error::{Error, Result};
use crate::estimate::EstimatorConfig;
use crate::model::{
    armax_to_edlm, ArmaxModel, ArmaxSimulator, ModelOrders, PgModel, Plant, RegressorWindow,
};
use crate::poly::DelayPoly;
use crate::scalar::Scalar;
use crate::synth::{
    design_min_phase, pid_to_e, synth_mfac, synth_pole_placement, ControllerPolys, DesignSpec,
    PidSpec,
};

/// Reference signal `y*(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = ""
)]
pub enum Trajectory<T: Scalar> {
    /// `amplitude·(−1)^round(k / half_period)`, rounding halves away from zero.
    SquareWave {
        amplitude: T,
        half_period: u64,
    },
    /// `ts·k`.
    Ramp {
        ts: T,
    },
    /// `kⁿ`.
    Power {
        n: u32,
    },
    Constant {
        level: T,
    },
}

impl<T: Scalar> Trajectory<T> {
    pub fn eval(&self, k: u64) -> T {
        match *self {
            Trajectory::SquareWave {
                amplitude,
                half_period,
            } => {
                let hp = half_period.max(1);
                let idx = (2 * k + hp) / (2 * hp);
                if idx.is_multiple_of(2) {
                    amplitude
                } else {
                    -amplitude
                }
            }
            Trajectory::Ramp { ts } => ts * T::lit(k as f64),
            Trajectory::Power { n } => T::lit(k as f64).powi(n as i32),
            Trajectory::Constant { level } => level,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Trajectory::SquareWave { half_period: 0, .. } => Err(Error::InvalidConfig(
                "trajectory.half_period must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Standard normal draw number `k` of the stream keyed by `seed`.
///
/// ChaCha20 keyed with the little-endian seed in its first eight bytes is
/// positioned at word `4k`; two `u64` outputs become `u₁ ∈ (0, 1]` and
/// `u₂ ∈ [0, 1)` with 53-bit resolution, and Box–Muller
/// `√(−2 ln u₁)·cos(2πu₂)` is evaluated with `libm` so the stream is
/// bit-identical on every platform.
pub fn standard_normal(seed: u64, k: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_word_pos(4 * u128::from(k));
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
}

/// Zero-mean Gaussian sample `k` with the given variance.
pub fn gaussian_noise<T: Scalar>(seed: u64, variance: T, k: u64) -> T {
    if variance <= T::zero() {
        return T::zero();
    }
    T::lit(standard_normal(seed, k) * libm::sqrt(variance.as_f64()))
}

/// Additive disturbance `v(k)` entering the plant's output equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = ""
)]
pub enum Disturbance<T: Scalar> {
    Step { start: u64, magnitude: T },
}

impl<T: Scalar> Disturbance<T> {
    pub fn eval(&self, k: u64) -> T {
        match *self {
            Disturbance::Step { start, magnitude } => {
                if k >= start {
                    magnitude
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Controller family re-synthesized from the current estimate every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "case",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = ""
)]
pub enum ControllerCase<T: Scalar> {
    /// Closed-loop poles `(1 + z⁻¹φ_w)ΔA_m`. Without `bm`, the zeros are
    /// `c·Δ·φ_u` with `c` chosen for unit DC gain.
    PolePlacement {
        am: DelayPoly<T>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bm: Option<DelayPoly<T>>,
    },
    /// `(1 − z⁻¹φ_y)H + z⁻ᵈφ_uG = T₁` with PID-shaped `E`.
    MinPhase {
        target_t1: DelayPoly<T>,
        pid: PidSpec<T>,
    },
    /// `H = λΔᵐ + φ_{L_y+1}φ_u`; `m = 0` is MFAC.
    Mfac {
        lambda: T,
        #[serde(default)]
        m: usize,
    },
}

impl<T: Scalar> ControllerCase<T> {
    pub fn synthesize(&self, pg: &PgModel<T>) -> Result<ControllerPolys<T>> {
        match self {
            ControllerCase::PolePlacement { am, bm } => {
                let spec = match bm {
                    Some(bm) => DesignSpec::new(am.clone(), bm.clone()),
                    None => DesignSpec::unit_dc(pg, am.clone())?,
                };
                synth_pole_placement(pg, &spec)
            }
            ControllerCase::MinPhase { target_t1, pid } => {
                design_min_phase(pg, target_t1, pid_to_e(pid))
            }
            ControllerCase::Mfac { lambda, m } => synth_mfac(pg, *lambda, *m),
        }
    }
}

/// Everything needed to reproduce one closed-loop run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct ExperimentConfig<T: Scalar> {
    #[serde(default)]
    pub name: String,
    /// Plant, including its noise variance.
    pub plant: ArmaxModel<T>,
    /// Orders of the model the controller is designed on.
    pub orders: ModelOrders,
    pub estimator: EstimatorConfig<T>,
    pub controller: ControllerCase<T>,
    pub trajectory: Trajectory<T>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<Disturbance<T>>,
    /// `[lo, hi]` saturation on `u(k)`; off by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_clamp: Option<[T; 2]>,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        self.plant.validate()?;
        self.orders.validate()?;
        self.trajectory.validate()?;
        if let ControllerCase::Mfac { lambda, .. } = &self.controller {
            if self.orders.d != 1 {
                return Err(Error::InvalidConfig(format!(
                    "mfac controller needs orders.d = 1, got {}",
                    self.orders.d
                )));
            }
            if !(*lambda >= T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "controller.lambda must be >= 0, got {lambda}"
                )));
            }
        }
        if let Some([lo, hi]) = self.input_clamp {
            if !(lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "input_clamp needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        self.estimator
            .build(&self.orders, self.true_pg().as_deref())?;
        Ok(())
    }

    /// Stacked PG of the plant at the configured orders, when it has one.
    pub fn true_pg(&self) -> Option<Vec<T>> {
        armax_to_edlm(&self.plant, self.orders)
            .ok()
            .map(|pg| pg.stacked())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parses and validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TraceRow<T: Scalar> {
    pub k: u64,
    pub y_ref: T,
    pub y: T,
    pub u: T,
    pub du: T,
    /// `y*(k) − y(k)`.
    pub e: T,
    pub theta: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Abort {
    pub step: u64,
    pub reason: String,
}

/// A step where synthesis or the control law failed and `u` was held.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoldEvent {
    pub step: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T: Scalar> {
    pub rows: Vec<TraceRow<T>>,
    pub pg_dim: usize,
    pub config_hash: String,
    pub seed: u64,
    pub abort: Option<Abort>,
    pub events: Vec<HoldEvent>,
}

impl<T: Scalar> Trace<T> {
    pub fn last(&self) -> Option<&TraceRow<T>> {
        self.rows.last()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("k,y_ref,y,u,du,e");
        for i in 1..=self.pg_dim {
            h.push_str(&format!(",phi_{i}"));
        }
        h
    }

    /// Writes the trace as CSV: LF line endings, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for r in &self.rows {
            write!(w, "{}", r.k)?;
            for v in [r.y_ref, r.y, r.u, r.du, r.e].iter().chain(&r.theta) {
                write!(w, ",{:.16e}", v.as_f64())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Runs the configured experiment on its ARMAX plant.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<Trace<T>> {
    cfg.validate()?;
    let mut plant = ArmaxSimulator::new(cfg.plant.clone())?;
    run_with_plant(cfg, &mut plant)
}

/// Runs the configured controller and estimator against any plant; the
/// config's ARMAX model then only supplies the noise variance and, for a
/// frozen estimator without an explicit vector, the PG.
///
/// Divergence ends the run early with [`Trace::abort`] set; only invalid
/// configurations are errors.
pub fn run_with_plant<T: Scalar, P: Plant<T>>(
    cfg: &ExperimentConfig<T>,
    plant: &mut P,
) -> Result<Trace<T>> {
    cfg.validate()?;
    let o = cfg.orders;
    let d = o.d as u64;
    let mut est = cfg.estimator.build(&o, cfg.true_pg().as_deref())?;
    let mut window = RegressorWindow::new(o);
    let mut ctl = ControllerState::new();
    if let Some([lo, hi]) = cfg.input_clamp {
        ctl = ctl.with_clamp(lo, hi);
    }
    let variance = cfg.plant.noise_variance;

    let mut trace = Trace {
        rows: Vec::with_capacity(cfg.horizon),
        pg_dim: o.dim(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        abort: None,
        events: Vec::new(),
    };
    let mut y_prev = T::zero();
    let mut u_prev = T::zero();

    for k in 0..cfg.horizon as u64 {
        let y = plant.output();
        let dy = y - y_prev;
        y_prev = y;

        let residual = match est.update(&window.delta_h(), dy) {
            Ok(r) => r,
            Err(e) => {
                trace.abort = Some(Abort {
                    step: k,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let dw = if o.lw > 0 { residual } else { T::zero() };
        let theta = est.estimate().to_vec();

        let y_ref_ahead = cfg.trajectory.eval(k + d);
        let synthesized =
            PgModel::from_estimate(o, &theta).and_then(|pg| cfg.controller.synthesize(&pg));
        let u = match synthesized.and_then(|c| ctl.control_step(&c, y_ref_ahead, y)) {
            Ok(u) => u,
            Err(e) => {
                trace.events.push(HoldEvent {
                    step: k,
                    reason: e.to_string(),
                });
                ctl.hold(y_ref_ahead, y)
            }
        };
        let du = u - u_prev;
        u_prev = u;
        window.push(dy, du, dw);

        let y_ref = cfg.trajectory.eval(k);
        let row = TraceRow {
            k,
            y_ref,
            y,
            u,
            du,
            e: y_ref - y,
            theta,
        };
        if ![row.y_ref, row.y, row.u, row.du, row.e]
            .iter()
            .chain(&row.theta)
            .all(|v| v.is_finite())
        {
            trace.abort = Some(Abort {
                step: k,
                reason: "non-finite signal (divergence)".into(),
            });
            break;
        }
        trace.rows.push(row);

        let v = cfg
            .disturbance
            .as_ref()
            .map_or(T::zero(), |dist| dist.eval(k + 1));
        plant.step(u, gaussian_noise(cfg.seed, variance, k + 1), v);
    }
    Ok(trace)
}

/// Index windows for [`compute_metrics`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricWindows {
    /// Half-open `[start, end)` range of `k` for the mean absolute error.
    pub mae: (u64, u64),
    /// Number of final rows averaged for the steady-state error.
    pub steady_last: usize,
    /// Use `e(k)/max(1, |y*(k)|)` in place of `e(k)`.
    pub relative: bool,
}

impl MetricWindows {
    pub fn whole(horizon: usize) -> Self {
        Self {
            mae: (0, horizon as u64),
            steady_last: (horizon / 10).max(1),
            relative: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Metrics<T: Scalar> {
    pub mean_abs_error: T,
    pub terminal_error: T,
    pub steady_state_error: T,
    pub max_abs_u: T,
    pub max_abs_y: T,
}

impl<T: Scalar> fmt::Display for Metrics<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mean_abs_error {:.16e}", self.mean_abs_error.as_f64())?;
        writeln!(f, "terminal_error {:.16e}", self.terminal_error.as_f64())?;
        writeln!(
            f,
            "steady_state_error {:.16e}",
            self.steady_state_error.as_f64()
        )?;
        writeln!(f, "max_abs_u {:.16e}", self.max_abs_u.as_f64())?;
        writeln!(f, "max_abs_y {:.16e}", self.max_abs_y.as_f64())
    }
}

pub fn compute_metrics<T: Scalar>(trace: &Trace<T>, w: &MetricWindows) -> Metrics<T> {
    let err = |r: &TraceRow<T>| {
        if w.relative {
            r.e / T::one().max(r.y_ref.abs())
        } else {
            r.e
        }
    };
    let mean = |vals: Vec<T>| {
        if vals.is_empty() {
            T::zero()
        } else {
            let n = T::lit(vals.len() as f64);
            vals.into_iter().sum::<T>() / n
        }
    };
    let in_window: Vec<T> = trace
        .rows
        .iter()
        .filter(|r| r.k >= w.mae.0 && r.k < w.mae.1)
        .map(|r| err(r).abs())
        .collect();
    let tail_start = trace.rows.len().saturating_sub(w.steady_last);
    let max_abs = |f: fn(&TraceRow<T>) -> T| {
        trace
            .rows
            .iter()
            .map(|r| f(r).abs())
            .fold(T::zero(), T::max)
    };
    Metrics {
        mean_abs_error: mean(in_window),
        terminal_error: trace.rows.last().map_or(T::zero(), err),
        steady_state_error: mean(trace.rows[tail_start..].iter().map(err).collect()),
        max_abs_u: max_abs(|r| r.u),
        max_abs_y: max_abs(|r| r.y),
    }
}
