//! Plant models: the equivalent-dynamic-linearization model (EDLM) with delay
//! and disturbance, ARMAX/DARMA models, conversions between them, and
//! single-step simulators.
//!
//! The EDLM is
//!
//! ```text
//! Δy(k+1) = φ_Lᵀ ΔH(k) + Δw(k+1)
//! ΔH(k)   = [Δy(k) … Δy(k−L_y+1), Δu(k−d+1) … Δu(k−d−L_u+2), Δw(k) … Δw(k−L_w+1)]
//! ```
//!
//! and the stacked PG vector `φ_L` splits into the sub-polynomials `φ_y`,
//! `φ_u` and `φ_w`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::DelayPoly;
use crate::scalar::Scalar;

/// Pseudo orders and input delay. `lw = 0` is the deterministic model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOrders {
    pub ly: usize,
    pub lu: usize,
    pub lw: usize,
    pub d: usize,
}

impl ModelOrders {
    pub fn new(ly: usize, lu: usize, lw: usize, d: usize) -> Result<Self> {
        let o = Self { ly, lu, lw, d };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ly < 1 || self.lu < 1 || self.d < 1 {
            return Err(Error::InvalidOrders(format!(
                "need L_y >= 1, L_u >= 1, d >= 1; got L_y={}, L_u={}, d={}",
                self.ly, self.lu, self.d
            )));
        }
        Ok(())
    }

    /// Length of the stacked PG vector.
    pub fn dim(&self) -> usize {
        self.ly + self.lu + self.lw
    }

    /// Position of `φ_{L_y+1}`, the leading input gain, in the stacked vector.
    pub fn input_gain_index(&self) -> usize {
        self.ly
    }
}

/// The EDLM coefficients. Sub-vectors keep their nominal lengths (zero-padded).
#[derive(Clone, Debug, PartialEq)]
pub struct PgModel<T: Scalar> {
    pub orders: ModelOrders,
    phi_y: Vec<T>,
    phi_u: Vec<T>,
    phi_w: Vec<T>,
    pub bound_b: Option<T>,
}

impl<T: Scalar> PgModel<T> {
    /// Checked constructor: lengths must match the orders and the noise
    /// polynomial `1 + z⁻¹φ_w` must be strictly stable.
    pub fn new(orders: ModelOrders, phi_y: Vec<T>, phi_u: Vec<T>, phi_w: Vec<T>) -> Result<Self> {
        orders.validate()?;
        for (name, v, want) in [
            ("phi_y", &phi_y, orders.ly),
            ("phi_u", &phi_u, orders.lu),
            ("phi_w", &phi_w, orders.lw),
        ] {
            if v.len() != want {
                return Err(Error::InvalidModel(format!(
                    "{name} has {} coefficients, orders require {want}",
                    v.len()
                )));
            }
        }
        let pg = Self {
            orders,
            phi_y,
            phi_u,
            phi_w,
            bound_b: None,
        };
        pg.check_noise_stability()?;
        Ok(pg)
    }

    /// Builds a model from a stacked estimate without the stability check;
    /// estimates need not satisfy the model assumptions.
    pub fn from_estimate(orders: ModelOrders, stacked: &[T]) -> Result<Self> {
        if stacked.len() != orders.dim() {
            return Err(Error::DimensionMismatch {
                expected: orders.dim(),
                got: stacked.len(),
            });
        }
        let (y, rest) = stacked.split_at(orders.ly);
        let (u, w) = rest.split_at(orders.lu);
        Ok(Self {
            orders,
            phi_y: y.to_vec(),
            phi_u: u.to_vec(),
            phi_w: w.to_vec(),
            bound_b: None,
        })
    }

    pub fn with_bound(mut self, b: T) -> Result<Self> {
        let norm = self.stacked().iter().map(|&c| c * c).sum::<T>().sqrt();
        if norm > b {
            return Err(Error::InvalidModel(format!(
                "|phi| = {norm} exceeds bound {b}"
            )));
        }
        self.bound_b = Some(b);
        Ok(self)
    }

    pub fn check_noise_stability(&self) -> Result<()> {
        if self.phi_w.is_empty() {
            return Ok(());
        }
        let v = self.noise_poly().stability()?;
        if !v.stable {
            return Err(Error::InvalidModel(format!(
                "noise polynomial 1 + z^-1 phi_w has a root of modulus {}",
                v.max_modulus
            )));
        }
        Ok(())
    }

    pub fn phi_y(&self) -> &[T] {
        &self.phi_y
    }

    pub fn phi_u(&self) -> &[T] {
        &self.phi_u
    }

    pub fn phi_w(&self) -> &[T] {
        &self.phi_w
    }

    /// `[φ_y, φ_u, φ_w]` in `ΔH` order.
    pub fn stacked(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.orders.dim());
        v.extend_from_slice(&self.phi_y);
        v.extend_from_slice(&self.phi_u);
        v.extend_from_slice(&self.phi_w);
        v
    }

    /// `φ_{L_y+1}`.
    pub fn input_gain(&self) -> T {
        self.phi_u[0]
    }

    pub fn phi_y_poly(&self) -> DelayPoly<T> {
        DelayPoly::from_slice(&self.phi_y)
    }

    pub fn phi_u_poly(&self) -> DelayPoly<T> {
        DelayPoly::from_slice(&self.phi_u)
    }

    pub fn phi_w_poly(&self) -> DelayPoly<T> {
        DelayPoly::from_slice(&self.phi_w)
    }

    /// `1 − z⁻¹φ_y(z⁻¹)`.
    pub fn output_poly(&self) -> DelayPoly<T> {
        &DelayPoly::one() - &self.phi_y_poly().shift(1)
    }

    /// `1 + z⁻¹φ_w(z⁻¹)`.
    pub fn noise_poly(&self) -> DelayPoly<T> {
        &DelayPoly::one() + &self.phi_w_poly().shift(1)
    }

    /// One-step increment prediction `φ_Lᵀ ΔH`.
    pub fn predict(&self, delta_h: &[T]) -> T {
        debug_assert_eq!(delta_h.len(), self.orders.dim());
        self.phi_y
            .iter()
            .chain(&self.phi_u)
            .chain(&self.phi_w)
            .zip(delta_h)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// Recovers the ARMAX polynomials `A = 1 − z⁻¹φ_y`, `B = φ_u`,
    /// `C = 1 + z⁻¹φ_w` (absent when `L_w = 0`).
    pub fn to_armax(&self, noise_variance: T) -> ArmaxModel<T> {
        ArmaxModel {
            a: self.output_poly(),
            b: self.phi_u_poly(),
            c: (self.orders.lw > 0).then(|| self.noise_poly()),
            d: self.orders.d,
            noise_variance,
        }
    }
}

/// `A(z⁻¹)y(k+1) = z⁻ᵈ⁺¹B(z⁻¹)u(k) + C(z⁻¹)ζ(k+1)`; DARMA when `c` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ArmaxModel<T: Scalar> {
    pub a: DelayPoly<T>,
    pub b: DelayPoly<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<DelayPoly<T>>,
    pub d: usize,
    #[serde(default)]
    pub noise_variance: T,
}

impl<T: Scalar> ArmaxModel<T> {
    pub fn new(
        a: DelayPoly<T>,
        b: DelayPoly<T>,
        c: Option<DelayPoly<T>>,
        d: usize,
        noise_variance: T,
    ) -> Result<Self> {
        let m = Self {
            a,
            b,
            c,
            d,
            noise_variance,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let monic = |p: &DelayPoly<T>| p.coeff(0) == T::one();
        if !monic(&self.a) {
            return Err(Error::InvalidModel("A must be monic (a_0 = 1)".into()));
        }
        if self.c.as_ref().is_some_and(|c| !monic(c)) {
            return Err(Error::InvalidModel("C must be monic (c_0 = 1)".into()));
        }
        if self.d < 1 {
            return Err(Error::InvalidModel("delay d must be >= 1".into()));
        }
        if !(self.noise_variance >= T::zero()) {
            return Err(Error::InvalidModel("noise variance must be >= 0".into()));
        }
        Ok(())
    }

    /// Smallest orders that represent this model exactly.
    pub fn minimal_orders(&self) -> ModelOrders {
        ModelOrders {
            ly: self.a.degree().unwrap_or(0).max(1),
            lu: self.b.degree().unwrap_or(0) + 1,
            lw: self.c.as_ref().and_then(|c| c.degree()).unwrap_or(0),
            d: self.d,
        }
    }
}

/// Converts an ARMAX model into its EDLM with `w ≡ ζ`: `φ_y = (−a_1, …)`,
/// `φ_u = B`, `φ_w = (c_1, …)`, each zero-padded to the requested orders.
pub fn armax_to_edlm<T: Scalar>(m: &ArmaxModel<T>, orders: ModelOrders) -> Result<PgModel<T>> {
    m.validate()?;
    orders.validate()?;
    let min = m.minimal_orders();
    if orders.d != m.d {
        return Err(Error::OrdersTooSmall(format!(
            "delay d = {} must equal model delay {}",
            orders.d, m.d
        )));
    }
    if orders.ly < min.ly || orders.lu < min.lu || orders.lw < min.lw {
        return Err(Error::OrdersTooSmall(format!(
            "need L_y >= {}, L_u >= {}, L_w >= {}; got L_y={}, L_u={}, L_w={}",
            min.ly, min.lu, min.lw, orders.ly, orders.lu, orders.lw
        )));
    }
    let mut phi_y: Vec<T> = m.a.coeffs().iter().skip(1).map(|&c| -c).collect();
    phi_y.resize(orders.ly, T::zero());
    let phi_u = m.b.padded(orders.lu);
    let mut phi_w: Vec<T> =
        m.c.as_ref()
            .map(|c| c.coeffs().iter().skip(1).copied().collect())
            .unwrap_or_default();
    phi_w.resize(orders.lw, T::zero());
    PgModel::new(orders, phi_y, phi_u, phi_w)
}

/// [`armax_to_edlm`] restricted to deterministic (DARMA) models.
pub fn darma_to_edlm<T: Scalar>(m: &ArmaxModel<T>, orders: ModelOrders) -> Result<PgModel<T>> {
    if m.c.is_some() {
        return Err(Error::InvalidModel(
            "DARMA model must not carry a noise polynomial".into(),
        ));
    }
    if orders.lw != 0 {
        return Err(Error::InvalidOrders(
            "deterministic model requires L_w = 0".into(),
        ));
    }
    armax_to_edlm(m, orders)
}

/// A plant the closed-loop runner can drive. `output` is `y(k)`; `step`
/// applies `u(k)` with innovation `ζ(k+1)` and an additive equation
/// disturbance `v(k+1)`, returning `y(k+1)`.
pub trait Plant<T: Scalar> {
    fn output(&self) -> T;
    fn step(&mut self, u: T, noise: T, disturbance: T) -> T;
}

/// Newest-first history of fixed length, zero-initialized.
#[derive(Clone, Debug)]
pub(crate) struct Lagged<T> {
    buf: VecDeque<T>,
}

impl<T: Scalar> Lagged<T> {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            buf: std::iter::repeat_n(T::zero(), len).collect(),
        }
    }

    pub(crate) fn push(&mut self, v: T) {
        if self.buf.is_empty() {
            return;
        }
        self.buf.pop_back();
        self.buf.push_front(v);
    }

    /// Value `lag` steps back; zero beyond the stored window.
    pub(crate) fn get(&self, lag: usize) -> T {
        self.buf.get(lag).copied().unwrap_or_else(T::zero)
    }

    pub(crate) fn clear(&mut self) {
        self.buf.iter_mut().for_each(|v| *v = T::zero());
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = &T> {
        self.buf.iter()
    }
}

/// Direct simulation of the ARMAX difference equation from zero history.
#[derive(Clone, Debug)]
pub struct ArmaxSimulator<T: Scalar> {
    model: ArmaxModel<T>,
    y: Lagged<T>,
    u: Lagged<T>,
    zeta: Lagged<T>,
}

impl<T: Scalar> ArmaxSimulator<T> {
    pub fn new(model: ArmaxModel<T>) -> Result<Self> {
        model.validate()?;
        let ny = model.a.coeffs().len().max(1);
        let nu = model.d - 1 + model.b.coeffs().len();
        let nz = model.c.as_ref().map_or(0, |c| c.coeffs().len());
        Ok(Self {
            model,
            y: Lagged::new(ny),
            u: Lagged::new(nu),
            zeta: Lagged::new(nz),
        })
    }

    pub fn model(&self) -> &ArmaxModel<T> {
        &self.model
    }
}

impl<T: Scalar> Plant<T> for ArmaxSimulator<T> {
    fn output(&self) -> T {
        self.y.get(0)
    }

    fn step(&mut self, u: T, noise: T, disturbance: T) -> T {
        let m = &self.model;
        self.u.push(u);
        self.zeta.push(noise);
        // histories now hold u(k) at lag 0, ζ(k+1) at lag 0, y(k) at lag 0
        let mut next = disturbance;
        for (i, &a) in m.a.coeffs().iter().enumerate().skip(1) {
            next -= a * self.y.get(i - 1);
        }
        for (j, &b) in m.b.coeffs().iter().enumerate() {
            next += b * self.u.get(m.d - 1 + j);
        }
        match &m.c {
            Some(c) => {
                for (i, &ci) in c.coeffs().iter().enumerate() {
                    next += ci * self.zeta.get(i);
                }
            }
            None => next += noise,
        }
        self.y.push(next);
        next
    }
}

/// Sliding `ΔH(k)` window. One [`push`](Self::push) per sample supplies
/// `Δy(k)`, `Δu(k)` and `Δw(k)`; the input side is held `d − 1` samples so the
/// window then reads `ΔH(k)` with `Δu(k−d+1)` in the first input slot.
#[derive(Clone, Debug)]
pub struct RegressorWindow<T: Scalar> {
    orders: ModelOrders,
    dy: Lagged<T>,
    du: Lagged<T>,
    dw: Lagged<T>,
}

impl<T: Scalar> RegressorWindow<T> {
    pub fn new(orders: ModelOrders) -> Self {
        Self {
            orders,
            dy: Lagged::new(orders.ly),
            du: Lagged::new(orders.lu + orders.d - 1),
            dw: Lagged::new(orders.lw),
        }
    }

    pub fn orders(&self) -> ModelOrders {
        self.orders
    }

    pub fn push(&mut self, dy: T, du: T, dw: T) {
        self.dy.push(dy);
        self.du.push(du);
        self.dw.push(dw);
    }

    pub fn delta_h(&self) -> Vec<T> {
        let o = &self.orders;
        let mut v = Vec::with_capacity(o.dim());
        v.extend(self.dy.iter().copied());
        v.extend((0..o.lu).map(|j| self.du.get(o.d - 1 + j)));
        v.extend(self.dw.iter().copied());
        v
    }

    pub fn reset(&mut self) {
        self.dy.clear();
        self.du.clear();
        self.dw.clear();
    }
}

/// Simulates a [`PgModel`] through its incremental form
/// `y(k+1) = y(k) + φ_Lᵀ ΔH(k) + Δw(k+1)`.
#[derive(Clone, Debug)]
pub struct EdlmSimulator<T: Scalar> {
    pg: PgModel<T>,
    window: RegressorWindow<T>,
    y: T,
    dy: T,
    u: T,
    w: T,
    dw: T,
}

impl<T: Scalar> EdlmSimulator<T> {
    pub fn new(pg: PgModel<T>) -> Self {
        let window = RegressorWindow::new(pg.orders);
        let z = T::zero();
        Self {
            pg,
            window,
            y: z,
            dy: z,
            u: z,
            w: z,
            dw: z,
        }
    }

    /// One EDLM step from input increment `Δu(k)` and disturbance increment
    /// `Δw(k+1)`; returns `Δy(k+1)`.
    pub fn step_increment(&mut self, du: T, dw_next: T) -> T {
        self.window.push(self.dy, du, self.dw);
        let dy_next = self.pg.predict(&self.window.delta_h()) + dw_next;
        self.dy = dy_next;
        self.dw = dw_next;
        self.y += dy_next;
        dy_next
    }

    pub fn window(&self) -> &RegressorWindow<T> {
        &self.window
    }
}

impl<T: Scalar> Plant<T> for EdlmSimulator<T> {
    fn output(&self) -> T {
        self.y
    }

    fn step(&mut self, u: T, noise: T, disturbance: T) -> T {
        let du = u - self.u;
        self.u = u;
        let w_next = noise + disturbance;
        let dw = w_next - self.w;
        self.w = w_next;
        self.step_increment(du, dw);
        self.y
    }
}

/// Newest-first signal histories handed to a [`DifferenceEquationPlant`] map.
pub struct PlantHistory<'a, T> {
    /// `y(k), y(k−1), …`
    pub y: &'a [T],
    /// `u(k), u(k−1), …`
    pub u: &'a [T],
    /// `w(k), w(k−1), …`
    pub w: &'a [T],
    pub w_next: T,
}

/// A user-supplied, possibly nonlinear plant `y(k+1) = f(history)`. The map
/// must be deterministic in its arguments.
pub struct DifferenceEquationPlant<T: Scalar, F> {
    f: F,
    y: Vec<T>,
    u: Vec<T>,
    w: Vec<T>,
}

impl<T, F> DifferenceEquationPlant<T, F>
where
    T: Scalar,
    F: Fn(&PlantHistory<'_, T>) -> T,
{
    /// `depth` samples of each signal are retained, starting from zero.
    pub fn new(depth: usize, f: F) -> Self {
        let z = vec![T::zero(); depth.max(1)];
        Self {
            f,
            y: z.clone(),
            u: z.clone(),
            w: z,
        }
    }
}

fn shift_in<T: Copy>(buf: &mut [T], v: T) {
    buf.rotate_right(1);
    buf[0] = v;
}

impl<T, F> Plant<T> for DifferenceEquationPlant<T, F>
where
    T: Scalar,
    F: Fn(&PlantHistory<'_, T>) -> T,
{
    fn output(&self) -> T {
        self.y[0]
    }

    fn step(&mut self, u: T, noise: T, disturbance: T) -> T {
        shift_in(&mut self.u, u);
        let w_next = noise + disturbance;
        let next = (self.f)(&PlantHistory {
            y: &self.y,
            u: &self.u,
            w: &self.w,
            w_next,
        });
        shift_in(&mut self.w, w_next);
        shift_in(&mut self.y, next);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plant33() -> ArmaxModel<f64> {
        ArmaxModel::new(
            DelayPoly::from_f64(&[1.0, -1.5, 0.5]),
            DelayPoly::from_f64(&[0.1, 0.05]),
            Some(DelayPoly::from_f64(&[1.0, 0.4])),
            6,
            0.01,
        )
        .unwrap()
    }

    fn plant34() -> ArmaxModel<f64> {
        ArmaxModel::new(
            DelayPoly::from_f64(&[1.0, 0.8]),
            DelayPoly::from_f64(&[-0.5, 0.2]),
            None,
            1,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn conversion_examples() {
        let pg = armax_to_edlm(&plant33(), ModelOrders::new(2, 2, 1, 6).unwrap()).unwrap();
        assert_eq!(pg.phi_y(), &[1.5, -0.5]);
        assert_eq!(pg.phi_u(), &[0.1, 0.05]);
        assert_eq!(pg.phi_w(), &[0.4]);

        let pg = darma_to_edlm(&plant34(), ModelOrders::new(1, 2, 0, 1).unwrap()).unwrap();
        assert_eq!(pg.phi_y(), &[-0.8]);
        assert_eq!(pg.phi_u(), &[-0.5, 0.2]);
        assert_eq!(pg.orders.d, 1);

        let gain =
            ArmaxModel::new(DelayPoly::one(), DelayPoly::constant(2.5), None, 1, 0.0).unwrap();
        let pg = darma_to_edlm(&gain, ModelOrders::new(1, 1, 0, 1).unwrap()).unwrap();
        assert_eq!((pg.phi_y(), pg.phi_u()), (&[0.0][..], &[2.5][..]));
    }

    #[test]
    fn darma_examples() {
        let o = ModelOrders::new(1, 1, 0, 3).unwrap();
        let delay = ArmaxModel::new(DelayPoly::one(), DelayPoly::one(), None, 3, 0.0).unwrap();
        let pg = darma_to_edlm(&delay, o).unwrap();
        assert_eq!((pg.phi_y(), pg.phi_u()), (&[0.0][..], &[1.0][..]));

        let lag = ArmaxModel::new(
            DelayPoly::from_f64(&[1.0, -0.5]),
            DelayPoly::one(),
            None,
            1,
            0.0,
        )
        .unwrap();
        let pg = darma_to_edlm(&lag, ModelOrders::new(1, 1, 0, 1).unwrap()).unwrap();
        assert_eq!((pg.phi_y(), pg.phi_u()), (&[0.5][..], &[1.0][..]));

        assert!(darma_to_edlm(&plant33(), ModelOrders::new(2, 2, 0, 6).unwrap()).is_err());
    }

    #[test]
    fn conversion_rejects_small_orders() {
        let err = armax_to_edlm(&plant33(), ModelOrders::new(1, 2, 1, 6).unwrap()).unwrap_err();
        assert!(
            matches!(err, Error::OrdersTooSmall(ref s) if s.contains("L_y >= 2")),
            "{err}"
        );
        assert!(armax_to_edlm(&plant33(), ModelOrders::new(2, 2, 0, 6).unwrap()).is_err());
        assert!(armax_to_edlm(&plant33(), ModelOrders::new(2, 2, 1, 5).unwrap()).is_err());
    }

    #[test]
    fn conversion_round_trip_is_exact() {
        let m = plant33();
        let pg = armax_to_edlm(&m, ModelOrders::new(3, 4, 2, 6).unwrap()).unwrap();
        assert_eq!(pg.to_armax(m.noise_variance), m);
    }

    #[test]
    fn unstable_noise_polynomial_is_rejected() {
        let o = ModelOrders::new(1, 1, 1, 1).unwrap();
        assert!(PgModel::new(o, vec![0.0], vec![1.0], vec![1.5]).is_err());
        assert!(PgModel::from_estimate(o, &[0.0, 1.0, 1.5]).is_ok());
        assert!(PgModel::new(o, vec![0.0], vec![1.0], vec![0.5])
            .unwrap()
            .with_bound(1.0)
            .is_err());
    }

    #[test]
    fn armax_step_examples() {
        let mut sim = ArmaxSimulator::new(plant33()).unwrap();
        assert_eq!(sim.step(0.0, 0.0, 0.0), 0.0);

        // y(k) = 1, y(k-1) = 0 with silent inputs
        let mut m = plant33();
        m.c = None;
        let mut sim = ArmaxSimulator::new(m).unwrap();
        sim.y.push(1.0);
        assert_eq!(sim.step(0.0, 0.0, 0.0), 1.5);

        let mut sim = ArmaxSimulator::new(plant34()).unwrap();
        assert_eq!(sim.step(1.0, 0.0, 0.0), -0.5);
    }

    #[test]
    fn armax_delay_alignment() {
        let mut sim = ArmaxSimulator::new(plant33()).unwrap();
        let mut out = Vec::new();
        out.push(sim.step(1.0, 0.0, 0.0));
        for _ in 0..7 {
            out.push(sim.step(0.0, 0.0, 0.0));
        }
        // u(0) = 1 first reaches y(6) via 0.1 u(k-5)
        assert_eq!(&out[..5], &[0.0; 5]);
        assert!((out[5] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn predict_is_dot_product() {
        let pg = darma_to_edlm(&plant34(), ModelOrders::new(1, 2, 0, 1).unwrap()).unwrap();
        assert_eq!(pg.predict(&[1.0, 0.0, 0.0]), -0.8);
        assert_eq!(pg.predict(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn edlm_zero_in_zero_out() {
        let pg = darma_to_edlm(&plant34(), ModelOrders::new(1, 2, 0, 1).unwrap()).unwrap();
        let mut sim = EdlmSimulator::new(pg);
        for _ in 0..10 {
            assert_eq!(sim.step_increment(0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn regressor_window_behaviour() {
        let o = ModelOrders::new(2, 2, 1, 6).unwrap();
        let mut w = RegressorWindow::<f64>::new(o);
        w.push(3.0, 0.0, -1.0);
        let h = w.delta_h();
        assert_eq!((h[0], h[4]), (3.0, -1.0));

        w.push(4.0, 0.0, 0.0);
        w.push(5.0, 0.0, 0.0);
        assert_eq!(&w.delta_h()[..2], &[5.0, 4.0]);

        let mut w = RegressorWindow::<f64>::new(o);
        w.push(0.0, 7.0, 0.0);
        for step in 1..=6 {
            let h = w.delta_h();
            if step <= 5 {
                assert_eq!(h[2], 0.0, "too early at push {step}");
            }
            w.push(0.0, 0.0, 0.0);
            if step == 5 {
                assert_eq!(w.delta_h()[2], 7.0);
                assert_eq!(w.delta_h()[3], 0.0);
            }
        }
        assert_eq!(w.delta_h()[3], 7.0);
        w.reset();
        assert!(w.delta_h().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn difference_equation_plant_matches_armax() {
        let mut user = DifferenceEquationPlant::new(4, |h: &PlantHistory<'_, f64>| {
            -0.8 * h.y[0] - 0.5 * h.u[0] + 0.2 * h.u[1] + h.w_next
        });
        let mut reference = ArmaxSimulator::new(plant34()).unwrap();
        for k in 0..50 {
            let u = (k as f64 * 0.3).sin();
            let n = (k as f64 * 1.7).cos() * 0.1;
            assert!((user.step(u, n, 0.0) - reference.step(u, n, 0.0)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn edlm_prediction_is_linear(
            a in prop::collection::vec(-5.0f64..5.0, 5),
            b in prop::collection::vec(-5.0f64..5.0, 5),
        ) {
            let pg = armax_to_edlm(&plant33(), ModelOrders::new(2, 2, 1, 6).unwrap()).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = pg.predict(&sum);
            prop_assert!((lhs - pg.predict(&a) - pg.predict(&b)).abs() < 1e-12);
        }
    }
}
