//! Runtime form of the incremental control law
//!
//! ```text
//! Δu(k) = ( Σ eᵢ·err(k−i) − Σ gⱼ·Δy(k−j) − Σ_{i≥1} hᵢ·Δu(k−i) ) / h₀
//! ```
//!
//! with `err(k) = y*(k+d) − y(k)`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::synth::ControllerPolys;

/// Past errors, output increments and input increments, newest first.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerState<T: Scalar> {
    err: VecDeque<T>,
    dy: VecDeque<T>,
    du: VecDeque<T>,
    y_prev: Option<T>,
    u_prev: T,
    clamp: Option<(T, T)>,
}

impl<T: Scalar> Default for ControllerState<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn push_front<T: Scalar>(buf: &mut VecDeque<T>, v: T, keep: usize) {
    buf.push_front(v);
    if buf.len() > keep.max(1) {
        buf.truncate(keep.max(1));
    }
}

fn dot<T: Scalar>(coeffs: &[T], hist: &VecDeque<T>, skip: usize) -> T {
    coeffs
        .iter()
        .enumerate()
        .skip(skip)
        .map(|(i, &c)| c * hist.get(i - skip).copied().unwrap_or_else(T::zero))
        .sum()
}

/// History depth kept for each buffer. Larger than any controller seen so
/// far so a controller can grow between steps without losing history.
const HISTORY: usize = 64;

impl<T: Scalar> ControllerState<T> {
    pub fn new() -> Self {
        Self {
            err: VecDeque::new(),
            dy: VecDeque::new(),
            du: VecDeque::new(),
            y_prev: None,
            u_prev: T::zero(),
            clamp: None,
        }
    }

    /// Starts from a known previous output and input.
    pub fn with_initial(y_prev: T, u_prev: T) -> Self {
        Self {
            y_prev: Some(y_prev),
            u_prev,
            ..Self::new()
        }
    }

    /// Saturates `u(k)` to `[lo, hi]`. The stored `Δu` is the applied one.
    pub fn with_clamp(mut self, lo: T, hi: T) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    pub fn u_prev(&self) -> T {
        self.u_prev
    }

    /// Computes `u(k)` from `y*(k+d)` and `y(k)`.
    pub fn control_step(&mut self, c: &ControllerPolys<T>, y_ref_ahead: T, y: T) -> Result<T> {
        let h0 = c.h.coeff(0);
        if !(h0.abs() > T::lit(T::GAIN_EPS)) {
            return Err(Error::SingularControlGain(h0.as_f64()));
        }
        let (du, u) = self.compute(c, y_ref_ahead, y, h0);
        if !u.is_finite() {
            return Err(Error::NonFinite("control input"));
        }
        self.commit(y_ref_ahead - y, y, du, u);
        Ok(u)
    }

    /// Holds `u(k) = u(k−1)` while keeping the histories current.
    pub fn hold(&mut self, y_ref_ahead: T, y: T) -> T {
        let u = self.u_prev;
        self.commit(y_ref_ahead - y, y, T::zero(), u);
        u
    }

    pub fn reset(&mut self) {
        *self = Self {
            clamp: self.clamp,
            ..Self::new()
        };
    }

    /// `Δu(k)` the law would apply, without updating state.
    pub fn peek(&self, c: &ControllerPolys<T>, y_ref_ahead: T, y: T) -> T {
        self.compute(c, y_ref_ahead, y, c.h.coeff(0)).0
    }

    fn compute(&self, c: &ControllerPolys<T>, y_ref_ahead: T, y: T, h0: T) -> (T, T) {
        let err_now = y_ref_ahead - y;
        let dy_now = self.y_prev.map_or(T::zero(), |p| y - p);
        let e = c.e.coeffs();
        let g = c.g.coeffs();
        let mut acc = e.first().map_or(T::zero(), |&e0| e0 * err_now) + dot(e, &self.err, 1);
        acc -= g.first().map_or(T::zero(), |&g0| g0 * dy_now) + dot(g, &self.dy, 1);
        acc -= dot(c.h.coeffs(), &self.du, 1);
        let mut du = acc / h0;
        let mut u = self.u_prev + du;
        if let Some((lo, hi)) = self.clamp {
            u = u.max(lo).min(hi);
            du = u - self.u_prev;
        }
        (du, u)
    }

    fn commit(&mut self, err: T, y: T, du: T, u: T) {
        let dy = self.y_prev.map_or(T::zero(), |p| y - p);
        push_front(&mut self.err, err, HISTORY);
        push_front(&mut self.dy, dy, HISTORY);
        push_front(&mut self.du, du, HISTORY);
        self.y_prev = Some(y);
        self.u_prev = u;
    }
}
