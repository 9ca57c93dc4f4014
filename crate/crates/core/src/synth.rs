//! Controller synthesis for the incremental law
//! `H(z⁻¹)Δu(k) = E(z⁻¹)[y*(k+d) − y(k)] − G(z⁻¹)Δy(k)` and closed-loop
//! analysis of the resulting loop.
//!
//! With `A' = 1 − z⁻¹φ_y` and `B' = z⁻ᵈφ_u`, the characteristic polynomial is
//!
//! ```text
//! T = H·A'·Δ + B'·(E + G·Δ)
//! ```
//!
//! Four designs are provided:
//!
//! * [`synth_pole_placement`]: `E` from `φ_u·E = B_m`, then `H`, `G` from the
//!   pole-placement identity so that `T = (1 + z⁻¹φ_w)·Δ·A_m`;
//! * [`synth_min_phase`]: `A'H + B'G = T₁` with a PID-shaped `E`;
//! * [`synth_mfac`]: the MFAC choice `H = λΔᵐ + φ_{L_y+1}φ_u`, `E = φ_{L_y+1}`,
//!   `G = φ_{L_y+1}φ_y`, which is the classic MFAC law for `m = 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PgModel;
use crate::poly::{
    delta_tol, final_value_limit, DelayPoly, FinalValue, RationalTf, StabilityVerdict,
};
use crate::scalar::Scalar;

/// Condition numbers above this reject a design as singular.
const MAX_CONDITION: f64 = 1e13;

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerPolys<T: Scalar> {
    pub h: DelayPoly<T>,
    pub e: DelayPoly<T>,
    pub g: DelayPoly<T>,
    pub d: usize,
}

impl<T: Scalar> ControllerPolys<T> {
    pub fn new(h: DelayPoly<T>, e: DelayPoly<T>, g: DelayPoly<T>, d: usize) -> Result<Self> {
        let h0 = h.coeff(0);
        if !(h0.abs() > T::lit(T::GAIN_EPS)) {
            return Err(Error::SingularControlGain(h0.as_f64()));
        }
        Ok(Self { h, e, g, d })
    }
}

/// How `E` is obtained in a pole-placement design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "")]
pub enum EChoice<T: Scalar> {
    /// Solve `φ_u·E = B_m`.
    FromZeros,
    Explicit(DelayPoly<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSpec<T: Scalar> {
    pub am: DelayPoly<T>,
    pub bm: DelayPoly<T>,
    pub e_choice: EChoice<T>,
}

impl<T: Scalar> DesignSpec<T> {
    pub fn new(am: DelayPoly<T>, bm: DelayPoly<T>) -> Self {
        Self {
            am,
            bm,
            e_choice: EChoice::FromZeros,
        }
    }

    /// Zero polynomial `B_m = Δ·φ_u·c` scaled for unit DC gain from
    /// `y*(k)` to `y(k)`.
    pub fn unit_dc(pg: &PgModel<T>, am: DelayPoly<T>) -> Result<Self> {
        let phi_u1 = pg.phi_u_poly().at_one();
        if phi_u1.abs() <= T::lit(T::GAIN_EPS) {
            return Err(Error::DesignPrecondition("phi_u(1) = 0".into()));
        }
        let c = pg.noise_poly().at_one() * am.at_one() / phi_u1;
        let bm = (&DelayPoly::delta() * &pg.phi_u_poly()).scale(c);
        Ok(Self::new(am, bm))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PidSpec<T> {
    pub kp: T,
    pub ki: T,
    #[serde(default)]
    pub kd: T,
}

/// `E = k_p(1 − z⁻¹) + k_i + k_d(1 − 2z⁻¹ + z⁻²)`.
pub fn pid_to_e<T: Scalar>(pid: &PidSpec<T>) -> DelayPoly<T> {
    let two = T::lit(2.0);
    DelayPoly::new(vec![
        pid.kp + pid.ki + pid.kd,
        -pid.kp - two * pid.kd,
        pid.kd,
    ])
}

/// Solves `a·x + b·y = rhs` for polynomials `x`, `y` with `deg y < deg a`
/// by coefficient matching. The system is square and nonsingular exactly
/// when `a` and `b` are coprime.
pub fn solve_diophantine<T: Scalar>(
    a: &DelayPoly<T>,
    b: &DelayPoly<T>,
    rhs: &DelayPoly<T>,
) -> Result<(DelayPoly<T>, DelayPoly<T>)> {
    let na = a
        .degree()
        .ok_or(Error::ZeroPolynomial("Diophantine left factor"))?;
    let nb = b
        .degree()
        .ok_or(Error::ZeroPolynomial("Diophantine right factor"))?;
    let nr = rhs.degree().map_or(0, |d| d as isize);
    let nx = (nb as isize - 1).max(nr - na as isize).max(0) as usize;
    let nx = if nb == 0 {
        nx.max(nr.max(0) as usize)
    } else {
        nx
    };
    let ny = na; // y has na coefficients
    let n = nx + 1 + ny;

    let mut m = vec![T::zero(); n * n];
    for j in 0..=nx {
        for (i, &c) in a.coeffs().iter().enumerate() {
            if i + j < n {
                m[(i + j) * n + j] = c;
            }
        }
    }
    for j in 0..ny {
        for (i, &c) in b.coeffs().iter().enumerate() {
            if i + j < n {
                m[(i + j) * n + nx + 1 + j] = c;
            }
        }
    }
    let rhs_v: Vec<T> = (0..n).map(|i| rhs.coeff(i)).collect();
    if rhs.coeffs().len() > n {
        return Err(Error::DesignPrecondition(format!(
            "target degree {} exceeds what the design can match ({})",
            nr,
            n - 1
        )));
    }

    let cond = condition_number(&m, n);
    if !(cond < MAX_CONDITION) {
        return Err(Error::SingularDesign(cond));
    }
    let sol = gauss_solve(m, rhs_v, n).ok_or(Error::SingularDesign(cond))?;
    let x = DelayPoly::new(sol[..=nx].to_vec());
    let y = DelayPoly::new(sol[nx + 1..].to_vec());

    let resid = (&(&(a * &x) + &(b * &y)) - rhs).max_abs();
    if resid > T::lit(T::RESIDUAL_TOL) * T::one().max(rhs.max_abs()) {
        return Err(Error::DesignResidual(resid.as_f64()));
    }
    Ok((x, y))
}

fn condition_number<T: Scalar>(m: &[T], n: usize) -> f64 {
    let mat = DMatrix::<f64>::from_fn(n, n, |i, j| m[i * n + j].as_f64());
    let sv = mat.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` system.
fn gauss_solve<T: Scalar>(mut m: Vec<T>, mut b: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i * n + col]
                .abs()
                .partial_cmp(&m[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot * n + col].is_zero() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let p = m[col * n + col];
        for row in (col + 1)..n {
            let f = m[row * n + col] / p;
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[row * n + k] -= f * v;
            }
            let bc = b[col];
            b[row] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = ((row + 1)..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Pole-placement design: the closed loop gets characteristic polynomial
/// `(1 + z⁻¹φ_w)·Δ·A_m` and zeros `B_m`.
///
/// `B_m` must vanish at `z = 1` and be divisible by `φ_u`.
pub fn synth_pole_placement<T: Scalar>(
    pg: &PgModel<T>,
    spec: &DesignSpec<T>,
) -> Result<ControllerPolys<T>> {
    let o = pg.orders;
    let deg_am = spec.am.degree().ok_or(Error::ZeroPolynomial("A_m"))?;
    if deg_am + o.lw > o.ly + o.lu + o.d - 1 {
        return Err(Error::DesignPrecondition(format!(
            "deg A_m + L_w = {} exceeds L_y + L_u + d - 1 = {}",
            deg_am + o.lw,
            o.ly + o.lu + o.d - 1
        )));
    }
    let am_verdict = spec.am.stability()?;
    if !am_verdict.stable {
        return Err(Error::DesignPrecondition(format!(
            "A_m must be strictly stable (max root modulus {})",
            am_verdict.max_modulus
        )));
    }
    let phi_u = pg.phi_u_poly();
    if phi_u.at_one().abs() <= T::lit(T::GAIN_EPS) {
        return Err(Error::DesignPrecondition("phi_u(1) = 0".into()));
    }

    let e = match &spec.e_choice {
        EChoice::FromZeros => {
            let bm1 = spec.bm.at_one();
            if bm1.abs() > delta_tol(&spec.bm) {
                return Err(Error::IncompatibleDc(bm1.as_f64()));
            }
            let (q, r) = spec.bm.div_rem(&phi_u)?;
            let rem = r.max_abs();
            if rem > T::lit(T::RESIDUAL_TOL) * T::one().max(spec.bm.max_abs()) {
                return Err(Error::UnattainableZeros(rem.as_f64()));
            }
            q
        }
        EChoice::Explicit(e) => e.clone(),
    };

    let b_prime = phi_u.shift(o.d);
    let target = &(&pg.noise_poly() * &DelayPoly::delta()) * &spec.am;
    let rhs13 = &target - &(&b_prime * &e);
    let (reduced, rem) = rhs13.div_delta();
    if rem.abs() > delta_tol(&rhs13) {
        return Err(Error::IncompatibleDc((&b_prime * &e).at_one().as_f64()));
    }
    let (h, g) = solve_diophantine(&pg.output_poly(), &b_prime, &reduced)?;

    let lhs =
        &(&b_prime * &e) + &(&(&(&pg.output_poly() * &h) + &(&b_prime * &g)) * &DelayPoly::delta());
    let resid = (&lhs - &target).max_abs();
    if resid > T::lit(T::RESIDUAL_TOL) * T::one().max(target.max_abs()) {
        return Err(Error::DesignResidual(resid.as_f64()));
    }
    ControllerPolys::new(h, e, g, o.d)
}

/// A minimum-phase design together with the verdict on its full
/// characteristic polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct MinPhaseDesign<T: Scalar> {
    pub polys: ControllerPolys<T>,
    pub char_poly: DelayPoly<T>,
    pub verdict: StabilityVerdict<T>,
}

/// Solves `(1 − z⁻¹φ_y)H + z⁻ᵈφ_uG = T₁` and pairs it with the PID-shaped
/// `E`, without checking the minimum-phase preconditions. Adaptive loops use
/// this form because early estimates need not be minimum phase.
pub fn design_min_phase<T: Scalar>(
    pg: &PgModel<T>,
    target_t1: &DelayPoly<T>,
    e: DelayPoly<T>,
) -> Result<ControllerPolys<T>> {
    let b_prime = pg.phi_u_poly().shift(pg.orders.d);
    let (h, g) = solve_diophantine(&pg.output_poly(), &b_prime, target_t1)?;
    ControllerPolys::new(h, e, g, pg.orders.d)
}

/// Minimum-phase design with its preconditions enforced: `φ_u` and `T₁` must
/// be strictly stable.
pub fn synth_min_phase<T: Scalar>(
    pg: &PgModel<T>,
    target_t1: &DelayPoly<T>,
    pid: &PidSpec<T>,
) -> Result<MinPhaseDesign<T>> {
    let phi_u = pg.phi_u_poly();
    let v = phi_u.stability()?;
    if !v.stable {
        return Err(Error::DesignPrecondition(format!(
            "phi_u is not minimum phase (root modulus {})",
            v.max_modulus
        )));
    }
    let v = target_t1.stability()?;
    if !v.stable {
        return Err(Error::DesignPrecondition(format!(
            "target T1 is not strictly stable (root modulus {})",
            v.max_modulus
        )));
    }
    let polys = design_min_phase(pg, target_t1, pid_to_e(pid))?;
    let char_poly = char_poly(pg, &polys);
    let verdict = char_poly.stability()?;
    Ok(MinPhaseDesign {
        polys,
        char_poly,
        verdict,
    })
}

/// MFAC design with `m` extra integrators in `H`; `m = 0` is the current MFAC
/// law. Defined for unit delay.
pub fn synth_mfac<T: Scalar>(pg: &PgModel<T>, lambda: T, m: usize) -> Result<ControllerPolys<T>> {
    if pg.orders.d != 1 {
        return Err(Error::DesignPrecondition(format!(
            "MFAC design needs d = 1, got {}",
            pg.orders.d
        )));
    }
    if !(lambda >= T::zero()) {
        return Err(Error::DesignPrecondition(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let gain = pg.input_gain();
    let h = &DelayPoly::delta_pow(m).scale(lambda) + &pg.phi_u_poly().scale(gain);
    let e = DelayPoly::constant(gain);
    let g = pg.phi_y_poly().scale(gain);
    ControllerPolys::new(h, e, g, 1)
}

/// `T = H·(1 − z⁻¹φ_y)·Δ + z⁻ᵈφ_u·(E + G·Δ)`.
pub fn char_poly<T: Scalar>(pg: &PgModel<T>, c: &ControllerPolys<T>) -> DelayPoly<T> {
    let delta = DelayPoly::delta();
    let loop_part = &(&c.h * &pg.output_poly()) * &delta;
    let b_prime = pg.phi_u_poly().shift(pg.orders.d);
    let feedback = &c.e + &(&c.g * &delta);
    &loop_part + &(&b_prime * &feedback)
}

/// Reference class for static-error analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputClass<T> {
    Step,
    Ramp {
        ts: T,
    },
    /// `y*(k) = kⁿ`.
    Power {
        n: u32,
    },
}

impl<T: Scalar> InputClass<T> {
    /// Order of the pole at `z = 1` and numerator value there.
    pub fn z_transform_at_one(&self) -> (usize, T) {
        match *self {
            InputClass::Step => (1, T::one()),
            InputClass::Ramp { ts } => (2, ts),
            InputClass::Power { n } => {
                let fact = (1..=n).fold(T::one(), |acc, i| acc * T::lit(i as f64));
                (n as usize + 1, fact)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputClass::Step => "step".into(),
            InputClass::Ramp { ts } => format!("ramp(T_s={ts})"),
            InputClass::Power { n } => format!("power({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopReport<T: Scalar> {
    pub char_poly: DelayPoly<T>,
    pub verdict: StabilityVerdict<T>,
    /// From `y*(k+d)` to `y(k)`.
    pub tf_ref_to_y: RationalTf<T>,
    /// From `y*(k+d)` to `u(k)`.
    pub tf_ref_to_u: RationalTf<T>,
    /// From an equation disturbance `v(k)` to `y(k)`.
    pub tf_dist_to_y: RationalTf<T>,
    /// From `y*(k)` to the tracking error `e(k) = y*(k) − y(k)`.
    pub tf_ref_to_error: RationalTf<T>,
    pub static_errors: Vec<(InputClass<T>, Result<FinalValue<T>>)>,
}

pub fn closed_loop_report<T: Scalar>(
    pg: &PgModel<T>,
    c: &ControllerPolys<T>,
) -> Result<ClosedLoopReport<T>> {
    let t = char_poly(pg, c);
    let verdict = t.stability()?;
    let phi_u = pg.phi_u_poly();
    let d = pg.orders.d;
    let tf_ref_to_y = RationalTf::new(&phi_u.shift(d) * &c.e, t.clone())?;
    let tf_ref_to_u = RationalTf::new(&c.e * &pg.output_poly(), t.clone())?;
    let tf_dist_to_y = RationalTf::new(&c.h * &DelayPoly::delta(), t.clone())?;
    let tf_ref_to_error = error_tf(pg, c)?;
    let static_errors = [
        InputClass::Step,
        InputClass::Ramp { ts: T::one() },
        InputClass::Power { n: 2 },
        InputClass::Power { n: 3 },
    ]
    .into_iter()
    .map(|class| (class, static_error(pg, c, class)))
    .collect();
    Ok(ClosedLoopReport {
        char_poly: t,
        verdict,
        tf_ref_to_y,
        tf_ref_to_u,
        tf_dist_to_y,
        tf_ref_to_error,
        static_errors,
    })
}

/// `(T − φ_u·E)/T`: the tracking error `y*(k) − y(k)` per unit of `y*(k)`.
pub fn error_tf<T: Scalar>(pg: &PgModel<T>, c: &ControllerPolys<T>) -> Result<RationalTf<T>> {
    let t = char_poly(pg, c);
    let num = &t - &(&pg.phi_u_poly() * &c.e);
    RationalTf::new(num, t)
}

/// Steady-state tracking error for the given reference class.
pub fn static_error<T: Scalar>(
    pg: &PgModel<T>,
    c: &ControllerPolys<T>,
    class: InputClass<T>,
) -> Result<FinalValue<T>> {
    let f = error_tf(pg, c)?.cancel_delta();
    let v = f.den.stability()?;
    if !v.stable {
        return Err(Error::UnstableLoop(v.max_modulus.as_f64()));
    }
    let (order, num1) = class.z_transform_at_one();
    final_value_limit(&f, order, num1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{armax_to_edlm, ArmaxModel, ModelOrders};
    use proptest::prelude::*;

    fn p(c: &[f64]) -> DelayPoly<f64> {
        DelayPoly::from_f64(c)
    }

    fn pg34() -> PgModel<f64> {
        PgModel::new(
            ModelOrders::new(1, 2, 0, 1).unwrap(),
            vec![-0.8],
            vec![-0.5, 0.2],
            vec![],
        )
        .unwrap()
    }

    fn pg33_deterministic() -> PgModel<f64> {
        PgModel::new(
            ModelOrders::new(2, 2, 0, 6).unwrap(),
            vec![1.5, -0.5],
            vec![0.1, 0.05],
            vec![],
        )
        .unwrap()
    }

    fn assert_close(a: &DelayPoly<f64>, b: &DelayPoly<f64>, tol: f64) {
        let diff = (a - b).max_abs();
        assert!(diff < tol, "{a} vs {b} (diff {diff:e})");
    }

    #[test]
    fn pid_examples() {
        let e = pid_to_e(&PidSpec {
            kp: 0.35,
            ki: 0.15,
            kd: 0.0,
        });
        assert_close(&e, &p(&[0.5, -0.35]), 1e-15);
        assert_eq!(
            pid_to_e(&PidSpec {
                kp: 0.0,
                ki: 1.0,
                kd: 0.0
            }),
            p(&[1.0])
        );
        assert_close(
            &pid_to_e(&PidSpec {
                kp: 0.25,
                ki: 0.25,
                kd: 0.0,
            }),
            &p(&[0.5, -0.25]),
            1e-15,
        );
        assert_close(
            &pid_to_e(&PidSpec {
                kp: 0.3,
                ki: 0.2,
                kd: 0.0,
            }),
            &p(&[0.5, -0.3]),
            1e-15,
        );
        assert_close(
            &pid_to_e(&PidSpec {
                kp: 0.0,
                ki: 0.0,
                kd: 1.0,
            }),
            &p(&[1.0, -2.0, 1.0]),
            1e-15,
        );
    }

    #[test]
    fn mfac_examples() {
        let c = synth_mfac(&pg34(), 5.0, 0).unwrap();
        assert_close(&c.h, &p(&[5.25, -0.1]), 1e-15);
        assert_eq!(c.e, p(&[-0.5]));
        assert_close(&c.g, &p(&[0.4]), 1e-15);

        let c = synth_mfac(&pg34(), 5.0, 1).unwrap();
        assert_close(&c.h, &p(&[5.25, -5.1]), 1e-15);

        let c = synth_mfac(&pg34(), 0.0, 0).unwrap();
        assert_close(&c.h, &p(&[0.25, -0.1]), 1e-15);

        let flat = PgModel::new(
            ModelOrders::new(1, 1, 0, 1).unwrap(),
            vec![0.3],
            vec![0.0],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            synth_mfac(&flat, 0.0, 0),
            Err(Error::SingularControlGain(_))
        ));
        assert!(synth_mfac(&pg33_deterministic(), 1.0, 0).is_err());
    }

    #[test]
    fn mfac_char_poly_examples() {
        let c = synth_mfac(&pg34(), 5.0, 0).unwrap();
        assert_close(&char_poly(&pg34(), &c), &p(&[5.25, -1.1, -4.0]), 1e-14);
        let c = synth_mfac(&pg34(), 5.0, 1).unwrap();
        assert_close(&char_poly(&pg34(), &c), &p(&[5.25, -6.1, -3.0, 4.0]), 1e-14);

        let open =
            ControllerPolys::new(p(&[1.0]), DelayPoly::zero(), DelayPoly::zero(), 1).unwrap();
        let want = &DelayPoly::delta() * &pg34().output_poly();
        assert_close(&char_poly(&pg34(), &open), &want, 1e-15);
    }

    #[test]
    fn pole_placement_minimal_case() {
        // phi_y = 0, phi_u = 1, d = 1, A_m = 1, B_m = Δ: H + z⁻¹G = 1 − z⁻¹
        let pg = PgModel::new(
            ModelOrders::new(1, 1, 0, 1).unwrap(),
            vec![0.0],
            vec![1.0],
            vec![],
        )
        .unwrap();
        let c = synth_pole_placement(&pg, &DesignSpec::new(p(&[1.0]), p(&[1.0, -1.0]))).unwrap();
        assert_close(&c.e, &p(&[1.0, -1.0]), 1e-15);
        assert_close(&c.h, &p(&[1.0, -1.0]), 1e-15);
        assert!(c.g.is_zero());
        assert_close(&char_poly(&pg, &c), &DelayPoly::delta(), 1e-15);
    }

    #[test]
    fn pole_placement_on_ramp_plant() {
        let pg = pg34();
        let am = p(&[1.0, -0.5]);
        let spec = DesignSpec::unit_dc(&pg, am.clone()).unwrap();
        let c = synth_pole_placement(&pg, &spec).unwrap();
        let t = char_poly(&pg, &c);
        assert_close(&t, &(&DelayPoly::delta() * &am), 1e-9);
        // unit DC gain from y*(k) to y(k)
        let rep = closed_loop_report(&pg, &c).unwrap();
        let dc = RationalTf::new(&pg.phi_u_poly() * &c.e, t)
            .unwrap()
            .dc_gain()
            .unwrap();
        assert!((dc - 1.0).abs() < 1e-9);
        assert_eq!(rep.static_errors[0].1, Ok(FinalValue::Finite(0.0)));
    }

    #[test]
    fn pole_placement_preconditions() {
        let pg = pg34();
        let too_long = DesignSpec::new(p(&[1.0, 0.1, 0.1, 0.1, 0.1]), p(&[1.0, -1.0]));
        assert!(matches!(
            synth_pole_placement(&pg, &too_long),
            Err(Error::DesignPrecondition(_))
        ));
        let dc = DesignSpec::new(p(&[1.0, -0.5]), p(&[-0.5, 0.2]));
        assert!(matches!(
            synth_pole_placement(&pg, &dc),
            Err(Error::IncompatibleDc(_))
        ));
        let zeros = DesignSpec::new(p(&[1.0, -0.5]), p(&[1.0, -1.0]));
        assert!(matches!(
            synth_pole_placement(&pg, &zeros),
            Err(Error::UnattainableZeros(_))
        ));
        let unstable = DesignSpec::new(p(&[1.0, -1.5]), p(&[1.0, -1.0]));
        assert!(synth_pole_placement(&pg, &unstable).is_err());
    }

    #[test]
    fn pole_placement_singular_when_factors_shared() {
        // 1 − z⁻¹φ_y = 1 − 0.5z⁻¹ and φ_u = 1 − 0.5z⁻¹ share a root
        let pg = PgModel::new(
            ModelOrders::new(1, 2, 0, 1).unwrap(),
            vec![0.5],
            vec![1.0, -0.5],
            vec![],
        )
        .unwrap();
        let err = synth_pole_placement(&pg, &DesignSpec::unit_dc(&pg, p(&[1.0, 0.2])).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::SingularDesign(c) if c > 1e12), "{err}");
    }

    #[test]
    fn min_phase_examples() {
        let pg = pg33_deterministic();
        let pid = PidSpec {
            kp: 0.3,
            ki: 0.2,
            kd: 0.0,
        };
        let d = synth_min_phase(&pg, &p(&[1.0]), &pid).unwrap();
        assert_close(&d.polys.e, &p(&[0.5, -0.3]), 1e-15);
        let b_prime = pg.phi_u_poly().shift(6);
        let t1 = &(&pg.output_poly() * &d.polys.h) + &(&b_prime * &d.polys.g);
        assert_close(&t1, &p(&[1.0]), 1e-9);
        let expected = &DelayPoly::delta() + &(&b_prime * &p(&[0.5, -0.3]));
        assert_close(&d.char_poly, &expected, 1e-9);
        assert_eq!(d.char_poly.degree(), Some(8));
        assert!(d.verdict.stable, "max modulus {}", d.verdict.max_modulus);

        let trivial = PgModel::new(
            ModelOrders::new(1, 1, 0, 1).unwrap(),
            vec![0.0],
            vec![1.0],
            vec![],
        )
        .unwrap();
        let d = synth_min_phase(&trivial, &p(&[1.0]), &pid).unwrap();
        assert_eq!((d.polys.h.clone(), d.polys.g.is_zero()), (p(&[1.0]), true));

        let nmp = PgModel::new(
            ModelOrders::new(1, 2, 0, 1).unwrap(),
            vec![0.0],
            vec![1.0, 2.0],
            vec![],
        )
        .unwrap();
        assert!(synth_min_phase(&nmp, &p(&[1.0]), &pid).is_err());
    }

    #[test]
    fn static_error_examples() {
        let pg = pg34();
        let ramp = InputClass::Ramp { ts: 1.0 };
        let c = synth_mfac(&pg, 5.0, 0).unwrap();
        let v = static_error(&pg, &c, ramp).unwrap().finite().unwrap();
        assert!((v - 60.0).abs() < 1e-10);
        assert_eq!(
            static_error(&pg, &c, InputClass::Step).unwrap(),
            FinalValue::Finite(0.0)
        );
        assert_eq!(
            static_error(&pg, &c, InputClass::Power { n: 2 }).unwrap(),
            FinalValue::Diverges
        );
        let v = static_error(&pg, &c, InputClass::Ramp { ts: 0.1 })
            .unwrap()
            .finite()
            .unwrap();
        assert!((v - 6.0).abs() < 1e-10);

        let c0 = synth_mfac(&pg, 0.0, 0).unwrap();
        for n in 1..8 {
            assert_eq!(
                static_error(&pg, &c0, InputClass::Power { n }).unwrap(),
                FinalValue::Finite(0.0)
            );
        }
        let c1 = synth_mfac(&pg, 5.0, 1).unwrap();
        assert_eq!(
            static_error(&pg, &c1, ramp).unwrap(),
            FinalValue::Finite(0.0)
        );
    }

    #[test]
    fn static_error_rejects_unstable_loops() {
        // λ = 0 with a non-minimum-phase φ_u makes T = φ₂φ_u unstable
        let pg = PgModel::new(
            ModelOrders::new(1, 2, 0, 1).unwrap(),
            vec![0.2],
            vec![0.5, 1.0],
            vec![],
        )
        .unwrap();
        let c = synth_mfac(&pg, 0.0, 0).unwrap();
        assert!(matches!(
            static_error(&pg, &c, InputClass::Step),
            Err(Error::UnstableLoop(_))
        ));
        let rep = closed_loop_report(&pg, &c).unwrap();
        assert!(!rep.verdict.stable);
    }

    #[test]
    fn constant_disturbance_is_rejected() {
        let pg = pg34();
        let c = synth_mfac(&pg, 5.0, 0).unwrap();
        let rep = closed_loop_report(&pg, &c).unwrap();
        assert_eq!(
            final_value_limit(&rep.tf_dist_to_y, 1, 1.0).unwrap(),
            FinalValue::Finite(0.0)
        );
        assert_eq!(rep.char_poly, rep.tf_ref_to_y.den);
    }

    #[test]
    fn lambda_monotone_ramp_error() {
        let pg = pg34();
        let errs: Vec<f64> = [0.0, 1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|&l| {
                let c = synth_mfac(&pg, l, 0).unwrap();
                static_error(&pg, &c, InputClass::Ramp { ts: 1.0 })
                    .unwrap()
                    .finite()
                    .unwrap()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] > w[0]), "{errs:?}");
    }

    #[test]
    fn report_for_stochastic_plant() {
        let plant = ArmaxModel::new(
            p(&[1.0, -1.5, 0.5]),
            p(&[0.1, 0.05]),
            Some(p(&[1.0, 0.4])),
            6,
            0.01,
        )
        .unwrap();
        let pg = armax_to_edlm(&plant, ModelOrders::new(2, 2, 1, 6).unwrap()).unwrap();
        let spec = DesignSpec::unit_dc(&pg, p(&[1.0, -0.3])).unwrap();
        let c = synth_pole_placement(&pg, &spec).unwrap();
        let want = &(&pg.noise_poly() * &DelayPoly::delta()) * &p(&[1.0, -0.3]);
        assert_close(&char_poly(&pg, &c), &want, 1e-9);
    }

    fn random_pg() -> impl Strategy<Value = PgModel<f64>> {
        (1usize..=3, 1usize..=3).prop_flat_map(|(ly, lu)| {
            (
                prop::collection::vec(-0.9f64..0.9, ly),
                prop::collection::vec(-1.0f64..1.0, lu - 1),
                0.3f64..1.5,
            )
                .prop_map(move |(y, tail, u0)| {
                    let u: Vec<f64> = std::iter::once(u0).chain(tail).collect();
                    PgModel::new(
                        ModelOrders {
                            ly,
                            lu,
                            lw: 0,
                            d: 1,
                        },
                        y,
                        u,
                        vec![],
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn mfac_char_poly_identity(pg in random_pg(), lambda in 0.0f64..20.0) {
            let c = synth_mfac(&pg, lambda, 0);
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            let want = &(&DelayPoly::delta() * &pg.output_poly()).scale(lambda)
                + &pg.phi_u_poly().scale(pg.input_gain());
            prop_assert!((&char_poly(&pg, &c) - &want).max_abs() < 1e-12);
        }

        #[test]
        fn dc_tracking_is_exact(pg in random_pg(), lambda in 0.1f64..20.0) {
            let c = synth_mfac(&pg, lambda, 0).unwrap();
            let t = char_poly(&pg, &c);
            let dc = pg.phi_u_poly().at_one() * c.e.at_one();
            prop_assert!((t.at_one() - dc).abs() < 1e-12);
        }

        #[test]
        fn ramp_error_matches_closed_form(pg in random_pg(), lambda in 0.1f64..20.0) {
            let c = synth_mfac(&pg, lambda, 0).unwrap();
            let got = static_error(&pg, &c, InputClass::Ramp { ts: 1.0 });
            prop_assume!(got.is_ok());
            let phi_u1 = pg.phi_u_poly().at_one();
            prop_assume!(phi_u1.abs() > 1e-3);
            let closed = lambda * (1.0 - pg.phi_y_poly().at_one()) / (pg.input_gain() * phi_u1);
            let got = got.unwrap().finite().unwrap();
            prop_assert!((got - closed).abs() <= 1e-10 * closed.abs().max(1.0), "{} vs {}", got, closed);
        }
    }
}
