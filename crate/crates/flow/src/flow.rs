//! The metric gradient flow h⁻¹ḣ = [h⁻¹φ*h, φ] − ρ: right-hand side, energy,
//! adaptive Dormand-Prince integration in s = log t, fixed points and the
//! monotonicity/sandwich comparisons.

use nalgebra::{Complex, DMatrix, DVector};

use crate::staralg::{BElem, Quadruple};
use crate::{Error, Result};

/// Options for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Local error tolerance, measured as h^{-1/2} δh h^{-1/2}; `atol` is
    /// added to `rtol`, so both act relative to the current metric.
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Geometric sample density.
    pub samples_per_decade: usize,
    /// Scalar shift: ρ is replaced by ρ − f(t)·1.
    pub shift: Option<fn(f64) -> f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { rtol: 1e-9, atol: 1e-12, max_steps: 2_000_000, samples_per_decade: 100, shift: None }
    }
}

/// Sampled solution of the flow.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BElem>,
    pub energies: Vec<f64>,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &BElem {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// F(h) = P([h⁻¹φ*h, φ]).
fn moment(q: &Quadruple, h: &BElem, hinv: &BElem) -> BElem {
    let amb = &q.amb;
    let src = hinv.mul(&amb.pair_src(&q.phi, &amb.left(h, &q.phi)));
    let dst = amb.pair_dst(&amb.right(&q.phi, hinv), &q.phi).mul(h);
    q.project(&src.sub(&dst))
}

/// h⁻¹ḣ = F(h) − ρ + f·1.
pub fn log_velocity(q: &Quadruple, h: &BElem, f: f64) -> Result<BElem> {
    let hinv = h.inverse()?;
    let mut v = moment(q, h, &hinv).sub(&q.rho);
    if f != 0.0 {
        v = v.add(&q.amb.b_identity().scale_re(f));
    }
    Ok(v)
}

/// dh/dt = h([h⁻¹φ*h, φ] − ρ).
pub fn flow_rhs(q: &Quadruple, h: &BElem) -> Result<BElem> {
    Ok(h.mul(&log_velocity(q, h, 0.0)?))
}

/// S(h) = τ(h⁻¹φ*hφ) + τ(ρ log h).
pub fn energy(q: &Quadruple, h: &BElem) -> Result<f64> {
    let amb = &q.amb;
    let hinv = h.inverse()?;
    let kinetic = amb.tau(&hinv.mul(&amb.pair_src(&q.phi, &amb.left(h, &q.phi)))).re;
    let log_h = h.hermitian_part().spectral_map(f64::ln);
    Ok(kinetic + amb.tau(&q.rho.mul(&log_h)).re)
}

/// Metric pairing ⟨a, b⟩_h = τ(h⁻¹ a h⁻¹ b) of tangent vectors at h.
pub fn metric(q: &Quadruple, h: &BElem, a: &BElem, b: &BElem) -> Result<f64> {
    let hinv = h.inverse()?;
    Ok(q.amb.tau(&hinv.mul(a).mul(&hinv).mul(b)).re)
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand-Prince 5(4) stepper with FSAL.
struct Dopri<'a, F: Fn(f64, &BElem) -> Result<BElem>> {
    rhs: &'a F,
    s: f64,
    y: BElem,
    k1: BElem,
    dt: f64,
    rtol: f64,
    atol: f64,
    steps: usize,
    max_steps: usize,
}

impl<'a, F: Fn(f64, &BElem) -> Result<BElem>> Dopri<'a, F> {
    fn new(rhs: &'a F, s: f64, y: BElem, opts: &IntegrateOptions) -> Result<Self> {
        let k1 = rhs(s, &y)?;
        Ok(Dopri { rhs, s, y, k1, dt: 1e-3, rtol: opts.rtol, atol: opts.atol, steps: 0, max_steps: opts.max_steps })
    }

    /// Advance to `s_end`, calling `accept` with each accepted state and
    /// derivative; `accept` returning true stops early.
    fn advance(&mut self, s_end: f64, mut accept: impl FnMut(f64, &BElem, &BElem) -> Result<bool>) -> Result<bool> {
        while self.s < s_end {
            if self.steps >= self.max_steps {
                return Err(Error::StepFailure(format!("step budget exhausted at s = {}", self.s)));
            }
            let dt = self.dt.min(s_end - self.s);
            if dt < 1e-14 * (1.0 + self.s.abs()) {
                if s_end - self.s < 1e-12 * (1.0 + self.s.abs()) {
                    self.s = s_end;
                    break;
                }
                return Err(Error::StepFailure(format!("step size underflow at s = {}", self.s)));
            }
            let mut ks = vec![self.k1.clone()];
            let mut stage_ok = true;
            for (i, row) in A.iter().enumerate() {
                let mut yi = self.y.clone();
                for (j, &a) in row.iter().enumerate().take(i + 1) {
                    if a != 0.0 {
                        yi = yi.add(&ks[j].scale_re(dt * a));
                    }
                }
                match (self.rhs)(self.s + C[i] * dt, &yi) {
                    Ok(k) => ks.push(k),
                    Err(Error::SingularMetric) => {
                        stage_ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !stage_ok {
                self.dt *= 0.25;
                continue;
            }
            // Seventh stage was evaluated at the fifth-order solution.
            let mut y_new = self.y.clone();
            for (j, &b) in A[5].iter().enumerate() {
                if b != 0.0 {
                    y_new = y_new.add(&ks[j].scale_re(dt * b));
                }
            }
            let mut err = self.y.scale_re(0.0);
            for (j, &e) in E.iter().enumerate() {
                if e != 0.0 {
                    err = err.add(&ks[j].scale_re(dt * e));
                }
            }
            // Error in the invariant metric of positive matrices,
            // h^{-1/2} δh h^{-1/2}: relative in every eigendirection, so
            // eigenvalues far below atol stay resolved at long times.
            let w = self.y.spectral_map(|x| 1.0 / x.sqrt());
            let white = w.mul(&err).mul(&w);
            let (mut sum, mut n) = (0.0, 0usize);
            for e in white.entries() {
                sum += e.norm_sqr();
                n += 1;
            }
            let en = if n == 0 { 0.0 } else { (sum / n as f64).sqrt() / (self.rtol + self.atol) };
            self.steps += 1;
            // A non-finite estimate (overflow) shrinks the step until the
            // underflow guard reports it.
            let factor = if en == 0.0 {
                5.0
            } else if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.25
            };
            if en <= 1.0 && y_new.entries().all(|z| z.re.is_finite() && z.im.is_finite()) {
                let y_sym = y_new.hermitian_part();
                if !y_sym.is_positive_definite() {
                    self.dt = dt * 0.25;
                    if self.dt < 1e-14 {
                        return Err(Error::PositivityLost(self.s + dt));
                    }
                    continue;
                }
                self.s += dt;
                self.y = y_sym;
                self.k1 = (self.rhs)(self.s, &self.y)?;
                // Keep the step proposed before clipping to a sample point.
                self.dt = if dt < self.dt { self.dt.max(dt * factor) } else { dt * factor };
                if accept(self.s, &self.y, &self.k1)? {
                    return Ok(true);
                }
            } else {
                self.dt = dt * factor.min(1.0);
            }
        }
        Ok(false)
    }
}

/// Geometric grid from `t0` to `t1` with `per_decade` points per decade.
pub fn geometric_grid(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t1 / t0).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|k| if k == n { t1 } else { t0 * 10f64.powf(decades * k as f64 / n as f64) }).collect()
}

/// Integrates from `h0` at `t0` and samples at `times` (ascending, ≥ t0).
pub fn integrate_at(q: &Quadruple, h0: &BElem, t0: f64, times: &[f64], opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(t0 > 0.0) {
        return Err(Error::Invalid("t₀ must be positive".into()));
    }
    q.amb.check_b(h0)?;
    if !h0.hermitian_part().is_positive_definite() {
        return Err(Error::Invalid("initial metric is not positive definite".into()));
    }
    let shift = opts.shift;
    let rhs = move |s: f64, h: &BElem| -> Result<BElem> {
        let t = s.exp();
        let f = shift.map_or(0.0, |f| f(t));
        Ok(h.mul(&log_velocity(q, h, f)?).scale_re(t))
    };
    let mut stepper = Dopri::new(&rhs, t0.ln(), h0.hermitian_part(), opts)?;
    let mut out = Trajectory { times: vec![], states: vec![], energies: vec![], steps: 0 };
    for &t in times {
        if t < t0 {
            return Err(Error::Invalid(format!("sample time {t} precedes t₀")));
        }
        stepper.advance(t.ln(), |_, _, _| Ok(false))?;
        out.times.push(t);
        out.energies.push(energy(q, &stepper.y)?);
        out.states.push(stepper.y.clone());
    }
    out.steps = stepper.steps;
    Ok(out)
}

/// Integrates over `[t0, t1]` sampled on a geometric grid.
pub fn integrate(q: &Quadruple, h0: &BElem, t_span: (f64, f64), opts: &IntegrateOptions) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t1 >= t0 && t0 > 0.0) {
        return Err(Error::Invalid(format!("bad time span [{t0}, {t1}]")));
    }
    integrate_at(q, h0, t0, &geometric_grid(t0, t1, opts.samples_per_decade), opts)
}

/// Options for [`flow_to_fixed_point`].
#[derive(Clone, Copy, Debug)]
pub struct FixedPointOptions {
    /// Required ‖h⁻¹ḣ‖ at the returned point.
    pub tol: f64,
    /// ‖h⁻¹ḣ‖ below which Newton polishing is attempted.
    pub polish_start: f64,
    /// Largest Newton correction, in log coordinates, accepted by the polish.
    pub polish_radius: f64,
    /// Give up at s = log t beyond this.
    pub s_max: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { tol: 1e-10, polish_start: 1e-6, polish_radius: 0.1, s_max: 40.0 }
    }
}

/// Residual h⁻¹ḣ in real coordinates of the level's B subspace.
fn residual_coords(q: &Quadruple, h: &BElem) -> Result<DVector<f64>> {
    let c = q.bspace.coords(&q.amb, &log_velocity(q, h, 0.0)?);
    Ok(DVector::from_iterator(2 * c.len(), c.iter().map(|z| z.re).chain(c.iter().map(|z| z.im))))
}

/// Newton iteration on h = s·exp(W)·s (s = h₀^{1/2}, W Hermitian in the level
/// subspace) with a finite-difference Jacobian and a pseudo-inverse for the
/// central directions. A point is accepted when ‖h⁻¹ḣ‖ < `tol` and the
/// predicted distance to the fixed point, ‖J⁺r‖, is negligible; without a
/// fixed point that distance stays of order one. Returns `None` when the
/// iteration leaves the ball of `radius` or stalls.
fn polish(q: &Quadruple, h0: &BElem, tol: f64, radius: f64) -> Result<Option<BElem>> {
    let amb = &q.amb;
    let dirs: Vec<BElem> = q
        .bspace
        .basis
        .iter()
        .flat_map(|e| [e.hermitian_part(), e.scale(Complex::new(0.0, 1.0)).hermitian_part()])
        .filter(|d| amb.norm_b(d) > 1e-12)
        .collect();
    let s = h0.sqrt_psd();
    let at = |w: &DVector<f64>| -> BElem {
        let big_w = dirs.iter().zip(w.iter()).fold(amb.b_zero(), |acc, (d, &x)| acc.add(&d.scale_re(x)));
        s.mul(&big_w.spectral_map(f64::exp)).mul(&s).hermitian_part()
    };
    let mut w = DVector::<f64>::zeros(dirs.len());
    let mut r = residual_coords(q, h0)?;
    for _ in 0..20 {
        let eps = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(r.len(), dirs.len());
        for k in 0..dirs.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += eps;
            wm[k] -= eps;
            let col = (residual_coords(q, &at(&wp))? - residual_coords(q, &at(&wm))?) / (2.0 * eps);
            jac.set_column(k, &col);
        }
        let svd = jac.svd(true, true);
        let cut = 1e-8 * svd.singular_values.max();
        let step = svd.solve(&(-&r), cut).map_err(|e| Error::StepFailure(e.into()))?;
        let h = at(&w);
        if amb.norm_b(&log_velocity(q, &h, 0.0)?) < tol && step.norm() < 1e-6 {
            return Ok(Some(h));
        }
        let w_new = &w + step;
        let r_new = residual_coords(q, &at(&w_new))?;
        if w_new.norm() > radius || r_new.norm() >= r.norm() {
            return Ok(None);
        }
        w = w_new;
        r = r_new;
    }
    Ok(None)
}

/// Runs the flow until it is stationary; fails with `NotSemistable` when it
/// does not settle (the quadruple is not polystable).
///
/// The flow is integrated in plain time: near a fixed point the log-time
/// system is exponentially stiff. Once ‖h⁻¹ḣ‖ < `polish_start` a Newton
/// polish is attempted (at doubling times); it must reach `tol` within a small
/// neighbourhood, which data without a fixed point cannot satisfy.
pub fn flow_to_fixed_point(q: &Quadruple, h0: &BElem, opts: &FixedPointOptions) -> Result<BElem> {
    let amb = &q.amb;
    let start = log_velocity(q, h0, 0.0)?;
    if amb.norm_b(&start) < opts.tol {
        return Ok(h0.clone());
    }
    let rhs = |_: f64, h: &BElem| -> Result<BElem> { flow_rhs(q, h) };
    let iopts = IntegrateOptions { rtol: 1e-10, atol: 1e-13, ..IntegrateOptions::default() };
    let mut stepper = Dopri::new(&rhs, 1.0, h0.hermitian_part(), &iopts)?;
    let mut next_try = 0.0;
    let mut found = None;
    stepper.advance(opts.s_max.exp(), |t, h, _| {
        let v = amb.norm_b(&log_velocity(q, h, 0.0)?);
        if v < opts.polish_start && t >= next_try {
            next_try = 2.0 * t;
            found = polish(q, h, opts.tol, opts.polish_radius)?;
        }
        Ok(found.is_some())
    })?;
    match found {
        Some(h) => Ok(h),
        None => {
            let v = amb.norm_b(&log_velocity(q, &stepper.y, 0.0)?);
            Err(Error::NotSemistable(format!("flow not stationary by s = {} (‖h⁻¹ḣ‖ = {v:.3e})", opts.s_max)))
        }
    }
}

fn psd_gap(a: &BElem, b: &BElem) -> f64 {
    // Minimum eigenvalue of b − a.
    b.sub(a).hermitian_part().min_eigenvalue()
}

fn psd_scale(hs: &[&BElem]) -> f64 {
    hs.iter().flat_map(|h| h.eigenvalues().into_iter().flatten()).map(f64::abs).fold(1.0, f64::max)
}

/// True when h₂(t) − h₁(t) stays PSD at every sample, given h₁(0) ≤ h₂(0).
pub fn monotonicity_check(
    q: &Quadruple,
    h10: &BElem,
    h20: &BElem,
    t_span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<bool> {
    let scale0 = psd_scale(&[h10, h20]);
    if psd_gap(h10, h20) < -1e-12 * scale0 {
        return Err(Error::Invalid("initial data are not ordered".into()));
    }
    let a = integrate(q, h10, t_span, opts)?;
    let b = integrate(q, h20, t_span, opts)?;
    Ok(a.states.iter().zip(&b.states).all(|(x, y)| psd_gap(x, y) >= -1e-9 * psd_scale(&[x, y])))
}

/// Smallest C ≥ 1 with C⁻¹h₁ ≤ h₂ ≤ Ch₁.
pub fn sandwich_constant(h1: &BElem, h2: &BElem) -> Result<f64> {
    let root_inv = h1.hermitian_part().spectral_map(|x| 1.0 / x.sqrt());
    let rel = root_inv.mul(h2).mul(&root_inv).hermitian_part();
    let ev: Vec<f64> = rel.eigenvalues().into_iter().flatten().collect();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if !(lo > 0.0) {
        return Err(Error::SingularMetric);
    }
    Ok(hi.max(1.0 / lo).max(1.0))
}

/// True when C⁻¹h₁(t) ≤ h₂(t) ≤ Ch₁(t) at every sample, C from initial data.
pub fn sandwich_check(q: &Quadruple, h10: &BElem, h20: &BElem, t_span: (f64, f64), opts: &IntegrateOptions) -> Result<bool> {
    let cst = sandwich_constant(h10, h20)?;
    let a = integrate(q, h10, t_span, opts)?;
    let b = integrate(q, h20, t_span, opts)?;
    Ok(a.states.iter().zip(&b.states).all(|(x, y)| {
        let tol = -1e-9 * psd_scale(&[x, y]) * cst;
        psd_gap(y, &x.scale_re(cst)) >= tol && psd_gap(x, &y.scale_re(cst)) >= tol
    }))
}
