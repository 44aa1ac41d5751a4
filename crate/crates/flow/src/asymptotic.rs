//! Closed-form asymptotic solutions built by recursive reduction along an
//! iterated filtration, and their flow residuals.

use itlog_core::rational::to_f64;
use itlog_core::Q;

use crate::flow::{flow_to_fixed_point, FixedPointOptions};
use crate::staralg::{
    gauge_fix, green_operator, reduce_spaces, BElem, GaugeFixed, GradedProjectors, Green, MElem, Mat, Quadruple,
    STRUCTURAL_TOL,
};
use crate::{Error, Result};

pub const MAX_DEPTH: usize = 8;

/// One reduction step: the grading r, the gauge that fixes φ on the level
/// above and the Green's operator used for the correction.
#[derive(Clone, Debug)]
pub struct AsymptoticLevel {
    pub grading: GradedProjectors,
    pub gauge: GaugeFixed,
    pub green: Green,
    /// Quadruple this level reduces to.
    pub reduced: Quadruple,
}

/// Leading term on one joint eigenspace of the gradings.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub block: usize,
    pub exponents: Vec<Q>,
    pub projector: Mat,
    pub rank: usize,
}

/// x(t) with h = x*x, built as
/// x_ℓ(s) = s^{r/2}x_{ℓ+1}(log s)(1 + ½G(y⁻¹ky))·g, x_N constant.
#[derive(Clone, Debug)]
pub struct AsymptoticForm {
    pub quad: Quadruple,
    pub levels: Vec<AsymptoticLevel>,
    pub base: BElem,
    /// Include the Green's-operator correction factor.
    pub correction: bool,
}

/// Builds the asymptotic form for `q` from its iterated filtration, one
/// graded resolution per level.
pub fn build_asymptotic_solution(q: &Quadruple, gradings: &[GradedProjectors]) -> Result<AsymptoticForm> {
    if gradings.len() > MAX_DEPTH {
        return Err(Error::DepthExceeded(gradings.len()));
    }
    let amb = &q.amb;
    let mut cur = q.clone();
    let mut levels = Vec::new();
    for gr in gradings {
        let gauge = gauge_fix(&cur, gr)?;
        let green = green_operator(amb, &cur.bspace, &gauge.phi0)?;
        let r = gr.r(amb);
        let (bs, ms) = reduce_spaces(amb, &cur.bspace, &cur.mspace, &gauge.phi0, &r);
        let phi = ms.project(amb, &gauge.phi_m1);
        let off = amb.norm_m(&gauge.phi_m1.sub(&phi));
        if off > 1e-8 * (1.0 + amb.norm_m(&gauge.phi_m1)) {
            return Err(Error::NotHarmonic(off));
        }
        let reduced = Quadruple { amb: amb.clone(), bspace: bs, mspace: ms, rho: r, phi };
        levels.push(AsymptoticLevel { grading: gr.clone(), gauge, green, reduced: reduced.clone() });
        cur = reduced;
    }
    let h = flow_to_fixed_point(&cur, &amb.b_identity(), &FixedPointOptions::default()).map_err(|e| match e {
        Error::NotSemistable(m) => Error::NotSemistable(format!("reduced quadruple at depth {} is not polystable: {m}", levels.len())),
        e => e,
    })?;
    Ok(AsymptoticForm { quad: q.clone(), levels, base: h.sqrt_psd(), correction: true })
}

/// Value and t-derivative.
type Jet = (BElem, BElem);

impl AsymptoticForm {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Leading exponent sequences on the joint eigenspaces of all gradings.
    pub fn terms(&self) -> Vec<Term> {
        let amb = &self.quad.amb;
        let mut out = Vec::new();
        for (b, &d) in amb.dims.iter().enumerate() {
            let mut parts: Vec<(Vec<Q>, Mat)> = vec![(vec![], Mat::identity(d, d))];
            for lev in &self.levels {
                let mut next = Vec::new();
                for (ex, p) in &parts {
                    for (l, q) in &lev.grading.blocks[b] {
                        let pq = p * q;
                        let rank = pq.trace().re.round();
                        if rank >= 1.0 {
                            let mut e = ex.clone();
                            e.push(l.clone());
                            next.push((e, pq));
                        }
                    }
                }
                parts = next;
            }
            for (exponents, projector) in parts {
                let rank = projector.trace().re.round() as usize;
                out.push(Term { block: b, exponents, projector, rank });
            }
        }
        out
    }

    /// Adds `delta` to every level-`level` label of block `block`.
    pub fn shift_exponent(&mut self, level: usize, block: usize, delta: &Q) {
        for (l, _) in self.levels[level].grading.blocks[block].iter_mut() {
            *l += delta;
        }
    }

    /// Constant conjugation K = x_N g_N ⋯ g₁; KφK⁻¹ is the normalized φ.
    pub fn gauge(&self) -> BElem {
        self.levels.iter().rev().fold(self.base.clone(), |k, lev| k.mul(&lev.gauge.g))
    }

    pub fn normalized_phi(&self) -> Result<MElem> {
        let amb = &self.quad.amb;
        let k = self.gauge();
        Ok(amb.right(&amb.left(&k, &self.quad.phi), &k.inverse()?))
    }

    /// h₀ = K*K: flowing from it is the normalized representation flowing
    /// from the identity, free of transients in the reduced flows.
    pub fn normalized_start(&self) -> BElem {
        let k = self.gauge();
        k.adjoint().mul(&k).hermitian_part()
    }

    /// Smallest t at which every iterated logarithm used is positive.
    pub fn t_min(&self) -> f64 {
        if self.depth() <= 1 {
            return 0.0;
        }
        (2..self.depth()).fold(1.0, |t, _| t.exp())
    }

    fn eval_level(&self, l: usize, s: f64, ds: f64) -> Result<Jet> {
        let amb = &self.quad.amb;
        if l == self.levels.len() {
            return Ok((self.base.clone(), amb.b_zero()));
        }
        let lev = &self.levels[l];
        let (xn, dxn) = self.eval_level(l + 1, s.ln(), ds / s)?;
        let p = lev.grading.power(amb, s, 0.5);
        let dp = lev.grading.power_derivative(amb, s, 0.5).scale_re(ds);
        let y = p.mul(&xn);
        let dy = dp.mul(&xn).add(&p.mul(&dxn));
        let (z, dz) = if self.correction {
            let yi = y.inverse()?;
            let dyi = yi.mul(&dy).mul(&yi).scale_re(-1.0);
            let phi = &lev.gauge.phi_m1;
            let psi = amb.left(&y, &amb.right(phi, &yi));
            let dpsi = amb.left(&dy, &amb.right(phi, &yi)).add(&amb.left(&y, &amb.right(phi, &dyi)));
            let k = amb.pair_src(&psi, &psi).sub(&amb.pair_dst(&psi, &psi));
            let dk = amb
                .pair_src(&dpsi, &psi)
                .add(&amb.pair_src(&psi, &dpsi))
                .sub(&amb.pair_dst(&dpsi, &psi))
                .sub(&amb.pair_dst(&psi, &dpsi));
            let u = yi.mul(&k).mul(&y);
            let du = dyi.mul(&k).mul(&y).add(&yi.mul(&dk).mul(&y)).add(&yi.mul(&k).mul(&dy));
            let one = amb.b_identity();
            let f = one.add(&lev.green.apply(amb, &u).scale_re(0.5));
            let df = lev.green.apply(amb, &du).scale_re(0.5);
            (y.mul(&f), dy.mul(&f).add(&y.mul(&df)))
        } else {
            (y, dy)
        };
        Ok((z.mul(&lev.gauge.g), dz.mul(&lev.gauge.g)))
    }

    /// x(t) and ẋ(t).
    pub fn root(&self, t: f64) -> Result<Jet> {
        if !(t > self.t_min()) {
            return Err(Error::Invalid(format!("t = {t} is below the validity threshold {}", self.t_min())));
        }
        self.eval_level(0, t, 1.0)
    }

    /// h(t) = x*x.
    pub fn metric(&self, t: f64) -> Result<BElem> {
        let (x, _) = self.root(t)?;
        Ok(x.adjoint().mul(&x))
    }

    /// Σ t^{λ₁}(log t)^{λ₂}⋯ p_λ.
    pub fn leading(&self, t: f64) -> BElem {
        let amb = &self.quad.amb;
        let mut out = amb.b_zero();
        let mut logs = vec![t];
        for _ in 1..self.depth() {
            let last = *logs.last().unwrap();
            logs.push(last.ln());
        }
        for term in self.terms() {
            let f: f64 = term.exponents.iter().zip(&logs).map(|(e, s)| s.powf(to_f64(e))).product();
            out.0[term.block] += &term.projector * nalgebra::Complex::new(f, 0.0);
        }
        out
    }

    /// s(t) = ẋx⁻¹ + (ẋx⁻¹)* − [(xφx⁻¹)*, xφx⁻¹] + ρ.
    pub fn residual(&self, t: f64) -> Result<BElem> {
        let amb = &self.quad.amb;
        let (x, dx) = self.root(t)?;
        let xi = x.inverse()?;
        let v = dx.mul(&xi);
        let psi = amb.left(&x, &amb.right(&self.quad.phi, &xi));
        let moment = amb.pair_src(&psi, &psi).sub(&amb.pair_dst(&psi, &psi));
        Ok(v.add(&v.adjoint()).sub(&moment).add(&self.quad.rho))
    }
}

/// ‖s(t)‖ on a geometric grid and its fitted power-law decay.
#[derive(Clone, Debug)]
pub struct ResidualProfile {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of log‖s‖ against log t; `None` when s vanishes identically.
    pub slope: Option<f64>,
    /// Tail integral converges: slope < −1 (or s ≡ 0).
    pub integrable: bool,
}

pub fn residual_l1(form: &AsymptoticForm, t_span: (f64, f64), samples: usize) -> Result<ResidualProfile> {
    let (t0, t1) = t_span;
    let n = samples.max(2);
    let times: Vec<f64> = (0..n).map(|k| t0 * (t1 / t0).powf(k as f64 / (n - 1) as f64)).collect();
    let amb = &form.quad.amb;
    let norms = times.iter().map(|&t| Ok(amb.norm_b(&form.residual(t)?))).collect::<Result<Vec<f64>>>()?;
    let scale = 1.0 + amb.norm_b(&form.quad.rho) + amb.norm_m(&form.quad.phi).powi(2);
    if norms.iter().all(|&x| x <= STRUCTURAL_TOL * scale) {
        return Ok(ResidualProfile { times, norms, slope: None, integrable: true });
    }
    let pts: Vec<(f64, f64)> = times.iter().zip(&norms).filter(|(_, &y)| y > 0.0).map(|(t, y)| (t.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    let slope = sxy / sxx;
    Ok(ResidualProfile { times, norms, slope: Some(slope), integrable: slope < -1.0 })
}
