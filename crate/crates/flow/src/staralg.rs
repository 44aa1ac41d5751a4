//! Block-diagonal *-algebras with a trace, quiver bimodules, commutator
//! calculus, the Laplacian Δ = [φ₀*, [φ₀, ·]] with its Green's operator, the
//! reduction step and gauge fixing.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use itlog_core::rational::to_f64;
use itlog_core::Q;

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat = DMatrix<C64>;

pub const STRUCTURAL_TOL: f64 = 1e-10;
pub const GAUGE_TOL: f64 = 1e-8;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Element of B: one square matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct BElem(pub Vec<Mat>);

/// Element of M: one `dim(dst) × dim(src)` matrix per arrow.
#[derive(Clone, Debug, PartialEq)]
pub struct MElem(pub Vec<Mat>);

macro_rules! linear_ops {
    ($t:ident) => {
        impl $t {
            pub fn add(&self, o: &$t) -> $t {
                $t(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
            }
            pub fn sub(&self, o: &$t) -> $t {
                $t(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
            }
            pub fn scale(&self, s: C64) -> $t {
                $t(self.0.iter().map(|a| a * s).collect())
            }
            pub fn scale_re(&self, s: f64) -> $t {
                self.scale(c(s))
            }
            /// Entries flattened block by block (column-major).
            pub fn entries(&self) -> impl Iterator<Item = &C64> {
                self.0.iter().flat_map(|m| m.iter())
            }
            pub fn max_abs(&self) -> f64 {
                self.entries().map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    };
}
linear_ops!(BElem);
linear_ops!(MElem);

impl BElem {
    pub fn adjoint(&self) -> BElem {
        BElem(self.0.iter().map(|m| m.adjoint()).collect())
    }

    pub fn mul(&self, o: &BElem) -> BElem {
        BElem(self.0.iter().zip(&o.0).map(|(a, b)| a * b).collect())
    }

    pub fn inverse(&self) -> Result<BElem> {
        self.0
            .iter()
            .map(|m| m.clone().try_inverse().ok_or(Error::SingularMetric))
            .collect::<Result<Vec<_>>>()
            .map(BElem)
    }

    /// (a + a*)/2.
    pub fn hermitian_part(&self) -> BElem {
        self.add(&self.adjoint()).scale_re(0.5)
    }

    /// Apply `f` to the eigenvalues of each (Hermitian) block.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> BElem {
        BElem(
            self.0
                .iter()
                .map(|m| {
                    if m.nrows() == 0 {
                        return m.clone();
                    }
                    let e = SymmetricEigen::new(m.clone());
                    let d = Mat::from_diagonal(&e.eigenvalues.map(|x| c(f(x))));
                    &e.eigenvectors * d * e.eigenvectors.adjoint()
                })
                .collect(),
        )
    }

    pub fn sqrt_psd(&self) -> BElem {
        self.spectral_map(|x| x.max(0.0).sqrt())
    }

    /// Sorted eigenvalues of each Hermitian block.
    pub fn eigenvalues(&self) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|m| {
                let mut v: Vec<f64> =
                    if m.nrows() == 0 { vec![] } else { SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect() };
                v.sort_by(f64::total_cmp);
                v
            })
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Every block admits a Cholesky factorization.
    pub fn is_positive_definite(&self) -> bool {
        self.0.iter().all(|m| m.clone().cholesky().is_some())
    }
}

impl MElem {
    pub fn norm_sq(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum()
    }
}

/// A quiver with block dimensions and trace weights: the algebra
/// B = ⊕ Mat(dᵢ) with τ(b) = Σ mᵢ tr bᵢ and the bimodule M = ⊕ Hom(V_src, V_dst).
#[derive(Clone, Debug, PartialEq)]
pub struct Ambient {
    pub ids: Vec<String>,
    pub dims: Vec<usize>,
    pub masses: Vec<f64>,
    /// `(src, dst)` per arrow.
    pub arrows: Vec<(usize, usize)>,
}

impl Ambient {
    pub fn new(ids: Vec<String>, dims: Vec<usize>, masses: Vec<f64>, arrows: Vec<(usize, usize)>) -> Result<Ambient> {
        let n = ids.len();
        if dims.len() != n || masses.len() != n {
            return Err(Error::ShapeMismatch("ids, dims and masses differ in length".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::Invalid(format!("mass {m} is not positive")));
        }
        if let Some(a) = arrows.iter().find(|(s, d)| *s >= n || *d >= n) {
            return Err(Error::Invalid(format!("arrow {a:?} references a missing vertex")));
        }
        Ok(Ambient { ids, dims, masses, arrows })
    }

    /// All blocks one-dimensional.
    pub fn thin(ids: Vec<String>, masses: Vec<f64>, arrows: Vec<(usize, usize)>) -> Result<Ambient> {
        let dims = vec![1; ids.len()];
        Ambient::new(ids, dims, masses, arrows)
    }

    pub fn n_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn is_thin(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    pub fn b_zero(&self) -> BElem {
        BElem(self.dims.iter().map(|&d| Mat::zeros(d, d)).collect())
    }

    pub fn b_identity(&self) -> BElem {
        self.b_scalars(&vec![1.0; self.n_blocks()])
    }

    /// Block-wise scalar multiples of the identity.
    pub fn b_scalars(&self, s: &[f64]) -> BElem {
        BElem(self.dims.iter().zip(s).map(|(&d, &x)| Mat::identity(d, d) * c(x)).collect())
    }

    pub fn m_zero(&self) -> MElem {
        MElem(self.arrows.iter().map(|&(s, d)| Mat::zeros(self.dims[d], self.dims[s])).collect())
    }

    pub fn check_b(&self, b: &BElem) -> Result<()> {
        let ok = b.0.len() == self.n_blocks() && b.0.iter().zip(&self.dims).all(|(m, &d)| m.shape() == (d, d));
        ok.then_some(()).ok_or_else(|| Error::ShapeMismatch("algebra element".into()))
    }

    pub fn check_m(&self, m: &MElem) -> Result<()> {
        let ok = m.0.len() == self.arrows.len()
            && m.0.iter().zip(&self.arrows).all(|(x, &(s, d))| x.shape() == (self.dims[d], self.dims[s]));
        ok.then_some(()).ok_or_else(|| Error::ShapeMismatch("bimodule element".into()))
    }

    pub fn tau(&self, b: &BElem) -> C64 {
        b.0.iter().zip(&self.masses).map(|(m, &w)| m.trace() * w).sum()
    }

    /// ⟨a, b⟩ = τ(a*b).
    pub fn inner_b(&self, a: &BElem, b: &BElem) -> C64 {
        a.0.iter().zip(&b.0).zip(&self.masses).map(|((x, y), &w)| x.dotc(y) * w).sum()
    }

    /// ⟨φ, ψ⟩ = τ(φ*ψ) = Σ_α tr(φ_α*ψ_α).
    pub fn inner_m(&self, a: &MElem, b: &MElem) -> C64 {
        a.0.iter().zip(&b.0).map(|(x, y)| x.dotc(y)).sum()
    }

    pub fn norm_b(&self, b: &BElem) -> f64 {
        self.inner_b(b, b).re.max(0.0).sqrt()
    }

    pub fn norm_m(&self, m: &MElem) -> f64 {
        m.norm_sq().sqrt()
    }

    /// b·m: acts through the target block.
    pub fn left(&self, b: &BElem, m: &MElem) -> MElem {
        MElem(m.0.iter().zip(&self.arrows).map(|(x, &(_, d))| &b.0[d] * x).collect())
    }

    /// m·b: acts through the source block.
    pub fn right(&self, m: &MElem, b: &BElem) -> MElem {
        MElem(m.0.iter().zip(&self.arrows).map(|(x, &(s, _))| x * &b.0[s]).collect())
    }

    /// φ*ψ = Σ (1/m_src) φ_α*ψ_α, living on source blocks.
    pub fn pair_src(&self, phi: &MElem, psi: &MElem) -> BElem {
        let mut out = self.b_zero();
        for ((a, b), &(s, _)) in phi.0.iter().zip(&psi.0).zip(&self.arrows) {
            out.0[s] += a.adjoint() * b * c(1.0 / self.masses[s]);
        }
        out
    }

    /// φψ* = Σ (1/m_dst) φ_αψ_α*, living on target blocks.
    pub fn pair_dst(&self, phi: &MElem, psi: &MElem) -> BElem {
        let mut out = self.b_zero();
        for ((a, b), &(_, d)) in phi.0.iter().zip(&psi.0).zip(&self.arrows) {
            out.0[d] += a * b.adjoint() * c(1.0 / self.masses[d]);
        }
        out
    }

    /// [φ, b]_α = φ_α b_src − b_dst φ_α.
    pub fn comm(&self, phi: &MElem, b: &BElem) -> MElem {
        self.right(phi, b).sub(&self.left(b, phi))
    }

    /// [φ*, m] = φ*m − mφ*.
    pub fn comm_star(&self, phi: &MElem, m: &MElem) -> BElem {
        self.pair_src(phi, m).sub(&self.pair_dst(m, phi))
    }

    /// [r, m] = r·m − m·r; equals λm on degree-λ components.
    pub fn degree_comm(&self, r: &BElem, m: &MElem) -> MElem {
        self.left(r, m).sub(&self.right(m, r))
    }

    pub fn comm_b(&self, a: &BElem, b: &BElem) -> BElem {
        a.mul(b).sub(&b.mul(a))
    }

    /// Δ(b) = [φ₀*, [φ₀, b]].
    pub fn laplacian(&self, phi0: &MElem, b: &BElem) -> BElem {
        self.comm_star(phi0, &self.comm(phi0, b))
    }

    /// τ-orthonormal basis of B: E_pq/√mᵢ.
    pub fn b_basis(&self) -> Vec<BElem> {
        let mut out = Vec::new();
        for (i, &d) in self.dims.iter().enumerate() {
            for q in 0..d {
                for p in 0..d {
                    let mut e = self.b_zero();
                    e.0[i][(p, q)] = c(1.0 / self.masses[i].sqrt());
                    out.push(e);
                }
            }
        }
        out
    }

    /// Orthonormal basis of M: matrix units per arrow.
    pub fn m_basis(&self) -> Vec<MElem> {
        let mut out = Vec::new();
        for (k, &(s, d)) in self.arrows.iter().enumerate() {
            for q in 0..self.dims[s] {
                for p in 0..self.dims[d] {
                    let mut e = self.m_zero();
                    e.0[k][(p, q)] = c(1.0);
                    out.push(e);
                }
            }
        }
        out
    }

    /// Coordinates in which the Euclidean product is τ(a*b).
    pub fn b_vec(&self, b: &BElem) -> DVector<C64> {
        DVector::from_iterator(
            self.dims.iter().map(|d| d * d).sum(),
            b.0.iter().zip(&self.masses).flat_map(|(m, &w)| m.iter().map(move |z| z * w.sqrt())),
        )
    }

    pub fn m_vec(&self, m: &MElem) -> DVector<C64> {
        DVector::from_iterator(m.0.iter().map(|x| x.len()).sum(), m.entries().copied())
    }
}

/// Subspace of B spanned by a τ-orthonormal basis.
#[derive(Clone, Debug)]
pub struct BSpace {
    pub basis: Vec<BElem>,
    /// True when the basis spans all of B (projection is the identity).
    pub full: bool,
}

/// Subspace of M spanned by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct MSpace {
    pub basis: Vec<MElem>,
    pub full: bool,
}

impl BSpace {
    pub fn full(amb: &Ambient) -> BSpace {
        BSpace { basis: amb.b_basis(), full: true }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, amb: &Ambient, b: &BElem) -> DVector<C64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|e| amb.inner_b(e, b)))
    }

    pub fn from_coords(&self, amb: &Ambient, v: &DVector<C64>) -> BElem {
        self.basis.iter().zip(v.iter()).fold(amb.b_zero(), |acc, (e, &z)| acc.add(&e.scale(z)))
    }

    /// Orthogonal projection.
    pub fn project(&self, amb: &Ambient, b: &BElem) -> BElem {
        if self.full {
            return b.clone();
        }
        self.from_coords(amb, &self.coords(amb, b))
    }

    pub fn contains(&self, amb: &Ambient, b: &BElem, tol: f64) -> bool {
        amb.norm_b(&b.sub(&self.project(amb, b))) <= tol * (1.0 + amb.norm_b(b))
    }

    /// Subspace of vectors killed by `f`, which must be linear.
    pub fn kernel_of(&self, amb: &Ambient, f: impl Fn(&BElem) -> DVector<C64>) -> BSpace {
        let cols: Vec<DVector<C64>> = self.basis.iter().map(&f).collect();
        let basis = null_combinations(&cols)
            .iter()
            .map(|v| self.from_coords(amb, v))
            .collect::<Vec<_>>();
        let full = self.full && basis.len() == self.basis.len();
        BSpace { basis, full }
    }
}

impl MSpace {
    pub fn full(amb: &Ambient) -> MSpace {
        MSpace { basis: amb.m_basis(), full: true }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, amb: &Ambient, m: &MElem) -> DVector<C64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|e| amb.inner_m(e, m)))
    }

    pub fn project(&self, amb: &Ambient, m: &MElem) -> MElem {
        if self.full {
            return m.clone();
        }
        let v = self.coords(amb, m);
        self.basis.iter().zip(v.iter()).fold(amb.m_zero(), |acc, (e, &z)| acc.add(&e.scale(z)))
    }

    pub fn kernel_of(&self, amb: &Ambient, f: impl Fn(&MElem) -> DVector<C64>) -> MSpace {
        let cols: Vec<DVector<C64>> = self.basis.iter().map(&f).collect();
        let basis = null_combinations(&cols)
            .iter()
            .map(|v| self.basis.iter().zip(v.iter()).fold(amb.m_zero(), |acc, (e, &z)| acc.add(&e.scale(z))))
            .collect::<Vec<_>>();
        let full = self.full && basis.len() == self.basis.len();
        MSpace { basis, full }
    }
}

/// Orthonormal coefficient vectors spanning the kernel of the matrix whose
/// columns are `cols`.
fn null_combinations(cols: &[DVector<C64>]) -> Vec<DVector<C64>> {
    let n = cols.len();
    if n == 0 {
        return vec![];
    }
    let rows = cols[0].len();
    if rows == 0 {
        return (0..n).map(|k| DVector::from_fn(n, |i, _| c(if i == k { 1.0 } else { 0.0 }))).collect();
    }
    let a = Mat::from_columns(cols);
    let gram = a.adjoint() * &a;
    let e = SymmetricEigen::new(gram);
    let max = e.eigenvalues.iter().copied().fold(0.0, f64::max);
    let thr = 1e-20 + 1e-12 * max;
    (0..n).filter(|&k| e.eigenvalues[k] <= thr).map(|k| e.eigenvectors.column(k).into_owned()).collect()
}

/// Orthogonal resolutions of the identity per block, indexed by labels;
/// r = Σ λ p_λ.
#[derive(Clone, Debug)]
pub struct GradedProjectors {
    pub blocks: Vec<Vec<(Q, Mat)>>,
}

impl GradedProjectors {
    /// Thin representation: one label per block.
    pub fn thin(labels: &[Q]) -> GradedProjectors {
        GradedProjectors { blocks: labels.iter().map(|l| vec![(l.clone(), Mat::identity(1, 1))]).collect() }
    }

    /// One label per block, whatever its dimension.
    pub fn thin_blocks(amb: &Ambient, labels: &[Q]) -> GradedProjectors {
        GradedProjectors { blocks: labels.iter().zip(&amb.dims).map(|(l, &d)| vec![(l.clone(), Mat::identity(d, d))]).collect() }
    }

    pub fn validate(&self, amb: &Ambient) -> Result<()> {
        if self.blocks.len() != amb.n_blocks() {
            return Err(Error::ShapeMismatch("one projector list per block".into()));
        }
        for (ps, &d) in self.blocks.iter().zip(&amb.dims) {
            let mut sum = Mat::zeros(d, d);
            for (_, p) in ps {
                if p.shape() != (d, d) {
                    return Err(Error::ShapeMismatch("projector".into()));
                }
                let err = (p * p - p).norm() + (p.adjoint() - p).norm();
                if err > STRUCTURAL_TOL * (1.0 + p.norm()) {
                    return Err(Error::Invalid("not an orthogonal projector".into()));
                }
                sum += p;
            }
            if (sum - Mat::identity(d, d)).norm() > STRUCTURAL_TOL * (1.0 + d as f64) {
                return Err(Error::Invalid("projectors do not sum to the identity".into()));
            }
        }
        Ok(())
    }

    pub fn r(&self, amb: &Ambient) -> BElem {
        BElem(
            self.blocks
                .iter()
                .zip(&amb.dims)
                .map(|(ps, &d)| ps.iter().fold(Mat::zeros(d, d), |acc, (l, p)| acc + p * c(to_f64(l))))
                .collect(),
        )
    }

    /// s^{r·k} = Σ s^{kλ} p_λ, for s > 0.
    pub fn power(&self, amb: &Ambient, s: f64, k: f64) -> BElem {
        BElem(
            self.blocks
                .iter()
                .zip(&amb.dims)
                .map(|(ps, &d)| ps.iter().fold(Mat::zeros(d, d), |acc, (l, p)| acc + p * c(s.powf(k * to_f64(l)))))
                .collect(),
        )
    }

    /// d/ds of s^{r·k}.
    pub fn power_derivative(&self, amb: &Ambient, s: f64, k: f64) -> BElem {
        BElem(
            self.blocks
                .iter()
                .zip(&amb.dims)
                .map(|(ps, &d)| {
                    ps.iter().fold(Mat::zeros(d, d), |acc, (l, p)| {
                        let e = k * to_f64(l);
                        acc + p * c(e * s.powf(e - 1.0))
                    })
                })
                .collect(),
        )
    }

    /// Graded components φ_λ = Σ_μ p_{μ+λ} φ p_μ, keyed by degree λ
    /// (descending, zero components dropped).
    pub fn components(&self, amb: &Ambient, phi: &MElem) -> Vec<(Q, MElem)> {
        let mut out: Vec<(Q, MElem)> = Vec::new();
        for (k, &(s, d)) in amb.arrows.iter().enumerate() {
            for (ls, ps) in &self.blocks[s] {
                for (ld, pd) in &self.blocks[d] {
                    let piece = pd * &phi.0[k] * ps;
                    if piece.iter().all(|z| z.norm() == 0.0) {
                        continue;
                    }
                    let deg = ld - ls;
                    let slot = match out.iter().position(|(l, _)| *l == deg) {
                        Some(i) => i,
                        None => {
                            out.push((deg, amb.m_zero()));
                            out.len() - 1
                        }
                    };
                    out[slot].1 .0[k] += piece;
                }
            }
        }
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out
    }

    pub fn component(&self, amb: &Ambient, phi: &MElem, deg: &Q) -> MElem {
        self.components(amb, phi).into_iter().find(|(l, _)| l == deg).map(|(_, m)| m).unwrap_or_else(|| amb.m_zero())
    }

    /// Degree-λ part of an algebra element: Σ_μ p_{μ+λ} b p_μ.
    pub fn b_component(&self, b: &BElem, deg: &Q) -> BElem {
        BElem(
            self.blocks
                .iter()
                .zip(&b.0)
                .map(|(ps, m)| {
                    let mut acc = Mat::zeros(m.nrows(), m.ncols());
                    for (l1, p1) in ps {
                        for (l2, p2) in ps {
                            if &(l1 - l2) == deg {
                                acc += p1 * m * p2;
                            }
                        }
                    }
                    acc
                })
                .collect(),
        )
    }

    /// Joint refinement with `other`: per block, products p·q of nonzero rank.
    pub fn refine(&self, other: &GradedProjectors) -> Vec<Vec<(Vec<Q>, Mat)>> {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(ps, qs)| {
                let mut out = Vec::new();
                for (l, p) in ps {
                    for (m, q) in qs {
                        let pq = p * q;
                        if pq.trace().re > 0.5 {
                            out.push((vec![l.clone(), m.clone()], pq));
                        }
                    }
                }
                out
            })
            .collect()
    }
}

/// Projection P onto ker Δ and Green's operator G = Δ⁺, both on a subspace
/// of B, stored in the subspace's coordinates.
#[derive(Clone, Debug)]
pub struct Green {
    pub space: BSpace,
    pub p: Mat,
    pub g: Mat,
    pub delta: Mat,
}

impl Green {
    pub fn project_kernel(&self, amb: &Ambient, b: &BElem) -> BElem {
        let v = self.space.coords(amb, b);
        self.space.from_coords(amb, &(&self.p * v))
    }

    /// G applied to the projection of `b` onto the space.
    pub fn apply(&self, amb: &Ambient, b: &BElem) -> BElem {
        let v = self.space.coords(amb, b);
        self.space.from_coords(amb, &(&self.g * v))
    }

    pub fn apply_delta(&self, amb: &Ambient, b: &BElem) -> BElem {
        let v = self.space.coords(amb, b);
        self.space.from_coords(amb, &(&self.delta * v))
    }
}

/// Checks that the projection of [φ₀*, φ₀] onto `space` is central there.
pub fn check_central(amb: &Ambient, space: &BSpace, phi0: &MElem) -> Result<()> {
    let z = space.project(amb, &amb.comm_star(phi0, phi0));
    let scale = 1.0 + amb.norm_b(&z);
    for e in &space.basis {
        let off = amb.norm_b(&amb.comm_b(&z, e));
        if off > STRUCTURAL_TOL * scale {
            return Err(Error::NotCentral(off));
        }
    }
    Ok(())
}

/// Green's operator of Δ = [φ₀*, [φ₀, ·]] restricted to `space`.
pub fn green_operator(amb: &Ambient, space: &BSpace, phi0: &MElem) -> Result<Green> {
    check_central(amb, space, phi0)?;
    let n = space.dim();
    let mut delta = Mat::zeros(n, n);
    for (l, e) in space.basis.iter().enumerate() {
        let img = space.coords(amb, &amb.laplacian(phi0, e));
        delta.set_column(l, &img);
    }
    let delta = (&delta + delta.adjoint()) * c(0.5);
    let (mut p, mut g) = (Mat::zeros(n, n), Mat::zeros(n, n));
    if n > 0 {
        let e = SymmetricEigen::new(delta.clone());
        let max = e.eigenvalues.iter().copied().fold(0.0, f64::max);
        for k in 0..n {
            let v = e.eigenvectors.column(k);
            let vv = &v * v.adjoint();
            let lam = e.eigenvalues[k];
            if lam <= 1e-9 * max || max == 0.0 {
                p += vv;
            } else {
                g += vv * c(1.0 / lam);
            }
        }
    }
    Ok(Green { space: space.clone(), p, g, delta })
}

/// B′ = {b ∈ B : [r,b] = 0, [φ₀,b] = 0} and M′ = {m ∈ M : [r,m] = −m, [φ₀*,m] = 0}.
pub fn reduce_spaces(amb: &Ambient, b: &BSpace, m: &MSpace, phi0: &MElem, r: &BElem) -> (BSpace, MSpace) {
    let b2 = b.kernel_of(amb, |x| {
        let mut v = amb.b_vec(&amb.comm_b(r, x)).as_slice().to_vec();
        v.extend(amb.m_vec(&amb.comm(phi0, x)).iter());
        DVector::from_vec(v)
    });
    let m2 = m.kernel_of(amb, |x| {
        let mut v = amb.m_vec(&amb.degree_comm(r, x).add(x)).as_slice().to_vec();
        v.extend(amb.b_vec(&amb.comm_star(phi0, x)).iter());
        DVector::from_vec(v)
    });
    (b2, m2)
}

/// A flow-ready quadruple (B, τ, ρ, M, φ), possibly a reduced level living
/// inside an ambient quiver algebra.
#[derive(Clone, Debug)]
pub struct Quadruple {
    pub amb: Ambient,
    pub bspace: BSpace,
    pub mspace: MSpace,
    pub rho: BElem,
    pub phi: MElem,
}

impl Quadruple {
    /// Full quiver quadruple with ρ = θᵢ/mᵢ on block i.
    pub fn from_quiver(amb: Ambient, theta: &[f64], phi: MElem) -> Result<Quadruple> {
        amb.check_m(&phi)?;
        if theta.len() != amb.n_blocks() {
            return Err(Error::ShapeMismatch("one θ per vertex".into()));
        }
        let rho = amb.b_scalars(&theta.iter().zip(&amb.masses).map(|(t, m)| t / m).collect::<Vec<_>>());
        let trace = amb.tau(&rho).re;
        if trace.abs() > 1e-9 * (1.0 + theta.iter().map(|t| t.abs()).sum::<f64>()) {
            return Err(Error::Invalid(format!("τ(ρ) = {trace} must vanish for phase 0")));
        }
        Ok(Quadruple { bspace: BSpace::full(&amb), mspace: MSpace::full(&amb), amb, rho, phi })
    }

    pub fn project(&self, b: &BElem) -> BElem {
        self.bspace.project(&self.amb, b)
    }
}

/// Gauge-fixed data for one level of the recursion.
#[derive(Clone, Debug)]
pub struct GaugeFixed {
    /// g with φ̃ = gφg⁻¹.
    pub g: BElem,
    pub phi: MElem,
    pub phi0: MElem,
    pub phi_m1: MElem,
    /// Residuals of the three gauge equations.
    pub residuals: [f64; 3],
}

fn conjugate(amb: &Ambient, g: &BElem, phi: &MElem) -> Result<MElem> {
    Ok(amb.right(&amb.left(g, phi), &g.inverse()?))
}

/// Degree-0 part: sub-quadruple on the commutant of r.
fn degree_zero_quadruple(q: &Quadruple, r: &BElem, phi0: &MElem) -> Quadruple {
    let amb = &q.amb;
    let space = q.bspace.kernel_of(amb, |x| amb.b_vec(&amb.comm_b(r, x)));
    Quadruple { amb: amb.clone(), bspace: space, mspace: q.mspace.clone(), rho: q.rho.clone(), phi: phi0.clone() }
}

/// Least-squares solve of [φ₀, c] = target for c in `space`; returns c and
/// the residual norm.
fn solve_comm(amb: &Ambient, space: &BSpace, phi0: &MElem, target: &MElem) -> (BElem, f64) {
    let cols: Vec<DVector<C64>> = space.basis.iter().map(|e| amb.m_vec(&amb.comm(phi0, e))).collect();
    if cols.is_empty() {
        return (amb.b_zero(), amb.norm_m(target));
    }
    let a = Mat::from_columns(&cols);
    let rhs = amb.m_vec(target);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(space.dim()));
    let x = space.from_coords(amb, &coef);
    let res = (a * coef - rhs).norm();
    (x, res)
}

/// Conjugates φ so that its graded pieces satisfy the gauge equations:
/// no degrees in (−1, 0), [φ₀*, φ₀] = ρ and harmonic φ_λ for λ ≤ −1.
pub fn gauge_fix(q: &Quadruple, grading: &GradedProjectors) -> Result<GaugeFixed> {
    let amb = &q.amb;
    grading.validate(amb)?;
    let r = grading.r(amb);
    if !q.bspace.contains(amb, &r, STRUCTURAL_TOL) {
        return Err(Error::Invalid("grading does not lie in the level algebra".into()));
    }
    let zero = Q::from_integer(0.into());
    let minus_one = Q::from_integer((-1).into());
    let scale = 1.0 + amb.norm_m(&q.phi);
    let mut phi = q.phi.clone();
    let mut g = amb.b_identity();
    if let Some((l, m)) = grading.components(amb, &phi).iter().find(|(l, _)| *l > zero) {
        if amb.norm_m(m) > GAUGE_TOL * scale {
            return Err(Error::NotSemistable(format!("component of positive degree {l}")));
        }
    }

    // (a) remove degrees in (−1, 0), nearest to 0 first.
    loop {
        let comps = grading.components(amb, &phi);
        let phi0 = comps.iter().find(|(l, _)| *l == zero).map(|(_, m)| m.clone()).unwrap_or_else(|| amb.m_zero());
        let Some((lam, piece)) = comps
            .into_iter()
            .find(|(l, m)| *l < zero && *l > minus_one && amb.norm_m(m) > GAUGE_TOL * scale * 1e-3)
        else {
            break;
        };
        let space = q.bspace.kernel_of(amb, |x| amb.b_vec(&amb.comm_b(&r, x).sub(&x.scale_re(to_f64(&lam)))));
        let (cc, res) = solve_comm(amb, &space, &phi0, &piece);
        if res > GAUGE_TOL * scale {
            return Err(Error::NotSemistable(format!("degree {lam} component is not removable (residual {res:.3e})")));
        }
        let step = amb.b_identity().add(&cc);
        phi = conjugate(amb, &step, &phi)?;
        g = step.mul(&g);
    }

    // (b) degree-zero part flowed to its fixed point.
    let phi0 = grading.component(amb, &phi, &zero);
    let q0 = degree_zero_quadruple(q, &r, &phi0);
    let h = crate::flow::flow_to_fixed_point(&q0, &amb.b_identity(), &crate::flow::FixedPointOptions::default())?;
    let step = h.sqrt_psd();
    phi = conjugate(amb, &step, &phi)?;
    g = step.mul(&g);

    // (c) harmonic representatives for λ ≤ −1, highest degree first.
    let phi0 = grading.component(amb, &phi, &zero);
    let green = green_operator(amb, &q.bspace, &phi0)?;
    let degrees: Vec<Q> = grading.components(amb, &phi).into_iter().map(|(l, _)| l).filter(|l| *l <= minus_one).collect();
    for lam in degrees {
        let piece = grading.component(amb, &phi, &lam);
        let w = q.project(&amb.comm_star(&phi0, &piece));
        let cc = green.apply(amb, &w);
        let step = amb.b_identity().add(&cc);
        phi = conjugate(amb, &step, &phi)?;
        g = step.mul(&g);
    }

    let comps = grading.components(amb, &phi);
    let phi0 = grading.component(amb, &phi, &zero);
    let phi_m1 = grading.component(amb, &phi, &minus_one);
    let gap = comps.iter().filter(|(l, _)| *l < zero && *l > minus_one).map(|(_, m)| amb.norm_m(m)).fold(0.0, f64::max);
    let moment = amb.norm_b(&q.project(&amb.comm_star(&phi0, &phi0)).sub(&q.rho));
    let harm = comps
        .iter()
        .filter(|(l, _)| *l <= minus_one)
        .map(|(_, m)| amb.norm_b(&q.project(&amb.comm_star(&phi0, m))))
        .fold(0.0, f64::max);
    let residuals = [gap, moment, harm];
    if residuals.iter().any(|&x| x > GAUGE_TOL * scale) {
        return Err(Error::NotHarmonic(residuals.iter().copied().fold(0.0, f64::max)));
    }
    Ok(GaugeFixed { g, phi, phi0, phi_m1, residuals })
}
