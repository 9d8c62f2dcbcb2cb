//! Descendants of the scalar/vector block of the mother operator.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{
    block_op, blocks_of, finish, rel_diff, state_tag, CatalogEntry, Check, Coef, Derivation, Sign,
    VerificationReport,
};
use crate::error::{OpError, Result};
use crate::evolve::{solve, Scheme, SolverConfig};
use crate::flatgrid::{build_div, build_nabla, Grid, MotherSpace};
use crate::linops::{
    from_orthonormal_entries, orthonormal_entries, MatrixOperator, SpaceTag, RANK_TOL,
};
use crate::matlaw::MaterialLaw;
use crate::subspaces::{even_odd, rank_block, ProjectionPair};

const SCALAR_VECTOR: &str = "π onto L²₀ ⊕ L²₁";

struct ScalarVector {
    ms: MotherSpace,
    s0: SpaceTag,
    s1: SpaceTag,
    pv: ProjectionPair,
}

impl ScalarVector {
    fn new(grid: &Grid) -> Result<Self> {
        let ms = MotherSpace::new(grid.clone(), 1)?;
        let pv = rank_block(&ms, &[0], &[1])?;
        Ok(Self {
            s0: ms.rank_space(0).tag(),
            s1: ms.rank_space(1).tag(),
            pv,
            ms,
        })
    }

    fn derivation(&self) -> Derivation {
        Derivation::mother(self.ms.clone()).then_projection(
            SCALAR_VECTOR,
            "scalar and vector fields of the mother operator (acoustics pattern)",
            &self.pv,
        )
    }

    fn grad(&self) -> MatrixOperator {
        build_nabla(&self.ms.rank_space(0))
    }

    fn div(&self) -> Result<MatrixOperator> {
        build_div(&self.ms.rank_space(1))
    }
}

#[allow(clippy::too_many_arguments)]
fn acoustic_pattern(
    name: &str,
    labels: [&str; 2],
    grid: &Grid,
    rho: &Coef,
    kappa: &Coef,
    sigma: &Coef,
    kappa_sign: Sign,
    sigma_sign: Sign,
) -> Result<CatalogEntry> {
    let sv = ScalarVector::new(grid)?;
    let (s0, s1) = (&sv.s0, &sv.s1);
    rho.require(s0, "rho", Sign::Positive)?;
    kappa.require(s1, "kappa", kappa_sign)?;
    sigma.require(s1, "sigma", sigma_sign)?;
    let parts = [s0, s1];
    let state = state_tag(name, grid, &parts)?;
    let m0 = block_op(
        &state,
        &parts,
        &[(0, 0, &rho.on(s0)?), (1, 1, &kappa.on(s1)?)],
    )?;
    let m1 = block_op(&state, &parts, &[(1, 1, &sigma.on(s1)?)])?;
    let classical = block_op(&state, &parts, &[(0, 1, &sv.div()?), (1, 0, &sv.grad())])?;
    finish(
        name,
        sv.derivation(),
        state,
        blocks_of(&labels, &parts),
        (m0, m1),
        Some(classical),
    )
}

/// Acoustic waves `∂₀ diag(ρ, κ) + diag(0, σ) + [[0, div], [grad̊, 0]]` on
/// pressure ⊕ velocity.
pub fn acoustics(grid: &Grid, rho: &Coef, kappa: &Coef, sigma: &Coef) -> Result<CatalogEntry> {
    acoustic_pattern(
        "acoustics",
        ["p", "v"],
        grid,
        rho,
        kappa,
        sigma,
        Sign::Positive,
        Sign::NonNegative,
    )
}

/// Heat conduction: acoustics with `κ = 0`, so `σ` must be strictly positive.
pub fn heat(grid: &Grid, rho: &Coef, sigma: &Coef) -> Result<CatalogEntry> {
    acoustic_pattern(
        "heat",
        ["theta", "q"],
        grid,
        rho,
        &Coef::Scalar(0.0),
        sigma,
        Sign::NonNegative,
        Sign::Positive,
    )
}

/// `G = U |G|` with `|G| = (G*G)^{1/2}` and `U` the partial isometry from
/// `range |G|` onto `range G`, extended by zero on `ker G`.
pub fn polar_decompose(g: &MatrixOperator) -> Result<(MatrixOperator, MatrixOperator)> {
    let (dom, cod) = (g.domain().clone(), g.codomain().clone());
    let p = PolarParts::new(&orthonormal_entries(g));
    Ok((
        from_orthonormal_entries(p.u, dom.clone(), cod)?,
        from_orthonormal_entries(p.abs, dom.clone(), dom)?,
    ))
}

/// Polar factors in orthonormal coordinates, plus the eigenbasis of `|G|`.
struct PolarParts {
    u: DMatrix<f64>,
    abs: DMatrix<f64>,
    /// Columns: eigenvectors of `G*G`; complete when `G` has at least as
    /// many rows as columns.
    v: DMatrix<f64>,
    sigma: DVector<f64>,
}

impl PolarParts {
    fn new(g: &DMatrix<f64>) -> Self {
        let svd = g.clone().svd(true, true);
        let w = svd.u.expect("requested");
        let v = svd.v_t.expect("requested").transpose();
        let sigma = svd.singular_values;
        let cut = RANK_TOL * sigma.iter().fold(0.0_f64, |m, s| m.max(*s));
        let (m, n) = g.shape();
        let mut u = DMatrix::zeros(m, n);
        let mut abs = DMatrix::zeros(n, n);
        for i in 0..sigma.len() {
            let vi = v.column(i);
            abs += vi * vi.transpose() * sigma[i];
            if sigma[i] > cut {
                u += w.column(i) * vi.transpose();
            }
        }
        let abs = (&abs + abs.transpose()) * 0.5;
        Self { u, abs, v, sigma }
    }

    /// `f(|G|)` through the eigenbasis; needs a complete basis.
    fn func(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.v.nrows();
        let d = DVector::from_fn(n, |i, _| f(self.sigma.get(i).copied().unwrap_or(0.0)));
        let r = &self.v * DMatrix::from_diagonal(&d) * self.v.transpose();
        (&r + r.transpose()) * 0.5
    }
}

/// Checks `G = U|G|` and `diag(1, U) [[0, -|G|], [|G|, 0]] diag(1, U*) =
/// [[0, -G*], [G, 0]]`, both absolutely in max-entry.
pub fn verify_polar(g: &MatrixOperator) -> Result<VerificationReport> {
    let (u, abs) = polar_decompose(g)?;
    let mut report = VerificationReport::default();
    report.push(Check::new(
        "G = U|G|",
        g.max_abs_diff(&u.compose(&abs)?)?,
        1e-10,
    ));
    let (d, c) = (g.domain(), g.codomain());
    let b = MatrixOperator::block_diag(&[&MatrixOperator::identity(d), &u])?;
    let inner = MatrixOperator::from_blocks(&[d, d], &[d, d], &[(0, 1, &abs.neg()), (1, 0, &abs)])?;
    let lhs = b.compose(&inner)?.compose(&b.adjoint())?;
    let gs = g.adjoint().neg();
    let rhs = MatrixOperator::from_blocks(&[d, c], &[d, c], &[(0, 1, &gs), (1, 0, g)])?;
    report.push(Check::new(
        "polar conjugation of the block operator",
        lhs.max_abs_diff(&rhs)?,
        1e-10,
    ));
    Ok(report)
}

/// Real form of `∂₀ + i|grad̊|`: the relative of acoustics obtained with
/// `diag(1, U*)` from the polar decomposition `grad̊ = U|grad̊|`.
pub fn relativistic_schrodinger(grid: &Grid) -> Result<CatalogEntry> {
    let name = "relativistic_schrodinger";
    let sv = ScalarVector::new(grid)?;
    let s0 = &sv.s0;
    let (u, abs) = polar_decompose(&sv.grad())?;
    let b = MatrixOperator::block_diag(&[&MatrixOperator::identity(s0), &u.adjoint()])?;
    let derivation = sv.derivation().then(
        "diag(1, U*) with grad̊ = U|grad̊|",
        "polar decomposition turns acoustics into the relativistic Schrödinger operator",
        b,
    );
    let parts = [s0, s0];
    let state = state_tag(name, grid, &parts)?;
    let classical = block_op(&state, &parts, &[(0, 1, &abs.neg()), (1, 0, &abs)])?;
    let law = MaterialLaw::identity(&state);
    finish(
        name,
        derivation,
        state.clone(),
        blocks_of(&["re u", "im u"], &parts),
        (law.m0, law.m1),
        Some(classical),
    )
}

/// Dense complex matrix as a pair of real parts.
#[derive(Clone, Debug)]
struct Cx {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Cx {
    fn new(re: DMatrix<f64>, im: DMatrix<f64>) -> Self {
        Self { re, im }
    }

    fn real(re: DMatrix<f64>) -> Self {
        let im = DMatrix::zeros(re.nrows(), re.ncols());
        Self { re, im }
    }

    fn identity(n: usize) -> Self {
        Self::real(DMatrix::identity(n, n))
    }

    fn zeros(r: usize, c: usize) -> Self {
        Self::real(DMatrix::zeros(r, c))
    }

    fn mul(&self, o: &Cx) -> Cx {
        Cx::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    fn add(&self, o: &Cx) -> Cx {
        Cx::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn scale(&self, s: f64) -> Cx {
        Cx::new(&self.re * s, &self.im * s)
    }

    /// Multiplication by the imaginary unit.
    fn times_i(&self) -> Cx {
        Cx::new(-&self.im, self.re.clone())
    }

    fn adjoint(&self) -> Cx {
        Cx::new(self.re.transpose(), -self.im.transpose())
    }

    /// `[[a, b], [c, d]]`; `None` blocks are zero of the implied size.
    fn blocks(rows: [usize; 2], cols: [usize; 2], parts: [[Option<&Cx>; 2]; 2]) -> Cx {
        let mut out = Cx::zeros(rows[0] + rows[1], cols[0] + cols[1]);
        for (bi, row) in parts.iter().enumerate() {
            for (bj, part) in row.iter().enumerate() {
                if let Some(p) = part {
                    let (r0, c0) = (bi * rows[0], bj * cols[0]);
                    out.re
                        .view_mut((r0, c0), (rows[bi], cols[bj]))
                        .copy_from(&p.re);
                    out.im
                        .view_mut((r0, c0), (rows[bi], cols[bj]))
                        .copy_from(&p.im);
                }
            }
        }
        out
    }

    fn diag(a: &Cx, b: &Cx) -> Cx {
        Cx::blocks(
            [a.re.nrows(), b.re.nrows()],
            [a.re.ncols(), b.re.ncols()],
            [[Some(a), None], [None, Some(b)]],
        )
    }

    /// `[[Re, -Im], [Im, Re]]`.
    fn realify(&self) -> DMatrix<f64> {
        let (r, c) = self.re.shape();
        let mut m = DMatrix::zeros(2 * r, 2 * c);
        m.view_mut((0, 0), (r, c)).copy_from(&self.re);
        m.view_mut((0, c), (r, c)).copy_from(&(-&self.im));
        m.view_mut((r, 0), (r, c)).copy_from(&self.im);
        m.view_mut((r, c), (r, c)).copy_from(&self.re);
        m
    }

    fn rel_diff(&self, o: &Cx) -> f64 {
        rel_diff(&self.realify(), &o.realify())
    }
}

/// Identities turning `∂₀² - Δ_D` into a relative of acoustics.
///
/// All matrices are taken in orthonormal coordinates, `Δ_D = -grad̊* grad̊`
/// and `S = (−Δ_D + ε)^{1/2}`. Residuals are max-entry differences divided
/// by `max(1, max |rhs|)`. The random law of the last identity is seeded,
/// so reports are reproducible.
pub fn second_order_wave_relative(grid: &Grid, epsilon: f64) -> Result<VerificationReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(OpError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let tol = 1e-10;
    let g = orthonormal_entries(&build_nabla(&grid.scalar_space()));
    let (m, n) = g.shape();
    let polar = PolarParts::new(&g);
    let lap = g.transpose() * &g;
    let s = polar.func(|x| (x * x + epsilon).sqrt());
    let s_inv = polar.func(|x| 1.0 / (x * x + epsilon).sqrt());
    let id = DMatrix::<f64>::identity(n, n);
    let shifted = &lap + &id * epsilon;
    let re = epsilon.sqrt();
    let mut report = VerificationReport::default();

    // K_ε = [[0, Δ_D − ε], [1, 0]]
    let k_eps = Cx::blocks(
        [n, n],
        [n, n],
        [
            [None, Some(&Cx::real(-&shifted))],
            [Some(&Cx::identity(n)), None],
        ],
    );
    let sq = Cx::real(s.clone());
    let skew_s = Cx::blocks(
        [n, n],
        [n, n],
        [[None, Some(&sq.scale(-1.0))], [Some(&sq), None]],
    );
    let lhs = Cx::diag(&Cx::identity(n), &sq)
        .mul(&k_eps)
        .mul(&Cx::diag(&Cx::identity(n), &Cx::real(s_inv.clone())));
    report.push(Check::new(
        "S-conjugation of the shifted wave operator",
        lhs.rel_diff(&skew_s),
        tol,
    ));

    let abs = Cx::real(polar.abs.clone());
    let si = Cx::real(s_inv.clone());
    let u_plus = abs.mul(&si).add(&si.scale(re).times_i());
    let u_minus = abs.mul(&si).add(&si.scale(-re).times_i());
    let unit = Cx::identity(n);
    let unitarity = u_plus
        .mul(&u_plus.adjoint())
        .rel_diff(&unit)
        .max(u_minus.mul(&u_minus.adjoint()).rel_diff(&unit));
    report.push(Check::new("U± U±* = I", unitarity, tol));
    let swap = u_plus
        .adjoint()
        .rel_diff(&u_minus)
        .max(u_minus.adjoint().rel_diff(&u_plus));
    report.push(Check::new("U±* = U∓", swap, tol));
    let i_re = Cx::identity(n).scale(re).times_i();
    let upper = abs.scale(-1.0).add(&i_re);
    let lower = abs.add(&i_re);
    let z = Cx::blocks([n, n], [n, n], [[None, Some(&upper)], [Some(&lower), None]]);
    let factored = Cx::diag(&unit, &u_minus)
        .mul(&z)
        .mul(&Cx::diag(&unit, &u_plus));
    report.push(Check::new(
        "S-skew form through U±",
        factored.rel_diff(&skew_s),
        tol,
    ));

    // transformed law on L² ⊕ L²₁ for a random input law
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let m1 = Cx::real(DMatrix::from_fn(2 * n, 2 * n, |_, _| {
        rng.gen_range(-1.0..1.0)
    }));
    let gt = Cx::real(g.clone());
    let ut = Cx::real(polar.u.clone());
    let p = Cx::diag(&unit, &si.mul(&u_minus).mul(&ut.adjoint()));
    let q = Cx::diag(&unit, &ut.mul(&u_plus).mul(&sq));
    let eps_block = Cx::blocks(
        [n, n],
        [n, n],
        [[None, Some(&Cx::identity(n).scale(epsilon))], [None, None]],
    );
    let lhs = q.mul(&m1.add(&eps_block).add(&k_eps)).mul(&p);
    let coupling = si.mul(&u_minus).mul(&ut.adjoint()).scale(epsilon);
    let chiral = Cx::blocks(
        [n, m],
        [n, m],
        [[None, Some(&ut.adjoint())], [Some(&ut), None]],
    )
    .scale(re)
    .times_i();
    let grad_block = Cx::blocks(
        [n, m],
        [n, m],
        [[None, Some(&gt.adjoint().scale(-1.0))], [Some(&gt), None]],
    );
    let rhs = q
        .mul(&m1)
        .mul(&p)
        .add(&Cx::blocks(
            [n, m],
            [n, m],
            [[None, Some(&coupling)], [None, None]],
        ))
        .add(&chiral)
        .add(&grad_block);
    report.push(Check::new(
        "transformed material law",
        lhs.rel_diff(&rhs),
        tol,
    ));

    // S is unitary from H¹ with <|G|u, |G|v> + ε<u, v> onto L²
    let mut h1: f64 = 0.0;
    for _ in 0..8 {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let lhs = (&s * &u).dot(&(&s * &v));
        let rhs = (&g * &u).dot(&(&g * &v)) + epsilon * u.dot(&v);
        h1 = h1.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    report.push(Check::new("S isometric from H¹_ε onto L²", h1, tol));
    Ok(report)
}

/// Pieces shared by the even/odd descendant and the combined transport row.
struct Transport {
    sv: ScalarVector,
    even0: ProjectionPair,
    odd0: ProjectionPair,
    odd1: ProjectionPair,
    split: ProjectionPair,
    join: MatrixOperator,
    m00: MaterialLaw,
    m11: MaterialLaw,
}

impl Transport {
    fn new(grid: &Grid, law: &MaterialLaw) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(OpError::InvalidArgument("transport needs a 1D grid".into()));
        }
        let sv = ScalarVector::new(grid)?;
        let (s0, s1) = (&sv.s0, &sv.s1);
        let np = s0.dim();
        if law.space().dim() != 2 * np {
            return Err(OpError::Shape(format!(
                "transport law has dimension {}, expected {}",
                law.space().dim(),
                2 * np
            )));
        }
        let (lo, hi) = (0..np, np..2 * np);
        let block = |op: &MatrixOperator,
                     r: std::ops::Range<usize>,
                     c: std::ops::Range<usize>,
                     d: &SpaceTag,
                     t: &SpaceTag| { op.block(r, c, d.clone(), t.clone()) };
        for op in [&law.m0, &law.m1] {
            let off = block(op, lo.clone(), hi.clone(), s1, s0)?
                .max_abs()
                .max(block(op, hi.clone(), lo.clone(), s0, s1)?.max_abs());
            if off != 0.0 {
                return Err(OpError::Structural(
                    "combining the even and odd rows needs a block diagonal material law".into(),
                ));
            }
        }
        let m00 = MaterialLaw::new(
            block(&law.m0, lo.clone(), lo.clone(), s0, s0)?,
            block(&law.m1, lo.clone(), lo, s0, s0)?,
        )?;
        let m11 = MaterialLaw::new(
            block(&law.m0, hi.clone(), hi.clone(), s1, s1)?,
            block(&law.m1, hi.clone(), hi, s1, s1)?,
        )?;
        let (even0, odd0) = even_odd(&sv.ms.rank_space(0))?;
        let (_, odd1) = even_odd(&sv.ms.rank_space(1))?;
        let split = ProjectionPair::direct_sum(&[&even0, &odd1])?;
        let odd_into_s0 = odd1
            .embedding()
            .retagged(odd1.subspace().clone(), s0.clone())?;
        let join = MatrixOperator::from_blocks(
            &[s0],
            &[even0.subspace(), odd1.subspace()],
            &[(0, 0, even0.embedding()), (0, 1, &odd_into_s0)],
        )?;
        Ok(Self {
            sv,
            even0,
            odd0,
            odd1,
            split,
            join,
            m00,
            m11,
        })
    }

    fn descendant_derivation(&self) -> Derivation {
        self.sv.derivation().then_projection(
            "π_even ⊕ π_odd",
            "even/odd descendant of the one-dimensional wave system",
            &self.split,
        )
    }
}

/// Block diagonal law `diag(m00, m11)` on `L²₀ ⊕ L²₁` of a 1D grid, with
/// `M1 = 0`.
pub fn transport_law(grid: &Grid, m00: &Coef, m11: &Coef) -> Result<MaterialLaw> {
    let sv = ScalarVector::new(grid)?;
    let (s0, s1) = (&sv.s0, &sv.s1);
    m00.require(s0, "m00", Sign::Positive)?;
    m11.require(s1, "m11", Sign::Positive)?;
    let m0 = MatrixOperator::block_diag(&[&m00.on(s0)?, &m11.on(s1)?])?;
    let space = m0.domain().clone();
    MaterialLaw::new(m0, MatrixOperator::zeros(&space, &space))
}

/// The `(π_even, π_odd)` descendant of the 1D wave system on a grid
/// symmetric about 0, with law `diag(π_e M00 π_e*, π_o M11 π_o*)`.
pub fn transport_descendant(grid: &Grid, law: &MaterialLaw) -> Result<CatalogEntry> {
    let name = "transport_even_odd";
    let t = Transport::new(grid, law)?;
    let (even, odd) = (t.even0.subspace(), t.odd1.subspace());
    let parts = [even, odd];
    let state = state_tag(name, grid, &parts)?;
    let (le, lo) = (
        t.m00.congruence(t.even0.pi())?,
        t.m11.congruence(t.odd1.pi())?,
    );
    let m0 = block_op(&state, &parts, &[(0, 0, &le.m0), (1, 1, &lo.m0)])?;
    let m1 = block_op(&state, &parts, &[(0, 0, &le.m1), (1, 1, &lo.m1)])?;
    let c = t
        .odd1
        .pi()
        .compose(&t.sv.grad())?
        .compose(t.even0.embedding())?;
    let classical = block_op(&state, &parts, &[(0, 1, &c.adjoint().neg()), (1, 0, &c)])?;
    finish(
        name,
        t.descendant_derivation(),
        state,
        blocks_of(&["even", "odd"], &parts),
        (m0, m1),
        Some(classical),
    )
}

/// One-way transport `∂₀ (P_e M00 P_e + P_o M11 P_o) + P_e div P_o + P_o ∂̊ P_e`
/// on the full symmetric line, the even and odd rows combined into one.
pub fn transport(grid: &Grid, law: &MaterialLaw) -> Result<CatalogEntry> {
    let name = "transport";
    let t = Transport::new(grid, law)?;
    let s0 = &t.sv.s0;
    let state = state_tag(name, grid, &[s0])?;
    let (pe, po) = (t.even0.projector(), t.odd0.projector());
    let combine = |a: &MatrixOperator, b: &MatrixOperator| -> Result<MatrixOperator> {
        let b = b.retagged(s0.clone(), s0.clone())?;
        pe.compose(a)?
            .compose(&pe)?
            .add(&po.compose(&b)?.compose(&po)?)?
            .retagged(state.clone(), state.clone())
    };
    let m0 = combine(&t.m00.m0, &t.m11.m0)?;
    let m1 = combine(&t.m00.m1, &t.m11.m1)?;
    let div = t.sv.div()?.retagged(s0.clone(), s0.clone())?;
    let d = t.sv.grad().retagged(s0.clone(), s0.clone())?;
    let classical = pe
        .compose(&div)?
        .compose(&po)?
        .add(&po.compose(&d)?.compose(&pe)?)?;
    let derivation = t.descendant_derivation().then(
        "J = [π_even*, π_odd*]",
        "even and odd rows combined into the transport equation",
        t.join.clone(),
    );
    finish(
        name,
        derivation,
        state,
        blocks_of(&["u"], &[s0]),
        (m0, m1),
        Some(classical),
    )
}

/// Solves the combined transport row and the even/odd descendant with
/// Crank–Nicolson from the same data and compares them after mapping the
/// descendant back with `J`.
pub fn verify_transport_equivalence(grid: &Grid, law: &MaterialLaw, steps: usize) -> Result<Check> {
    let desc = transport_descendant(grid, law)?;
    let comb = transport(grid, law)?;
    let t = Transport::new(grid, law)?;
    let join = t
        .join
        .retagged(desc.space().clone(), comb.space().clone())?;
    let u0 = DVector::from_vec(grid.sample(|x| (-(x[0] - 0.25).powi(2) / 0.05).exp()));
    let tau = 0.5 * grid.axis(0).h;
    let config = SolverConfig::new(tau, steps as f64 * tau, Scheme::CrankNicolson);
    let a = solve(
        &desc
            .problem
            .clone()
            .with_initial(join.adjoint().apply(&u0)?)?,
        &config,
    )?;
    let b = solve(&comb.problem.clone().with_initial(u0)?, &config)?;
    let mut residual: f64 = 0.0;
    for (ua, ub) in a.states.iter().zip(&b.states) {
        let mapped = join.apply(ua)?;
        residual = residual.max((mapped - ub).amax() / ub.amax().max(1e-300));
    }
    Ok(Check::new(
        "combined transport row vs even/odd descendant",
        residual,
        1e-12,
    ))
}
