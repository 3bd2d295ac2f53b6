//! Staged search for disks of high contact order.
//!
//! Stage `m` works on the x-jet `(u_1, ..., u_m)`. The normal parts of `u_m`
//! (its `dphi` and `dphi∘J` components) are forced by killing `a_{m,0}` and
//! `a_{m-1,1}`; the tangential part of `u_{m-1}` transverse to `C u_1` is
//! the unknown, constrained by `L^{i,j} = 0` for `i + j = m - 2`. Components
//! along `C u_1` are removed by holomorphic reparametrization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::disks::{compose_phi_u, propagate_cr_jet, DiskJet};
use crate::geometry::{field_jet, project_vector_at_origin, ACStructure, FieldJet, Hypersurface};
use crate::levi::{classify_point, complex_tangent_basis, higher_levi_all, PointClass};
use crate::linalg::{self, AffineSolution, Matrix};
use crate::{ComplexRational, Error, Rational, Result};

use super::realize::realize_field_from_disk;

#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Exact candidates for `u_1` and exact affine solves for later stages;
    /// the only strategy that can certify the type.
    ExactStaged,
    /// Unknowns drawn from the grid `{k * step} ∩ [-1, 1]`.
    Grid { step: Rational },
    /// User-supplied candidates for `du/dx(0)`, projected to the complex
    /// tangent space; later stages are solved exactly.
    Directions(Vec<Vec<Rational>>),
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::ExactStaged => "exact".into(),
            Strategy::Grid { step } => format!("grid:{step}"),
            Strategy::Directions(d) => format!("dirs:{}", d.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub k_max: u32,
    pub strategy: Strategy,
    /// Also realize a complex tangent field along the witness disk.
    pub field_witness: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: u32,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub solved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub stage: u32,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeReport {
    pub point: Vec<Rational>,
    pub k_max: u32,
    pub strategy: String,
    pub levi_class: PointClass,
    pub lower_bound: u32,
    pub certified_exact: bool,
    pub cap_reached: bool,
    /// Witness x-jet `(u_1, ..., u_{lower-1})`, or the support disk
    /// `(u_1, u_2)` when the lower bound is 2.
    pub witness_x_jet: Vec<Vec<Rational>>,
    pub witness_disk: Option<DiskJet>,
    pub witness_field_jet: Option<FieldJet>,
    pub obstruction: Option<Obstruction>,
    pub stages: Vec<StageRecord>,
}

/// `(α + β J0) u` with `α + iβ` chosen so the first nonzero complex
/// coordinate of the result is 1.
pub fn gauge(u: &[Rational], j0: &Matrix) -> Option<Vec<Rational>> {
    let i = (0..u.len() / 2).find(|&i| !(u[2 * i].is_zero() && u[2 * i + 1].is_zero()))?;
    let (a, b) = (&u[2 * i], &u[2 * i + 1]);
    let norm = a * a + b * b;
    let alpha = a / &norm;
    let beta = -b / &norm;
    let ju = linalg::mat_vec(j0, u);
    Some(u.iter().zip(&ju).map(|(x, y)| &alpha * x + &beta * y).collect())
}

fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scaled(a: &[Rational], c: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * c).collect()
}

/// `α N0 + β J0 N0` with prescribed `dphi0` and `dphi0∘J0` values.
fn normal_vector(m: &Hypersurface, j0: &Matrix, r1: &Rational, r2: &Rational) -> Vec<Rational> {
    let n0 = m.gradient_at_origin();
    let jn0 = linalg::mat_vec(j0, &n0);
    let p = m.dphi_at_origin(&n0);
    let q = m.dphi_at_origin(&jn0);
    // [[p, q], [q, -p]] [α, β] = [r1, r2]
    let det = -(&p * &p) - &q * &q;
    let alpha = (-(&p * r1) - &q * r2) / &det;
    let beta = (&p * r2 - &q * r1) / &det;
    add(&scaled(&n0, &alpha), &scaled(&jn0, &beta))
}

/// Derivative-convention coefficients `a_{s,0}, a_{s-1,1}` (and the whole
/// trace) of the disk with x-jet `x_jet` padded by a zero to order `s`.
fn padded_trace(
    m: &Hypersurface,
    j: &ACStructure,
    x_jet: &[Vec<Rational>],
    s: u32,
) -> Result<crate::disks::DiskTrace> {
    let mut padded = x_jet.to_vec();
    padded.resize(s as usize, vec![Rational::zero(); m.dim()]);
    compose_phi_u(m, &propagate_cr_jet(&padded, j)?)
}

/// Appends `u_s` with forced normal part and zero tangential part, then
/// checks that the trace vanishes through degree `s`.
fn push_normal(m: &Hypersurface, j: &ACStructure, j0: &Matrix, x_jet: &mut Vec<Vec<Rational>>) -> Result<()> {
    let s = x_jet.len() as u32 + 1;
    let t = padded_trace(m, j, x_jet, s)?;
    let u = normal_vector(m, j0, &-t.a(s, 0), &-t.a(s - 1, 1));
    x_jet.push(u);
    let check = compose_phi_u(m, &propagate_cr_jet(x_jet, j)?)?;
    if check.series().valuation().is_some_and(|v| v <= s) {
        return Err(Error::TheoremViolation(format!(
            "degree-{s} trace survives after solving the Levi constraints"
        )));
    }
    Ok(())
}

/// Support disk `(u_1, u_2)` on which `phi ∘ u = L (x^2 + y^2) / 4 + O(3)`.
fn support_disk(m: &Hypersurface, j: &ACStructure, j0: &Matrix, u1: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    let t = padded_trace(m, j, &[u1.to_vec()], 2)?;
    let (a, b, c) = (t.a(2, 0), t.a(1, 1), t.a(0, 2));
    let two = Rational::from_integer(2.into());
    let u2 = normal_vector(m, j0, &((c - a) / two), &-b);
    Ok(vec![u1.to_vec(), u2])
}

/// Real basis of a complement of `span{u1, J0 u1}` inside the complex
/// tangent space, built from pairs `{T, J0 T}`.
fn transverse_basis(basis: &[Vec<Rational>], u1: &[Rational], j0: &Matrix) -> Vec<Vec<Rational>> {
    let mut span: Matrix = vec![u1.to_vec(), linalg::mat_vec(j0, u1)];
    let mut out = Vec::new();
    for t in basis {
        let jt = linalg::mat_vec(j0, t);
        let mut trial = span.clone();
        trial.push(t.clone());
        trial.push(jt.clone());
        if linalg::rank(&trial) == span.len() + 2 {
            span = trial;
            out.push(t.clone());
            out.push(jt);
        }
    }
    out
}

enum Tangential {
    Exact,
    Grid(Vec<Rational>),
}

struct Chain {
    x_jet: Vec<Vec<Rational>>,
    lower: u32,
    obstruction: Option<Obstruction>,
    /// Every stage so far had a unique solution.
    unique: bool,
    stages: Vec<StageRecord>,
}

fn levi_layer(m: &Hypersurface, j: &ACStructure, x_jet: &[Vec<Rational>], s: u32) -> Result<Vec<Rational>> {
    let mut all = higher_levi_all(m, j, &x_jet[..s as usize + 1], s)?;
    Ok(all.pop().expect("nonempty"))
}

fn grid_points(values: &[Rational], dims: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

/// Runs stages `2, 3, ...` from an isotropic `u_1` until the lower bound
/// reaches `k_max` or a stage has no solution.
fn run_chain(
    m: &Hypersurface,
    j: &ACStructure,
    basis: &[Vec<Rational>],
    u1: &[Rational],
    k_max: u32,
    mode: &Tangential,
) -> Result<Chain> {
    let j0 = j.at_origin()?;
    let mut chain = Chain {
        x_jet: vec![u1.to_vec()],
        lower: 2,
        obstruction: None,
        unique: true,
        stages: Vec::new(),
    };
    push_normal(m, j, &j0, &mut chain.x_jet)?;
    chain.lower = 3;
    chain.stages.push(StageRecord {
        stage: 2,
        unknowns: 0,
        equations: 1,
        rank: 0,
        solved: true,
    });
    let w = transverse_basis(basis, u1, &j0);
    let mut stage = 3;
    while chain.lower < k_max {
        let s = stage - 2;
        let slot = (stage - 2) as usize; // index of u_{stage-1}
        let base = chain.x_jet.clone();
        let eval = |t: &[Rational]| -> Result<Vec<Rational>> {
            let mut x = base.clone();
            for (tk, wk) in t.iter().zip(&w) {
                x[slot] = add(&x[slot], &scaled(wk, tk));
            }
            levi_layer(m, j, &x, s)
        };
        let f0 = eval(&vec![Rational::zero(); w.len()])?;
        let equations = f0.len();
        let mut chosen: Option<Vec<Rational>> = None;
        let mut rank = 0;
        match mode {
            Tangential::Exact => {
                let mut cols = Vec::new();
                for k in 0..w.len() {
                    let mut e = vec![Rational::zero(); w.len()];
                    e[k] = Rational::one();
                    let fk = eval(&e)?;
                    cols.push(fk.iter().zip(&f0).map(|(a, b)| a - b).collect::<Vec<_>>());
                }
                let a: Matrix = (0..equations)
                    .map(|r| cols.iter().map(|c| c[r].clone()).collect())
                    .collect();
                let rhs: Vec<Rational> = f0.iter().map(|v| -v.clone()).collect();
                match linalg::solve(&a, &rhs, w.len()) {
                    AffineSolution::Inconsistent => {
                        rank = linalg::rank(&a);
                        chain.obstruction = Some(Obstruction {
                            stage,
                            description: format!(
                                "L^{{i,j}} = 0 for i + j = {s} is inconsistent in the {} free tangential unknowns",
                                w.len()
                            ),
                        });
                    }
                    AffineSolution::Solved { particular, rank: r } => {
                        rank = r;
                        if r < w.len() {
                            chain.unique = false;
                        }
                        if linalg::is_zero_vec(&eval(&particular)?) {
                            chosen = Some(particular);
                        } else {
                            chain.unique = false;
                            chain.obstruction = Some(Obstruction {
                                stage,
                                description: format!(
                                    "constraints at stage {stage} are not affine in the unknowns"
                                ),
                            });
                        }
                    }
                }
            }
            Tangential::Grid(values) => {
                for t in grid_points(values, w.len()) {
                    if linalg::is_zero_vec(&eval(&t)?) {
                        chosen = Some(t);
                        break;
                    }
                }
                chain.unique = false;
                if chosen.is_none() {
                    chain.obstruction = Some(Obstruction {
                        stage,
                        description: format!("no grid point solves the stage-{stage} constraints"),
                    });
                }
            }
        }
        chain.stages.push(StageRecord {
            stage,
            unknowns: w.len(),
            equations,
            rank,
            solved: chosen.is_some(),
        });
        let Some(t) = chosen else { break };
        for (tk, wk) in t.iter().zip(&w) {
            chain.x_jet[slot] = add(&chain.x_jet[slot], &scaled(wk, tk));
        }
        push_normal(m, j, &j0, &mut chain.x_jet)?;
        chain.lower = stage + 1;
        stage += 1;
    }
    // the last element is only needed once the next stage has been solved
    chain.x_jet.truncate(chain.lower as usize - 1);
    Ok(chain)
}

fn cvec_to_real(c: &[ComplexRational], basis: &[Vec<Rational>], j0: &Matrix) -> Vec<Rational> {
    let d = j0.len();
    let mut u = vec![Rational::zero(); d];
    for (ci, t) in c.iter().zip(basis) {
        u = add(&u, &scaled(t, &ci.re));
        u = add(&u, &scaled(&linalg::mat_vec(j0, t), &ci.im));
    }
    u
}

fn herm(a: &[ComplexRational], h: &[Vec<ComplexRational>], b: &[ComplexRational]) -> ComplexRational {
    let mut acc = ComplexRational::zero();
    for (i, ai) in a.iter().enumerate() {
        for (k, bk) in b.iter().enumerate() {
            acc = acc + ai.conj() * &h[i][k] * bk;
        }
    }
    acc
}

/// Rational `x, y` with `x^2 + y^2 = r`, searched over small numerators.
fn two_squares(r: &Rational) -> Option<(Rational, Rational)> {
    if !r.is_positive() {
        return None;
    }
    // r = p/q = (p q) / q^2
    let (p, q) = (r.numer().clone(), r.denom().clone());
    let n = p * &q;
    let n: i64 = i64::try_from(n).ok().filter(|n| *n <= 1_000_000)?;
    let mut a = 0i64;
    while a * a <= n {
        let b2 = n - a * a;
        let b = num_integer::Roots::sqrt(&b2);
        {
            if b * b == b2 {
                let qq = Rational::from_integer(q.clone());
                return Some((Rational::from_integer(a.into()) / &qq, Rational::from_integer(b.into()) / qq));
            }
        }
        a += 1;
    }
    None
}

/// Null vectors of an indefinite Hermitian form, from a congruence
/// diagonalization over `Q(i)`.
fn isotropic_vectors(h: &[Vec<ComplexRational>]) -> Vec<Vec<ComplexRational>> {
    let k = h.len();
    let unit = |i: usize| -> Vec<ComplexRational> {
        (0..k)
            .map(|r| if r == i { ComplexRational::one() } else { ComplexRational::zero() })
            .collect()
    };
    let mut vs: Vec<Vec<ComplexRational>> = (0..k).map(unit).collect();
    let mut diag: Vec<Rational> = Vec::new();
    let mut done: Vec<Vec<ComplexRational>> = Vec::new();
    while !vs.is_empty() {
        let pos = vs.iter().position(|v| !herm(v, h, v).re.is_zero());
        let pivot = match pos {
            Some(p) => vs.remove(p),
            None => {
                // all remaining diagonal entries vanish: combine a coupled pair
                let pair = (0..vs.len())
                    .flat_map(|a| (a + 1..vs.len()).map(move |b| (a, b)))
                    .find(|&(a, b)| !herm(&vs[a], h, &vs[b]).is_zero());
                let Some((a, b)) = pair else { break };
                let c = herm(&vs[a], h, &vs[b]).conj();
                let combined: Vec<ComplexRational> =
                    vs[a].iter().zip(&vs[b]).map(|(x, y)| x + &c * y).collect();
                vs.remove(a);
                combined
            }
        };
        let d = herm(&pivot, h, &pivot).re;
        vs = vs
            .into_iter()
            .map(|v| {
                let c = herm(&pivot, h, &v) / ComplexRational::new(d.clone(), Rational::zero());
                v.iter().zip(&pivot).map(|(x, y)| x - &c * y).collect()
            })
            .collect();
        diag.push(d);
        done.push(pivot);
    }
    let mut out = Vec::new();
    // remaining vectors in `vs` are null and orthogonal to everything
    out.extend(vs);
    for a in 0..done.len() {
        for b in 0..done.len() {
            if diag[a].is_positive() && diag[b].is_negative() {
                if let Some((x, y)) = two_squares(&(-&diag[a] / &diag[b])) {
                    let c = ComplexRational::new(x, y);
                    out.push(done[a].iter().zip(&done[b]).map(|(p, q)| p + &c * q).collect());
                }
            }
        }
    }
    out
}

/// The search itself; see the module documentation.
pub fn type_search_with(m: &Hypersurface, j: &ACStructure, opts: &SearchOptions) -> Result<TypeReport> {
    let k_max = opts.k_max;
    if m.n() < 2 {
        return Err(Error::InvalidArgument("type search needs n >= 2".into()));
    }
    if k_max < 2 {
        return Err(Error::InvalidArgument("K_max must be at least 2".into()));
    }
    let jcap = j.reliable_degree().unwrap_or(0);
    if k_max + 2 > m.cap() || k_max > jcap {
        return Err(Error::CapOverflow {
            k_max,
            needed: k_max + 2,
            cap: m.cap().min(jcap + 2),
        });
    }
    if let Strategy::Directions(d) = &opts.strategy {
        if d.is_empty() {
            return Err(Error::EmptyDirections);
        }
    }
    let j0 = j.at_origin()?;
    let classification = classify_point(m, j)?;
    let basis = complex_tangent_basis(m, j)?.0;
    let (pos, neg, zero) = classification.inertia;
    let h = &classification.matrix.entries;
    let mut report = TypeReport {
        point: vec![Rational::zero(); m.dim()],
        k_max,
        strategy: opts.strategy.name(),
        levi_class: classification.class,
        lower_bound: 2,
        certified_exact: false,
        cap_reached: false,
        witness_x_jet: Vec::new(),
        witness_disk: None,
        witness_field_jet: None,
        obstruction: None,
        stages: Vec::new(),
    };
    let definite = zero == 0 && (pos == 0 || neg == 0);
    let forced = zero == 1 && (pos == 0 || neg == 0);

    let is_null = |u: &[Rational]| -> Result<bool> {
        Ok(higher_levi_all(m, j, &[u.to_vec()], 0)?[0][0].is_zero())
    };
    let mut candidates: Vec<Vec<Rational>> = Vec::new();
    let push_candidate = |u: Vec<Rational>, list: &mut Vec<Vec<Rational>>| {
        if let Some(g) = gauge(&u, &j0) {
            if !list.contains(&g) {
                list.push(g);
            }
        }
    };
    let mut fallback: Option<Vec<Rational>> = None;
    let mode = match &opts.strategy {
        Strategy::ExactStaged => {
            if !definite {
                let realified = classification.matrix.realified();
                let kk = basis.len();
                for v in linalg::nullspace(&realified, 2 * kk) {
                    let c: Vec<ComplexRational> = (0..kk)
                        .map(|i| ComplexRational::new(v[i].clone(), v[i + kk].clone()))
                        .collect();
                    let conj: Vec<ComplexRational> = c.iter().map(|z| z.conj()).collect();
                    push_candidate(cvec_to_real(&c, &basis, &j0), &mut candidates);
                    push_candidate(cvec_to_real(&conj, &basis, &j0), &mut candidates);
                }
                if pos > 0 && neg > 0 {
                    for c in isotropic_vectors(h) {
                        let conj: Vec<ComplexRational> = c.iter().map(|z| z.conj()).collect();
                        push_candidate(cvec_to_real(&c, &basis, &j0), &mut candidates);
                        push_candidate(cvec_to_real(&conj, &basis, &j0), &mut candidates);
                    }
                }
            }
            Tangential::Exact
        }
        Strategy::Grid { step } => {
            if !step.is_positive() || step > &Rational::one() {
                return Err(Error::InvalidArgument("grid step must lie in (0, 1]".into()));
            }
            let mut values = vec![Rational::zero()];
            let mut v = step.clone();
            while v <= Rational::one() {
                values.push(v.clone());
                values.push(-v.clone());
                v += step;
            }
            for coeffs in grid_points(&values, 2 * basis.len()) {
                let c: Vec<ComplexRational> = coeffs
                    .chunks(2)
                    .map(|p| ComplexRational::new(p[0].clone(), p[1].clone()))
                    .collect();
                push_candidate(cvec_to_real(&c, &basis, &j0), &mut candidates);
            }
            Tangential::Grid(values)
        }
        Strategy::Directions(dirs) => {
            for d in dirs {
                if d.len() != m.dim() {
                    return Err(Error::ShapeMismatch {
                        what: "direction length",
                        left: d.len(),
                        right: m.dim(),
                    });
                }
                let t = project_vector_at_origin(d, m, j)?;
                if fallback.is_none() && !linalg::is_zero_vec(&t) {
                    fallback = gauge(&t, &j0);
                }
                push_candidate(t, &mut candidates);
            }
            Tangential::Exact
        }
    };
    let mut null_candidates = Vec::new();
    for c in candidates {
        if is_null(&c)? {
            null_candidates.push(c);
        }
    }
    if matches!(opts.strategy, Strategy::Grid { .. }) {
        null_candidates.truncate(16);
    }

    let mut best: Option<Chain> = None;
    if k_max > 2 {
        for u1 in &null_candidates {
            let chain = run_chain(m, j, &basis, u1, k_max, &mode)?;
            if best.as_ref().is_none_or(|b| chain.lower > b.lower) {
                best = Some(chain);
            }
        }
    }
    let certify = matches!(opts.strategy, Strategy::ExactStaged);
    match best {
        Some(chain) => {
            report.lower_bound = chain.lower;
            report.cap_reached = chain.obstruction.is_none() && chain.lower >= k_max;
            // with a forced null direction every disk is gauge equivalent to
            // this chain as long as each solved stage had a unique solution
            report.certified_exact =
                certify && forced && chain.unique && chain.obstruction.is_some();
            report.obstruction = chain.obstruction;
            report.stages = chain.stages;
            report.witness_x_jet = chain.x_jet;
        }
        None => {
            let u1 = match (&opts.strategy, fallback) {
                (Strategy::Directions(_), Some(f)) => f,
                _ => gauge(&basis[0], &j0).expect("nonzero basis vector"),
            };
            if k_max == 2 && !definite {
                report.cap_reached = true;
            } else if definite {
                report.certified_exact = certify;
                report.obstruction = Some(Obstruction {
                    stage: 2,
                    description: "Levi form is definite: no nonzero null vector".into(),
                });
            } else {
                report.obstruction = Some(Obstruction {
                    stage: 2,
                    description: "no null vector of the Levi form was found by this strategy".into(),
                });
            }
            report.witness_x_jet = support_disk(m, j, &j0, &u1)?;
        }
    }
    let witness = propagate_cr_jet(&report.witness_x_jet, j)?;
    if opts.field_witness {
        let k = report.lower_bound - 2;
        let x = realize_field_from_disk(m, j, &witness, k)?;
        report.witness_field_jet = Some(field_jet(&x, j, k)?);
    }
    report.witness_disk = Some(witness);
    Ok(report)
}

/// [`type_search_with`] with a realized witness field.
pub fn type_search(m: &Hypersurface, j: &ACStructure, k_max: u32, strategy: Strategy) -> Result<TypeReport> {
    type_search_with(
        m,
        j,
        &SearchOptions {
            k_max,
            strategy,
            field_witness: true,
        },
    )
}
