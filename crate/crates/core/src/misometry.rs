//! Deciding m-isometricity of the shift, two independent ways.
//!
//! The shift is m-isometric exactly when, for every basis vector, the
//! m-th forward difference of `n -> ||S^n e_v||^2` vanishes, i.e. every
//! such sequence is a polynomial of degree at most m-1; orthogonality
//! of distinct basis orbits reduces the operator condition to this
//! per-vertex one. The *defect oracle* sweeps those differences over a
//! finite power window (tails are covered exactly through their
//! polynomial closed forms). The *rank criterion* instead fits the
//! off-cycle norm polynomials, assembles a small linear system for the
//! candidate cycle polynomial, and reads the verdict off matrix ranks;
//! it is finite and complete. `cross_validate` runs both and compares.
//!
//! Also here: the complete hyperexpansivity sweep (alternating moment
//! sums) and a generator for a parametric family of 3-isometric
//! instances (affine tails, quadratic cycle polynomial).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exactmath::{
    binomial, interpolate, ExactError, Polynomial, Rational, RationalMatrix,
};
use crate::graph::{FunctionalGraph, VertexId};
use crate::shift::{MeasuredGraph, NormTable, ShiftError, TailTemplate};

use num_traits::{One, Signed, Zero};

/// Extra table entries beyond the interpolation nodes that a
/// polynomial fit must also reproduce before it is believed.
pub const FIT_MARGIN: usize = 8;

/// Default sweep horizon for order-m checks on a cycle of length kappa.
pub fn default_horizon(m: usize, kappa: usize) -> usize {
    (2 * m + 10).max(kappa + m + 5)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MisometryError {
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("order {m} is too small here (minimum {min})")]
    OrderTooSmall { m: usize, min: usize },
    #[error("table horizon {horizon} is too small (need at least {required})")]
    HorizonTooSmall { required: usize, horizon: usize },
    #[error("cycle length {kappa} is too small here (minimum {min})")]
    KappaTooSmall { kappa: usize, min: usize },
    #[error("not m-isometric: tree polynomial missing at {vertex}")]
    TreeFitFailed { vertex: VertexId },
}

/// `sum_{k=0..m} (-1)^(m-k) C(m,k) ||S^{n+k} e_v||^2`, the m-th forward
/// difference of the squared norm sequence at `n`.
pub fn defect(
    table: &NormTable,
    v: &VertexId,
    m: usize,
    n: usize,
) -> Result<Rational, MisometryError> {
    let mut acc = Rational::zero();
    for k in 0..=m {
        let term = binomial(m, k) * table.value(v, n + k)?;
        if (m - k).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Defect summary for one explicit vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexDefects {
    pub max_abs: Rational,
    pub first_nonzero: Option<(usize, Rational)>,
}

/// Defect summary for one tail: the defect at ray position `k`, power
/// `n`, is `(D^m mu_poly)(k+n)/mu_poly(k)` (`D` = forward difference),
/// so all of them vanish exactly when `deg mu_poly <= m-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailDefects {
    pub attach: VertexId,
    pub mu_degree: Option<usize>,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    pub m: usize,
    pub horizon: usize,
    pub vertices: BTreeMap<VertexId, VertexDefects>,
    pub tails: Vec<TailDefects>,
    pub verdict: bool,
}

/// Sweeps every m-defect the table can reach (`n <= horizon - m`) over
/// all explicit vertices, and closes out the tails exactly via the
/// polynomial difference degree.
pub fn is_m_isometric_oracle(
    mg: &MeasuredGraph,
    m: usize,
    horizon: usize,
) -> Result<DefectReport, MisometryError> {
    if m < 1 {
        return Err(MisometryError::OrderTooSmall { m, min: 1 });
    }
    if horizon < m {
        return Err(MisometryError::HorizonTooSmall {
            required: m,
            horizon,
        });
    }
    let table = mg.squared_norms(horizon);
    defect_sweep(mg, &table, m)
}

fn defect_sweep(
    mg: &MeasuredGraph,
    table: &NormTable,
    m: usize,
) -> Result<DefectReport, MisometryError> {
    let horizon = table.horizon();
    let mut vertices = BTreeMap::new();
    let mut verdict = true;
    for v in mg.graph().vertices() {
        let mut max_abs = Rational::zero();
        let mut first_nonzero = None;
        for n in 0..=horizon - m {
            let d = defect(table, v, m, n)?;
            if d.abs() > max_abs {
                max_abs = d.abs();
            }
            if !d.is_zero() && first_nonzero.is_none() {
                first_nonzero = Some((n, d));
            }
        }
        verdict &= first_nonzero.is_none();
        vertices.insert(
            v.clone(),
            VertexDefects {
                max_abs,
                first_nonzero,
            },
        );
    }
    let tails: Vec<TailDefects> = mg
        .tails()
        .iter()
        .map(|t| {
            let vanishes = t.mu_poly.iterated_difference(m).is_zero();
            TailDefects {
                attach: t.attach.clone(),
                mu_degree: t.mu_poly.degree(),
                vanishes,
            }
        })
        .collect();
    verdict &= tails.iter().all(|t| t.vanishes);
    Ok(DefectReport {
        m,
        horizon,
        vertices,
        tails,
        verdict,
    })
}

/// Interpolates the first `degree_bound + 1` values of `n -> table[v][n]`
/// and keeps the result only if it reproduces the entire table row;
/// `None` means the sequence is not a polynomial of that degree.
pub fn fit_norm_polynomial(
    table: &NormTable,
    v: &VertexId,
    degree_bound: usize,
) -> Result<Option<Polynomial>, MisometryError> {
    let required = degree_bound + FIT_MARGIN;
    if table.horizon() < required {
        return Err(MisometryError::HorizonTooSmall {
            required,
            horizon: table.horizon(),
        });
    }
    let seq = table.sequence(v)?;
    let points: Vec<(Rational, Rational)> = seq
        .iter()
        .take(degree_bound + 1)
        .enumerate()
        .map(|(n, y)| (Rational::from_integer(n.into()), y.clone()))
        .collect();
    let p = interpolate(&points)?;
    for (n, y) in seq.iter().enumerate().skip(degree_bound + 1) {
        if &p.eval_int(n as i64) != y {
            return Ok(None);
        }
    }
    Ok(Some(p))
}

/// Coefficient matrix `A` of the cycle polynomial system for order `m`
/// and cycle length `kappa` (m x m): in row `r` (1-based, `r < m`) and
/// column `c <= r`, the entry is `C(m-c, m-r-1) kappa^(r-c+1)`; the
/// last row is `(0, ..., 0, 1)`. Columns weight the unknown
/// coefficients `(c_{m-1}, ..., c_0)` of the candidate polynomial.
pub fn build_a_matrix(m: usize, kappa: usize) -> RationalMatrix {
    let k = Rational::from_integer(kappa.into());
    let mut a = RationalMatrix::zeros(m, m);
    for r in 1..m {
        for c in 1..=r {
            let mut pow = Rational::one();
            for _ in 0..(r - c + 1) {
                pow *= &k;
            }
            a.set(r - 1, c - 1, binomial(m - c, m - r - 1) * pow);
        }
    }
    a.set(m - 1, m - 1, Rational::one());
    a
}

/// Evaluation matrix `B` ((kappa-1) x m): row `l = 1..kappa-1` is
/// `(l^{m-1}, ..., l, 1)`, so `B c = (p(1), ..., p(kappa-1))`.
pub fn build_b_matrix(m: usize, kappa: usize) -> Result<RationalMatrix, MisometryError> {
    if kappa < 2 {
        return Err(MisometryError::KappaTooSmall { kappa, min: 2 });
    }
    let mut b = RationalMatrix::zeros(kappa - 1, m);
    for l in 1..kappa {
        let lr = Rational::from_integer(l.into());
        let mut pow = Rational::one();
        for c in (0..m).rev() {
            b.set(l - 1, c, pow.clone());
            pow *= &lr;
        }
    }
    Ok(b)
}

/// The inhomogeneity `q(x) = sum_{trees R} Lambda^2(0, i_R)
/// lambda^2(root_R) p_{root_R}(x + kappa - i_R - 1)`, built from the
/// fitted root polynomials of degree <= m-2. Errors if some root norm
/// sequence is not such a polynomial, which already refutes
/// m-isometricity.
pub fn q_polynomial(
    mg: &MeasuredGraph,
    table: &NormTable,
    m: usize,
) -> Result<Polynomial, MisometryError> {
    if m < 2 {
        return Err(MisometryError::OrderTooSmall { m, min: 2 });
    }
    let mut root_fits = BTreeMap::new();
    for tree in &mg.structure().trees {
        match fit_norm_polynomial(table, &tree.root, m - 2)? {
            Some(p) => {
                root_fits.insert(tree.root.clone(), p);
            }
            None => {
                return Err(MisometryError::TreeFitFailed {
                    vertex: tree.root.clone(),
                })
            }
        }
    }
    Ok(build_q(mg, &root_fits))
}

fn build_q(mg: &MeasuredGraph, root_fits: &BTreeMap<VertexId, Polynomial>) -> Polynomial {
    let products = mg.lambda_products();
    let kappa = mg.structure().kappa();
    let mut q = Polynomial::zero();
    for tree in &mg.structure().trees {
        let weight = products.product_sq(0, tree.attachment)
            * mg.lambda_sq(&tree.root).expect("validated root");
        let shifted = root_fits[&tree.root]
            .shift(&Rational::from_integer((kappa - tree.attachment - 1).into()));
        q = &q + &shifted.scale(&weight);
    }
    q
}

/// Why the off-cycle part of the rank criterion failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeFailure {
    /// Norm sequence of this vertex is not a polynomial of degree <= m-2.
    VertexFit(VertexId),
    /// Tail measure polynomial has degree > m-2.
    TailDegree { attach: VertexId, degree: usize },
}

impl std::fmt::Display for TreeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreeFailure::VertexFit(v) => write!(f, "norm sequence at {v} is not polynomial of the required degree"),
            TreeFailure::TailDegree { attach, degree } => {
                write!(f, "tail at {attach} has measure degree {degree}, above the allowed bound")
            }
        }
    }
}

/// Finite certificate for (or against) m-isometricity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub m: usize,
    pub kappa: usize,
    pub a_matrix: RationalMatrix,
    /// `||S^i e_{v_0}||^2` for `i = 1..kappa-1`.
    pub a_values: Vec<Rational>,
    pub tree_failure: Option<TreeFailure>,
    pub q: Option<Polynomial>,
    pub b_vector: Option<Vec<Rational>>,
    pub rank_a_tilde: Option<usize>,
    /// `None` when kappa = 1 (the consistency block is empty there).
    pub rank_b_tilde: Option<usize>,
    /// Candidate cycle polynomial, present when the verdict is true.
    pub p0: Option<Polynomial>,
    pub verdict: bool,
}

/// Decides m-isometricity (m >= 2) from a norm table:
///
/// 1. every explicit non-cycle vertex must fit a norm polynomial of
///    degree <= m-2, and every tail must have measure degree <= m-2;
/// 2. the system `A c = b` (b from `q`) always determines a candidate
///    cycle polynomial since `det A = (m-1)! kappa^(m-1) != 0`;
/// 3. for kappa > 1 the candidate must also match the computed first
///    `kappa - 1` cycle norms, i.e. the stacked augmented matrix
///    `[[A, b], [B, a]]` must still have rank m.
pub fn rank_criterion(
    mg: &MeasuredGraph,
    table: &NormTable,
    m: usize,
) -> Result<RankCertificate, MisometryError> {
    if m < 2 {
        return Err(MisometryError::OrderTooSmall { m, min: 2 });
    }
    let kappa = mg.structure().kappa();
    let required = (m - 2 + FIT_MARGIN).max(kappa - 1);
    if table.horizon() < required {
        return Err(MisometryError::HorizonTooSmall {
            required,
            horizon: table.horizon(),
        });
    }
    let a_matrix = build_a_matrix(m, kappa);
    let v0 = &mg.structure().cycle[0];
    let a_values: Vec<Rational> = (1..kappa)
        .map(|i| table.value(v0, i).cloned())
        .collect::<Result<_, _>>()?;

    let mut tree_failure = None;
    let mut root_fits = BTreeMap::new();
    'fits: for tree in &mg.structure().trees {
        for v in &tree.members {
            match fit_norm_polynomial(table, v, m - 2)? {
                Some(p) => {
                    if v == &tree.root {
                        root_fits.insert(v.clone(), p);
                    }
                }
                None => {
                    tree_failure = Some(TreeFailure::VertexFit(v.clone()));
                    break 'fits;
                }
            }
        }
    }
    if tree_failure.is_none() {
        for tail in mg.tails() {
            let degree = tail.mu_poly.degree().expect("validated tail polynomial");
            if degree > m - 2 {
                tree_failure = Some(TreeFailure::TailDegree {
                    attach: tail.attach.clone(),
                    degree,
                });
                break;
            }
        }
    }

    if let Some(failure) = tree_failure {
        return Ok(RankCertificate {
            m,
            kappa,
            a_matrix,
            a_values,
            tree_failure: Some(failure),
            q: None,
            b_vector: None,
            rank_a_tilde: None,
            rank_b_tilde: None,
            p0: None,
            verdict: false,
        });
    }

    let q = build_q(mg, &root_fits);
    let mut b_vector: Vec<Rational> = (0..m - 1).rev().map(|l| q.coeff(l)).collect();
    b_vector.push(Rational::one());

    let a_tilde = a_matrix.augment_column(&b_vector)?;
    let rank_a_tilde = a_tilde.rank();
    let (rank_b_tilde, consistent) = if kappa == 1 {
        (None, true)
    } else {
        let b_matrix = build_b_matrix(m, kappa)?;
        let b_block = b_matrix.augment_column(&a_values)?;
        let stacked = a_tilde.stack(&b_block)?;
        let rank = stacked.rank();
        (Some(rank), rank_a_tilde == m && rank == m)
    };
    let verdict = consistent && rank_a_tilde == m;
    let p0 = if verdict {
        let coeffs = a_matrix.solve(&b_vector)?;
        Some(Polynomial::from_coeffs(coeffs.into_iter().rev().collect()))
    } else {
        None
    };
    Ok(RankCertificate {
        m,
        kappa,
        a_matrix,
        a_values,
        tree_failure: None,
        q: Some(q),
        b_vector: Some(b_vector),
        rank_a_tilde: Some(rank_a_tilde),
        rank_b_tilde,
        p0,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossValidation {
    pub oracle: DefectReport,
    pub rank: RankCertificate,
    pub agree: bool,
}

/// Runs the defect oracle and the rank criterion on one shared norm
/// table and compares verdicts.
pub fn cross_validate(
    mg: &MeasuredGraph,
    m: usize,
    horizon: Option<usize>,
) -> Result<CrossValidation, MisometryError> {
    let kappa = mg.structure().kappa();
    let horizon = horizon.unwrap_or_else(|| default_horizon(m, kappa));
    let table = mg.squared_norms(horizon);
    let oracle = defect_sweep(mg, &table, m)?;
    let rank = rank_criterion(mg, &table, m)?;
    let agree = oracle.verdict == rank.verdict;
    Ok(CrossValidation {
        oracle,
        rank,
        agree,
    })
}

/// Alternating moment sum `theta_n(v) = sum_{k=0..n} (-1)^k C(n,k)
/// ||S^k e_v||^2`; complete hyperexpansivity demands `theta_n <= 0`
/// for all `n >= 1`.
pub fn ch_value(
    table: &NormTable,
    v: &VertexId,
    n: usize,
) -> Result<Rational, MisometryError> {
    let mut acc = Rational::zero();
    for k in 0..=n {
        let term = binomial(n, k) * table.value(v, k)?;
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Outcome of the alternating-sum sweep at a single vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChOutcome {
    pub first_violation: Option<(usize, Rational)>,
}

/// Sweeps `theta_n` for `n = 1..=max_order` at one vertex.
pub fn ch_check(
    table: &NormTable,
    v: &VertexId,
    max_order: usize,
) -> Result<ChOutcome, MisometryError> {
    if table.horizon() < max_order {
        return Err(MisometryError::HorizonTooSmall {
            required: max_order,
            horizon: table.horizon(),
        });
    }
    for n in 1..=max_order {
        let value = ch_value(table, v, n)?;
        if value.is_positive() {
            return Ok(ChOutcome {
                first_violation: Some((n, value)),
            });
        }
    }
    Ok(ChOutcome {
        first_violation: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChViolation {
    Vertex {
        vertex: VertexId,
        order: usize,
        value: Rational,
    },
    TailPosition {
        attach: VertexId,
        order: usize,
        position: usize,
        value: Rational,
    },
    /// The sign condition fails for all large ray positions.
    TailAsymptotic { attach: VertexId, order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChReport {
    pub max_order: usize,
    pub first_violation: Option<ChViolation>,
    pub verdict: bool,
}

/// Complete hyperexpansivity sweep over all explicit vertices and all
/// tails, orders `1..=max_order`. On a tail, `theta_n` at position `k`
/// equals `(-1)^n (D^n mu_poly)(k)/mu_poly(k)`, so the check is a sign
/// condition on a polynomial: probed for `k <= tail_check_horizon`
/// plus the leading-coefficient sign for large `k`.
pub fn ch_sweep(
    mg: &MeasuredGraph,
    table: &NormTable,
    max_order: usize,
) -> Result<ChReport, MisometryError> {
    if table.horizon() < max_order {
        return Err(MisometryError::HorizonTooSmall {
            required: max_order,
            horizon: table.horizon(),
        });
    }
    for n in 1..=max_order {
        for v in mg.graph().vertices() {
            let value = ch_value(table, v, n)?;
            if value.is_positive() {
                return Ok(ChReport {
                    max_order,
                    first_violation: Some(ChViolation::Vertex {
                        vertex: v.clone(),
                        order: n,
                        value,
                    }),
                    verdict: false,
                });
            }
        }
        for tail in mg.tails() {
            if let Some(violation) = ch_tail_violation(mg, tail, n) {
                return Ok(ChReport {
                    max_order,
                    first_violation: Some(violation),
                    verdict: false,
                });
            }
        }
    }
    Ok(ChReport {
        max_order,
        first_violation: None,
        verdict: true,
    })
}

fn ch_tail_violation(mg: &MeasuredGraph, tail: &TailTemplate, n: usize) -> Option<ChViolation> {
    let diff = tail.mu_poly.iterated_difference(n);
    if diff.is_zero() {
        return None;
    }
    // condition: (-1)^n diff(k) <= 0 for every k in N
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    for k in 0..=mg.tail_check_horizon() {
        let v = diff.eval_int(k as i64);
        let signed = if sign == 1 { v.clone() } else { -v.clone() };
        if signed.is_positive() {
            let theta = signed / tail.measure_at(k);
            return Some(ChViolation::TailPosition {
                attach: tail.attach.clone(),
                order: n,
                position: k,
                value: theta,
            });
        }
    }
    let lead = diff.leading_coeff().expect("nonzero difference");
    let lead_ok = if sign == 1 {
        lead.is_negative()
    } else {
        lead.is_positive()
    };
    if !lead_ok {
        return Some(ChViolation::TailAsymptotic {
            attach: tail.attach.clone(),
            order: n,
        });
    }
    None
}

/// Parameters for the 3-isometric family: a cycle of length `kappa`
/// seeded with `mu0` at `v_0`, and per cycle vertex any number of
/// branches, each given by its first two ray measures (the ray then
/// continues affinely).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub kappa: usize,
    pub mu0: Rational,
    /// `branches[i]` lists `(mu(i,j,0), mu(i,j,1))` for the branches
    /// attached at cycle position `i`; must have length `kappa`.
    pub branches: Vec<Vec<(Rational, Rational)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("cycle length must be at least 1")]
    KappaZero,
    #[error("branch list has length {got}, expected kappa = {expected}")]
    BranchListLength { expected: usize, got: usize },
    #[error("seed measure {value} is not positive")]
    NonPositiveSeed { value: Rational },
    #[error("branch ({attachment},{branch}) has non-positive measure {value}")]
    NonPositiveBranchMeasure {
        attachment: usize,
        branch: usize,
        value: Rational,
    },
    #[error("branch ({attachment},{branch}) decreases; affine ray measures would go negative")]
    DecreasingBranch { attachment: usize, branch: usize },
    #[error("family constraint infeasible: cycle measure at position {index} comes out {value}")]
    InfeasibleCycleMeasure { index: usize, value: Rational },
}

/// A generated family instance together with the data that determined
/// it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub instance: MeasuredGraph,
    /// Cycle norm polynomial scaled by mu0: cycle measures satisfy
    /// `mu(v_i) + (attached mass below i) = q0(i)`.
    pub q0: Polynomial,
    pub cycle_measures: Vec<Rational>,
}

/// Builds the affine-tail family member for the given spec. The cycle
/// measures are forced by the 3-isometry constraint; generation fails
/// if any of them comes out non-positive.
pub fn family3_generate(spec: &FamilySpec) -> Result<FamilyInstance, FamilyError> {
    if spec.kappa == 0 {
        return Err(FamilyError::KappaZero);
    }
    if spec.branches.len() != spec.kappa {
        return Err(FamilyError::BranchListLength {
            expected: spec.kappa,
            got: spec.branches.len(),
        });
    }
    if !spec.mu0.is_positive() {
        return Err(FamilyError::NonPositiveSeed {
            value: spec.mu0.clone(),
        });
    }
    for (i, branches) in spec.branches.iter().enumerate() {
        for (j, (first, second)) in branches.iter().enumerate() {
            for value in [first, second] {
                if !value.is_positive() {
                    return Err(FamilyError::NonPositiveBranchMeasure {
                        attachment: i,
                        branch: j,
                        value: value.clone(),
                    });
                }
            }
            if second < first {
                return Err(FamilyError::DecreasingBranch {
                    attachment: i,
                    branch: j,
                });
            }
        }
    }

    let kappa = spec.kappa;
    let kr = Rational::from_integer(kappa.into());
    let slope = |i: usize, j: usize| -> Rational {
        let (first, second) = &spec.branches[i][j];
        second - first
    };
    // A = total slope, B = sum of branch measures at ray position
    // kappa - i - 1; these fix the quadratic cycle polynomial.
    let mut total_slope = Rational::zero();
    let mut weighted = Rational::zero();
    for (i, branches) in spec.branches.iter().enumerate() {
        for (j, (first, _)) in branches.iter().enumerate() {
            let s = slope(i, j);
            weighted += &s * Rational::from_integer((kappa - i - 1).into()) + first;
            total_slope += s;
        }
    }
    let two = Rational::from_integer(2.into());
    let c2 = &total_slope / (&two * &kr);
    let c1 = (&two * &weighted - &total_slope * &kr) / (&two * &kr);
    let q0 = Polynomial::from_coeffs(vec![spec.mu0.clone(), c1, c2]);

    let mut cycle_measures = vec![spec.mu0.clone()];
    for i in 1..kappa {
        let mut below = Rational::zero();
        for (l, branches) in spec.branches.iter().enumerate().take(i) {
            for (j, (first, _)) in branches.iter().enumerate() {
                below += slope(l, j) * Rational::from_integer((i - l - 1).into()) + first;
            }
        }
        let mu_i = q0.eval_int(i as i64) - below;
        if !mu_i.is_positive() {
            return Err(FamilyError::InfeasibleCycleMeasure {
                index: i,
                value: mu_i,
            });
        }
        cycle_measures.push(mu_i);
    }

    let width = (kappa - 1).to_string().len();
    let cycle_label = |i: usize| VertexId::from(format!("c{i:0width$}"));
    let mut vertices: Vec<VertexId> = (0..kappa).map(cycle_label).collect();
    let mut image: BTreeMap<VertexId, VertexId> = (0..kappa)
        .map(|i| (cycle_label(i), cycle_label((i + kappa - 1) % kappa)))
        .collect();
    let mut measure: BTreeMap<VertexId, Rational> = (0..kappa)
        .map(|i| (cycle_label(i), cycle_measures[i].clone()))
        .collect();
    let mut tails = Vec::new();
    for (i, branches) in spec.branches.iter().enumerate() {
        for (j, (first, _)) in branches.iter().enumerate() {
            let root = VertexId::from(format!("t{i:0width$}_{j}"));
            vertices.push(root.clone());
            image.insert(root.clone(), cycle_label(i));
            measure.insert(root.clone(), first.clone());
            let s = slope(i, j);
            tails.push(TailTemplate::new(
                root,
                Polynomial::from_coeffs(vec![&s + first, s]),
            ));
        }
    }
    let graph = FunctionalGraph::new(vertices, image).expect("generated graph is valid");
    let instance =
        MeasuredGraph::new(graph, measure, tails).expect("generated instance is valid");
    Ok(FamilyInstance {
        instance,
        q0,
        cycle_measures,
    })
}
