//! The weighted shift attached to a measured functional graph. A
//! positive measure on the vertices induces edge weights
//! `lambda_v^2 = mu(v)/mu(T v)`; the shift acts by
//! `S e_u = sum_{v : T v = u} lambda_v e_v`. Weights only ever appear
//! squared, so every quantity here is an exact rational.
//!
//! Infinite parts of the space are carried symbolically: a tail is a
//! ray of extra vertices hanging off an explicit leaf whose measures
//! are the values of a polynomial, and all tail contributions enter
//! through closed forms instead of materialized vertices.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exactmath::{Polynomial, Rational};
use crate::graph::{CycleStructure, FunctionalGraph, GraphError, VertexId};

use num_traits::{One, Signed, Zero};

/// How far tail polynomials are probed for positivity (together with
/// the sign of the leading coefficient).
pub const DEFAULT_TAIL_CHECK_HORIZON: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no measure assigned to vertex {0}")]
    MissingMeasure(VertexId),
    #[error("measure assigned to unknown vertex {0}")]
    UnknownMeasureKey(VertexId),
    #[error("measure must be positive: vertex {vertex} has {value}")]
    NonPositiveMeasure { vertex: VertexId, value: Rational },
    #[error("tail attaches to unknown vertex {0}")]
    TailAttachUnknown(VertexId),
    #[error("tail attaches to {0}, which has explicit out-edges; tails may only hang off leaves")]
    TailAttachNotLeaf(VertexId),
    #[error("tail at {attach} has a zero measure polynomial")]
    ZeroTailPolynomial { attach: VertexId },
    #[error("tail at {attach} has measure {value} at ray position {position}, which is not positive")]
    NonPositiveTailMeasure {
        attach: VertexId,
        position: usize,
        value: Rational,
    },
    #[error("tail at {attach} has a non-positive leading coefficient, so its measures eventually vanish")]
    NonPositiveTailLeadingCoeff { attach: VertexId },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("power {power} exceeds table horizon {horizon}")]
    PowerOutOfRange { power: usize, horizon: usize },
}

/// A ray of implicit vertices `p_0 <- p_1 <- p_2 <- ...` attached
/// under `attach` (that is, `T(p_0) = attach`), where position `k`
/// carries measure `mu_poly(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailTemplate {
    pub attach: VertexId,
    pub mu_poly: Polynomial,
}

impl TailTemplate {
    pub fn new(attach: VertexId, mu_poly: Polynomial) -> Self {
        TailTemplate { attach, mu_poly }
    }

    /// Measure of ray position `k`.
    pub fn measure_at(&self, k: usize) -> Rational {
        self.mu_poly.eval_int(k as i64)
    }

    /// `||S^n e_{p_k}||^2 = mu_poly(k+n)/mu_poly(k)`: along a ray the
    /// shift moves mass one step outward, and the weights telescope.
    pub fn norm_sq(&self, k: usize, n: usize) -> Rational {
        self.measure_at(k + n) / self.measure_at(k)
    }

    /// Squared norm of the Cauchy dual power along the ray, which
    /// telescopes to the reciprocal ratio `mu_poly(k)/mu_poly(k+n)`.
    pub fn dual_norm_sq(&self, k: usize, n: usize) -> Rational {
        self.measure_at(k) / self.measure_at(k + n)
    }
}

/// Squared edge weights `lambda_v^2 = mu(v)/mu(T v)`, one per explicit
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    lambda_sq: BTreeMap<VertexId, Rational>,
}

impl Weights {
    pub fn lambda_sq(&self, v: &VertexId) -> Result<&Rational, ShiftError> {
        self.lambda_sq
            .get(v)
            .ok_or_else(|| ShiftError::UnknownVertex(v.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Rational)> {
        self.lambda_sq.iter()
    }
}

/// A connected functional graph together with a positive measure and
/// optional polynomial tails; the fully validated input for every
/// operator-theoretic check in this crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredGraph {
    graph: FunctionalGraph,
    measure: BTreeMap<VertexId, Rational>,
    tails: Vec<TailTemplate>,
    structure: CycleStructure,
    tail_check_horizon: usize,
}

impl MeasuredGraph {
    pub fn new(
        graph: FunctionalGraph,
        measure: BTreeMap<VertexId, Rational>,
        tails: Vec<TailTemplate>,
    ) -> Result<Self, ShiftError> {
        Self::with_tail_check_horizon(graph, measure, tails, DEFAULT_TAIL_CHECK_HORIZON)
    }

    pub fn with_tail_check_horizon(
        graph: FunctionalGraph,
        measure: BTreeMap<VertexId, Rational>,
        tails: Vec<TailTemplate>,
        tail_check_horizon: usize,
    ) -> Result<Self, ShiftError> {
        let structure = match graph.classify()? {
            crate::graph::Classification::CycleWithTrees(s) => s,
            crate::graph::Classification::RootlessTree => unreachable!("finite graphs have a cycle"),
        };
        let vertex_set: BTreeSet<&VertexId> = graph.vertices().iter().collect();
        for key in measure.keys() {
            if !vertex_set.contains(key) {
                return Err(ShiftError::UnknownMeasureKey(key.clone()));
            }
        }
        for v in graph.vertices() {
            match measure.get(v) {
                None => return Err(ShiftError::MissingMeasure(v.clone())),
                Some(value) if !value.is_positive() => {
                    return Err(ShiftError::NonPositiveMeasure {
                        vertex: v.clone(),
                        value: value.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        for tail in &tails {
            if !graph.contains(&tail.attach) {
                return Err(ShiftError::TailAttachUnknown(tail.attach.clone()));
            }
            if graph.out_degree(&tail.attach) != 0 {
                return Err(ShiftError::TailAttachNotLeaf(tail.attach.clone()));
            }
            if tail.mu_poly.is_zero() {
                return Err(ShiftError::ZeroTailPolynomial {
                    attach: tail.attach.clone(),
                });
            }
            if !tail
                .mu_poly
                .leading_coeff()
                .expect("nonzero polynomial")
                .is_positive()
            {
                return Err(ShiftError::NonPositiveTailLeadingCoeff {
                    attach: tail.attach.clone(),
                });
            }
            for k in 0..=tail_check_horizon {
                let value = tail.measure_at(k);
                if !value.is_positive() {
                    return Err(ShiftError::NonPositiveTailMeasure {
                        attach: tail.attach.clone(),
                        position: k,
                        value,
                    });
                }
            }
        }
        Ok(MeasuredGraph {
            graph,
            measure,
            tails,
            structure,
            tail_check_horizon,
        })
    }

    pub fn graph(&self) -> &FunctionalGraph {
        &self.graph
    }

    /// Cycle-with-trees shape; cached at construction.
    pub fn structure(&self) -> &CycleStructure {
        &self.structure
    }

    pub fn tails(&self) -> &[TailTemplate] {
        &self.tails
    }

    pub fn tails_at<'a>(&'a self, v: &'a VertexId) -> impl Iterator<Item = &'a TailTemplate> {
        self.tails.iter().filter(move |t| &t.attach == v)
    }

    pub fn tail_check_horizon(&self) -> usize {
        self.tail_check_horizon
    }

    pub fn measure_of(&self, v: &VertexId) -> Result<&Rational, ShiftError> {
        self.measure
            .get(v)
            .ok_or_else(|| ShiftError::UnknownVertex(v.clone()))
    }

    /// `lambda_v^2 = mu(v)/mu(T v)`.
    pub fn lambda_sq(&self, v: &VertexId) -> Result<Rational, ShiftError> {
        let parent = self.graph.image_of(v)?;
        Ok(self.measure_of(v)? / self.measure_of(parent)?)
    }

    /// All squared weights at once.
    pub fn weights(&self) -> Weights {
        let lambda_sq = self
            .graph
            .vertices()
            .iter()
            .map(|v| (v.clone(), self.lambda_sq(v).expect("validated vertex")))
            .collect();
        Weights { lambda_sq }
    }

    /// Radon-Nikodym value `h(v) = mu(T^{-1}({v}))/mu(v)`, counting
    /// tail entry positions.
    pub fn radon_nikodym(&self, v: &VertexId) -> Result<Rational, ShiftError> {
        let mu_v = self.measure_of(v)?;
        let mut acc = Rational::zero();
        for child in self.graph.children_of(v) {
            acc += self.measure_of(child)? / mu_v;
        }
        for tail in self.tails_at(v) {
            acc += tail.measure_at(0) / mu_v;
        }
        Ok(acc)
    }

    /// Supremum of `h` over the whole (possibly infinite) vertex set;
    /// finite here because tail ratios tend to 1, so the shift is
    /// always bounded. Tail positions are probed up to the configured
    /// horizon.
    pub fn sup_radon_nikodym(&self) -> Rational {
        let mut sup: Option<Rational> = None;
        let mut push = |value: Rational| match &sup {
            Some(s) if *s >= value => {}
            _ => sup = Some(value),
        };
        for v in self.graph.vertices() {
            push(self.radon_nikodym(v).expect("validated vertex"));
        }
        for tail in &self.tails {
            push(Rational::one());
            for k in 0..=self.tail_check_horizon {
                push(tail.measure_at(k + 1) / tail.measure_at(k));
            }
        }
        sup.expect("graph is nonempty")
    }

    /// Squared norms `||S^n e_v||^2` for every explicit vertex and all
    /// `n <= horizon`. Each entry is computed once, level by level:
    /// descendant sets of distinct children are disjoint (in-degree
    /// one), hence
    /// `||S^{n+1} e_v||^2 = sum_{child u} lambda_u^2 ||S^n e_u||^2`,
    /// with tail children contributing `mu_poly(n)/mu(v)` in closed
    /// form.
    pub fn squared_norms(&self, horizon: usize) -> NormTable {
        let vertices = self.graph.vertices();
        let mut values: BTreeMap<VertexId, Vec<Rational>> = vertices
            .iter()
            .map(|v| {
                let mut seq = Vec::with_capacity(horizon + 1);
                seq.push(Rational::one());
                (v.clone(), seq)
            })
            .collect();
        for n in 0..horizon {
            let layer: Vec<(VertexId, Rational)> = vertices
                .iter()
                .map(|v| {
                    let mu_v = &self.measure[v];
                    let mut acc = Rational::zero();
                    for child in self.graph.children_of(v) {
                        let lambda_sq = &self.measure[child] / mu_v;
                        acc += lambda_sq * &values[child][n];
                    }
                    for tail in self.tails_at(v) {
                        acc += tail.measure_at(n) / mu_v;
                    }
                    (v.clone(), acc)
                })
                .collect();
            for (v, value) in layer {
                values.get_mut(&v).expect("vertex present").push(value);
            }
        }
        NormTable { horizon, values }
    }

    /// Products of squared weights along the cycle:
    /// `Lambda^2(m, i) = prod_{j=1..i} lambda^2(v_{(m+j) mod kappa})`,
    /// for `0 <= m < kappa` and `0 <= i <= kappa`.
    pub fn lambda_products(&self) -> LambdaProducts {
        let kappa = self.structure.kappa();
        let cycle = &self.structure.cycle;
        let table = (0..kappa)
            .map(|m| {
                let mut row = Vec::with_capacity(kappa + 1);
                row.push(Rational::one());
                let mut acc = Rational::one();
                for j in 1..=kappa {
                    let v = &cycle[(m + j) % kappa];
                    acc *= self.lambda_sq(v).expect("cycle vertex");
                    row.push(acc.clone());
                }
                row
            })
            .collect();
        LambdaProducts { kappa, table }
    }
}

/// Table of `||S^n e_v||^2` values for explicit vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormTable {
    horizon: usize,
    values: BTreeMap<VertexId, Vec<Rational>>,
}

impl NormTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn value(&self, v: &VertexId, n: usize) -> Result<&Rational, ShiftError> {
        let seq = self
            .values
            .get(v)
            .ok_or_else(|| ShiftError::UnknownVertex(v.clone()))?;
        seq.get(n).ok_or(ShiftError::PowerOutOfRange {
            power: n,
            horizon: self.horizon,
        })
    }

    /// Full sequence `n = 0..=horizon` for one vertex.
    pub fn sequence(&self, v: &VertexId) -> Result<&[Rational], ShiftError> {
        self.values
            .get(v)
            .map(Vec::as_slice)
            .ok_or_else(|| ShiftError::UnknownVertex(v.clone()))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.values.keys()
    }

    /// Test-support mutation: overwrite one entry.
    pub fn corrupt(&mut self, v: &VertexId, n: usize, value: Rational) {
        if let Some(seq) = self.values.get_mut(v) {
            if let Some(slot) = seq.get_mut(n) {
                *slot = value;
            }
        }
    }
}

/// `Lambda^2(m, i)` cycle weight products. The full loop always
/// telescopes: `Lambda^2(m, kappa) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaProducts {
    kappa: usize,
    table: Vec<Vec<Rational>>,
}

impl LambdaProducts {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn product_sq(&self, m: usize, i: usize) -> &Rational {
        &self.table[m % self.kappa][i]
    }
}

/// First failure of the cycle norm recursion, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionMismatch {
    pub cycle_index: usize,
    pub power: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Checks the kappa-step recursion for every cycle vertex `v_m` and
/// every power the table can reach:
///
/// `||S^{n+kappa} e_{v_m}||^2 = ||S^n e_{v_m}||^2 +
///   sum_i Lambda^2(m,i) sum_{trees R attached at (m+i) mod kappa}
///     lambda^2(root_R) ||S^{n+kappa-i-1} e_{root_R}||^2`
///
/// Returns the first mismatch, or `None` if the table is consistent.
pub fn verify_recursion(mg: &MeasuredGraph, table: &NormTable) -> Option<RecursionMismatch> {
    let structure = mg.structure();
    let kappa = structure.kappa();
    if table.horizon() < kappa {
        return None;
    }
    let products = mg.lambda_products();
    let tree_data: Vec<(usize, &VertexId, Rational)> = structure
        .trees
        .iter()
        .map(|t| (t.attachment, &t.root, mg.lambda_sq(&t.root).expect("root")))
        .collect();
    for (m, vm) in structure.cycle.iter().enumerate() {
        for n in 0..=table.horizon() - kappa {
            let lhs = table.value(vm, n + kappa).expect("within horizon").clone();
            let mut rhs = table.value(vm, n).expect("within horizon").clone();
            for i in 0..kappa {
                let at = (m + i) % kappa;
                for (attachment, root, lambda_sq) in &tree_data {
                    if *attachment != at {
                        continue;
                    }
                    let root_norm = table.value(root, n + kappa - i - 1).expect("within horizon");
                    rhs += products.product_sq(m, i) * lambda_sq * root_norm;
                }
            }
            if lhs != rhs {
                return Some(RecursionMismatch {
                    cycle_index: m,
                    power: n,
                    lhs,
                    rhs,
                });
            }
        }
    }
    None
}
