//! Shared generators and independent oracles for the integration
//! suites. Everything is seeded: the same seed always yields the same
//! instance.

// each integration target uses a different subset of these helpers
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graphshift::exactmath::{rat, Polynomial, Rational, RationalMatrix};
use graphshift::graph::{FunctionalGraph, VertexId};
use graphshift::misometry::{build_a_matrix, family3_generate, FamilyInstance, FamilySpec};
use graphshift::shift::{MeasuredGraph, TailTemplate};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vid(s: &str) -> VertexId {
    VertexId::from(s)
}

/// Random positive rational with numerator and denominator bounded by
/// the given limits.
pub fn positive_rational(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den))
}

/// Family parameters within the documented bounds: cycle length 1..=4,
/// up to three branches per cycle vertex, numerators/denominators at
/// most 50, non-negative slopes.
pub fn random_family_spec(rng: &mut ChaCha8Rng) -> FamilySpec {
    let kappa = rng.gen_range(1..=4);
    let mu0 = rat(rng.gen_range(10..=50), rng.gen_range(1..=2));
    let branches = (0..kappa)
        .map(|_| {
            (0..rng.gen_range(0..=3))
                .map(|_| {
                    let first = rat(rng.gen_range(1..=8), rng.gen_range(4..=50));
                    let second = if rng.gen_bool(0.5) {
                        first.clone()
                    } else {
                        &first + rat(rng.gen_range(0..=4), rng.gen_range(8..=50))
                    };
                    (first, second)
                })
                .collect()
        })
        .collect();
    FamilySpec { kappa, mu0, branches }
}

/// Draws family specs until one is feasible; the seed measure is large
/// against the branch masses, so this terminates quickly.
pub fn feasible_family(rng: &mut ChaCha8Rng) -> FamilyInstance {
    loop {
        if let Ok(instance) = family3_generate(&random_family_spec(rng)) {
            return instance;
        }
    }
}

/// Feasible family member with every slope zeroed: constant rays, so
/// the instance is 2-isometric (and a fortiori 3-isometric).
pub fn zero_slope_family(rng: &mut ChaCha8Rng) -> MeasuredGraph {
    loop {
        let mut spec = random_family_spec(rng);
        for branches in &mut spec.branches {
            for (first, second) in branches.iter_mut() {
                *second = first.clone();
            }
        }
        if let Ok(f) = family3_generate(&spec) {
            return f.instance;
        }
    }
}

/// Builds a genuinely m-isometric instance backwards from tree data:
/// each tree is a single root whose ray measures follow a polynomial
/// with non-negative coefficients and degree <= m-2; the cycle
/// measures are then forced and resampled until positive.
pub fn m_isometric_instance(rng: &mut ChaCha8Rng, m: usize) -> MeasuredGraph {
    assert!(m >= 2);
    'outer: loop {
        let kappa = rng.gen_range(1..=4usize);
        let n_trees = rng.gen_range(1..=3usize);
        let mu0 = rat(rng.gen_range(5..=20), 1);
        let trees: Vec<(usize, Polynomial)> = (0..n_trees)
            .map(|_| {
                let attach = rng.gen_range(0..kappa);
                let deg = rng.gen_range(0..=(m - 2));
                let mut coeffs: Vec<Rational> = (0..=deg)
                    .map(|_| rat(rng.gen_range(0..=3), rng.gen_range(1..=6)))
                    .collect();
                coeffs[0] = positive_rational(rng, 4, 6);
                if deg > 0 {
                    coeffs[deg] = positive_rational(rng, 2, 6);
                }
                (attach, Polynomial::from_coeffs(coeffs))
            })
            .collect();

        let mut qsum = Polynomial::zero();
        for (attach, p) in &trees {
            qsum = &qsum + &p.shift(&Rational::from_integer((kappa - attach - 1).into()));
        }
        let q = qsum.scale(&mu0.recip());
        let a = build_a_matrix(m, kappa);
        let mut b: Vec<Rational> = (0..m - 1).rev().map(|l| q.coeff(l)).collect();
        b.push(Rational::one());
        let solved = a.solve(&b).expect("triangular system with nonzero diagonal");
        let p0 = Polynomial::from_coeffs(solved.into_iter().rev().collect());

        let mut cycle_measures = vec![mu0.clone()];
        for i in 1..kappa {
            let mut below = Rational::zero();
            for (attach, p) in &trees {
                if *attach < i {
                    below += p.eval_int((i - attach - 1) as i64);
                }
            }
            let mu_i = &mu0 * p0.eval_int(i as i64) - below;
            if !mu_i.is_positive() {
                continue 'outer;
            }
            cycle_measures.push(mu_i);
        }

        let cycle_label = |i: usize| vid(&format!("c{i}"));
        let mut vertices: Vec<VertexId> = (0..kappa).map(cycle_label).collect();
        let mut image: BTreeMap<VertexId, VertexId> = (0..kappa)
            .map(|i| (cycle_label(i), cycle_label((i + kappa - 1) % kappa)))
            .collect();
        let mut measure: BTreeMap<VertexId, Rational> = (0..kappa)
            .map(|i| (cycle_label(i), cycle_measures[i].clone()))
            .collect();
        let mut tails = Vec::new();
        for (t, (attach, p)) in trees.iter().enumerate() {
            let root = vid(&format!("r{t}"));
            vertices.push(root.clone());
            image.insert(root.clone(), cycle_label(*attach));
            measure.insert(root.clone(), p.eval_int(0));
            tails.push(TailTemplate::new(root, p.shift(&Rational::one())));
        }
        let graph = FunctionalGraph::new(vertices, image).expect("generated graph is valid");
        return MeasuredGraph::new(graph, measure, tails).expect("generated instance is valid");
    }
}

/// Multiplies one randomly chosen explicit measure by a ratio > 1,
/// which generically destroys every polynomial norm structure.
pub fn perturb_measure(rng: &mut ChaCha8Rng, mg: &MeasuredGraph) -> MeasuredGraph {
    let vertices = mg.graph().vertices().to_vec();
    let victim = vertices[rng.gen_range(0..vertices.len())].clone();
    let factor = rat(rng.gen_range(3..=9), 2);
    let measure: BTreeMap<VertexId, Rational> = vertices
        .iter()
        .map(|v| {
            let mu = mg.measure_of(v).unwrap().clone();
            if v == &victim {
                (v.clone(), mu * &factor)
            } else {
                (v.clone(), mu)
            }
        })
        .collect();
    MeasuredGraph::new(mg.graph().clone(), measure, mg.tails().to_vec())
        .expect("perturbed instance keeps positive measures")
}

/// Fixed point with 1..=5 constant-ray branches, optionally one
/// two-level balanced tree; such instances are 2-isometric for any
/// branch measures.
pub fn kappa_one_two_isometric(rng: &mut ChaCha8Rng) -> MeasuredGraph {
    let p = vid("p");
    let mut vertices = vec![p.clone()];
    let mut image = BTreeMap::from([(p.clone(), p.clone())]);
    let mut measure = BTreeMap::from([(p.clone(), positive_rational(rng, 20, 5))]);
    let mut tails = Vec::new();
    for i in 0..rng.gen_range(1..=5usize) {
        let root = vid(&format!("r{i}"));
        let mu = positive_rational(rng, 20, 20);
        vertices.push(root.clone());
        image.insert(root.clone(), p.clone());
        measure.insert(root.clone(), mu.clone());
        tails.push(TailTemplate::new(root, Polynomial::constant(mu)));
    }
    if rng.gen_bool(0.4) {
        // balanced two-level tree: the root's mass splits across two
        // tailed children, so every off-cycle norm stays 1
        let root = vid("s");
        let left = vid("sa");
        let right = vid("sb");
        let mu_left = positive_rational(rng, 10, 10);
        let mu_right = positive_rational(rng, 10, 10);
        vertices.extend([root.clone(), left.clone(), right.clone()]);
        image.insert(root.clone(), p.clone());
        image.insert(left.clone(), root.clone());
        image.insert(right.clone(), root.clone());
        measure.insert(root.clone(), &mu_left + &mu_right);
        measure.insert(left.clone(), mu_left.clone());
        measure.insert(right.clone(), mu_right.clone());
        tails.push(TailTemplate::new(left, Polynomial::constant(mu_left)));
        tails.push(TailTemplate::new(right, Polynomial::constant(mu_right)));
    }
    let graph = FunctionalGraph::new(vertices, image).expect("generated graph is valid");
    MeasuredGraph::new(graph, measure, tails).expect("generated instance is valid")
}

/// Cycle of the given length with one shared measure value everywhere;
/// the weights telescope to 1 and the shift is unitary.
pub fn uniform_cycle(kappa: usize, value: Rational) -> MeasuredGraph {
    let label = |i: usize| vid(&format!("u{i}"));
    let vertices: Vec<VertexId> = (0..kappa).map(label).collect();
    let image = (0..kappa)
        .map(|i| (label(i), label((i + kappa - 1) % kappa)))
        .collect();
    let measure = (0..kappa).map(|i| (label(i), value.clone())).collect();
    let graph = FunctionalGraph::new(vertices, image).expect("cycle is valid");
    MeasuredGraph::new(graph, measure, Vec::new()).expect("cycle instance is valid")
}

/// Random cycle-with-trees instance with arbitrary positive measures:
/// not isometric by construction (it always has at least one tree).
/// When `tail_leaves` is set every leaf carries a random tail, which
/// keeps the instance left-invertible.
pub fn random_treed_instance(rng: &mut ChaCha8Rng, tail_leaves: bool) -> MeasuredGraph {
    let kappa = rng.gen_range(1..=4usize);
    let cycle_label = |i: usize| vid(&format!("c{i}"));
    let mut vertices: Vec<VertexId> = (0..kappa).map(cycle_label).collect();
    let mut image: BTreeMap<VertexId, VertexId> = (0..kappa)
        .map(|i| (cycle_label(i), cycle_label((i + kappa - 1) % kappa)))
        .collect();
    let mut leaves = Vec::new();
    let n_trees = rng.gen_range(1..=3usize);
    for t in 0..n_trees {
        let attach = rng.gen_range(0..kappa);
        let root = vid(&format!("t{t}"));
        vertices.push(root.clone());
        image.insert(root.clone(), cycle_label(attach));
        // chain of depth 0..=2 below the root
        let mut parent = root;
        let depth = rng.gen_range(0..=2usize);
        for d in 0..depth {
            let child = vid(&format!("t{t}_{d}"));
            vertices.push(child.clone());
            image.insert(child.clone(), parent.clone());
            parent = child;
        }
        leaves.push(parent);
    }
    let measure: BTreeMap<VertexId, Rational> = vertices
        .iter()
        .map(|v| (v.clone(), positive_rational(rng, 9, 9)))
        .collect();
    let mut tails = Vec::new();
    if tail_leaves {
        for leaf in leaves {
            let base = positive_rational(rng, 9, 9);
            let slope = if rng.gen_bool(0.5) {
                Rational::zero()
            } else {
                positive_rational(rng, 4, 9)
            };
            tails.push(TailTemplate::new(
                leaf,
                Polynomial::from_coeffs(vec![base, slope]),
            ));
        }
    }
    let graph = FunctionalGraph::new(vertices, image).expect("generated graph is valid");
    MeasuredGraph::new(graph, measure, tails).expect("generated instance is valid")
}

/// A node of the unrolled shift space: an explicit vertex or the k-th
/// position of the tail with the given index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Explicit(VertexId),
    Tail(usize, usize),
}

fn node_measure(mg: &MeasuredGraph, node: &Node) -> Rational {
    match node {
        Node::Explicit(v) => mg.measure_of(v).unwrap().clone(),
        Node::Tail(t, k) => mg.tails()[*t].measure_at(*k),
    }
}

/// Children of a node together with the squared weight on the edge
/// into each child, computed directly from measure ratios.
fn node_children(mg: &MeasuredGraph, node: &Node, depth: usize) -> Vec<(Node, Rational)> {
    let mut out = Vec::new();
    match node {
        Node::Explicit(v) => {
            for u in mg.graph().children_of(v) {
                let lambda = node_measure(mg, &Node::Explicit(u.clone()))
                    / mg.measure_of(v).unwrap();
                out.push((Node::Explicit(u.clone()), lambda));
            }
            for (t, tail) in mg.tails().iter().enumerate() {
                if &tail.attach == v {
                    let lambda = tail.measure_at(0) / mg.measure_of(v).unwrap();
                    out.push((Node::Tail(t, 0), lambda));
                }
            }
        }
        Node::Tail(t, k) => {
            if *k < depth {
                let tail = &mg.tails()[*t];
                let lambda = tail.measure_at(k + 1) / tail.measure_at(*k);
                out.push((Node::Tail(*t, k + 1), lambda));
            }
        }
    }
    out
}

/// `||S e_node||^2`: the total squared weight into the children.
fn one_step_energy(mg: &MeasuredGraph, node: &Node, depth: usize) -> Rational {
    node_children(mg, node, depth)
        .into_iter()
        .map(|(_, l)| l)
        .sum()
}

/// Squared norms by explicit mass propagation over the unrolled node
/// space, tails truncated at the given depth. For powers below the
/// depth the truncation is never reached and the values are exact.
pub fn brute_force_norms(
    mg: &MeasuredGraph,
    v: &VertexId,
    horizon: usize,
    depth: usize,
) -> Vec<Rational> {
    let mut mass: BTreeMap<Node, Rational> =
        BTreeMap::from([(Node::Explicit(v.clone()), Rational::one())]);
    let mut out = vec![Rational::one()];
    for _ in 0..horizon {
        let mut next: BTreeMap<Node, Rational> = BTreeMap::new();
        for (node, coeff) in &mass {
            for (child, lambda) in node_children(mg, node, depth) {
                *next.entry(child).or_insert_with(Rational::zero) += coeff * lambda;
            }
        }
        out.push(next.values().sum());
        mass = next;
    }
    out
}

/// Dual squared norms the same way, with the dual edge weight
/// `c_w^2 lambda_u^2` recomputed from scratch via one-step energies.
pub fn brute_force_dual_norms(
    mg: &MeasuredGraph,
    v: &VertexId,
    horizon: usize,
    depth: usize,
) -> Vec<Rational> {
    let mut mass: BTreeMap<Node, Rational> =
        BTreeMap::from([(Node::Explicit(v.clone()), Rational::one())]);
    let mut out = vec![Rational::one()];
    for _ in 0..horizon {
        let mut next: BTreeMap<Node, Rational> = BTreeMap::new();
        for (node, coeff) in &mass {
            let energy = one_step_energy(mg, node, depth);
            assert!(energy.is_positive(), "dual needs left-invertibility");
            let c = energy.recip();
            for (child, lambda) in node_children(mg, node, depth) {
                *next.entry(child).or_insert_with(Rational::zero) += coeff * &c * &c * lambda;
            }
        }
        out.push(next.values().sum());
        mass = next;
    }
    out
}

/// Determinant by Laplace cofactor expansion along the first row —
/// deliberately naive, used as the oracle against elimination-based
/// results.
pub fn cofactor_det(m: &RationalMatrix) -> Rational {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    if n == 0 {
        return Rational::one();
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut det = Rational::zero();
    for j in 0..n {
        let entry = m.get(0, j);
        if entry.is_zero() {
            continue;
        }
        let mut minor = RationalMatrix::zeros(n - 1, n - 1);
        for r in 1..n {
            let mut cc = 0;
            for c in 0..n {
                if c == j {
                    continue;
                }
                minor.set(r - 1, cc, m.get(r, c).clone());
                cc += 1;
            }
        }
        let term = entry * &cofactor_det(&minor);
        if j % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}
