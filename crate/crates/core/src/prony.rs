//! One-dimensional classical and confluent Prony systems.
//!
//! The classical system is `sum_j a_j x_j^k = m_k`; the confluent one is
//! `sum_j sum_i a_{i,j} k (k-1) ... (k-i+1) x_j^{k-i} = m_k`. Both are
//! inverted the same way: the moment generating function
//! `I(z) = sum m_k z^k` is rational with poles at `1 / x_j` (of order `l_j`
//! in the confluent case), so a Padé denominator of degree `L = sum l_j`
//! taken from the first `2L` moments carries the nodes. The nodes are read
//! off as the roots of the reversed denominator `z^L Q(1/z)`, which keeps
//! nodes at or near zero (poles at or near infinity) well conditioned. The
//! amplitudes then solve a confluent Vandermonde system in least squares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};
use crate::polyalg::{
    aberth, canonical_cmp, cluster_by_tolerance, cluster_into, confluent_vandermonde,
    falling_factorial, int_pow, pade_from_moments, refine_cluster, RootOptions, RANK_TOLERANCE,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Solver tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PronyOptions {
    /// Amplitudes below `amplitude_floor * max_k |m_k|` are rejected.
    pub amplitude_floor: f64,
    /// Minimum relative gap between distinct nodes.
    pub node_gap: f64,
    pub rank_tolerance: f64,
    pub roots: RootOptions,
    /// Snap nodes and amplitudes of real data to exact conjugate pairs.
    pub symmetrize_real: bool,
}

impl Default for PronyOptions {
    fn default() -> Self {
        PronyOptions {
            amplitude_floor: 1e-10,
            node_gap: 1e-8,
            rank_tolerance: RANK_TOLERANCE,
            roots: RootOptions::default(),
            symmetrize_real: true,
        }
    }
}

/// Measured moments `m_0 .. m_{K-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct MomentSequence {
    values: Vec<Complex64>,
}

impl MomentSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PronyError::InvalidInput("moment sequence is empty".into()));
        }
        if let Some(k) = values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(PronyError::InvalidInput(format!(
                "moment {k} is not finite"
            )));
        }
        Ok(MomentSequence { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

impl TryFrom<Vec<Complex64>> for MomentSequence {
    type Error = PronyError;

    fn try_from(values: Vec<Complex64>) -> Result<Self> {
        MomentSequence::new(values)
    }
}

impl From<MomentSequence> for Vec<Complex64> {
    fn from(m: MomentSequence) -> Self {
        m.values
    }
}

/// Solution of the classical system: distinct nodes with nonzero amplitudes,
/// kept in canonical order (real part, then imaginary part).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PronySolution {
    nodes: Vec<Complex64>,
    amplitudes: Vec<Complex64>,
}

impl PronySolution {
    pub fn new(nodes: Vec<Complex64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new_with(nodes, amplitudes, &PronyOptions::default())
    }

    pub fn new_with(
        nodes: Vec<Complex64>,
        amplitudes: Vec<Complex64>,
        opts: &PronyOptions,
    ) -> Result<Self> {
        if nodes.len() != amplitudes.len() {
            return Err(PronyError::InvalidInput("one amplitude per node".into()));
        }
        if nodes.is_empty() {
            return Err(PronyError::InvalidInput("at least one node".into()));
        }
        if let Some((j, a)) = amplitudes
            .iter()
            .enumerate()
            .find(|(_, a)| a.norm() <= opts.amplitude_floor)
        {
            return Err(PronyError::AmplitudeBelowFloor {
                index: j,
                magnitude: a.norm(),
            });
        }
        let mut pairs: Vec<(Complex64, Complex64)> = nodes.into_iter().zip(amplitudes).collect();
        pairs.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
        let (nodes, amplitudes): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        check_gaps(&nodes, opts.node_gap)
            .map_err(|(first, second)| PronyError::DuplicateNodes { first, second })?;
        Ok(PronySolution { nodes, amplitudes })
    }

    pub fn from_real(nodes: &[f64], amplitudes: &[f64]) -> Result<Self> {
        Self::new(to_complex(nodes), to_complex(amplitudes))
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same solution viewed as a confluent one with all multiplicities 1.
    pub fn to_confluent(&self) -> ConfluentPronySolution {
        ConfluentPronySolution {
            nodes: self.nodes.clone(),
            amplitudes: self.amplitudes.iter().map(|&a| vec![a]).collect(),
        }
    }
}

/// Solution of the confluent system. `amplitudes[j][i]` multiplies the
/// `i`-th falling-factorial column of node `j`; `l_j = amplitudes[j].len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfluentPronySolution {
    nodes: Vec<Complex64>,
    amplitudes: Vec<Vec<Complex64>>,
}

impl ConfluentPronySolution {
    pub fn new(nodes: Vec<Complex64>, amplitudes: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::new_with(nodes, amplitudes, &PronyOptions::default())
    }

    pub fn new_with(
        nodes: Vec<Complex64>,
        amplitudes: Vec<Vec<Complex64>>,
        opts: &PronyOptions,
    ) -> Result<Self> {
        if nodes.len() != amplitudes.len() {
            return Err(PronyError::InvalidInput(
                "one amplitude block per node".into(),
            ));
        }
        if nodes.is_empty() {
            return Err(PronyError::InvalidInput("at least one node".into()));
        }
        for (j, block) in amplitudes.iter().enumerate() {
            let Some(top) = block.last() else {
                return Err(PronyError::InvalidInput(format!(
                    "node {j} has multiplicity 0"
                )));
            };
            if top.norm() <= opts.amplitude_floor {
                return Err(PronyError::AmplitudeBelowFloor {
                    index: j,
                    magnitude: top.norm(),
                });
            }
        }
        let mut pairs: Vec<(Complex64, Vec<Complex64>)> =
            nodes.into_iter().zip(amplitudes).collect();
        pairs.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
        let (nodes, amplitudes): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        check_gaps(&nodes, opts.node_gap)
            .map_err(|(first, second)| PronyError::DuplicateNodes { first, second })?;
        Ok(ConfluentPronySolution { nodes, amplitudes })
    }

    pub fn from_real(nodes: &[f64], amplitudes: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            to_complex(nodes),
            amplitudes.iter().map(|b| to_complex(b)).collect(),
        )
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[Vec<Complex64>] {
        &self.amplitudes
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.amplitudes.iter().map(Vec::len).collect()
    }

    /// `L = sum l_j`.
    pub fn total_multiplicity(&self) -> usize {
        self.amplitudes.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops to a classical solution when every multiplicity is one.
    pub fn to_classical(&self) -> Option<PronySolution> {
        if self.amplitudes.iter().all(|b| b.len() == 1) {
            Some(PronySolution {
                nodes: self.nodes.clone(),
                amplitudes: self.amplitudes.iter().map(|b| b[0]).collect(),
            })
        } else {
            None
        }
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Indices of the first pair of sorted nodes closer than `gap * max(1, |x|)`.
fn check_gaps(nodes: &[Complex64], gap: f64) -> std::result::Result<(), (usize, usize)> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let scale = 1f64.max(nodes[i].norm()).max(nodes[j].norm());
            if (nodes[i] - nodes[j]).norm() <= gap * scale {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

/// Forward map `m_k = sum_j a_j x_j^k`, `k = 0..count-1`, with `0^0 = 1`.
pub fn prony_moments(sol: &PronySolution, count: usize) -> MomentSequence {
    let mut values = vec![ZERO; count];
    for (&x, &a) in sol.nodes.iter().zip(&sol.amplitudes) {
        let mut p = a;
        for v in values.iter_mut() {
            *v += p;
            p *= x;
        }
    }
    MomentSequence { values }
}

/// Forward map of the confluent system,
/// `m_k = sum_j sum_i a_{i,j} k (k-1) ... (k-i+1) x_j^{k-i}`.
pub fn confluent_moments(sol: &ConfluentPronySolution, count: usize) -> MomentSequence {
    let values = (0..count)
        .map(|k| {
            sol.nodes
                .iter()
                .zip(&sol.amplitudes)
                .flat_map(|(&x, block)| {
                    block
                        .iter()
                        .enumerate()
                        .filter(move |(i, _)| *i <= k)
                        .map(move |(i, &a)| a * falling_factorial(k, i) * int_pow(x, k - i))
                })
                .sum()
        })
        .collect();
    MomentSequence { values }
}

pub fn solve_prony_1d(m: &MomentSequence, n: usize) -> Result<PronySolution> {
    solve_prony_1d_with(m, n, &PronyOptions::default())
}

/// Recovers `n` nodes and amplitudes from the first `2n` moments.
pub fn solve_prony_1d_with(
    m: &MomentSequence,
    n: usize,
    opts: &PronyOptions,
) -> Result<PronySolution> {
    let rec = recover(m, n, None, opts)?;
    Ok(PronySolution {
        nodes: rec.nodes,
        amplitudes: rec.amplitudes.into_iter().map(|b| b[0]).collect(),
    })
}

pub fn solve_confluent_prony(
    m: &MomentSequence,
    multiplicities: &[usize],
) -> Result<ConfluentPronySolution> {
    solve_confluent_prony_with(m, multiplicities, &PronyOptions::default())
}

/// Recovers a confluent solution whose multiplicities, in canonical node
/// order, are `multiplicities`. Uses the first `2L` moments.
pub fn solve_confluent_prony_with(
    m: &MomentSequence,
    multiplicities: &[usize],
    opts: &PronyOptions,
) -> Result<ConfluentPronySolution> {
    if multiplicities.is_empty() || multiplicities.contains(&0) {
        return Err(PronyError::InvalidInput(
            "multiplicities must be positive".into(),
        ));
    }
    let total: usize = multiplicities.iter().sum();
    let rec = recover(m, total, Some(multiplicities), opts)?;
    Ok(ConfluentPronySolution {
        nodes: rec.nodes,
        amplitudes: rec.amplitudes,
    })
}

struct Recovered {
    nodes: Vec<Complex64>,
    amplitudes: Vec<Vec<Complex64>>,
}

fn recover(
    m: &MomentSequence,
    total: usize,
    pattern: Option<&[usize]>,
    opts: &PronyOptions,
) -> Result<Recovered> {
    if total == 0 {
        return Err(PronyError::InvalidInput(
            "model order must be positive".into(),
        ));
    }
    let needed = 2 * total;
    if m.len() < needed {
        return Err(PronyError::InsufficientMoments {
            needed,
            available: m.len(),
        });
    }
    let data = &m.values[..needed];
    let real = opts.symmetrize_real && m.is_real();

    let pade = pade_from_moments(data, total, opts.rank_tolerance)?;
    let reversed = pade.denominator.reversed(total + 1);
    let (raw, _) = aberth(&reversed, &opts.roots)?;

    let clusters = match pattern {
        None => {
            let groups = cluster_by_tolerance(&raw, opts.roots.cluster_tolerance);
            if let Some(g) = groups.iter().find(|g| g.len() > 1) {
                return Err(PronyError::NodeCollision {
                    first: g[0],
                    second: g[1],
                });
            }
            groups
        }
        Some(p) => cluster_into(&raw, p.len()),
    };

    let mut found: Vec<(Complex64, usize, f64)> = clusters
        .iter()
        .map(|g| {
            let pts: Vec<Complex64> = g.iter().map(|&i| raw[i]).collect();
            let diameter = pts
                .iter()
                .flat_map(|a| pts.iter().map(move |b| (a - b).norm()))
                .fold(0.0, f64::max);
            (refine_cluster(&reversed, &pts), g.len(), diameter)
        })
        .collect();

    if real {
        let mut nodes: Vec<Complex64> = found.iter().map(|f| f.0).collect();
        symmetrize_nodes(&mut nodes, opts.roots.cluster_tolerance);
        for (f, z) in found.iter_mut().zip(nodes) {
            f.0 = z;
        }
    }
    found.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
    let nodes: Vec<Complex64> = found.iter().map(|f| f.0).collect();
    let mults: Vec<usize> = found.iter().map(|f| f.1).collect();

    if let Some(p) = pattern {
        if mults != p || !clusters_are_separated(&found) {
            return Err(PronyError::MultiplicityMismatch {
                expected: p.to_vec(),
                found: mults,
            });
        }
    }
    if let Err((first, second)) = check_gaps(&nodes, opts.node_gap) {
        return Err(PronyError::NodeCollision { first, second });
    }

    let orders: Vec<usize> = mults.iter().map(|l| l - 1).collect();
    let v =
        confluent_vandermonde(&nodes, &orders, needed).map_err(|_| PronyError::NodeCollision {
            first: 0,
            second: 1,
        })?;
    let coeffs = v
        .qr_pivoted()
        .solve_least_squares(data, f64::EPSILON)
        .map_err(|_| PronyError::SingularMatrix)?;

    let mut amplitudes = Vec::with_capacity(nodes.len());
    let mut offset = 0;
    for &l in &mults {
        amplitudes.push(coeffs[offset..offset + l].to_vec());
        offset += l;
    }
    if real {
        symmetrize_amplitudes(&nodes, &mut amplitudes);
    }

    let floor = opts.amplitude_floor
        * m.values[..needed]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
    for (j, block) in amplitudes.iter().enumerate() {
        let top = block[block.len() - 1].norm();
        if top <= floor {
            return Err(PronyError::AmplitudeBelowFloor {
                index: j,
                magnitude: top,
            });
        }
    }
    Ok(Recovered { nodes, amplitudes })
}

/// A cluster standing for a multiple node must be much tighter than its
/// distance to the other clusters.
fn clusters_are_separated(found: &[(Complex64, usize, f64)]) -> bool {
    found.iter().enumerate().all(|(i, &(c, size, diameter))| {
        if size == 1 {
            return true;
        }
        let nearest = found
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| (f.0 - c).norm())
            .fold(f64::INFINITY, f64::min);
        diameter <= 0.5 * nearest && diameter <= 0.1 * (1.0 + c.norm())
    })
}

fn symmetrize_nodes(nodes: &mut [Complex64], tol: f64) {
    let n = nodes.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        let scale = 1f64.max(nodes[i].norm());
        if nodes[i].im.abs() <= tol * scale {
            nodes[i].im = 0.0;
            paired[i] = true;
        }
    }
    for i in 0..n {
        if paired[i] || nodes[i].im < 0.0 {
            continue;
        }
        let target = nodes[i].conj();
        let partner = (0..n)
            .filter(|&j| !paired[j] && j != i && nodes[j].im < 0.0)
            .min_by(|&a, &b| {
                (nodes[a] - target)
                    .norm()
                    .total_cmp(&(nodes[b] - target).norm())
            });
        if let Some(j) = partner {
            let scale = 1f64.max(nodes[i].norm());
            if (nodes[j] - target).norm() <= tol * scale {
                let mean = (nodes[i] + nodes[j].conj()) * 0.5;
                nodes[i] = mean;
                nodes[j] = mean.conj();
                paired[i] = true;
                paired[j] = true;
            }
        }
    }
}

fn symmetrize_amplitudes(nodes: &[Complex64], amplitudes: &mut [Vec<Complex64>]) {
    for i in 0..nodes.len() {
        if nodes[i].im == 0.0 {
            amplitudes[i].iter_mut().for_each(|a| a.im = 0.0);
        } else if nodes[i].im > 0.0 {
            if let Some(j) = (0..nodes.len()).find(|&j| nodes[j] == nodes[i].conj()) {
                if amplitudes[j].len() != amplitudes[i].len() {
                    continue;
                }
                for t in 0..amplitudes[i].len() {
                    let mean = (amplitudes[i][t] + amplitudes[j][t].conj()) * 0.5;
                    amplitudes[i][t] = mean;
                    amplitudes[j][t] = mean.conj();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> MomentSequence {
        MomentSequence::from_real(v).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn forward_map_examples() {
        let s = PronySolution::from_real(&[0.0], &[1.0]).unwrap();
        assert_eq!(prony_moments(&s, 3).values(), &[c(1.0), c(0.0), c(0.0)]);
        let s = PronySolution::from_real(&[0.5], &[2.0]).unwrap();
        assert_eq!(prony_moments(&s, 4).real_parts(), vec![2.0, 1.0, 0.5, 0.25]);
        let s = PronySolution::from_real(&[0.3, 0.7], &[1.0, -1.0]).unwrap();
        let m = prony_moments(&s, 4).real_parts();
        // Independent summation: sum_j a_j x_j^k with powi.
        for (k, v) in m.iter().enumerate() {
            let oracle = 0.3f64.powi(k as i32) - 0.7f64.powi(k as i32);
            assert!((v - oracle).abs() < 1e-15);
        }
        assert!((m[3] + 0.316).abs() < 1e-15);
    }

    #[test]
    fn confluent_forward_examples() {
        let s = ConfluentPronySolution::from_real(&[0.0], &[vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            confluent_moments(&s, 4).real_parts(),
            vec![1.0, 1.0, 0.0, 0.0]
        );
        let s = ConfluentPronySolution::from_real(&[0.5], &[vec![1.0, 2.0]]).unwrap();
        assert_eq!(
            confluent_moments(&s, 4).real_parts(),
            vec![1.0, 2.5, 2.25, 1.625]
        );
        let p = PronySolution::from_real(&[-0.2, 0.4], &[1.5, 0.5]).unwrap();
        assert_eq!(
            confluent_moments(&p.to_confluent(), 6),
            prony_moments(&p, 6)
        );
    }

    #[test]
    fn solve_trivial_examples() {
        let s = solve_prony_1d(&re(&[1.0, 0.0, 0.0, 0.0]), 1).unwrap();
        assert_eq!(s.nodes(), &[c(0.0)]);
        assert!((s.amplitudes()[0] - c(1.0)).norm() < 1e-15);

        let s = solve_prony_1d(&re(&[2.0, 1.0, 0.5, 0.25]), 1).unwrap();
        assert!((s.nodes()[0] - c(0.5)).norm() < 1e-15);
        assert!((s.amplitudes()[0] - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn solve_two_nodes() {
        let s = solve_prony_1d(&re(&[0.0, -0.4, -0.4, -0.316]), 2).unwrap();
        assert!((s.nodes()[0] - c(0.3)).norm() < 1e-8);
        assert!((s.nodes()[1] - c(0.7)).norm() < 1e-8);
        assert!((s.amplitudes()[0] - c(1.0)).norm() < 1e-8);
        assert!((s.amplitudes()[1] - c(-1.0)).norm() < 1e-8);
        assert!(s.nodes().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn zero_node_among_others() {
        let truth = PronySolution::from_real(&[0.0, 0.6], &[1.0, -2.0]).unwrap();
        let s = solve_prony_1d(&prony_moments(&truth, 4), 2).unwrap();
        assert!(s.nodes()[0].norm() < 1e-14);
        assert!((s.nodes()[1] - c(0.6)).norm() < 1e-12);
    }

    #[test]
    fn complex_conjugate_nodes_from_real_data() {
        let truth = PronySolution::new(
            vec![Complex64::new(0.2, 0.5), Complex64::new(0.2, -0.5)],
            vec![Complex64::new(1.0, 0.3), Complex64::new(1.0, -0.3)],
        )
        .unwrap();
        let m = prony_moments(&truth, 4);
        assert!(m.values().iter().all(|z| z.im.abs() < 1e-15));
        let m = MomentSequence::from_real(&m.real_parts()).unwrap();
        let s = solve_prony_1d(&m, 2).unwrap();
        assert_eq!(s.nodes()[0], s.nodes()[1].conj());
        for (a, b) in s.nodes().iter().zip(truth.nodes()) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in s.amplitudes().iter().zip(truth.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn overestimated_order_is_reported() {
        let m = re(&[2.0, 1.0, 0.5, 0.25, 0.125, 0.0625]);
        assert!(matches!(
            solve_prony_1d(&m, 2),
            Err(PronyError::SingularHankel {
                effective_rank: 1,
                requested: 2
            })
        ));
    }

    #[test]
    fn confluent_data_triggers_collision() {
        let s = ConfluentPronySolution::from_real(&[0.5], &[vec![1.0, 2.0]]).unwrap();
        let m = confluent_moments(&s, 4);
        assert!(matches!(
            solve_prony_1d(&m, 2),
            Err(PronyError::NodeCollision { .. })
        ));
    }

    #[test]
    fn confluent_examples() {
        let s = solve_confluent_prony(&re(&[1.0, 2.5, 2.25, 1.625]), &[2]).unwrap();
        assert!((s.nodes()[0] - c(0.5)).norm() < 1e-10);
        assert!((s.amplitudes()[0][0] - c(1.0)).norm() < 1e-9);
        assert!((s.amplitudes()[0][1] - c(2.0)).norm() < 1e-9);

        let truth =
            ConfluentPronySolution::from_real(&[0.2, 0.8], &[vec![1.0], vec![0.5, -2.0]]).unwrap();
        let m = confluent_moments(&truth, 6);
        let s = solve_confluent_prony(&m, &[1, 2]).unwrap();
        for (a, b) in s.nodes().iter().zip(truth.nodes()) {
            assert!((a - b).norm() < 1e-7);
        }
        for (a, b) in s
            .amplitudes()
            .iter()
            .flatten()
            .zip(truth.amplitudes().iter().flatten())
        {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn confluent_pattern_mismatch() {
        let truth =
            ConfluentPronySolution::from_real(&[0.2, 0.8], &[vec![1.0], vec![0.5, -2.0]]).unwrap();
        let m = confluent_moments(&truth, 6);
        assert!(matches!(
            solve_confluent_prony(&m, &[2, 1]),
            Err(PronyError::MultiplicityMismatch { .. })
        ));
        let spikes = PronySolution::from_real(&[0.3, 0.7], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_confluent_prony(&prony_moments(&spikes, 4), &[2]),
            Err(PronyError::MultiplicityMismatch { .. })
        ));
    }

    #[test]
    fn all_ones_pattern_matches_classical() {
        let truth = PronySolution::from_real(&[-0.6, 0.1, 0.5], &[1.0, -0.7, 1.3]).unwrap();
        let m = prony_moments(&truth, 6);
        let a = solve_prony_1d(&m, 3).unwrap();
        let b = solve_confluent_prony(&m, &[1, 1, 1])
            .unwrap()
            .to_classical()
            .unwrap();
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert!((x - y).norm() <= 1e-10);
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn validation_errors() {
        assert!(MomentSequence::new(vec![]).is_err());
        assert!(MomentSequence::from_real(&[1.0, f64::NAN]).is_err());
        assert!(matches!(
            PronySolution::from_real(&[0.1, 0.1], &[1.0, 1.0]),
            Err(PronyError::DuplicateNodes { .. })
        ));
        assert!(matches!(
            PronySolution::from_real(&[0.1], &[0.0]),
            Err(PronyError::AmplitudeBelowFloor { .. })
        ));
        assert!(matches!(
            solve_prony_1d(&re(&[1.0, 2.0, 3.0]), 2),
            Err(PronyError::InsufficientMoments {
                needed: 4,
                available: 3
            })
        ));
    }

    #[test]
    fn canonical_order_is_enforced() {
        let s = PronySolution::from_real(&[0.7, -0.2, 0.1], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.nodes(), &[c(-0.2), c(0.1), c(0.7)]);
        assert_eq!(s.amplitudes(), &[c(2.0), c(3.0), c(1.0)]);
    }
}
