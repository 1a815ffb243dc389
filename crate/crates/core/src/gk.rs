//! Gacs-Korner common randomness: connected-component labeling of the
//! support bipartite graph between two variable groups, plus the
//! decomposition checks used by the rate-region machinery.

use crate::error::{Error, Result};
use crate::probability::{decode_index, encode_index, Alphabet, JointPmf, SUPPORT_EPS};

/// Entropy tolerance for declaring two variables equivalent (H both ways zero).
pub const EQUIV_TOL: f64 = 1e-9;

/// Common-randomness partition of a bivariate (possibly grouped) joint pmf.
///
/// Grouped variables are flattened to product symbols before the graph is
/// built. Class ids are canonical: classes are ordered by the smallest flat
/// right-symbol index they contain. Symbols with zero marginal mass map to a
/// reserved unsupported sink (`None`) excluded from `class_mass`.
#[derive(Debug, Clone)]
pub struct GkPartition {
    left_vars: Vec<String>,
    right_vars: Vec<String>,
    right_alphabets: Vec<Alphabet>,
    right_dims: Vec<usize>,
    class_of_left: Vec<Option<usize>>,
    class_of_right: Vec<Option<usize>>,
    class_mass: Vec<f64>,
    left_class_sizes: Vec<usize>,
    right_class_sizes: Vec<usize>,
    representatives: Vec<usize>,
}

impl GkPartition {
    pub fn left_vars(&self) -> &[String] {
        &self.left_vars
    }

    pub fn right_vars(&self) -> &[String] {
        &self.right_vars
    }

    pub fn num_classes(&self) -> usize {
        self.class_mass.len()
    }

    /// Probability of each class, in canonical class order. Sums to 1.
    pub fn class_mass(&self) -> &[f64] {
        &self.class_mass
    }

    pub fn class_of_left(&self, flat_left: usize) -> Option<usize> {
        self.class_of_left[flat_left]
    }

    pub fn class_of_right(&self, flat_right: usize) -> Option<usize> {
        self.class_of_right[flat_right]
    }

    /// Supported left- and right-symbol counts per class.
    pub fn left_class_sizes(&self) -> &[usize] {
        &self.left_class_sizes
    }

    pub fn right_class_sizes(&self) -> &[usize] {
        &self.right_class_sizes
    }

    /// Number of equivalent choices for the common-randomness mapping when a
    /// representative symbol is picked inside each component: the product of
    /// the component sizes on the left node set.
    pub fn mapping_choices(&self) -> Result<u64> {
        let mut n: u64 = 1;
        for &s in &self.left_class_sizes {
            n = n
                .checked_mul(s as u64)
                .ok_or_else(|| Error::ArgOutOfRange("mapping choice count overflows".into()))?;
        }
        Ok(n)
    }

    /// Label of a class: the flattened right symbol of its canonical representative.
    pub fn class_label(&self, class: usize) -> String {
        flat_label(self.representatives[class], &self.right_dims, &self.right_alphabets)
    }

    /// Pmf of the class-id variable (entropy of this pmf is the common
    /// randomness), over an alphabet labeled by canonical representatives.
    pub fn gk_variable(&self) -> Result<JointPmf> {
        let labels: Vec<String> = (0..self.num_classes()).map(|c| self.class_label(c)).collect();
        let alpha = Alphabet::new("GK", labels)?;
        let total: f64 = self.class_mass.iter().sum();
        let mass: Vec<f64> = self.class_mass.iter().map(|m| m / total).collect();
        JointPmf::new(vec![alpha], mass)
    }

    pub fn entropy(&self) -> f64 {
        self.class_mass
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum::<f64>()
            .max(0.0)
    }
}

fn flat_label(flat: usize, dims: &[usize], alphabets: &[Alphabet]) -> String {
    let mut idx = vec![0usize; dims.len()];
    decode_index(flat, dims, &mut idx);
    if dims.len() == 1 {
        return alphabets[0].symbols()[idx[0]].clone();
    }
    let parts: Vec<&str> = idx
        .iter()
        .enumerate()
        .map(|(j, &i)| alphabets[j].symbols()[i].as_str())
        .collect();
    format!("({})", parts.join(","))
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Computes the common-randomness partition between the `left` and `right`
/// variable groups, which must be disjoint and cover all variables of `p`.
pub fn gk_partition(p: &JointPmf, left: &[&str], right: &[&str]) -> Result<GkPartition> {
    let l_axes = p.axes(left)?;
    let r_axes = p.axes(right)?;
    for a in &r_axes {
        if l_axes.contains(a) {
            return Err(Error::OverlappingSubsets(p.variables()[*a].name().into()));
        }
    }
    if l_axes.len() + r_axes.len() != p.dims().len() {
        return Err(Error::ArgOutOfRange(
            "left and right groups must cover all variables".into(),
        ));
    }

    let l_dims: Vec<usize> = l_axes.iter().map(|&a| p.dims()[a]).collect();
    let r_dims: Vec<usize> = r_axes.iter().map(|&a| p.dims()[a]).collect();
    let nl: usize = l_dims.iter().product();
    let nr: usize = r_dims.iter().product();

    // pair mass matrix, left-major
    let mut w = vec![0.0; nl * nr];
    let mut idx = vec![0usize; p.dims().len()];
    let mut l_sub = vec![0usize; l_axes.len()];
    let mut r_sub = vec![0usize; r_axes.len()];
    for (off, &m) in p.mass().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        decode_index(off, p.dims(), &mut idx);
        for (j, &a) in l_axes.iter().enumerate() {
            l_sub[j] = idx[a];
        }
        for (j, &a) in r_axes.iter().enumerate() {
            r_sub[j] = idx[a];
        }
        w[encode_index(&l_sub, &l_dims) * nr + encode_index(&r_sub, &r_dims)] += m;
    }

    let mut uf = UnionFind::new(nl + nr);
    let mut any_edge = false;
    for l in 0..nl {
        for r in 0..nr {
            if w[l * nr + r] > SUPPORT_EPS {
                uf.union(l, nl + r);
                any_edge = true;
            }
        }
    }
    if !any_edge {
        return Err(Error::EmptySupport);
    }

    // canonical class ids: order components by smallest supported right index
    let mut right_supported = vec![false; nr];
    let mut left_supported = vec![false; nl];
    for l in 0..nl {
        for r in 0..nr {
            if w[l * nr + r] > SUPPORT_EPS {
                right_supported[r] = true;
                left_supported[l] = true;
            }
        }
    }
    let mut root_to_class: Vec<Option<usize>> = vec![None; nl + nr];
    let mut representatives = Vec::new();
    for (r, &supported) in right_supported.iter().enumerate() {
        if supported {
            let root = uf.find(nl + r);
            if root_to_class[root].is_none() {
                root_to_class[root] = Some(representatives.len());
                representatives.push(r);
            }
        }
    }

    let n_classes = representatives.len();
    let mut class_of_left = vec![None; nl];
    let mut class_of_right = vec![None; nr];
    let mut left_class_sizes = vec![0usize; n_classes];
    let mut right_class_sizes = vec![0usize; n_classes];
    let mut class_mass = vec![0.0; n_classes];
    for l in 0..nl {
        if left_supported[l] {
            let c = root_to_class[uf.find(l)].expect("supported left symbol has a class");
            class_of_left[l] = Some(c);
            left_class_sizes[c] += 1;
        }
    }
    for r in 0..nr {
        if right_supported[r] {
            let c = root_to_class[uf.find(nl + r)].expect("supported right symbol has a class");
            class_of_right[r] = Some(c);
            right_class_sizes[c] += 1;
        }
    }
    for l in 0..nl {
        for r in 0..nr {
            let m = w[l * nr + r];
            if m > SUPPORT_EPS {
                class_mass[root_to_class[uf.find(l)].unwrap()] += m;
            } else if m > 0.0 {
                // below-threshold residue: attribute to the right symbol's class
                // when it has one, otherwise drop it from the class masses
                if let Some(c) = class_of_right[r] {
                    class_mass[c] += m;
                }
            }
        }
    }

    Ok(GkPartition {
        left_vars: left.iter().map(|s| s.to_string()).collect(),
        right_vars: right.iter().map(|s| s.to_string()).collect(),
        right_alphabets: r_axes.iter().map(|&a| p.variables()[a].clone()).collect(),
        right_dims: r_dims,
        class_of_left,
        class_of_right,
        class_mass,
        left_class_sizes,
        right_class_sizes,
        representatives,
    })
}

/// True iff H(X|Y) and H(Y|X) are both below `EQUIV_TOL`.
pub fn rv_equivalent(p: &JointPmf, x: &[&str], y: &[&str]) -> Result<bool> {
    let h_xy = p.conditional_entropy(x, y)?;
    let h_yx = p.conditional_entropy(y, x)?;
    Ok(h_xy <= EQUIV_TOL && h_yx <= EQUIV_TOL)
}

/// Appends the class id of `part` as a deterministic variable computed from
/// the right group (`of_right` true) or the left group.
pub fn extend_with_class(
    p: &JointPmf,
    part: &GkPartition,
    name: &str,
    of_right: bool,
) -> Result<JointPmf> {
    let group: Vec<&str> = if of_right {
        part.right_vars.iter().map(|s| s.as_str()).collect()
    } else {
        part.left_vars.iter().map(|s| s.as_str()).collect()
    };
    let dims: Vec<usize> = group
        .iter()
        .map(|n| p.alphabet(n).map(|a| a.len()))
        .collect::<Result<_>>()?;
    let n_classes = part.num_classes();
    // one extra symbol for the unsupported sink
    let alpha = Alphabet::indexed(name, "c", n_classes + 1)?;
    p.extend_deterministic(alpha, &group, |sub| {
        let flat = encode_index(sub, &dims);
        let class = if of_right {
            part.class_of_right(flat)
        } else {
            part.class_of_left(flat)
        };
        class.unwrap_or(n_classes)
    })
}

/// Checks the product-support decomposition: for independent groups with
/// product support, the common randomness of the combined pair is equivalent
/// to the pair of componentwise common randomness variables.
///
/// `q_a` must be a bivariate pmf (A1, A2) and `q_b` a bivariate pmf (U, V)
/// with variable names disjoint from `q_a`; the independent product joint is
/// built internally so the support condition holds by construction.
pub fn verify_lemma1(q_a: &JointPmf, q_b: &JointPmf) -> Result<bool> {
    if q_a.variables().len() != 2 || q_b.variables().len() != 2 {
        return Err(Error::ArgOutOfRange("both factors must be bivariate".into()));
    }
    let joint = q_a.product(q_b)?;
    let a1 = q_a.variables()[0].name().to_string();
    let a2 = q_a.variables()[1].name().to_string();
    let u = q_b.variables()[0].name().to_string();
    let v = q_b.variables()[1].name().to_string();

    let part_comb = gk_partition(&joint, &[&a1, &u], &[&a2, &v])?;
    let part_a = gk_partition(q_a, &[&a1], &[&a2])?;
    let part_b = gk_partition(q_b, &[&u], &[&v])?;

    let ext = extend_with_class(&joint, &part_comb, "Gc", true)?;
    let ext = extend_with_class(&ext, &part_a, "G1", true)?;
    let ext = extend_with_class(&ext, &part_b, "G2", true)?;
    rv_equivalent(&ext, &["Gc"], &["G1", "G2"])
}

/// Checks that an independent appended variable does not change the common
/// randomness: GK between X and (Y, Z) is equivalent to GK between X and Y
/// when Z is independent of (X, Y).
pub fn verify_lemma2(q_xy: &JointPmf, q_z: &JointPmf) -> Result<bool> {
    if q_xy.variables().len() != 2 || q_z.variables().len() != 1 {
        return Err(Error::ArgOutOfRange(
            "first factor must be bivariate and second univariate".into(),
        ));
    }
    let joint = q_xy.product(q_z)?;
    let x = q_xy.variables()[0].name().to_string();
    let y = q_xy.variables()[1].name().to_string();
    let z = q_z.variables()[0].name().to_string();

    let part_xyz = gk_partition(&joint, &[&x], &[&y, &z])?;
    let part_xy = gk_partition(q_xy, &[&x], &[&y])?;

    let ext = extend_with_class(&joint, &part_xyz, "Ga", true)?;
    let ext = extend_with_class(&ext, &part_xy, "Gb", true)?;
    rv_equivalent(&ext, &["Ga"], &["Gb"])
}
