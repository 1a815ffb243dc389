//! Finite-alphabet probability engine: pmfs, channels, information measures,
//! supports, and distances. All logarithms are base 2 (bits).

use crate::error::{Error, Result};

/// An entry is treated as part of the support iff it exceeds this threshold.
pub const SUPPORT_EPS: f64 = 1e-15;
/// Total mass (and per-row channel mass) must match 1 within this tolerance.
pub const MASS_TOL: f64 = 1e-12;
/// Conditional mutual informations below this magnitude are clamped to zero.
pub const MI_CLAMP: f64 = 1e-9;

/// A named finite alphabet with ordered, pairwise-distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, symbols: Vec<String>) -> Result<Self> {
        let name = name.into();
        if symbols.is_empty() {
            return Err(Error::InvalidPmf(format!("alphabet `{name}` has no symbols")));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidPmf(format!(
                    "alphabet `{name}` repeats symbol `{s}`"
                )));
            }
        }
        Ok(Self { name, symbols })
    }

    /// Binary alphabet with symbols "0" and "1".
    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, vec!["0".into(), "1".into()]).expect("binary alphabet is valid")
    }

    /// Alphabet with `n` symbols `prefix0..prefix{n-1}`.
    pub fn indexed(name: impl Into<String>, prefix: &str, n: usize) -> Result<Self> {
        Self::new(name, (0..n).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

/// Dense joint pmf over the product of named finite alphabets.
///
/// Mass is stored row-major in the order of `variables`. Values are immutable
/// after construction; every operation returns a fresh value.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    variables: Vec<Alphabet>,
    dims: Vec<usize>,
    mass: Vec<f64>,
}

impl JointPmf {
    pub fn new(variables: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidPmf("no variables".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name() == v.name()) {
                return Err(Error::InvalidPmf(format!(
                    "duplicate variable name `{}`",
                    v.name()
                )));
            }
        }
        let dims: Vec<usize> = variables.iter().map(|a| a.len()).collect();
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidPmf("joint alphabet size overflows".into()))?;
        if mass.len() != n {
            return Err(Error::InvalidPmf(format!(
                "mass tensor has {} entries, expected {}",
                mass.len(),
                n
            )));
        }
        let mut total = 0.0;
        for &m in &mass {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidPmf(format!("entry {m} is not a probability")));
            }
            total += m;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!(
                "total mass {total} differs from 1 by more than {MASS_TOL}"
            )));
        }
        Ok(Self { variables, dims, mass })
    }

    /// Builds a pmf by evaluating `f` on every multi-index.
    pub fn from_fn(variables: Vec<Alphabet>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let dims: Vec<usize> = variables.iter().map(|a| a.len()).collect();
        let n: usize = dims.iter().product();
        let mut mass = vec![0.0; n];
        let mut idx = vec![0usize; dims.len()];
        for (off, slot) in mass.iter_mut().enumerate() {
            decode_index(off, &dims, &mut idx);
            *slot = f(&idx);
        }
        Self::new(variables, mass)
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.variables
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.variables[self.var_index(name)?])
    }

    /// Resolves variable names to axis positions, rejecting repeats.
    pub fn axes(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut axes = Vec::with_capacity(names.len());
        for n in names {
            let ax = self.var_index(n)?;
            if axes.contains(&ax) {
                return Err(Error::OverlappingSubsets((*n).into()));
            }
            axes.push(ax);
        }
        Ok(axes)
    }

    pub fn prob(&self, idx: &[usize]) -> f64 {
        self.mass[encode_index(idx, &self.dims)]
    }

    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&m| m > SUPPORT_EPS).count()
    }

    /// Marginal pmf over `keep`, in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let axes = self.axes(keep)?;
        let vars: Vec<Alphabet> = axes.iter().map(|&a| self.variables[a].clone()).collect();
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        let mut sub = vec![0usize; axes.len()];
        for (off, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            decode_index(off, &self.dims, &mut idx);
            for (j, &a) in axes.iter().enumerate() {
                sub[j] = idx[a];
            }
            out[encode_index(&sub, &dims)] += m;
        }
        Ok(JointPmf { variables: vars, dims, mass: out })
    }

    /// Conditional pmf over the remaining variables given `var = symbol`.
    pub fn condition(&self, var: &str, symbol: &str) -> Result<JointPmf> {
        let ax = self.var_index(var)?;
        let sym = self.variables[ax]
            .index_of(symbol)
            .ok_or_else(|| Error::ArgOutOfRange(format!("symbol `{symbol}` not in `{var}`")))?;
        let keep_axes: Vec<usize> = (0..self.dims.len()).filter(|&a| a != ax).collect();
        if keep_axes.is_empty() {
            return Err(Error::InvalidPmf("cannot condition away the only variable".into()));
        }
        let vars: Vec<Alphabet> = keep_axes.iter().map(|&a| self.variables[a].clone()).collect();
        let dims: Vec<usize> = keep_axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; dims.iter().product()];
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dims.len()];
        let mut sub = vec![0usize; keep_axes.len()];
        for (off, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            decode_index(off, &self.dims, &mut idx);
            if idx[ax] != sym {
                continue;
            }
            for (j, &a) in keep_axes.iter().enumerate() {
                sub[j] = idx[a];
            }
            out[encode_index(&sub, &dims)] += m;
            total += m;
        }
        if total <= SUPPORT_EPS {
            return Err(Error::EmptySupport);
        }
        for v in &mut out {
            *v /= total;
        }
        Ok(JointPmf { variables: vars, dims, mass: out })
    }

    /// Extends the joint with `channel.to`, appended as the last variable.
    ///
    /// The channel must condition on exactly the variables named in its `from`
    /// list (matched by name and symbols), so the new variable is conditionally
    /// independent of everything else given those variables by construction.
    pub fn compose(&self, channel: &Channel) -> Result<JointPmf> {
        let mut from_axes = Vec::with_capacity(channel.from.len());
        for a in &channel.from {
            let ax = self.var_index(a.name())?;
            if self.variables[ax] != *a {
                return Err(Error::AlphabetMismatch(format!(
                    "channel conditions on `{}` with different symbols",
                    a.name()
                )));
            }
            from_axes.push(ax);
        }
        if self.var_index(channel.to.name()).is_ok() {
            return Err(Error::AlphabetMismatch(format!(
                "variable `{}` already present",
                channel.to.name()
            )));
        }
        let from_dims: Vec<usize> = channel.from.iter().map(|a| a.len()).collect();
        let k = channel.to.len();
        let mut vars = self.variables.clone();
        vars.push(channel.to.clone());
        let mut dims = self.dims.clone();
        dims.push(k);
        let mut out = vec![0.0; self.mass.len() * k];
        let mut idx = vec![0usize; self.dims.len()];
        let mut sub = vec![0usize; from_axes.len()];
        for (off, &m) in self.mass.iter().enumerate() {
            decode_index(off, &self.dims, &mut idx);
            for (j, &a) in from_axes.iter().enumerate() {
                sub[j] = idx[a];
            }
            let row = encode_index(&sub, &from_dims);
            for a in 0..k {
                out[off * k + a] = m * channel.rows[row * k + a];
            }
        }
        Ok(JointPmf { variables: vars, dims, mass: out })
    }

    /// Appends a new variable that is a deterministic function of `inputs`.
    pub fn extend_deterministic(
        &self,
        alphabet: Alphabet,
        inputs: &[&str],
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<JointPmf> {
        let in_axes = self.axes(inputs)?;
        if self.var_index(alphabet.name()).is_ok() {
            return Err(Error::AlphabetMismatch(format!(
                "variable `{}` already present",
                alphabet.name()
            )));
        }
        let k = alphabet.len();
        let mut vars = self.variables.clone();
        vars.push(alphabet);
        let mut dims = self.dims.clone();
        dims.push(k);
        let mut out = vec![0.0; self.mass.len() * k];
        let mut idx = vec![0usize; self.dims.len()];
        let mut sub = vec![0usize; in_axes.len()];
        for (off, &m) in self.mass.iter().enumerate() {
            decode_index(off, &self.dims, &mut idx);
            for (j, &a) in in_axes.iter().enumerate() {
                sub[j] = idx[a];
            }
            let v = f(&sub);
            assert!(v < k, "deterministic extension value out of range");
            out[off * k + v] = m;
        }
        Ok(JointPmf { variables: vars, dims, mass: out })
    }

    /// Appends an identical copy of `var` named `copy_name`.
    pub fn duplicate_variable(&self, var: &str, copy_name: &str) -> Result<JointPmf> {
        let ax = self.var_index(var)?;
        let mut alpha = self.variables[ax].clone();
        alpha = Alphabet::new(copy_name, alpha.symbols().to_vec())?;
        self.extend_deterministic(alpha, &[var], |sub| sub[0])
    }

    /// Independent product of two joints with disjoint variable names.
    pub fn product(&self, other: &JointPmf) -> Result<JointPmf> {
        for v in other.variables() {
            if self.var_index(v.name()).is_ok() {
                return Err(Error::AlphabetMismatch(format!(
                    "variable `{}` present in both factors",
                    v.name()
                )));
            }
        }
        let mut vars = self.variables.clone();
        vars.extend(other.variables.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut out = Vec::with_capacity(self.mass.len() * other.mass.len());
        for &a in &self.mass {
            for &b in &other.mass {
                out.push(a * b);
            }
        }
        Ok(JointPmf { variables: vars, dims, mass: out })
    }

    /// Shannon entropy (bits) of the marginal on `vars`, with 0 log 0 = 0.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        let axes = self.axes(vars)?;
        Ok(self.entropy_axes(&axes))
    }

    pub(crate) fn entropy_axes(&self, axes: &[usize]) -> f64 {
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut marg = vec![0.0; dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        let mut sub = vec![0usize; axes.len()];
        for (off, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            decode_index(off, &self.dims, &mut idx);
            for (j, &a) in axes.iter().enumerate() {
                sub[j] = idx[a];
            }
            marg[encode_index(&sub, &dims)] += m;
        }
        marg.iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum::<f64>()
            .max(0.0)
    }

    /// H(target | given) in bits.
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        let mut joint: Vec<&str> = target.to_vec();
        for g in given {
            if target.contains(g) {
                return Err(Error::OverlappingSubsets((*g).into()));
            }
            joint.push(g);
        }
        let h_joint = self.entropy(&joint)?;
        let h_given = if given.is_empty() { 0.0 } else { self.entropy(given)? };
        Ok(h_joint - h_given)
    }

    /// I(X;Y|Z) in bits, clamped to zero when a small negative float residue
    /// (within `MI_CLAMP`) appears.
    pub fn conditional_mutual_information(
        &self,
        x: &[&str],
        y: &[&str],
        z: &[&str],
    ) -> Result<f64> {
        let mut seen: Vec<&str> = Vec::new();
        for n in x.iter().chain(y).chain(z) {
            if seen.contains(n) {
                return Err(Error::OverlappingSubsets((*n).into()));
            }
            seen.push(n);
        }
        let xz: Vec<&str> = x.iter().chain(z).copied().collect();
        let yz: Vec<&str> = y.iter().chain(z).copied().collect();
        let xyz: Vec<&str> = x.iter().chain(y).chain(z).copied().collect();
        let h_xz = self.entropy(&xz)?;
        let h_yz = self.entropy(&yz)?;
        let h_z = if z.is_empty() { 0.0 } else { self.entropy(z)? };
        let h_xyz = self.entropy(&xyz)?;
        let v = h_xz + h_yz - h_z - h_xyz;
        Ok(if v < 0.0 { 0.0 } else { v })
    }

    /// True iff x -- y -- z form a Markov chain at tolerance `tol`,
    /// i.e. I(X;Z|Y) <= tol.
    pub fn check_markov(&self, x: &[&str], y: &[&str], z: &[&str], tol: f64) -> Result<bool> {
        Ok(self.conditional_mutual_information(x, z, y)? <= tol)
    }

    /// Least positive mass of the marginal on `vars`.
    pub fn min_positive_mass(&self, vars: &[&str]) -> Result<f64> {
        let marg = self.marginalize(vars)?;
        marg.mass
            .iter()
            .copied()
            .filter(|&m| m > SUPPORT_EPS)
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))))
            .ok_or(Error::EmptySupport)
    }

    /// Least positive conditional mass min p(target | given) over the joint support.
    pub fn min_positive_conditional(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        let mut joint_names: Vec<&str> = target.to_vec();
        for g in given {
            if target.contains(g) {
                return Err(Error::OverlappingSubsets((*g).into()));
            }
            joint_names.push(g);
        }
        let joint = self.marginalize(&joint_names)?;
        let giv = self.marginalize(given)?;
        let t_dims: Vec<usize> = (0..target.len()).map(|i| joint.dims[i]).collect();
        let g_dims: Vec<usize> = (target.len()..joint_names.len()).map(|i| joint.dims[i]).collect();
        let g_cells: usize = g_dims.iter().product();
        let t_cells: usize = t_dims.iter().product();
        let mut best: Option<f64> = None;
        for t in 0..t_cells {
            for g in 0..g_cells {
                let j = joint.mass[t * g_cells + g];
                if j > SUPPORT_EPS {
                    let denom = giv.mass[g];
                    let c = j / denom;
                    best = Some(best.map_or(c, |b: f64| b.min(c)));
                }
            }
        }
        best.ok_or(Error::EmptySupport)
    }

    /// L1 distance between two pmfs with the same variable layout; lies in [0, 2].
    pub fn variational_distance(&self, other: &JointPmf) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// KL divergence D(self || other) in bits. Errors when `self` has mass on
    /// a cell where `other` has none.
    pub fn kl_divergence(&self, other: &JointPmf) -> Result<f64> {
        self.check_same_layout(other)?;
        let mut kl = 0.0;
        let mut idx = vec![0usize; self.dims.len()];
        for (off, (&p, &q)) in self.mass.iter().zip(&other.mass).enumerate() {
            if p <= 0.0 {
                continue;
            }
            if q <= 0.0 {
                decode_index(off, &self.dims, &mut idx);
                return Err(Error::KlSupport(format!("{idx:?}")));
            }
            kl += p * (p / q).log2();
        }
        Ok(kl.max(0.0))
    }

    /// True iff the support factors as the product of the two marginal supports.
    pub fn support_product_check(&self, left: &[&str], right: &[&str]) -> Result<bool> {
        let l_axes = self.axes(left)?;
        let r_axes = self.axes(right)?;
        for a in &r_axes {
            if l_axes.contains(a) {
                return Err(Error::OverlappingSubsets(self.variables[*a].name().into()));
            }
        }
        if l_axes.len() + r_axes.len() != self.dims.len() {
            return Err(Error::ArgOutOfRange(
                "left and right must partition all variables".into(),
            ));
        }
        let l_marg = self.marginalize(left)?;
        let r_marg = self.marginalize(right)?;
        let l_dims = l_marg.dims.clone();
        let r_dims = r_marg.dims.clone();
        let mut idx = vec![0usize; self.dims.len()];
        let mut l_sub = vec![0usize; l_axes.len()];
        let mut r_sub = vec![0usize; r_axes.len()];
        for l_off in 0..l_marg.mass.len() {
            if l_marg.mass[l_off] <= SUPPORT_EPS {
                continue;
            }
            decode_index(l_off, &l_dims, &mut l_sub);
            for r_off in 0..r_marg.mass.len() {
                if r_marg.mass[r_off] <= SUPPORT_EPS {
                    continue;
                }
                decode_index(r_off, &r_dims, &mut r_sub);
                for (j, &a) in l_axes.iter().enumerate() {
                    idx[a] = l_sub[j];
                }
                for (j, &a) in r_axes.iter().enumerate() {
                    idx[a] = r_sub[j];
                }
                if self.prob(&idx) <= SUPPORT_EPS {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn check_same_layout(&self, other: &JointPmf) -> Result<()> {
        if self.variables != other.variables {
            return Err(Error::AlphabetMismatch(
                "pmfs have different variable layouts".into(),
            ));
        }
        Ok(())
    }
}

/// Conditional mass tensor from a product of alphabets to one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    from: Vec<Alphabet>,
    to: Alphabet,
    rows: Vec<f64>, // shape: prod(from dims) x to dim, row-major
}

impl Channel {
    pub fn new(from: Vec<Alphabet>, to: Alphabet, rows: Vec<f64>) -> Result<Self> {
        if from.is_empty() {
            return Err(Error::InvalidChannel("channel conditions on nothing".into()));
        }
        let n_rows = from
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .ok_or_else(|| Error::InvalidChannel("conditioning alphabet overflows".into()))?;
        let k = to.len();
        if rows.len() != n_rows * k {
            return Err(Error::InvalidChannel(format!(
                "row tensor has {} entries, expected {}",
                rows.len(),
                n_rows * k
            )));
        }
        for r in 0..n_rows {
            let mut total = 0.0;
            for c in 0..k {
                let v = rows[r * k + c];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidChannel(format!("entry {v} is not a probability")));
                }
                total += v;
            }
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidChannel(format!(
                    "row {r} sums to {total}, expected 1"
                )));
            }
        }
        Ok(Self { from, to, rows })
    }

    /// Deterministic channel copying the conditioning variable.
    pub fn identity(from: &Alphabet, to_name: &str) -> Result<Self> {
        let to = Alphabet::new(to_name, from.symbols().to_vec())?;
        let k = from.len();
        let mut rows = vec![0.0; k * k];
        for i in 0..k {
            rows[i * k + i] = 1.0;
        }
        Self::new(vec![from.clone()], to, rows)
    }

    /// Channel putting all mass on one output symbol regardless of the input.
    pub fn constant(from: Vec<Alphabet>, to: Alphabet, symbol: usize) -> Result<Self> {
        let n_rows: usize = from.iter().map(|a| a.len()).product();
        let k = to.len();
        if symbol >= k {
            return Err(Error::ArgOutOfRange(format!("symbol index {symbol} out of range")));
        }
        let mut rows = vec![0.0; n_rows * k];
        for r in 0..n_rows {
            rows[r * k + symbol] = 1.0;
        }
        Self::new(from, to, rows)
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(from: &Alphabet, to_name: &str, crossover: f64) -> Result<Self> {
        if from.len() != 2 {
            return Err(Error::InvalidChannel("bsc needs a binary input".into()));
        }
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::ArgOutOfRange(format!("crossover {crossover} not in [0,1]")));
        }
        let to = Alphabet::new(to_name, from.symbols().to_vec())?;
        let rows = vec![1.0 - crossover, crossover, crossover, 1.0 - crossover];
        Self::new(vec![from.clone()], to, rows)
    }

    pub fn from_alphabets(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to_alphabet(&self) -> &Alphabet {
        &self.to
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.rows[row * self.to.len() + col]
    }
}

/// Bounded per-letter distortion d : source x recon -> [0, dbar].
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure {
    source: Alphabet,
    recon: Alphabet,
    values: Vec<f64>, // |source| x |recon|
    dbar: f64,
}

impl DistortionMeasure {
    pub fn new(source: Alphabet, recon: Alphabet, values: Vec<f64>, dbar: f64) -> Result<Self> {
        if !(dbar.is_finite() && dbar > 0.0) {
            return Err(Error::InvalidDistortion(format!(
                "upper bound {dbar} must be finite and positive"
            )));
        }
        if values.len() != source.len() * recon.len() {
            return Err(Error::InvalidDistortion(format!(
                "matrix has {} entries, expected {}",
                values.len(),
                source.len() * recon.len()
            )));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 || v > dbar {
                return Err(Error::InvalidDistortion(format!(
                    "value {v} outside [0, {dbar}]"
                )));
            }
        }
        Ok(Self { source, recon, values, dbar })
    }

    /// Hamming distortion with the reconstruction alphabet mirroring the source.
    pub fn hamming(source: &Alphabet) -> Result<Self> {
        let recon = Alphabet::new(
            format!("{}hat", source.name()),
            source.symbols().to_vec(),
        )?;
        let n = source.len();
        let mut values = vec![1.0; n * n];
        for i in 0..n {
            values[i * n + i] = 0.0;
        }
        Self::new(source.clone(), recon, values, 1.0)
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn recon(&self) -> &Alphabet {
        &self.recon
    }

    pub fn dbar(&self) -> f64 {
        self.dbar
    }

    pub fn d(&self, s: usize, shat: usize) -> f64 {
        self.values[s * self.recon.len() + shat]
    }
}

/// Binary entropy h(x) in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::ArgOutOfRange(format!("binary_entropy({x})")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-(x * x.log2() + (1.0 - x) * (1.0 - x).log2()))
}

/// Binary convolution x * y = x(1-y) + y(1-x).
pub fn binary_convolution(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::ArgOutOfRange(format!("binary_convolution({x}, {y})")));
    }
    Ok(x * (1.0 - y) + y * (1.0 - x))
}

/// Row-major offset of a multi-index.
pub fn encode_index(idx: &[usize], dims: &[usize]) -> usize {
    debug_assert_eq!(idx.len(), dims.len());
    let mut off = 0;
    for (i, &d) in dims.iter().enumerate() {
        debug_assert!(idx[i] < d);
        off = off * d + idx[i];
    }
    off
}

/// Multi-index of a row-major offset, written into `idx`.
pub fn decode_index(mut off: usize, dims: &[usize], idx: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        idx[i] = off % dims[i];
        off /= dims[i];
    }
}
