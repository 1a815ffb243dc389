//! Pruning transforms over five-variable Markov tuples and the
//! agreement-point lemma for functions of independent variables.
//!
//! Both transforms surgically remove low-probability auxiliary
//! configurations and renormalize, while the quantitative theorem bounds
//! (variational distance, conditional-event inflation, KL divergence,
//! conditional-entropy deltas) are recomputed on the pruned pmf and checked
//! against their closed forms. Exponential bounds use natural units for eta;
//! entropy deltas are in bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probability::{decode_index, JointPmf, SUPPORT_EPS};

/// Markov tolerance accepted and preserved by the transforms.
pub const MARKOV_TOL: f64 = 1e-9;
/// Slack when re-checking a theorem bound against an achieved value.
pub const BOUND_SLACK: f64 = 1e-9;

/// A joint pmf over (A1, A2, S, B1, B2) with (A1,A2) -- S -- (B1,B2) Markov
/// and S fully supported.
#[derive(Debug, Clone)]
pub struct MarkovFiveTuple {
    joint: JointPmf,
}

impl MarkovFiveTuple {
    pub fn new(joint: JointPmf) -> Result<Self> {
        if joint.variables().len() != 5 {
            return Err(Error::ArgOutOfRange(format!(
                "need exactly the variables A1, A2, S, B1, B2; got {}",
                joint.variables().len()
            )));
        }
        for name in ["A1", "A2", "S", "B1", "B2"] {
            joint.var_index(name)?;
        }
        let joint = joint.marginalize(&["A1", "A2", "S", "B1", "B2"])?;
        let p_s = joint.marginalize(&["S"])?;
        if p_s.mass().iter().any(|&m| m <= SUPPORT_EPS) {
            return Err(Error::DegenerateResult(
                "S must have full support".into(),
            ));
        }
        let cmi = joint.conditional_mutual_information(&["A1", "A2"], &["B1", "B2"], &["S"])?;
        if cmi > MARKOV_TOL {
            return Err(Error::PreconditionViolated(format!(
                "(A1,A2) -- S -- (B1,B2) fails: I = {cmi}"
            )));
        }
        Ok(Self { joint })
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    /// Least mass of S (positive everywhere by the support invariant).
    pub fn m_s(&self) -> f64 {
        let p_s = self.joint.marginalize(&["S"]).expect("S exists");
        p_s.mass().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn dims(&self) -> (usize, usize, usize, usize, usize) {
        let d = self.joint.dims();
        (d[0], d[1], d[2], d[3], d[4])
    }
}

/// A subset of the (A1, A2) product alphabet, flat a1-major.
#[derive(Debug, Clone)]
pub struct AuxEvent {
    n1: usize,
    n2: usize,
    keep: Vec<bool>,
}

impl AuxEvent {
    pub fn full(n1: usize, n2: usize) -> Self {
        Self { n1, n2, keep: vec![true; n1 * n2] }
    }

    pub fn from_kept_pairs(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut keep = vec![false; n1 * n2];
        for &(a1, a2) in pairs {
            if a1 >= n1 || a2 >= n2 {
                return Err(Error::ArgOutOfRange(format!("pair ({a1}, {a2}) out of range")));
            }
            keep[a1 * n2 + a2] = true;
        }
        Ok(Self { n1, n2, keep })
    }

    pub fn from_dropped_pairs(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut ev = Self::full(n1, n2);
        for &(a1, a2) in pairs {
            if a1 >= n1 || a2 >= n2 {
                return Err(Error::ArgOutOfRange(format!("pair ({a1}, {a2}) out of range")));
            }
            ev.keep[a1 * n2 + a2] = false;
        }
        Ok(ev)
    }

    /// Keeps the pairs whose mismatch score stays within sqrt(eps): the event
    /// shape used when pruning against a reconstruction-mismatch predicate.
    pub fn from_low_mismatch(
        t: &MarkovFiveTuple,
        mismatch: impl Fn(usize, usize) -> f64,
        eps: f64,
    ) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::ArgOutOfRange(format!("eps {eps}")));
        }
        let (n1, n2, ..) = t.dims();
        let thr = eps.sqrt();
        let mut ev = Self::full(n1, n2);
        for a1 in 0..n1 {
            for a2 in 0..n2 {
                ev.keep[a1 * n2 + a2] = mismatch(a1, a2) <= thr;
            }
        }
        Ok(ev)
    }

    pub fn contains(&self, a1: usize, a2: usize) -> bool {
        self.keep[a1 * self.n2 + a2]
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }
}

/// Zeroing check tally for the conditional-threshold transform.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroingSummary {
    pub pairs_checked: usize,
    pub hypothesis_cases: usize,
    pub violations: usize,
}

/// Achieved perturbations of a pruning transform next to the theorem bounds.
/// `holds_*` restate `achieved <= bound + 1e-9` from the raw values.
#[derive(Debug, Clone, Serialize)]
pub struct PruneReport {
    pub method: String,
    pub delta: f64,
    pub eta: f64,
    pub m_s: f64,
    pub s_size: usize,
    pub kl_units: String,
    pub entropy_units: String,
    pub achieved_l1: f64,
    pub achieved_kl: f64,
    pub achieved_inflation: Option<f64>,
    pub achieved_dh_single: f64,
    pub achieved_dh_joint: f64,
    pub bound_l1: f64,
    pub bound_l1_eta: f64,
    pub bound_inflation: Option<f64>,
    pub bound_kl: f64,
    pub bound_dh: f64,
    pub markov_cmi: f64,
    pub holds_l1: bool,
    pub holds_inflation: Option<bool>,
    pub holds_kl: bool,
    pub holds_dh_single: bool,
    pub holds_dh_joint: bool,
    pub markov_preserved: bool,
    pub marginal_preserved: bool,
    pub zeroing: Option<ZeroingSummary>,
}

impl PruneReport {
    pub fn all_bounds_hold(&self) -> bool {
        self.holds_l1
            && self.holds_inflation.unwrap_or(true)
            && self.holds_kl
            && self.holds_dh_single
            && self.holds_dh_joint
            && self.markov_preserved
            && self.marginal_preserved
            && self.zeroing.as_ref().is_none_or(|z| z.violations == 0)
    }

    /// The auxiliary rate-perturbation function
    /// Xi(x) = (|S| x / (m - |S| x)) log2(|S|^2 (m - |S| x) / x) on [0, m/|S|),
    /// where `m` is a least positive joint mass. Kept as a standalone
    /// evaluator; no bound above consumes it.
    pub fn xi(x: f64, s_size: usize, m_suv: f64) -> Result<f64> {
        if s_size == 0 || !m_suv.is_finite() || m_suv <= 0.0 {
            return Err(Error::ArgOutOfRange("xi needs |S| >= 1 and m > 0".into()));
        }
        let s = s_size as f64;
        if !(0.0..(m_suv / s)).contains(&x) {
            return Err(Error::ArgOutOfRange(format!(
                "xi domain is [0, {}), got {x}",
                m_suv / s
            )));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let rest = m_suv - s * x;
        Ok((s * x / rest) * (s * s * rest / x).log2())
    }
}

/// Common bound block: the entropy-delta bound
/// (2 eta)^(1/4) log2(|S|^2 / (2 eta)^(1/4)) + c (e^eta - 1) log2 |S|.
fn entropy_delta_bound(eta: f64, s_size: usize, c: f64) -> f64 {
    let s = s_size as f64;
    let t = (2.0 * eta).powf(0.25);
    t * (s * s / t).log2() + c * (eta.exp() - 1.0) * s.log2()
}

struct Achieved {
    l1: f64,
    kl_nats: f64,
    dh_single: f64,
    dh_joint: f64,
    markov_cmi: f64,
}

fn achieved_quantities(pruned: &JointPmf, original: &JointPmf) -> Result<Achieved> {
    let l1 = pruned.variational_distance(original)?;
    let kl_nats = pruned.kl_divergence(original)? * std::f64::consts::LN_2;
    let dh_single = (pruned.conditional_entropy(&["S"], &["A1", "B1"])?
        - original.conditional_entropy(&["S"], &["A1", "B1"])?)
    .abs();
    let dh_joint = (pruned.conditional_entropy(&["S"], &["A1", "A2", "B1", "B2"])?
        - original.conditional_entropy(&["S"], &["A1", "A2", "B1", "B2"])?)
    .abs();
    let markov_cmi =
        pruned.conditional_mutual_information(&["A1", "A2"], &["B1", "B2"], &["S"])?;
    Ok(Achieved { l1, kl_nats, dh_single, dh_joint, markov_cmi })
}

/// Maximum inflation of conditional singleton-event probabilities
/// p~(b1,b2 | a1,a2) / p(b1,b2 | a1,a2) over kept pairs.
fn max_conditional_inflation(
    pruned: &JointPmf,
    original: &JointPmf,
    keep: &AuxEvent,
) -> Result<f64> {
    let pab = original.marginalize(&["A1", "A2", "B1", "B2"])?;
    let pa = original.marginalize(&["A1", "A2"])?;
    let qab = pruned.marginalize(&["A1", "A2", "B1", "B2"])?;
    let qa = pruned.marginalize(&["A1", "A2"])?;
    let (n1, n2) = (keep.n1, keep.n2);
    let nb: usize = pab.dims()[2] * pab.dims()[3];
    let mut worst = 0.0f64;
    for a1 in 0..n1 {
        for a2 in 0..n2 {
            if !keep.contains(a1, a2) {
                continue;
            }
            let pa_m = pa.mass()[a1 * n2 + a2];
            let qa_m = qa.mass()[a1 * n2 + a2];
            if pa_m <= SUPPORT_EPS || qa_m <= SUPPORT_EPS {
                continue;
            }
            for b in 0..nb {
                let p_cond = pab.mass()[(a1 * n2 + a2) * nb + b] / pa_m;
                if p_cond <= 0.0 {
                    continue;
                }
                let q_cond = qab.mass()[(a1 * n2 + a2) * nb + b] / qa_m;
                worst = worst.max(q_cond / p_cond);
            }
        }
    }
    Ok(worst)
}

fn max_abs_diff(a: &JointPmf, b: &JointPmf) -> f64 {
    a.mass()
        .iter()
        .zip(b.mass())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Prunes by an event on the auxiliary pair: cells outside `keep` are zeroed
/// and each S-section is renormalized. Requires the kept mass to be large
/// enough for `eta`, namely 1 - Pr[keep] <= m_S (1 - e^-eta) with
/// eta in (0, ln 2).
pub fn prune_a(
    t: &MarkovFiveTuple,
    keep: &AuxEvent,
    eta: f64,
) -> Result<(MarkovFiveTuple, PruneReport)> {
    let (n1, n2, ns, nb1, nb2) = t.dims();
    if keep.n1 != n1 || keep.n2 != n2 {
        return Err(Error::ArgOutOfRange("event shape does not match the tuple".into()));
    }
    if !(eta > 0.0 && eta < std::f64::consts::LN_2) {
        return Err(Error::PreconditionViolated(format!("eta {eta} not in (0, ln 2)")));
    }
    let p = t.joint();
    let p_a = p.marginalize(&["A1", "A2"])?;
    // dropped mass, summed directly so a full event gives exactly zero
    let delta: f64 = (0..n1 * n2)
        .filter(|&i| !keep.keep[i])
        .map(|i| p_a.mass()[i])
        .sum();
    let m_s = t.m_s();
    let delta_max = m_s * (1.0 - (-eta).exp());
    if delta > delta_max + 1e-15 {
        return Err(Error::PreconditionViolated(format!(
            "dropped mass {delta} exceeds m_S (1 - e^-eta) = {delta_max}"
        )));
    }

    // per-s normalizers Pr[keep | S = s]; numerator and denominator share the
    // same summation so a keep-all event normalizes by exactly 1
    let p_as = p.marginalize(&["A1", "A2", "S"])?;
    let p_s = p.marginalize(&["S"])?;
    let mut kept_s = vec![0.0; ns];
    let mut all_s = vec![0.0; ns];
    for a in 0..n1 * n2 {
        for s in 0..ns {
            let m = p_as.mass()[a * ns + s];
            all_s[s] += m;
            if keep.keep[a] {
                kept_s[s] += m;
            }
        }
    }
    let mut norm = vec![0.0; ns];
    for s in 0..ns {
        norm[s] = kept_s[s] / all_s[s];
        if norm[s] <= 0.0 {
            return Err(Error::DegenerateResult(format!(
                "kept event has no mass given S index {s}"
            )));
        }
    }

    let mut mass = p.mass().to_vec();
    let mut idx = vec![0usize; 5];
    let dims = [n1, n2, ns, nb1, nb2];
    for (off, slot) in mass.iter_mut().enumerate() {
        decode_index(off, &dims, &mut idx);
        let a = idx[0] * n2 + idx[1];
        if keep.keep[a] {
            *slot /= norm[idx[2]];
        } else {
            *slot = 0.0;
        }
    }
    let pruned_joint = JointPmf::new(p.variables().to_vec(), mass)
        .map_err(|e| Error::DegenerateResult(e.to_string()))?;

    let ach = achieved_quantities(&pruned_joint, p)?;
    let inflation = max_conditional_inflation(&pruned_joint, p, keep)?;
    let marginal_ok = {
        let q_s = pruned_joint.marginalize(&["S"])?;
        max_abs_diff(&q_s, &p_s) <= 1e-12
    };

    let bound_l1 = 2.0 * delta / (m_s - delta);
    let bound_l1_eta = 2.0 * (eta.exp() - 1.0);
    let bound_inflation = eta.exp();
    let bound_dh = entropy_delta_bound(eta, ns, 2.0);
    let report = PruneReport {
        method: "a".into(),
        delta,
        eta,
        m_s,
        s_size: ns,
        kl_units: "nats".into(),
        entropy_units: "bits".into(),
        achieved_l1: ach.l1,
        achieved_kl: ach.kl_nats,
        achieved_inflation: Some(inflation),
        achieved_dh_single: ach.dh_single,
        achieved_dh_joint: ach.dh_joint,
        bound_l1,
        bound_l1_eta,
        bound_inflation: Some(bound_inflation),
        bound_kl: eta,
        bound_dh,
        markov_cmi: ach.markov_cmi,
        holds_l1: ach.l1 <= bound_l1 + BOUND_SLACK,
        holds_inflation: Some(inflation <= bound_inflation + BOUND_SLACK),
        holds_kl: ach.kl_nats <= eta + BOUND_SLACK,
        holds_dh_single: ach.dh_single <= bound_dh + BOUND_SLACK,
        holds_dh_joint: ach.dh_joint <= bound_dh + BOUND_SLACK,
        markov_preserved: ach.markov_cmi <= MARKOV_TOL,
        marginal_preserved: marginal_ok,
        zeroing: None,
    };
    Ok((MarkovFiveTuple::new(pruned_joint)?, report))
}

/// Prunes by a conditional threshold: auxiliary-source cells with
/// p(s | a1, a2) <= delta are zeroed and each S-section renormalized, which
/// preserves the (S, B1, B2) marginal exactly. Requires
/// delta <= m_S (1 - e^-eta) with eta in (0, 1).
pub fn prune_b(
    t: &MarkovFiveTuple,
    delta: f64,
    eta: f64,
) -> Result<(MarkovFiveTuple, PruneReport)> {
    let (n1, n2, ns, nb1, nb2) = t.dims();
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::PreconditionViolated(format!("eta {eta} not in (0, 1)")));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::PreconditionViolated(format!("delta {delta} must be positive")));
    }
    let m_s = t.m_s();
    let delta_max = m_s * (1.0 - (-eta).exp());
    if delta > delta_max + 1e-15 {
        return Err(Error::PreconditionViolated(format!(
            "delta {delta} exceeds m_S (1 - e^-eta) = {delta_max}"
        )));
    }

    let p = t.joint();
    let p_as = p.marginalize(&["A1", "A2", "S"])?;
    let p_a = p.marginalize(&["A1", "A2"])?;
    let na = n1 * n2;

    // kept (a1, a2, s) triples and per-s normalizers; numerator and
    // denominator share the same summation so an all-kept section
    // normalizes by exactly 1
    let mut kept = vec![false; na * ns];
    let mut kept_s = vec![0.0; ns];
    let mut all_s = vec![0.0; ns];
    for a in 0..na {
        let pa = p_a.mass()[a];
        for s in 0..ns {
            let pas = p_as.mass()[a * ns + s];
            all_s[s] += pas;
            if pa > SUPPORT_EPS && pas > SUPPORT_EPS && pas / pa > delta {
                kept[a * ns + s] = true;
                kept_s[s] += pas;
            }
        }
    }
    if kept.iter().all(|&k| !k) {
        return Err(Error::DegenerateResult(
            "every auxiliary-source cell is at or below the threshold".into(),
        ));
    }
    let mut norm = vec![0.0; ns];
    for s in 0..ns {
        norm[s] = kept_s[s] / all_s[s];
        if norm[s] <= 0.0 {
            return Err(Error::DegenerateResult(format!(
                "no conditional above the threshold for S index {s}"
            )));
        }
    }

    let mut mass = p.mass().to_vec();
    let mut idx = vec![0usize; 5];
    let dims = [n1, n2, ns, nb1, nb2];
    for (off, slot) in mass.iter_mut().enumerate() {
        decode_index(off, &dims, &mut idx);
        let a = idx[0] * n2 + idx[1];
        if kept[a * ns + idx[2]] {
            *slot /= norm[idx[2]];
        } else {
            *slot = 0.0;
        }
    }
    let pruned_joint = JointPmf::new(p.variables().to_vec(), mass)
        .map_err(|e| Error::DegenerateResult(e.to_string()))?;

    let ach = achieved_quantities(&pruned_joint, p)?;
    let marginal_ok = {
        let q = pruned_joint.marginalize(&["S", "B1", "B2"])?;
        let orig = p.marginalize(&["S", "B1", "B2"])?;
        max_abs_diff(&q, &orig) <= 1e-12
    };

    // zeroing property on singleton receiver events
    let m_b_cond = p.min_positive_conditional(&["B1", "B2"], &["S"])?;
    let pab = p.marginalize(&["A1", "A2", "B1", "B2"])?;
    let qab = pruned_joint.marginalize(&["A1", "A2", "B1", "B2"])?;
    let qa = pruned_joint.marginalize(&["A1", "A2"])?;
    let nb = nb1 * nb2;
    let mut zero = ZeroingSummary { pairs_checked: 0, hypothesis_cases: 0, violations: 0 };
    for a in 0..na {
        let pa = p_a.mass()[a];
        if pa <= SUPPORT_EPS {
            continue;
        }
        zero.pairs_checked += 1;
        for b in 0..nb {
            let p_cond = pab.mass()[a * nb + b] / pa;
            if p_cond <= delta * m_b_cond {
                zero.hypothesis_cases += 1;
                let qa_m = qa.mass()[a];
                let q_cond = if qa_m > 0.0 { qab.mass()[a * nb + b] / qa_m } else { 0.0 };
                if q_cond != 0.0 {
                    zero.violations += 1;
                }
            }
        }
    }

    let bound_l1 = 2.0 * delta * ns as f64 / (m_s - delta);
    let bound_l1_eta = 2.0 * ns as f64 * (eta.exp() - 1.0);
    let bound_dh = entropy_delta_bound(eta, ns, 2.0 * ns as f64);
    let report = PruneReport {
        method: "b".into(),
        delta,
        eta,
        m_s,
        s_size: ns,
        kl_units: "nats".into(),
        entropy_units: "bits".into(),
        achieved_l1: ach.l1,
        achieved_kl: ach.kl_nats,
        achieved_inflation: None,
        achieved_dh_single: ach.dh_single,
        achieved_dh_joint: ach.dh_joint,
        bound_l1,
        bound_l1_eta,
        bound_inflation: None,
        bound_kl: eta,
        bound_dh,
        markov_cmi: ach.markov_cmi,
        holds_l1: ach.l1 <= bound_l1 + BOUND_SLACK,
        holds_inflation: None,
        holds_kl: ach.kl_nats <= eta + BOUND_SLACK,
        holds_dh_single: ach.dh_single <= bound_dh + BOUND_SLACK,
        holds_dh_joint: ach.dh_joint <= bound_dh + BOUND_SLACK,
        markov_preserved: ach.markov_cmi <= MARKOV_TOL,
        marginal_preserved: marginal_ok,
        zeroing: Some(zero),
    };
    Ok((MarkovFiveTuple::new(pruned_joint)?, report))
}

/// The agreed-upon symbol of two near-identical functions of independent
/// variables, with the guaranteed probability floor.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementPoint {
    pub z_star: usize,
    pub bound: f64,
    pub mismatch: f64,
    pub p_f: f64,
    pub p_g: f64,
}

/// For independent X ~ p_x and Y ~ p_y with Pr[f(X) != g(Y)] = delta < 1/25,
/// returns z* = argmax_z Pr[f(X) = z] together with the floor
/// (1 + sqrt(1 - delta - sqrt delta)) / 2, which both Pr[f(X) = z*] and
/// Pr[g(Y) = z*] meet.
pub fn agreement_point(
    p_x: &JointPmf,
    p_y: &JointPmf,
    f: &[usize],
    g: &[usize],
    z_size: usize,
) -> Result<AgreementPoint> {
    if p_x.variables().len() != 1 || p_y.variables().len() != 1 {
        return Err(Error::ArgOutOfRange("marginals must be univariate".into()));
    }
    let nx = p_x.dims()[0];
    let ny = p_y.dims()[0];
    if f.len() != nx || g.len() != ny {
        return Err(Error::ArgOutOfRange("map length does not match its alphabet".into()));
    }
    if z_size == 0 || f.iter().chain(g).any(|&z| z >= z_size) {
        return Err(Error::ArgOutOfRange("map value outside the target alphabet".into()));
    }

    let mut mismatch = 0.0;
    for (x, &px) in p_x.mass().iter().enumerate() {
        for (y, &py) in p_y.mass().iter().enumerate() {
            if f[x] != g[y] {
                mismatch += px * py;
            }
        }
    }
    if mismatch >= 1.0 / 25.0 {
        return Err(Error::PreconditionViolated(format!(
            "mismatch probability {mismatch} is not below 1/25"
        )));
    }

    let mut p_z = vec![0.0; z_size];
    for (x, &px) in p_x.mass().iter().enumerate() {
        p_z[f[x]] += px;
    }
    let mut z_star = 0;
    for z in 1..z_size {
        if p_z[z] > p_z[z_star] {
            z_star = z;
        }
    }
    let mut q_star = 0.0;
    for (y, &py) in p_y.mass().iter().enumerate() {
        if g[y] == z_star {
            q_star += py;
        }
    }
    let bound = (1.0 + (1.0 - mismatch - mismatch.sqrt()).sqrt()) / 2.0;
    Ok(AgreementPoint { z_star, bound, mismatch, p_f: p_z[z_star], p_g: q_star })
}
