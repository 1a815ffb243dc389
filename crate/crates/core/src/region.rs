//! Rate regions for successive refinement with common receiver
//! reconstructions: candidate evaluation, frontier search, the closed-form
//! binary region, solved-case classification, time sharing, and the
//! discontinuity demonstration.

use std::io::Write;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gk::{gk_partition, GkPartition};
use crate::probability::{
    binary_convolution, binary_entropy, decode_index, Alphabet, Channel, DistortionMeasure,
    JointPmf, SUPPORT_EPS,
};

/// Distortion feasibility slack, absorbing recomputation float noise.
const FEAS_TOL: f64 = 1e-12;
/// Corners closer than this in both coordinates are merged.
const CORNER_DEDUP: f64 = 1e-6;
/// Scalarization sweep: lambda = i / LAMBDA_STEPS for i in 0..=LAMBDA_STEPS.
const LAMBDA_STEPS: usize = 20;
/// Exhaustive grid search applies when |S| * k does not exceed this.
const GRID_CELL_LIMIT: usize = 8;

/// A source, its distortion measure, and the target distortion.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pmf: JointPmf,
    distortion: DistortionMeasure,
    d: f64,
}

impl SourceSpec {
    /// The pmf must have exactly the variables S, U, V (reordered internally
    /// to that order) and the distortion measure must read the S alphabet.
    pub fn new(pmf: JointPmf, distortion: DistortionMeasure, d: f64) -> Result<Self> {
        if pmf.variables().len() != 3 {
            return Err(Error::ArgOutOfRange(format!(
                "source pmf needs exactly the variables S, U, V; got {}",
                pmf.variables().len()
            )));
        }
        for name in ["S", "U", "V"] {
            pmf.var_index(name)?;
        }
        let pmf = pmf.marginalize(&["S", "U", "V"])?;
        if distortion.source() != pmf.alphabet("S")? {
            return Err(Error::AlphabetMismatch(
                "distortion measure is not over the S alphabet".into(),
            ));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::ArgOutOfRange(format!("distortion target {d}")));
        }
        Ok(Self { pmf, distortion, d })
    }

    /// Convenience constructor with Hamming distortion on the S alphabet.
    pub fn with_hamming(pmf: JointPmf, d: f64) -> Result<Self> {
        let s = pmf.alphabet("S")?.clone();
        Self::new(pmf, DistortionMeasure::hamming(&s)?, d)
    }

    pub fn pmf(&self) -> &JointPmf {
        &self.pmf
    }

    pub fn distortion(&self) -> &DistortionMeasure {
        &self.distortion
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        Self::new(self.pmf.clone(), self.distortion.clone(), d)
    }

    /// Least distortion achievable by any deterministic map of S alone:
    /// sum_s p(s) min_shat d(s, shat).
    pub fn underline_distortion(&self) -> f64 {
        let p_s = self.pmf.marginalize(&["S"]).expect("S exists");
        let nshat = self.distortion.recon().len();
        p_s.mass()
            .iter()
            .enumerate()
            .map(|(s, &p)| {
                let best = (0..nshat)
                    .map(|sh| self.distortion.d(s, sh))
                    .fold(f64::INFINITY, f64::min);
                p * best
            })
            .sum()
    }

    /// Reconstruction symbol minimizing the unconditional expected distortion.
    pub fn global_bayes_symbol(&self) -> usize {
        let p_s = self.pmf.marginalize(&["S"]).expect("S exists");
        let nshat = self.distortion.recon().len();
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for sh in 0..nshat {
            let v: f64 = p_s
                .mass()
                .iter()
                .enumerate()
                .map(|(s, &p)| p * self.distortion.d(s, sh))
                .sum();
            if v < best_val {
                best_val = v;
                best = sh;
            }
        }
        best
    }
}

/// One corner of the region: lower bounds on r_uv and on r_uv + r_v, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCorner {
    pub r_uv: f64,
    pub sum_rate: f64,
}

impl RateCorner {
    pub fn dominates(&self, other: &RateCorner, tol: f64) -> bool {
        self.r_uv <= other.r_uv + tol && self.sum_rate <= other.sum_rate + tol
    }
}

/// Pareto set of corners, sorted by the r_uv bound. The represented region is
/// the union over corners of { r_uv >= a, r_uv + r_v >= b }.
#[derive(Debug, Clone, Serialize)]
pub struct RegionFrontier {
    corners: Vec<RateCorner>,
}

impl RegionFrontier {
    /// Pareto reduction of a corner multiset: a commutative, associative fold,
    /// so the result does not depend on visit order.
    pub fn from_corners(mut corners: Vec<RateCorner>) -> Self {
        corners.sort_by(|p, q| {
            p.r_uv
                .total_cmp(&q.r_uv)
                .then(p.sum_rate.total_cmp(&q.sum_rate))
        });
        let mut reduced: Vec<RateCorner> = Vec::new();
        let mut best_b = f64::INFINITY;
        for c in corners {
            if c.sum_rate < best_b {
                reduced.push(c);
                best_b = c.sum_rate;
            }
        }
        // merge near-duplicates
        let mut out: Vec<RateCorner> = Vec::new();
        for c in reduced {
            if let Some(last) = out.last() {
                if (c.r_uv - last.r_uv).abs() <= CORNER_DEDUP
                    && (c.sum_rate - last.sum_rate).abs() <= CORNER_DEDUP
                {
                    continue;
                }
            }
            out.push(c);
        }
        Self { corners: out }
    }

    pub fn corners(&self) -> &[RateCorner] {
        &self.corners
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// True iff every corner of `other` is dominated by some corner of self.
    pub fn dominates(&self, other: &RegionFrontier, tol: f64) -> bool {
        other
            .corners
            .iter()
            .all(|oc| self.corners.iter().any(|c| c.dominates(oc, tol)))
    }

    /// Writes the frontier CSV: `D,corner_index,r_uv_min,sum_rate_min` with
    /// 9-significant-digit floats.
    pub fn write_csv(&self, w: &mut impl Write, d: f64) -> std::io::Result<()> {
        writeln!(w, "D,corner_index,r_uv_min,sum_rate_min")?;
        for (i, c) in self.corners.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_sig9(d),
                i,
                fmt_sig9(c.r_uv),
                fmt_sig9(c.sum_rate)
            )?;
        }
        Ok(())
    }
}

/// Formats with exactly 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds to 9 significant digits (used for stable JSON output).
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// The auxiliary channels of a candidate point.
#[derive(Debug, Clone)]
pub enum AuxChannels {
    /// q_{A|S}
    Single(Channel),
    /// (q_{A|S}, q_{B|AS}, q_{C|AS})
    Triple(Box<(Channel, Channel, Channel)>),
}

/// A feasible point of the candidate spaces: auxiliary channel(s), the
/// common-randomness partition of the receiver observations, the per-class
/// reconstruction map, and the induced corner.
#[derive(Debug, Clone)]
pub struct AuxCandidate {
    pub channels: AuxChannels,
    pub partition: GkPartition,
    /// Reconstruction symbol per partition class (canonical class order).
    pub recon: Vec<usize>,
    /// Fallback reconstruction for the unsupported sink class.
    pub sink_recon: usize,
    pub achieved_distortion: f64,
    pub corner: RateCorner,
}

impl AuxCandidate {
    pub fn is_feasible(&self, d: f64) -> bool {
        self.achieved_distortion <= d + FEAS_TOL
    }
}

/// Evaluation of a triple candidate under both triple-rate forms.
#[derive(Debug, Clone)]
pub struct TripleEval {
    pub corner_ddag: RateCorner,
    pub corner_dag: RateCorner,
    pub candidate: AuxCandidate,
    /// Whether the common-reconstruction distortion meets the source target.
    pub feasible: bool,
}

fn class_bayes_recon(
    src: &SourceSpec,
    w: &[f64], // n_classes x ns, p(s, class)
    n_classes: usize,
) -> (Vec<usize>, f64) {
    let ns = src.pmf.alphabet("S").expect("S").len();
    let nshat = src.distortion.recon().len();
    let mut recon = Vec::with_capacity(n_classes);
    let mut total = 0.0;
    for c in 0..n_classes {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for sh in 0..nshat {
            let v: f64 = (0..ns).map(|s| w[c * ns + s] * src.distortion.d(s, sh)).sum();
            if v < best_val {
                best_val = v;
                best = sh;
            }
        }
        recon.push(best);
        total += best_val;
    }
    (recon, total)
}

/// Evaluates a single-auxiliary candidate q_{A|S}: builds the joint, takes
/// the common randomness between (A,U) and (A,V), picks the per-class Bayes
/// reconstruction (ties to the smallest symbol index), and reports the corner
/// (I(S;A|U), I(S;A|V)) along with the achieved distortion.
pub fn eval_star_candidate(src: &SourceSpec, q_as: &Channel) -> Result<AuxCandidate> {
    if q_as.from_alphabets() != std::slice::from_ref(src.pmf.alphabet("S")?) {
        return Err(Error::AlphabetMismatch(
            "single-auxiliary channel must condition on S".into(),
        ));
    }
    let joint = src.pmf.compose(q_as)?;
    let aux = q_as.to_alphabet().name().to_string();
    let corner = RateCorner {
        r_uv: joint.conditional_mutual_information(&["S"], &[&aux], &["U"])?,
        sum_rate: joint.conditional_mutual_information(&["S"], &[&aux], &["V"])?,
    };

    let dup = format!("{aux}__r");
    let dj = joint.duplicate_variable(&aux, &dup)?;
    let marg = dj.marginalize(&[&aux, "U", &dup, "V"])?;
    let part = gk_partition(&marg, &[&aux, "U"], &[&dup, "V"])?;

    // p(s, class) accumulated through the right-group map (A, V) -> class
    let ns = src.pmf.alphabet("S")?.len();
    let nv = src.pmf.alphabet("V")?.len();
    let n_classes = part.num_classes();
    let mut w = vec![0.0; n_classes * ns];
    let dims = joint.dims().to_vec();
    let mut idx = vec![0usize; dims.len()];
    for (off, &m) in joint.mass().iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        decode_index(off, &dims, &mut idx);
        let (s, v, a) = (idx[0], idx[2], idx[3]);
        if let Some(c) = part.class_of_right(a * nv + v) {
            w[c * ns + s] += m;
        }
    }
    let (recon, achieved) = class_bayes_recon(src, &w, n_classes);
    Ok(AuxCandidate {
        channels: AuxChannels::Single(q_as.clone()),
        partition: part,
        recon,
        sink_recon: src.global_bayes_symbol(),
        achieved_distortion: achieved,
        corner,
    })
}

/// Evaluates a triple candidate (q_{A|S}, q_{B|AS}, q_{C|AS}). The joint is
/// built so that B and C are conditionally independent given (A, S), hence
/// both triple-rate forms apply. Returns the corner under each form plus the
/// candidate with its common-randomness reconstruction between (A,B,U) and
/// (A,C,V).
pub fn eval_triple_candidate(
    src: &SourceSpec,
    q_as: &Channel,
    q_bas: &Channel,
    q_cas: &Channel,
) -> Result<TripleEval> {
    let joint = src.pmf.compose(q_as)?;
    let a = q_as.to_alphabet().name().to_string();
    let joint = joint.compose(q_bas)?;
    let b = q_bas.to_alphabet().name().to_string();
    let joint = joint.compose(q_cas)?;
    let c = q_cas.to_alphabet().name().to_string();

    let i_s_ab_u = joint.conditional_mutual_information(&["S"], &[&a, &b], &["U"])?;
    let i_s_b_acuv = joint.conditional_mutual_information(&["S"], &[&b], &[&a, &c, "U", "V"])?;
    let i_s_ac_v = joint.conditional_mutual_information(&["S"], &[&a, &c], &["V"])?;
    let i_s_a_u = joint.conditional_mutual_information(&["S"], &[&a], &["U"])?;
    let i_s_a_v = joint.conditional_mutual_information(&["S"], &[&a], &["V"])?;
    let i_s_b_au = joint.conditional_mutual_information(&["S"], &[&b], &[&a, "U"])?;
    let i_s_c_av = joint.conditional_mutual_information(&["S"], &[&c], &[&a, "V"])?;

    let corner_ddag = RateCorner { r_uv: i_s_ab_u, sum_rate: i_s_b_acuv + i_s_ac_v };
    let corner_dag = RateCorner {
        r_uv: i_s_ab_u,
        sum_rate: i_s_a_u.max(i_s_a_v) + i_s_b_au + i_s_c_av,
    };

    let dup = format!("{a}__r");
    let dj = joint.duplicate_variable(&a, &dup)?;
    let marg = dj.marginalize(&[&a, &b, "U", &dup, &c, "V"])?;
    let part = gk_partition(&marg, &[&a, &b, "U"], &[&dup, &c, "V"])?;

    let ns = src.pmf.alphabet("S")?.len();
    let nv = src.pmf.alphabet("V")?.len();
    let kc = q_cas.to_alphabet().len();
    let n_classes = part.num_classes();
    let mut w = vec![0.0; n_classes * ns];
    let dims = joint.dims().to_vec();
    let mut idx = vec![0usize; dims.len()];
    for (off, &m) in joint.mass().iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        decode_index(off, &dims, &mut idx);
        let (s, v, ai, ci) = (idx[0], idx[2], idx[3], idx[5]);
        if let Some(cls) = part.class_of_right((ai * kc + ci) * nv + v) {
            w[cls * ns + s] += m;
        }
    }
    let (recon, achieved) = class_bayes_recon(src, &w, n_classes);
    Ok(TripleEval {
        corner_ddag,
        corner_dag,
        feasible: achieved <= src.d() + FEAS_TOL,
        candidate: AuxCandidate {
            channels: AuxChannels::Triple(Box::new((q_as.clone(), q_bas.clone(), q_cas.clone()))),
            partition: part,
            recon,
            sink_recon: src.global_bayes_symbol(),
            achieved_distortion: achieved,
            corner: corner_ddag,
        },
    })
}

/// Deterministic channel from (aux, S) copying the aux letter; with B = C = A
/// such lifts reproduce a single-auxiliary candidate inside the triple space.
pub fn identity_lift(aux: &Alphabet, s: &Alphabet, name: &str) -> Result<Channel> {
    let to = Alphabet::new(name, aux.symbols().to_vec())?;
    let k = aux.len();
    let ns = s.len();
    let mut rows = vec![0.0; k * ns * k];
    for ai in 0..k {
        for si in 0..ns {
            rows[(ai * ns + si) * k + ai] = 1.0;
        }
    }
    Channel::new(vec![aux.clone(), s.clone()], to, rows)
}

/// Search configuration. Identical configurations yield identical frontiers.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Grid step for the exhaustive stage and initial descent step.
    pub grid: f64,
    /// Number of seeded random starts when the grid is not applicable.
    pub restarts: u32,
    /// Seed for the per-restart random streams.
    pub seed: u64,
    /// Refine candidates by scalarized coordinate descent.
    pub refine: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid: 0.05, restarts: 64, seed: 42, refine: true }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Star,
    Qb,
}

/// Shared fast candidate evaluator over raw channel rows (|S| x k).
struct FastEval<'a> {
    src: &'a SourceSpec,
    mode: Mode,
    ns: usize,
    nu: usize,
    nv: usize,
    k: usize,
    p_suv: Vec<f64>,
    p_su: Vec<f64>,
    p_sv: Vec<f64>,
    p_s: Vec<f64>,
    h_s_given_u: f64,
    h_s_given_v: f64,
}

fn neg_plog(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

impl<'a> FastEval<'a> {
    fn new(src: &'a SourceSpec, mode: Mode, k: usize) -> Self {
        let pmf = src.pmf();
        let ns = pmf.dims()[0];
        let nu = pmf.dims()[1];
        let nv = pmf.dims()[2];
        let p_suv = pmf.mass().to_vec();
        let mut p_su = vec![0.0; ns * nu];
        let mut p_sv = vec![0.0; ns * nv];
        let mut p_s = vec![0.0; ns];
        for s in 0..ns {
            for u in 0..nu {
                for v in 0..nv {
                    let m = p_suv[(s * nu + u) * nv + v];
                    p_su[s * nu + u] += m;
                    p_sv[s * nv + v] += m;
                    p_s[s] += m;
                }
            }
        }
        let h_su: f64 = p_su.iter().map(|&p| neg_plog(p)).sum();
        let h_sv: f64 = p_sv.iter().map(|&p| neg_plog(p)).sum();
        let mut p_u = vec![0.0; nu];
        let mut p_v = vec![0.0; nv];
        for s in 0..ns {
            for u in 0..nu {
                p_u[u] += p_su[s * nu + u];
            }
            for v in 0..nv {
                p_v[v] += p_sv[s * nv + v];
            }
        }
        let h_u: f64 = p_u.iter().map(|&p| neg_plog(p)).sum();
        let h_v: f64 = p_v.iter().map(|&p| neg_plog(p)).sum();
        Self {
            src,
            mode,
            ns,
            nu,
            nv,
            k,
            p_suv,
            p_su,
            p_sv,
            p_s,
            h_s_given_u: h_su - h_u,
            h_s_given_v: h_sv - h_v,
        }
    }

    /// I(S;A|W) = H(S|W) - [H(S,W,A) - H(W,A)] computed from p(s,w) and rows.
    fn cmi_given(&self, rows: &[f64], p_sw: &[f64], nw: usize, h_s_given_w: f64) -> f64 {
        let mut h_swa = 0.0;
        let mut p_wa = vec![0.0; nw * self.k];
        for s in 0..self.ns {
            for w in 0..nw {
                let psw = p_sw[s * nw + w];
                if psw <= 0.0 {
                    continue;
                }
                for a in 0..self.k {
                    let m = psw * rows[s * self.k + a];
                    h_swa += neg_plog(m);
                    p_wa[w * self.k + a] += m;
                }
            }
        }
        let h_wa: f64 = p_wa.iter().map(|&p| neg_plog(p)).sum();
        let v = h_s_given_w - (h_swa - h_wa);
        if v < 0.0 {
            0.0
        } else {
            v
        }
    }

    fn distortion(&self, rows: &[f64]) -> f64 {
        let dist = self.src.distortion();
        match self.mode {
            Mode::Qb => {
                let mut total = 0.0;
                for s in 0..self.ns {
                    for sh in 0..self.k {
                        total += self.p_s[s] * rows[s * self.k + sh] * dist.d(s, sh);
                    }
                }
                total
            }
            Mode::Star => {
                // bipartite components between (a,u) and (a,v)
                let nl = self.k * self.nu;
                let nodes = nl + self.k * self.nv;
                let mut parent: Vec<usize> = (0..nodes).collect();
                fn find(parent: &mut [usize], mut x: usize) -> usize {
                    while parent[x] != x {
                        parent[x] = parent[parent[x]];
                        x = parent[x];
                    }
                    x
                }
                for a in 0..self.k {
                    for u in 0..self.nu {
                        for v in 0..self.nv {
                            let mut t = 0.0;
                            for s in 0..self.ns {
                                t += self.p_suv[(s * self.nu + u) * self.nv + v]
                                    * rows[s * self.k + a];
                            }
                            if t > SUPPORT_EPS {
                                let l = find(&mut parent, a * self.nu + u);
                                let r = find(&mut parent, nl + a * self.nv + v);
                                if l != r {
                                    parent[l] = r;
                                }
                            }
                        }
                    }
                }
                // p(s, class) through the (a, v) side
                let mut root_to_id = vec![usize::MAX; nodes];
                let mut n_classes = 0;
                let mut w: Vec<f64> = Vec::new();
                for a in 0..self.k {
                    for v in 0..self.nv {
                        let mut pav = 0.0;
                        for s in 0..self.ns {
                            pav += self.p_sv[s * self.nv + v] * rows[s * self.k + a];
                        }
                        if pav <= SUPPORT_EPS {
                            continue;
                        }
                        let root = find(&mut parent, nl + a * self.nv + v);
                        let id = if root_to_id[root] == usize::MAX {
                            root_to_id[root] = n_classes;
                            n_classes += 1;
                            w.resize(n_classes * self.ns, 0.0);
                            n_classes - 1
                        } else {
                            root_to_id[root]
                        };
                        for s in 0..self.ns {
                            w[id * self.ns + s] +=
                                self.p_sv[s * self.nv + v] * rows[s * self.k + a];
                        }
                    }
                }
                let nshat = dist.recon().len();
                let mut total = 0.0;
                for c in 0..n_classes {
                    let mut best = f64::INFINITY;
                    for sh in 0..nshat {
                        let v: f64 =
                            (0..self.ns).map(|s| w[c * self.ns + s] * dist.d(s, sh)).sum();
                        if v < best {
                            best = v;
                        }
                    }
                    total += best;
                }
                total
            }
        }
    }

    fn eval(&self, rows: &[f64]) -> (RateCorner, f64) {
        let a = self.cmi_given(rows, &self.p_su, self.nu, self.h_s_given_u);
        let b = self.cmi_given(rows, &self.p_sv, self.nv, self.h_s_given_v);
        (RateCorner { r_uv: a, sum_rate: b }, self.distortion(rows))
    }
}

fn all_rows_with_step(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, m: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<f64>>, total_m: usize) {
        if k == 1 {
            acc.push(m);
            out.push(acc.iter().map(|&c| c as f64 / total_m as f64).collect());
            acc.pop();
            return;
        }
        for c in 0..=m {
            acc.push(c);
            rec(k - 1, m - c, acc, out, total_m);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::new(), &mut out, m);
    out
}

struct Search<'a> {
    eval: FastEval<'a>,
    d: f64,
    visited: Vec<RateCorner>,
    /// Best scalarized value and rows per lambda index.
    best: Vec<Option<(f64, Vec<f64>)>>,
}

impl<'a> Search<'a> {
    fn new(eval: FastEval<'a>, d: f64) -> Self {
        Self { eval, d, visited: Vec::new(), best: vec![None; LAMBDA_STEPS + 1] }
    }

    fn lambda(i: usize) -> f64 {
        i as f64 / LAMBDA_STEPS as f64
    }

    fn scalarized(corner: &RateCorner, lam: f64) -> f64 {
        lam * corner.r_uv + (1.0 - lam) * corner.sum_rate
    }

    fn visit(&mut self, rows: &[f64]) -> (RateCorner, f64) {
        let (corner, dist) = self.eval.eval(rows);
        if dist <= self.d + FEAS_TOL {
            self.visited.push(corner);
            for i in 0..=LAMBDA_STEPS {
                let f = Self::scalarized(&corner, Self::lambda(i));
                let better = match &self.best[i] {
                    None => true,
                    Some((cur, _)) => f < *cur,
                };
                if better {
                    self.best[i] = Some((f, rows.to_vec()));
                }
            }
        }
        (corner, dist)
    }

    /// Coordinate descent on lambda * a + (1 - lambda) * b over the rows of
    /// the channel, projected onto the per-row simplex, with a halving step
    /// schedule. Every feasible point visited is recorded.
    fn descend(&mut self, start: Vec<f64>, lam: f64, step0: f64) {
        let k = self.eval.k;
        if k < 2 {
            self.visit(&start);
            return;
        }
        let ns = self.eval.ns;
        let mut rows = start;
        let (corner, dist) = self.visit(&rows);
        let mut cur = if dist <= self.d + FEAS_TOL {
            Self::scalarized(&corner, lam)
        } else {
            f64::INFINITY
        };
        let mut budget: usize = 50_000;
        let mut step = step0.clamp(1e-4, 0.5);
        while step >= 1e-4 && budget > 0 {
            let mut improved = false;
            // single-row moves along the per-row simplex
            'sweep: for s in 0..ns {
                for a in 0..k {
                    for dir in [1.0, -1.0] {
                        if budget == 0 {
                            break 'sweep;
                        }
                        budget -= 1;
                        let mut cand = rows.clone();
                        if !Self::shift_cell(&mut cand, k, s, a, dir * step) {
                            continue;
                        }
                        let (c2, d2) = self.visit(&cand);
                        let f2 = if d2 <= self.d + FEAS_TOL {
                            Self::scalarized(&c2, lam)
                        } else {
                            f64::INFINITY
                        };
                        if f2 < cur - 1e-13 {
                            rows = cand;
                            cur = f2;
                            improved = true;
                        }
                    }
                }
            }
            // paired transfers between rows walk along the feasibility boundary
            'pairs: for s1 in 0..ns {
                for s2 in 0..ns {
                    if s1 == s2 {
                        continue;
                    }
                    for a1 in 0..k {
                        for a2 in 0..k {
                            if budget == 0 {
                                break 'pairs;
                            }
                            budget -= 1;
                            let mut cand = rows.clone();
                            if !Self::shift_cell(&mut cand, k, s1, a1, -step)
                                || !Self::shift_cell(&mut cand, k, s2, a2, step)
                            {
                                continue;
                            }
                            let (c2, d2) = self.visit(&cand);
                            let f2 = if d2 <= self.d + FEAS_TOL {
                                Self::scalarized(&c2, lam)
                            } else {
                                f64::INFINITY
                            };
                            if f2 < cur - 1e-13 {
                                rows = cand;
                                cur = f2;
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
    }

    /// Moves one cell by `delta` and rescales the rest of its row; false when
    /// the move is a no-op.
    fn shift_cell(rows: &mut [f64], k: usize, s: usize, a: usize, delta: f64) -> bool {
        let old = rows[s * k + a];
        let new = (old + delta).clamp(0.0, 1.0);
        if (new - old).abs() < 1e-15 {
            return false;
        }
        let rest = 1.0 - old;
        if rest <= 1e-12 {
            let share = (1.0 - new) / (k - 1) as f64;
            for j in 0..k {
                rows[s * k + j] = if j == a { new } else { share };
            }
        } else {
            let factor = (1.0 - new) / rest;
            for j in 0..k {
                rows[s * k + j] = if j == a { new } else { rows[s * k + j] * factor };
            }
        }
        let total: f64 = rows[s * k..(s + 1) * k].iter().sum();
        for j in 0..k {
            rows[s * k + j] /= total;
        }
        true
    }
}

fn structured_seeds(src: &SourceSpec, mode: Mode, k: usize) -> Vec<Vec<f64>> {
    let ns = src.pmf().dims()[0];
    let nshat = src.distortion().recon().len();
    let mut seeds = Vec::new();
    for j in 0..k {
        let mut rows = vec![0.0; ns * k];
        for s in 0..ns {
            rows[s * k + j] = 1.0;
        }
        seeds.push(rows);
    }
    // per-symbol Bayes map, expressible whenever the aux alphabet carries it
    let embed = match mode {
        Mode::Qb => true,
        Mode::Star => k >= nshat,
    };
    if embed {
        let mut rows = vec![0.0; ns * k];
        for s in 0..ns {
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for sh in 0..nshat {
                let v = src.distortion().d(s, sh);
                if v < best_val {
                    best_val = v;
                    best = sh;
                }
            }
            rows[s * k + best] = 1.0;
        }
        seeds.push(rows);
    }
    if mode == Mode::Star && k >= ns {
        let mut rows = vec![0.0; ns * k];
        for s in 0..ns {
            rows[s * k + s] = 1.0;
        }
        seeds.push(rows);
    }
    seeds
}

fn random_rows(rng: &mut ChaCha8Rng, ns: usize, k: usize) -> Vec<f64> {
    let uni = Uniform::new(0.0f64, 1.0f64);
    let mut rows = vec![0.0; ns * k];
    for s in 0..ns {
        let mut total = 0.0;
        for a in 0..k {
            let e = -(1.0 - uni.sample(rng)).ln();
            rows[s * k + a] = e;
            total += e;
        }
        for a in 0..k {
            rows[s * k + a] /= total;
        }
    }
    rows
}

fn optimize(src: &SourceSpec, mode: Mode, k: usize, cfg: &SearchConfig) -> Result<RegionFrontier> {
    if k < 1 {
        return Err(Error::ArgOutOfRange("aux alphabet size must be >= 1".into()));
    }
    if !(cfg.grid > 0.0 && cfg.grid <= 1.0) {
        return Err(Error::ArgOutOfRange(format!("grid step {}", cfg.grid)));
    }
    let dl = src.underline_distortion();
    if src.d() < dl - FEAS_TOL {
        return Err(Error::InfeasibleDistortion { d: src.d(), underline_d: dl });
    }
    if src.d() >= src.distortion().dbar() {
        // every reconstruction meets the target; the region is the full quadrant
        return Ok(RegionFrontier::from_corners(vec![RateCorner {
            r_uv: 0.0,
            sum_rate: 0.0,
        }]));
    }

    let ns = src.pmf().dims()[0];
    let eval = FastEval::new(src, mode, k);
    let mut search = Search::new(eval, src.d());

    for seed in structured_seeds(src, mode, k) {
        search.visit(&seed);
    }

    if ns * k <= GRID_CELL_LIMIT {
        let m = (1.0 / cfg.grid).round().max(1.0) as usize;
        let rows = all_rows_with_step(k, m);
        let mut pick = vec![0usize; ns];
        let mut chan = vec![0.0; ns * k];
        loop {
            for s in 0..ns {
                chan[s * k..(s + 1) * k].copy_from_slice(&rows[pick[s]]);
            }
            search.visit(&chan);
            // odometer
            let mut carry = ns;
            for s in (0..ns).rev() {
                pick[s] += 1;
                if pick[s] < rows.len() {
                    carry = s;
                    break;
                }
                pick[s] = 0;
            }
            if carry == ns {
                break;
            }
            let _ = carry;
        }
        if cfg.refine {
            for i in 0..=LAMBDA_STEPS {
                if let Some((_, best_rows)) = search.best[i].clone() {
                    search.descend(best_rows, Search::lambda(i), cfg.grid);
                }
            }
        }
    } else {
        for r in 0..cfg.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64 + 1);
            let start = random_rows(&mut rng, ns, k);
            if cfg.refine {
                for i in 0..=LAMBDA_STEPS {
                    search.descend(start.clone(), Search::lambda(i), cfg.grid.max(0.05));
                }
            } else {
                search.visit(&start);
            }
        }
        if cfg.refine {
            for i in 0..=LAMBDA_STEPS {
                if let Some((_, best_rows)) = search.best[i].clone() {
                    search.descend(best_rows, Search::lambda(i), cfg.grid.max(0.05));
                }
            }
        }
    }

    Ok(RegionFrontier::from_corners(search.visited))
}

/// Approximates the single-auxiliary region frontier by exhaustive grid
/// search (small channel matrices) or seeded multi-start coordinate descent,
/// discarding candidates whose common-randomness reconstruction misses the
/// distortion target. The default aux alphabet size |S| + 2 is enough to
/// exhaust the region.
pub fn optimize_star_region(src: &SourceSpec, k: usize, cfg: &SearchConfig) -> Result<RegionFrontier> {
    optimize(src, Mode::Star, k, cfg)
}

/// Same search restricted to quantize-and-bin: the auxiliary alphabet is the
/// reconstruction alphabet itself and the distortion is evaluated directly on
/// E[d(S, Shat)].
pub fn qb_region(src: &SourceSpec, cfg: &SearchConfig) -> Result<RegionFrontier> {
    let k = src.distortion().recon().len();
    optimize(src, Mode::Qb, k, cfg)
}

/// Closed-form region for the binary symmetric chain source with Hamming
/// distortion: a single corner (h(rho * D) - h(D), h((rho * delta) * D) - h(D))
/// for D below one half, and the free corner (0, 0) otherwise.
pub fn binary_region(rho: f64, delta: f64, d: f64) -> Result<RegionFrontier> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::ArgOutOfRange(format!("delta {delta} not in [0,1]")));
    }
    if delta == 0.0 || delta == 1.0 {
        return Err(Error::ClosedFormNotApplicable { delta });
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::ArgOutOfRange(format!("rho {rho} not in (0,1)")));
    }
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::ArgOutOfRange(format!("distortion {d}")));
    }
    if d >= 0.5 {
        return Ok(RegionFrontier::from_corners(vec![RateCorner { r_uv: 0.0, sum_rate: 0.0 }]));
    }
    let hd = binary_entropy(d)?;
    let a = binary_entropy(binary_convolution(rho, d)?)? - hd;
    let b = binary_entropy(binary_convolution(binary_convolution(rho, delta)?, d)?)? - hd;
    Ok(RegionFrontier::from_corners(vec![RateCorner { r_uv: a, sum_rate: b }]))
}

/// The binary symmetric chain source: S uniform, U = BSC(rho)(S),
/// V = BSC(delta)(U).
pub fn binary_source_pmf(rho: f64, delta: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::ArgOutOfRange(format!("rho {rho}, delta {delta}")));
    }
    let s = Alphabet::binary("S");
    let p_s = JointPmf::new(vec![s], vec![0.5, 0.5])?;
    let cu = Channel::bsc(p_s.alphabet("S")?, "U", rho)?;
    let p_su = p_s.compose(&cu)?;
    let cv = Channel::bsc(p_su.alphabet("U")?, "V", delta)?;
    let p = p_su.compose(&cv)?;
    p.marginalize(&["S", "U", "V"])
}

/// Binary symmetric chain source with Hamming distortion at target `d`.
pub fn binary_source(rho: f64, delta: f64, d: f64) -> Result<SourceSpec> {
    SourceSpec::with_hamming(binary_source_pmf(rho, delta)?, d)
}

/// Which solved cases a source falls into, with the measured quantities.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub i_s_u_given_v: f64,
    pub i_s_v_given_u: f64,
    pub h_s_given_u: f64,
    pub h_s_given_v: f64,
    pub h_u_given_s: f64,
    pub h_v_given_s: f64,
    pub h_u_given_v: f64,
    pub h_gk_uv: f64,
    pub supp_s_uv_product: bool,
    pub supp_s_u_product: bool,
    pub supp_u_v_product: bool,
    pub case_a: bool,
    pub case_b: bool,
    pub case_c: bool,
    pub case_d: bool,
    pub case_e: bool,
    pub case_f: bool,
    pub case_a_prime: bool,
    pub case_b_prime: bool,
    pub case_c_prime: bool,
    pub h_s_given_v_zero: bool,
    pub h_u_given_v_zero: bool,
}

/// Evaluates every solved-case condition at tolerance `tol`:
/// A product support; B the chain S - V - U; C the chain S - U - V with
/// product (S,U) support; D a source determined by U; E the chain S - U - V
/// with product (U,V) support; F side information determined by the source.
/// The primed cases are the quantize-and-bin-optimal ones; the two subsumed
/// determinism checks are reported alongside.
pub fn classify_source(src: &SourceSpec, tol: f64) -> Result<CaseReport> {
    let p = src.pmf();
    let i_s_u_given_v = p.conditional_mutual_information(&["S"], &["U"], &["V"])?;
    let i_s_v_given_u = p.conditional_mutual_information(&["S"], &["V"], &["U"])?;
    let h_s_given_u = p.conditional_entropy(&["S"], &["U"])?;
    let h_s_given_v = p.conditional_entropy(&["S"], &["V"])?;
    let h_u_given_s = p.conditional_entropy(&["U"], &["S"])?;
    let h_v_given_s = p.conditional_entropy(&["V"], &["S"])?;
    let h_u_given_v = p.conditional_entropy(&["U"], &["V"])?;
    let supp_s_uv_product = p.support_product_check(&["S"], &["U", "V"])?;
    let p_su = p.marginalize(&["S", "U"])?;
    let supp_s_u_product = p_su.support_product_check(&["S"], &["U"])?;
    let p_uv = p.marginalize(&["U", "V"])?;
    let supp_u_v_product = p_uv.support_product_check(&["U"], &["V"])?;
    let h_gk_uv = gk_partition(&p_uv, &["U"], &["V"])?.entropy();

    let case_a = supp_s_uv_product;
    let case_b = i_s_u_given_v <= tol;
    let markov_suv = i_s_v_given_u <= tol;
    let case_c = markov_suv && supp_s_u_product;
    let case_d = h_s_given_u <= tol;
    let case_e = markov_suv && supp_u_v_product;
    let case_f = h_u_given_s.min(h_v_given_s) <= tol;

    Ok(CaseReport {
        i_s_u_given_v,
        i_s_v_given_u,
        h_s_given_u,
        h_s_given_v,
        h_u_given_s,
        h_v_given_s,
        h_u_given_v,
        h_gk_uv,
        supp_s_uv_product,
        supp_s_u_product,
        supp_u_v_product,
        case_a,
        case_b,
        case_c,
        case_d,
        case_e,
        case_f,
        case_a_prime: case_a && h_gk_uv <= tol,
        case_b_prime: case_e,
        case_c_prime: case_f,
        h_s_given_v_zero: h_s_given_v <= tol,
        h_u_given_v_zero: h_u_given_v <= tol,
    })
}

/// Time sharing of two single-auxiliary candidates: the combined candidate
/// lives on the disjoint union of the two aux alphabets with the first
/// weighted by `lam`, uses the case-split reconstruction, and operates at the
/// mixture of the two corners and distortions.
pub fn time_share(
    src: &SourceSpec,
    c1: &AuxCandidate,
    c2: &AuxCandidate,
    lam: f64,
) -> Result<AuxCandidate> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::ArgOutOfRange(format!("lambda {lam} not in [0,1]")));
    }
    let (q1, q2) = match (&c1.channels, &c2.channels) {
        (AuxChannels::Single(a), AuxChannels::Single(b)) => (a, b),
        _ => {
            return Err(Error::ArgOutOfRange(
                "time sharing needs single-auxiliary candidates".into(),
            ))
        }
    };
    let s_alpha = src.pmf().alphabet("S")?;
    for q in [q1, q2] {
        if q.from_alphabets() != std::slice::from_ref(s_alpha) {
            return Err(Error::AlphabetMismatch(
                "candidate channels do not condition on this source's S".into(),
            ));
        }
    }
    let k1 = q1.to_alphabet().len();
    let k2 = q2.to_alphabet().len();
    let k = k1 + k2;
    let ns = s_alpha.len();
    let nv = src.pmf().alphabet("V")?.len();

    let mut symbols = Vec::with_capacity(k);
    for sym in q1.to_alphabet().symbols() {
        symbols.push(format!("0:{sym}"));
    }
    for sym in q2.to_alphabet().symbols() {
        symbols.push(format!("1:{sym}"));
    }
    let aux = Alphabet::new("A", symbols)?;
    let mut rows = vec![0.0; ns * k];
    for s in 0..ns {
        for a in 0..k1 {
            rows[s * k + a] = lam * q1.prob(s, a);
        }
        for a in 0..k2 {
            rows[s * k + k1 + a] = (1.0 - lam) * q2.prob(s, a);
        }
    }
    let chan = Channel::new(vec![s_alpha.clone()], aux, rows)?;

    let joint = src.pmf().compose(&chan)?;
    let corner = RateCorner {
        r_uv: joint.conditional_mutual_information(&["S"], &["A"], &["U"])?,
        sum_rate: joint.conditional_mutual_information(&["S"], &["A"], &["V"])?,
    };
    let dj = joint.duplicate_variable("A", "A__r")?;
    let marg = dj.marginalize(&["A", "U", "A__r", "V"])?;
    let part = gk_partition(&marg, &["A", "U"], &["A__r", "V"])?;

    // case-split reconstruction: each class lives inside one aux letter, so it
    // projects onto a class of the originating candidate
    let n_classes = part.num_classes();
    let mut recon = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        // representative flat right index over dims [k, nv]
        let rep = {
            // recover it by scanning for the class's canonical representative
            let mut found = None;
            for flat in 0..k * nv {
                if part.class_of_right(flat) == Some(c) {
                    found = Some(flat);
                    break;
                }
            }
            found.expect("class has a supported right symbol")
        };
        let (a, v) = (rep / nv, rep % nv);
        let sym = if a < k1 {
            let oc = c1
                .partition
                .class_of_right(a * nv + v)
                .ok_or_else(|| Error::DegenerateResult("class missing in first candidate".into()))?;
            c1.recon[oc]
        } else {
            let oc = c2
                .partition
                .class_of_right((a - k1) * nv + v)
                .ok_or_else(|| Error::DegenerateResult("class missing in second candidate".into()))?;
            c2.recon[oc]
        };
        recon.push(sym);
    }

    // achieved distortion under the case-split reconstruction
    let dims = joint.dims().to_vec();
    let mut idx = vec![0usize; dims.len()];
    let mut achieved = 0.0;
    let sink = src.global_bayes_symbol();
    for (off, &m) in joint.mass().iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        decode_index(off, &dims, &mut idx);
        let (s, v, a) = (idx[0], idx[2], idx[3]);
        let sym = match part.class_of_right(a * nv + v) {
            Some(cl) => recon[cl],
            None => sink,
        };
        achieved += m * src.distortion().d(s, sym);
    }

    Ok(AuxCandidate {
        channels: AuxChannels::Single(chan),
        partition: part,
        recon,
        sink_recon: sink,
        achieved_distortion: achieved,
        corner,
    })
}

/// One row of the discontinuity demonstration.
#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub delta: f64,
    pub r_uv: f64,
    pub sum_rate: f64,
}

/// Corners of the binary region along a list of small crossover values,
/// their limit as the second channel degenerates, and the degenerate-channel
/// corner itself, which stays at the origin: the witness of the region's
/// discontinuity in the source distribution.
#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub rho: f64,
    pub d: f64,
    pub rows: Vec<DemoRow>,
    pub limit_r_uv: f64,
    pub limit_sum_rate: f64,
    pub zero_delta_r_uv: f64,
    pub zero_delta_sum_rate: f64,
    /// Distortion of reconstructing with the shared side information directly.
    pub shortcut_distortion: f64,
    pub gap: f64,
    pub gap_positive: bool,
}

pub fn discontinuity_demo(rho: f64, d: f64, deltas: &[f64]) -> Result<DemoReport> {
    if !(rho > 0.0 && rho < d && d < 0.5) {
        return Err(Error::PreconditionViolated(format!(
            "need 0 < rho < D < 1/2, got rho = {rho}, D = {d}"
        )));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let fr = binary_region(rho, delta, d)?;
        let c = fr.corners()[0];
        rows.push(DemoRow { delta, r_uv: c.r_uv, sum_rate: c.sum_rate });
    }
    let limit = binary_entropy(binary_convolution(rho, d)?)? - binary_entropy(d)?;

    // with the two side informations identical, copying them is admissible:
    // distortion rho < D at zero rate on both links
    let p0 = binary_source_pmf(rho, 0.0)?;
    let mut shortcut = 0.0;
    let dims = p0.dims().to_vec();
    let mut idx = vec![0usize; 3];
    for (off, &m) in p0.mass().iter().enumerate() {
        decode_index(off, &dims, &mut idx);
        if idx[0] != idx[1] {
            shortcut += m;
        }
    }
    debug_assert!(shortcut <= d);

    Ok(DemoReport {
        rho,
        d,
        rows,
        limit_r_uv: limit,
        limit_sum_rate: limit,
        zero_delta_r_uv: 0.0,
        zero_delta_sum_rate: 0.0,
        shortcut_distortion: shortcut,
        gap: limit,
        gap_positive: limit > 0.0,
    })
}

/// Aux alphabet sizes beyond which the three candidate regions stop growing:
/// (|S| + 2, |S|(|S| + 6)|Shat|^|U| + 4, |S|(|S| + 4)|Shat|^|U| + 1).
pub fn aux_alphabet_bounds(size_s: u64, size_shat: u64, size_u: u64) -> Result<(u64, u64, u64)> {
    if size_s == 0 || size_shat == 0 || size_u == 0 {
        return Err(Error::ArgOutOfRange("alphabet sizes must be positive".into()));
    }
    let pow = size_shat
        .checked_pow(
            u32::try_from(size_u).map_err(|_| Error::ArgOutOfRange("|U| too large".into()))?,
        )
        .ok_or_else(|| Error::ArgOutOfRange("|Shat|^|U| overflows".into()))?;
    let kstar = size_s + 2;
    let kddag = size_s
        .checked_mul(size_s + 6)
        .and_then(|x| x.checked_mul(pow))
        .and_then(|x| x.checked_add(4))
        .ok_or_else(|| Error::ArgOutOfRange("bound overflows".into()))?;
    let kdag = size_s
        .checked_mul(size_s + 4)
        .and_then(|x| x.checked_mul(pow))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::ArgOutOfRange("bound overflows".into()))?;
    Ok((kstar, kddag, kdag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::MASS_TOL;

    fn uniform_binary_identity_source(d: f64) -> SourceSpec {
        // S uniform binary, U = V = S
        let s = Alphabet::binary("S");
        let u = Alphabet::binary("U");
        let v = Alphabet::binary("V");
        let p = JointPmf::from_fn(vec![s, u, v], |idx| {
            if idx[0] == idx[1] && idx[1] == idx[2] {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        SourceSpec::with_hamming(p, d).unwrap()
    }

    #[test]
    fn underline_distortion_cases() {
        let src = binary_source(0.1, 0.1, 0.0).unwrap();
        assert_eq!(src.underline_distortion(), 0.0);

        // constant distortion c
        let s = Alphabet::binary("S");
        let recon = Alphabet::binary("R");
        let d = DistortionMeasure::new(s.clone(), recon, vec![0.7; 4], 1.0).unwrap();
        let p = binary_source_pmf(0.2, 0.2).unwrap();
        let src = SourceSpec::new(p, d, 0.8).unwrap();
        assert!((src.underline_distortion() - 0.7).abs() < 1e-12);

        // asymmetric: every symbol has a zero-cost reconstruction
        let s = Alphabet::binary("S");
        let recon = Alphabet::binary("R");
        let d = DistortionMeasure::new(s, recon, vec![0.0, 1.0, 3.0, 0.0], 3.0).unwrap();
        let p = binary_source_pmf(0.3, 0.3).unwrap();
        let src = SourceSpec::new(p, d, 1.0).unwrap();
        assert_eq!(src.underline_distortion(), 0.0);
    }

    #[test]
    fn star_identity_candidate_reaches_zero_distortion() {
        let src = binary_source(0.05, 0.2, 0.1).unwrap();
        let q = Channel::identity(src.pmf().alphabet("S").unwrap(), "A").unwrap();
        let cand = eval_star_candidate(&src, &q).unwrap();
        assert!(cand.achieved_distortion.abs() < 1e-12);
        let h_s_u = src.pmf().conditional_entropy(&["S"], &["U"]).unwrap();
        let h_s_v = src.pmf().conditional_entropy(&["S"], &["V"]).unwrap();
        assert!((cand.corner.r_uv - h_s_u).abs() < 1e-9);
        assert!((cand.corner.sum_rate - h_s_v).abs() < 1e-9);
    }

    #[test]
    fn star_constant_candidate_on_uniform_binary() {
        let src = binary_source(0.05, 0.2, 0.6).unwrap();
        let s = src.pmf().alphabet("S").unwrap().clone();
        let a = Alphabet::new("A", vec!["x".into()]).unwrap();
        let q = Channel::constant(vec![s], a, 0).unwrap();
        let cand = eval_star_candidate(&src, &q).unwrap();
        assert!(cand.corner.r_uv.abs() < 1e-12);
        assert!(cand.corner.sum_rate.abs() < 1e-12);
        assert!((cand.achieved_distortion - 0.5).abs() < 1e-12);
    }

    #[test]
    fn star_test_channel_matches_closed_form() {
        // BSC(0.1) quantizer on the (0.05, 0.2) chain source at D = 0.1
        let src = binary_source(0.05, 0.2, 0.1).unwrap();
        let q = Channel::bsc(src.pmf().alphabet("S").unwrap(), "A", 0.1).unwrap();
        let cand = eval_star_candidate(&src, &q).unwrap();
        let expect_a = 0.11524321805357467; // h(0.05 * 0.1) - h(0.1)
        let expect_b = 0.3918484126122685; // h(0.23 * 0.1) - h(0.1)
        assert!((cand.corner.r_uv - expect_a).abs() < 1e-9);
        assert!((cand.corner.sum_rate - expect_b).abs() < 1e-9);
        assert!((cand.achieved_distortion - 0.1).abs() < 1e-12);
    }

    #[test]
    fn triple_identity_lift_matches_star_corner() {
        let src = binary_source(0.1, 0.3, 0.2).unwrap();
        let q = Channel::bsc(src.pmf().alphabet("S").unwrap(), "A", 0.15).unwrap();
        let star = eval_star_candidate(&src, &q).unwrap();
        let s = src.pmf().alphabet("S").unwrap();
        let b = identity_lift(q.to_alphabet(), s, "B").unwrap();
        let c = identity_lift(q.to_alphabet(), s, "C").unwrap();
        let triple = eval_triple_candidate(&src, &q, &b, &c).unwrap();
        assert!((triple.corner_ddag.r_uv - star.corner.r_uv).abs() < 1e-9);
        assert!((triple.corner_ddag.sum_rate - star.corner.sum_rate).abs() < 1e-9);
        assert!((triple.candidate.achieved_distortion - star.achieved_distortion).abs() < 1e-9);
    }

    #[test]
    fn triple_all_constant_is_free_but_costly() {
        let src = binary_source(0.1, 0.3, 0.6).unwrap();
        let s = src.pmf().alphabet("S").unwrap().clone();
        let a = Alphabet::new("A", vec!["x".into()]).unwrap();
        let qa = Channel::constant(vec![s.clone()], a.clone(), 0).unwrap();
        let qb = Channel::constant(
            vec![a.clone(), s.clone()],
            Alphabet::new("B", vec!["y".into()]).unwrap(),
            0,
        )
        .unwrap();
        let qc = Channel::constant(
            vec![a, s],
            Alphabet::new("C", vec!["z".into()]).unwrap(),
            0,
        )
        .unwrap();
        let t = eval_triple_candidate(&src, &qa, &qb, &qc).unwrap();
        assert!(t.corner_ddag.r_uv.abs() < 1e-12);
        assert!(t.corner_ddag.sum_rate.abs() < 1e-12);
        assert!(t.candidate.achieved_distortion >= src.underline_distortion() - 1e-12);
    }

    #[test]
    fn qb_binary_at_half_distortion_is_free() {
        let src = binary_source(0.05, 0.2, 0.5).unwrap();
        let fr = qb_region(&src, &SearchConfig::default()).unwrap();
        assert_eq!(fr.corners().len(), 1);
        assert!(fr.corners()[0].r_uv.abs() < 1e-12);
        assert!(fr.corners()[0].sum_rate.abs() < 1e-12);
    }

    #[test]
    fn fast_eval_agrees_with_candidate_eval() {
        use rand::Rng;
        let src = binary_source(0.15, 0.25, 0.12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = 3;
        let fast = FastEval::new(&src, Mode::Star, k);
        for _ in 0..50 {
            let rows = random_rows(&mut rng, 2, k);
            let (corner, dist) = fast.eval(&rows);
            let aux = Alphabet::indexed("A", "a", k).unwrap();
            let chan =
                Channel::new(vec![src.pmf().alphabet("S").unwrap().clone()], aux, rows.clone())
                    .unwrap();
            let cand = eval_star_candidate(&src, &chan).unwrap();
            assert!((corner.r_uv - cand.corner.r_uv).abs() < 1e-9, "r_uv mismatch");
            assert!((corner.sum_rate - cand.corner.sum_rate).abs() < 1e-9);
            assert!(
                (dist - cand.achieved_distortion).abs() < 1e-9,
                "distortion mismatch {dist} vs {}",
                cand.achieved_distortion
            );
            let _ = rng.gen::<u8>();
        }
    }

    #[test]
    fn qb_region_binary_at_zero_distortion() {
        let src = binary_source(0.05, 0.2, 0.0).unwrap();
        let fr = qb_region(&src, &SearchConfig::default()).unwrap();
        assert_eq!(fr.corners().len(), 1);
        let c = fr.corners()[0];
        assert!((c.r_uv - 0.2863969571159561).abs() < 5e-4);
        assert!((c.sum_rate - 0.7780113035465377).abs() < 5e-4);
    }

    #[test]
    fn region_at_dbar_is_free() {
        let src = binary_source(0.05, 0.2, 1.0).unwrap();
        let fr = optimize_star_region(&src, 4, &SearchConfig::default()).unwrap();
        assert_eq!(fr.corners().len(), 1);
        assert_eq!(fr.corners()[0].r_uv, 0.0);
        assert_eq!(fr.corners()[0].sum_rate, 0.0);
    }

    #[test]
    fn infeasible_distortion_is_an_error() {
        let s = Alphabet::binary("S");
        let recon = Alphabet::binary("R");
        // no reconstruction gets below 0.2
        let d = DistortionMeasure::new(s, recon, vec![0.2, 1.0, 1.0, 0.2], 1.0).unwrap();
        let p = binary_source_pmf(0.2, 0.2).unwrap();
        let src = SourceSpec::new(p, d, 0.1).unwrap();
        match qb_region(&src, &SearchConfig::default()) {
            Err(Error::InfeasibleDistortion { underline_d, .. }) => {
                assert!((underline_d - 0.2).abs() < 1e-12)
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn star_receivers_knowing_the_source_cost_nothing() {
        let src = uniform_binary_identity_source(0.0);
        let fr = optimize_star_region(&src, 2, &SearchConfig::default()).unwrap();
        assert_eq!(fr.corners().len(), 1);
        assert!(fr.corners()[0].r_uv.abs() < 1e-9);
        assert!(fr.corners()[0].sum_rate.abs() < 1e-9);
    }

    #[test]
    fn star_matches_closed_form_on_chain_source() {
        let src = binary_source(0.05, 0.2, 0.1).unwrap();
        let cfg = SearchConfig { grid: 0.05, restarts: 8, seed: 42, refine: true };
        let fr = optimize_star_region(&src, 2, &cfg).unwrap();
        let expect = binary_region(0.05, 0.2, 0.1).unwrap();
        let e = expect.corners()[0];
        assert!(
            fr.corners()
                .iter()
                .any(|c| (c.r_uv - e.r_uv).abs() < 5e-3 && (c.sum_rate - e.sum_rate).abs() < 5e-3),
            "no frontier corner within 5e-3 of the closed form: {:?}",
            fr.corners()
        );
        // the frontier never beats the true region corner
        for c in fr.corners() {
            assert!(c.r_uv >= e.r_uv - 1e-9);
            assert!(c.sum_rate >= e.sum_rate - 1e-9);
        }
    }

    #[test]
    fn binary_region_values() {
        let fr = binary_region(0.05, 0.2, 0.0).unwrap();
        let c = fr.corners()[0];
        assert!((c.r_uv - 0.2863969571159561).abs() < 1e-12);
        assert!((c.sum_rate - 0.7780113035465377).abs() < 1e-12);

        let free = binary_region(0.3, 0.4, 0.5).unwrap();
        assert_eq!(free.corners()[0].r_uv, 0.0);

        let fr = binary_region(0.05, 0.2, 0.1).unwrap();
        let c = fr.corners()[0];
        assert!((c.r_uv - 0.11524321805357467).abs() < 1e-12);
        assert!((c.sum_rate - 0.3918484126122685).abs() < 1e-12);

        assert!(matches!(
            binary_region(0.05, 0.0, 0.1),
            Err(Error::ClosedFormNotApplicable { .. })
        ));
        assert!(matches!(
            binary_region(0.05, 1.0, 0.1),
            Err(Error::ClosedFormNotApplicable { .. })
        ));
        assert!(binary_region(0.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn classify_chain_source() {
        let src = binary_source(0.05, 0.2, 0.1).unwrap();
        let r = classify_source(&src, 1e-9).unwrap();
        assert!(r.case_a && r.case_c && r.case_e);
        assert!(!r.case_b && !r.case_d && !r.case_f);
        assert!(r.case_a_prime && r.case_b_prime);
        assert!(!r.case_c_prime);
        assert!((r.h_s_given_u - 0.2863969571159561).abs() < 1e-9);
    }

    #[test]
    fn classify_degenerate_branch() {
        // U = V: the chain S - V - U holds; quantize-and-bin cases fail
        let src = binary_source(0.05, 0.0, 0.1).unwrap();
        let r = classify_source(&src, 1e-9).unwrap();
        assert!(r.case_b);
        assert!(r.case_a, "product support holds even with identical side information");
        assert!(!r.case_a_prime);
        assert!(!r.case_b_prime);
        assert!((r.h_gk_uv - 1.0).abs() < 1e-9);

        // V independent of (S, U), U = S
        let s = Alphabet::binary("S");
        let u = Alphabet::binary("U");
        let v = Alphabet::binary("V");
        let p = JointPmf::from_fn(vec![s, u, v], |idx| {
            if idx[0] == idx[1] {
                0.25
            } else {
                0.0
            }
        })
        .unwrap();
        let src = SourceSpec::with_hamming(p, 0.0).unwrap();
        let r = classify_source(&src, 1e-9).unwrap();
        assert!(r.case_d);
    }

    #[test]
    fn time_share_mixes_corners_and_distortion() {
        let src = binary_source(0.1, 0.2, 0.2).unwrap();
        let s = src.pmf().alphabet("S").unwrap();
        let q1 = Channel::bsc(s, "A", 0.05).unwrap();
        let q2 = Channel::bsc(s, "A", 0.18).unwrap();
        let c1 = eval_star_candidate(&src, &q1).unwrap();
        let c2 = eval_star_candidate(&src, &q2).unwrap();
        for lam in [0.0, 0.25, 0.5, 1.0] {
            let ts = time_share(&src, &c1, &c2, lam).unwrap();
            let want_a = lam * c1.corner.r_uv + (1.0 - lam) * c2.corner.r_uv;
            let want_b = lam * c1.corner.sum_rate + (1.0 - lam) * c2.corner.sum_rate;
            let want_d =
                lam * c1.achieved_distortion + (1.0 - lam) * c2.achieved_distortion;
            assert!((ts.corner.r_uv - want_a).abs() < 1e-9, "lam={lam}");
            assert!((ts.corner.sum_rate - want_b).abs() < 1e-9, "lam={lam}");
            assert!((ts.achieved_distortion - want_d).abs() < 1e-9, "lam={lam}");
        }
    }

    #[test]
    fn time_share_rejects_mismatched_sources() {
        let src = binary_source(0.1, 0.2, 0.2).unwrap();
        let other = {
            let s = Alphabet::new("S", vec!["x".into(), "y".into(), "z".into()]).unwrap();
            let pmf = JointPmf::from_fn(
                vec![s, Alphabet::binary("U"), Alphabet::binary("V")],
                |_| 1.0 / 12.0,
            )
            .unwrap();
            SourceSpec::with_hamming(pmf, 0.5).unwrap()
        };
        let q = Channel::bsc(src.pmf().alphabet("S").unwrap(), "A", 0.1).unwrap();
        let c = eval_star_candidate(&src, &q).unwrap();
        let q3 = Channel::constant(
            vec![other.pmf().alphabet("S").unwrap().clone()],
            Alphabet::binary("A"),
            0,
        )
        .unwrap();
        let c3 = eval_star_candidate(&other, &q3).unwrap();
        assert!(time_share(&src, &c, &c3, 0.5).is_err());
    }

    #[test]
    fn demo_reports_positive_gap() {
        let r = discontinuity_demo(0.05, 0.1, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!(r.gap_positive);
        assert!((r.gap - 0.11524321805357467).abs() < 1e-12);
        assert!((r.shortcut_distortion - 0.05).abs() < 1e-12);
        // r_uv is independent of delta and equals the limit
        for row in &r.rows {
            assert!((row.r_uv - r.limit_r_uv).abs() < 1e-12);
        }
        // sum-rate decreases toward the limit as delta shrinks
        assert!(r.rows[0].sum_rate > r.rows[1].sum_rate);
        assert!(r.rows[1].sum_rate > r.rows[2].sum_rate);
        assert!(r.rows[2].sum_rate > r.limit_sum_rate);

        assert!(discontinuity_demo(0.1, 0.1, &[1e-2]).is_err());
        assert!(discontinuity_demo(0.2, 0.1, &[1e-2]).is_err());
    }

    #[test]
    fn demo_mirror_near_one() {
        // approaching the other degenerate crossover, the sum-rate corner
        // returns to the same limit
        let limit = 0.11524321805357467;
        let near = binary_region(0.05, 0.999, 0.1).unwrap().corners()[0];
        assert!((near.sum_rate - limit).abs() < 2e-2);
        let nearer = binary_region(0.05, 0.9999, 0.1).unwrap().corners()[0];
        assert!((nearer.sum_rate - limit).abs() < (near.sum_rate - limit).abs());
    }

    #[test]
    fn alphabet_bound_values() {
        assert_eq!(aux_alphabet_bounds(2, 2, 2).unwrap(), (4, 68, 49));
        assert_eq!(aux_alphabet_bounds(2, 2, 1).unwrap(), (4, 36, 25));
        assert_eq!(aux_alphabet_bounds(1, 1, 1).unwrap(), (3, 11, 6));
        assert!(aux_alphabet_bounds(0, 1, 1).is_err());
    }

    #[test]
    fn frontier_reduction_and_csv() {
        let fr = RegionFrontier::from_corners(vec![
            RateCorner { r_uv: 0.5, sum_rate: 0.2 },
            RateCorner { r_uv: 0.1, sum_rate: 0.9 },
            RateCorner { r_uv: 0.5, sum_rate: 0.1 },
            RateCorner { r_uv: 0.6, sum_rate: 0.1 }, // dominated
            RateCorner { r_uv: 0.1, sum_rate: 0.9 + 1e-9 }, // duplicate
        ]);
        assert_eq!(fr.corners().len(), 2);
        assert!(fr.corners()[0].r_uv < fr.corners()[1].r_uv);
        let mut buf = Vec::new();
        fr.write_csv(&mut buf, 0.1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "D,corner_index,r_uv_min,sum_rate_min");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn source_total_mass_check() {
        let p = binary_source_pmf(0.3, 0.4).unwrap();
        let total: f64 = p.mass().iter().sum();
        assert!((total - 1.0).abs() < MASS_TOL);
    }
}
