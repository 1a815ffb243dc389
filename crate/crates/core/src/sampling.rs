//! Seeded random instance generators: sources, channels, Markov five-tuples,
//! and agreement-lemma instances. Property suites and the randomized triple
//! evaluation derive independent streams from (seed, instance index).

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::probability::{Alphabet, Channel, JointPmf};
use crate::prune::MarkovFiveTuple;
use crate::region::SourceSpec;

/// Independent stream for instance `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A strictly positive random mass vector with every entry at least
/// `floor / n`.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    let uni = Uniform::new(0.0f64, 1.0f64);
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - uni.sample(rng)).ln()).collect();
    let total: f64 = v.iter().sum();
    let base = floor / n as f64;
    for x in &mut v {
        *x = base + (1.0 - floor) * (*x / total);
    }
    v
}

/// Fully supported random pmf over the given alphabets.
pub fn random_pmf<R: Rng + ?Sized>(
    rng: &mut R,
    alphabets: Vec<Alphabet>,
    floor: f64,
) -> Result<JointPmf> {
    let n: usize = alphabets.iter().map(|a| a.len()).product();
    JointPmf::new(alphabets, random_simplex(rng, n, floor))
}

/// Random channel with strictly positive rows.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    from: Vec<Alphabet>,
    to: Alphabet,
    floor: f64,
) -> Result<Channel> {
    let n_rows: usize = from.iter().map(|a| a.len()).product();
    let k = to.len();
    let mut rows = Vec::with_capacity(n_rows * k);
    for _ in 0..n_rows {
        rows.extend(random_simplex(rng, k, floor));
    }
    Channel::new(from, to, rows)
}

/// Fully supported random source over (S, U, V) with Hamming distortion.
pub fn random_source<R: Rng + ?Sized>(
    rng: &mut R,
    ns: usize,
    nu: usize,
    nv: usize,
    d: f64,
) -> Result<SourceSpec> {
    let s = Alphabet::indexed("S", "s", ns)?;
    let u = Alphabet::indexed("U", "u", nu)?;
    let v = Alphabet::indexed("V", "v", nv)?;
    let pmf = random_pmf(rng, vec![s, u, v], 0.05)?;
    SourceSpec::with_hamming(pmf, d)
}

/// Random single-auxiliary channel q_{A|S} with `k` letters.
pub fn random_aux_channel<R: Rng + ?Sized>(
    rng: &mut R,
    src: &SourceSpec,
    k: usize,
) -> Result<Channel> {
    let s = src.pmf().alphabet("S")?.clone();
    let a = Alphabet::indexed("A", "a", k)?;
    random_channel(rng, vec![s], a, 0.0)
}

/// Random triple (q_{A|S}, q_{B|AS}, q_{C|AS}); the induced joint satisfies
/// B -- (A,S) -- C by construction.
pub fn random_triple_channels<R: Rng + ?Sized>(
    rng: &mut R,
    src: &SourceSpec,
    ka: usize,
    kb: usize,
    kc: usize,
) -> Result<(Channel, Channel, Channel)> {
    let s = src.pmf().alphabet("S")?.clone();
    let a = Alphabet::indexed("A", "a", ka)?;
    let q_as = random_channel(rng, vec![s.clone()], a.clone(), 0.0)?;
    let b = Alphabet::indexed("B", "b", kb)?;
    let q_bas = random_channel(rng, vec![a.clone(), s.clone()], b, 0.0)?;
    let c = Alphabet::indexed("C", "c", kc)?;
    let q_cas = random_channel(rng, vec![a, s], c, 0.0)?;
    Ok((q_as, q_bas, q_cas))
}

/// Admissible random five-tuple for the pruning suites: an exact product
/// p(a1,a2,s) x p(b1,b2|s) with the S marginal floored away from zero.
///
/// Two cells are planted so the transforms do real work on most instances:
/// the auxiliary pair (a0, b0) carries total mass around half a percent
/// (droppable under the event transform at eta = 0.1), and its conditional
/// p(s0 | a0, b0) sits below 1e-3 (removed by the threshold transform at
/// delta = 1e-3). The receiver pair (u0, v0) is reachable only from s0, so
/// the zeroing check has non-vacuous cases.
pub fn random_five_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    n1: usize,
    n2: usize,
    ns: usize,
    nb1: usize,
    nb2: usize,
) -> Result<MarkovFiveTuple> {
    let na = n1 * n2;
    let nb = nb1 * nb2;
    if na < 2 || ns < 2 {
        return Err(Error::ArgOutOfRange(
            "five-tuple generator needs |A1 x A2| >= 2 and |S| >= 2".into(),
        ));
    }

    let p_s = random_simplex(rng, ns, 0.3);
    let ps0 = p_s[0];

    // designated auxiliary pair: index 0, i.e. (a0, b0)
    let y = 0.004 + 0.004 * rng.gen::<f64>();
    let target = 4e-4 + 2e-4 * rng.gen::<f64>();
    // choose p(a0|s0) = z so that p(s0 | a0) equals `target`
    let z = target * y * (1.0 - ps0) / ((1.0 - target) * ps0);

    let mut p_as = vec![0.0; na * ns]; // p(a, s), a-major
    for s in 0..ns {
        let first = if s == 0 { z } else { y };
        let rest = random_simplex(rng, na - 1, 0.2);
        p_as[s] = p_s[s] * first;
        for (j, r) in rest.into_iter().enumerate() {
            p_as[(j + 1) * ns + s] = p_s[s] * (1.0 - first) * r;
        }
    }

    // receiver channel rows; the (u0, v0) pair is reachable only from s0
    let mut w_b = vec![0.0; ns * nb];
    for s in 0..ns {
        if s == 0 || nb == 1 {
            let row = random_simplex(rng, nb, 0.2);
            w_b[s * nb..(s + 1) * nb].copy_from_slice(&row);
        } else {
            let row = random_simplex(rng, nb - 1, 0.2);
            for (j, x) in row.into_iter().enumerate() {
                w_b[s * nb + j + 1] = x;
            }
        }
    }

    let a1 = Alphabet::indexed("A1", "a", n1)?;
    let a2 = Alphabet::indexed("A2", "b", n2)?;
    let s_alpha = Alphabet::indexed("S", "s", ns)?;
    let b1 = Alphabet::indexed("B1", "u", nb1)?;
    let b2 = Alphabet::indexed("B2", "v", nb2)?;
    let joint = JointPmf::from_fn(vec![a1, a2, s_alpha, b1, b2], |idx| {
        let a = idx[0] * n2 + idx[1];
        let b = idx[3] * nb2 + idx[4];
        p_as[a * ns + idx[2]] * w_b[idx[2] * nb + b]
    })?;
    MarkovFiveTuple::new(joint)
}

/// Agreement-lemma instance: independent marginals and maps into a common
/// alphabet that disagree with small probability.
pub struct AgreementInstance {
    pub p_x: JointPmf,
    pub p_y: JointPmf,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub z_size: usize,
}

fn concentrated_marginal<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    map: &[usize],
    z0: usize,
    eps: f64,
    name: &str,
) -> Result<JointPmf> {
    let raw = random_simplex(rng, n, 0.1);
    let on: f64 = (0..n).filter(|&i| map[i] == z0).map(|i| raw[i]).sum();
    let off = 1.0 - on;
    let mut mass = vec![0.0; n];
    for i in 0..n {
        mass[i] = if map[i] == z0 {
            raw[i] * (1.0 - eps) / on
        } else if off > 0.0 {
            raw[i] * eps / off
        } else {
            0.0
        };
    }
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    JointPmf::new(vec![Alphabet::indexed(name, "x", n)?], mass)
}

/// Builds maps that send the first symbol of each side to a common value and
/// marginals concentrating there, so the mismatch probability stays below
/// roughly `2 * max_eps`.
pub fn random_agreement_instance<R: Rng + ?Sized>(
    rng: &mut R,
    nx: usize,
    ny: usize,
    z_size: usize,
    max_eps: f64,
) -> Result<AgreementInstance> {
    let z0 = rng.gen_range(0..z_size);
    let eps_x = max_eps * rng.gen::<f64>();
    let eps_y = max_eps * rng.gen::<f64>();
    let f: Vec<usize> = (0..nx)
        .map(|i| if i == 0 { z0 } else { rng.gen_range(0..z_size) })
        .collect();
    let g: Vec<usize> = (0..ny)
        .map(|i| if i == 0 { z0 } else { rng.gen_range(0..z_size) })
        .collect();
    let p_x = concentrated_marginal(rng, nx, &f, z0, eps_x, "X")?;
    let p_y = concentrated_marginal(rng, ny, &g, z0, eps_y, "Y")?;
    Ok(AgreementInstance { p_x, p_y, f, g, z_size })
}
