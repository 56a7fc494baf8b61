//! Built-in consistency checks, run by `hhe selftest`.

use std::time::Instant;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cipher::{mix_columns, mix_rows, mrmc, Cipher, CipherParams, Key, MixingMatrix, Order, StateMatrix};
use crate::pipesim::{simulate, verify_trace, HwConfig, Variant};
use crate::sampler::{
    analytic_pmf, build_cdf_table, sample_discrete_gaussian, xof_init, BitSource, DomainTag, SamplerStats,
    UniformSampler, XofStream,
};
use crate::zq::Modulus;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "lowercase")]
pub enum SuiteStatus {
    Pass(String),
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub status: SuiteStatus,
    pub millis: u128,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        !matches!(self.status, SuiteStatus::Fail(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    /// Random (key, nonce) pairs per design point in the differential suite.
    pub trials: usize,
    pub states: usize,
    pub uniform_draws: usize,
    pub gaussian_draws: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { trials: 10, states: 1000, uniform_draws: 100_000, gaussian_draws: 200_000 }
    }
}

pub fn all_ok(results: &[SuiteResult]) -> bool {
    results.iter().all(SuiteResult::ok)
}

fn rng(label: &[u8]) -> XofStream {
    xof_init(label, DomainTag::KeyDerivation).expect("short label")
}

fn random_below(s: &mut XofStream, bound: u64) -> u64 {
    (s.next_bits(64) as u64) % bound
}

type Outcome = std::result::Result<String, String>;

fn timed(name: &'static str, f: impl FnOnce() -> SuiteStatus) -> SuiteResult {
    let t = Instant::now();
    let status = f();
    SuiteResult { name, status, millis: t.elapsed().as_millis() }
}

fn from_outcome(o: Outcome) -> SuiteStatus {
    match o {
        Ok(m) => SuiteStatus::Pass(m),
        Err(m) => SuiteStatus::Fail(m),
    }
}

pub fn ring_laws(q: Modulus, samples: usize) -> Outcome {
    let mut s = rng(b"ring");
    let qv = q.value();
    for _ in 0..samples {
        let (a, b, c) = (random_below(&mut s, qv), random_below(&mut s, qv), random_below(&mut s, qv));
        let checks = [
            q.add(a, b) == q.add(b, a),
            q.mul(a, b) == q.mul(b, a),
            q.add(q.add(a, b), c) == q.add(a, q.add(b, c)),
            q.mul(q.mul(a, b), c) == q.mul(a, q.mul(b, c)),
            q.mul(a, q.add(b, c)) == q.add(q.mul(a, b), q.mul(a, c)),
            q.add(a, q.sub(0, a)) == 0,
            q.mul(a, 1) == a,
            q.cube(a) == q.mul(a, q.square(a)),
            q.add(a, b) < qv && q.mul(a, b) < qv,
        ];
        if let Some(i) = checks.iter().position(|ok| !ok) {
            return Err(format!("law {i} fails for a={a} b={b} c={c}"));
        }
    }
    Ok(format!("{samples} triples"))
}

/// Transposition invariance of MRMC, its factorization, and a known-answer
/// check of the mixing matrix against the standard one for this `v`.
pub fn mrmc_suite(p: &CipherParams, states: usize) -> Outcome {
    let standard = MixingMatrix::default_for(p.v).map_err(|e| e.to_string())?;
    if p.mixing != standard {
        return Err(format!("mixing matrix {:?} differs from the standard {:?}", p.mixing.rows(), standard.rows()));
    }
    let mut s = rng(b"mrmc");
    let q = p.q;
    for k in 0..states {
        let vals: Vec<u64> = (0..p.n).map(|_| random_below(&mut s, q.value())).collect();
        let x = StateMatrix::new(vals, q, Order::Row).map_err(|e| e.to_string())?;
        let y = mrmc(&x, &p.mixing).map_err(|e| e.to_string())?;
        let yt = mrmc(&x.transpose(), &p.mixing).map_err(|e| e.to_string())?;
        if yt.values() != y.transpose().values() {
            return Err(format!("mrmc(X^T) != mrmc(X)^T for state {k}"));
        }
        let z = mix_rows(&mix_columns(&x, &p.mixing).map_err(|e| e.to_string())?, &p.mixing)
            .map_err(|e| e.to_string())?;
        if z.values() != y.values() {
            return Err(format!("mrmc != mix_rows . mix_columns for state {k}"));
        }
    }
    Ok(format!("{states} states, v = {}", p.v))
}

fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, m as i128, a as i128);
    while nr != 0 {
        let k = r / nr;
        (t, nt) = (nt, t - k * nt);
        (r, nr) = (nr, r - k * nr);
    }
    (r == 1).then(|| t.rem_euclid(m as i128) as u64)
}

fn pow_mod(q: Modulus, mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = q.mul(acc, b);
        }
        b = q.square(b);
        e >>= 1;
    }
    acc
}

/// Exhaustive for small moduli; otherwise the inverse exponent is checked on
/// random points. Returns `None` when the cube is not expected to permute.
pub fn cube_permutation(q: Modulus, samples: usize) -> Option<Outcome> {
    if !q.cube_is_permutation() {
        return None;
    }
    let qv = q.value();
    if qv <= 1 << 22 {
        let mut seen = vec![false; qv as usize];
        for x in 0..qv {
            let y = q.cube(x) as usize;
            if seen[y] {
                return Some(Err(format!("{y} has two cube roots")));
            }
            seen[y] = true;
        }
        return Some(Ok(format!("bijective on all {qv} elements")));
    }
    let d = inverse_mod(3, qv - 1).expect("gcd checked");
    let mut s = rng(b"cube");
    for _ in 0..samples {
        let x = random_below(&mut s, qv);
        if pow_mod(q, q.cube(x), d) != x {
            return Some(Err(format!("x = {x} not recovered by the inverse exponent")));
        }
    }
    Some(Ok(format!("inverse exponent {d} verified on {samples} points")))
}

/// Simulates every design point on random keys and nonces and compares the
/// outputs with the scalar model.
pub fn differential(p: &CipherParams, trials: usize) -> Outcome {
    let cipher = Cipher::new(p.clone()).map_err(|e| e.to_string())?;
    let mut s = rng(b"differential");
    for v in [Variant::D1Baseline, Variant::D2Decoupled, Variant::D3Full] {
        let cfg = HwConfig::new(v, p.clone());
        for _ in 0..trials {
            let mut seed = [0u8; 16];
            let mut nonce = [0u8; 7];
            seed.iter_mut().chain(nonce.iter_mut()).for_each(|b| *b = s.next_bits(8) as u8);
            let key = Key::derive(&seed, p).map_err(|e| e.to_string())?;
            let (_, trace) = simulate(&cfg, &key, &nonce, 1).map_err(|e| format!("{v}: {e}"))?;
            let gold = (0..cfg.lanes as u64)
                .map(|g| cipher.keystream(&key, &nonce, g).map(|k| k.values))
                .collect::<crate::Result<Vec<_>>>()
                .map_err(|e| e.to_string())?;
            verify_trace(&trace, &gold).map_err(|e| format!("{v}: {e}"))?;
        }
    }
    Ok(format!("{trials} trials on each of d1, d2, d3"))
}

/// Chi-square p-value of `draws` uniform samples over `Z_q` (zero allowed).
pub fn uniform_chi_square(q: Modulus, draws: usize, label: &[u8]) -> crate::Result<f64> {
    let mut sm = UniformSampler::new(xof_init(label, DomainTag::RoundConstants)?, q, false);
    let mut counts = vec![0u64; q.value() as usize];
    for _ in 0..draws {
        counts[sm.sample()?.value() as usize] += 1;
    }
    let e = draws as f64 / q.value() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((q.value() - 1) as f64).expect("positive dof");
    Ok(1.0 - dist.cdf(stat))
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianFit {
    pub l1: f64,
    /// Expected L1 distance of an exact sampler at this draw count.
    pub l1_noise_floor: f64,
    pub mean: f64,
    pub stats: SamplerStats,
}

pub fn gaussian_fit(sigma: f64, tail: u32, precision: u32, draws: usize, label: &[u8]) -> crate::Result<GaussianFit> {
    let table = build_cdf_table(sigma, precision, tail)?;
    let mut src = xof_init(label, DomainTag::Noise)?;
    let mut stats = SamplerStats::default();
    let mut counts = vec![0u64; 2 * tail as usize + 1];
    let mut sum = 0i64;
    for _ in 0..draws {
        let x = sample_discrete_gaussian(&mut src as &mut dyn BitSource, &table, &mut stats);
        sum += x;
        counts[(x + tail as i64) as usize] += 1;
    }
    let pmf = analytic_pmf(sigma, tail);
    let n = draws as f64;
    let l1 = counts.iter().zip(&pmf).map(|(&c, &p)| (c as f64 / n - p).abs()).sum();
    let floor = pmf.iter().map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt()).sum();
    Ok(GaussianFit { l1, l1_noise_floor: floor, mean: sum as f64 / n, stats })
}

pub fn sampler_statistics(p: &CipherParams, opts: &SelftestOptions) -> Outcome {
    let q17 = Modulus::new(17).expect("prime");
    let pv = uniform_chi_square(q17, opts.uniform_draws, b"selftest").map_err(|e| e.to_string())?;
    if pv <= 0.01 {
        return Err(format!("uniform chi-square p = {pv:.4}"));
    }
    let Some(sigma) = p.sigma else {
        return Ok(format!("uniform p = {pv:.3}; no noise for this scheme"));
    };
    let fit = gaussian_fit(sigma, p.tail_cut, p.precision_bits(), opts.gaussian_draws, b"selftest")
        .map_err(|e| e.to_string())?;
    let n = opts.gaussian_draws as f64;
    if fit.l1 > 3.0 * fit.l1_noise_floor {
        return Err(format!("gaussian L1 {:.2e} above 3x noise floor {:.2e}", fit.l1, fit.l1_noise_floor));
    }
    if fit.mean.abs() > 4.0 * sigma / n.sqrt() {
        return Err(format!("gaussian mean {:.4} too far from 0", fit.mean));
    }
    Ok(format!("uniform p = {pv:.3}; gaussian L1 {:.2e}, mean {:+.4}", fit.l1, fit.mean))
}

pub fn run_selftest(p: &CipherParams, opts: &SelftestOptions) -> Vec<SuiteResult> {
    vec![
        timed("ring-laws", || from_outcome(ring_laws(p.q, opts.states * 10))),
        timed("mrmc-transpose", || from_outcome(mrmc_suite(p, opts.states))),
        timed("cube-permutation", || match cube_permutation(p.q, opts.states) {
            Some(o) => from_outcome(o),
            None => SuiteStatus::Skip(format!("expected: gcd(3, {} - 1) != 1", p.q)),
        }),
        timed("differential-traces", || from_outcome(differential(p, opts.trials))),
        timed("sampler-statistics", || from_outcome(sampler_statistics(p, opts))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SelftestOptions {
        SelftestOptions { trials: 1, states: 50, uniform_draws: 20_000, gaussian_draws: 20_000 }
    }

    #[test]
    fn defaults_pass() {
        for p in [CipherParams::hera_par128a(), CipherParams::rubato_par128l()] {
            let res = run_selftest(&p, &quick());
            assert!(all_ok(&res), "{res:?}");
        }
    }

    #[test]
    fn mixing_typo_is_caught() {
        let mut p = CipherParams::rubato_par128l();
        let mut rows = p.mixing.rows().to_vec();
        rows[2][5] = 9;
        p.mixing = MixingMatrix::new(rows).unwrap();
        assert!(mrmc_suite(&p, 10).is_err());
    }

    #[test]
    fn cube_skip_when_not_permutation() {
        assert!(cube_permutation(Modulus::new(13).unwrap(), 10).is_none());
        assert!(cube_permutation(Modulus::new(17).unwrap(), 10).unwrap().is_ok());
        assert!(cube_permutation(Modulus::new(crate::cipher::HERA_DEFAULT_Q).unwrap(), 100).unwrap().is_ok());
    }

    #[test]
    fn inverse_exponent() {
        assert_eq!(inverse_mod(3, 16), Some(11));
        assert_eq!(inverse_mod(3, 12), None);
    }
}
