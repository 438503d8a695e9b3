//! Finite-level cylinder measures, their marginals, Gibbs-property and
//! quasi-Bernoulli diagnostics, shift-invariance defect, and exact seeded
//! sampling.
//!
//! Tables store packed word codes (base-m, most significant symbol first)
//! so that numeric order coincides with lexicographic word order, and
//! marginalization is a single in-order pass. Deep tables are folded down
//! one level at a time, each parent summing its children in symbol order;
//! folding N→n and then n→n′ therefore performs the exact same float
//! additions as folding N→n′ directly, making marginal consistency
//! bit-exact rather than approximate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::MatrixFamily;
use crate::numeric::{fmt12, log_sum_exp_scaled, pairwise_sum, percentile_sorted, EvalOptions};
use crate::pressure::build_full_table;
use crate::sft::Word;

/// Cylinder weights at one level. `source_level` records the level the
/// mass came from (`= level` for direct tables, `> level` after
/// marginalization).
#[derive(Clone, Debug)]
pub struct GibbsTable {
    pub level: usize,
    pub source_level: usize,
    pub q: f64,
    pub p_hat: Option<f64>,
    m: u64,
    codes: Vec<u64>,
    weights: Vec<f64>,
}

impl GibbsTable {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn word(&self, idx: usize) -> Word {
        unpack(self.codes[idx], self.level, self.m)
    }

    pub fn weight_by_code(&self, code: u64) -> Option<f64> {
        self.codes
            .binary_search(&code)
            .ok()
            .map(|i| self.weights[i])
    }

    pub fn weight_of(&self, word: &Word) -> Option<f64> {
        if word.len() != self.level {
            return None;
        }
        self.weight_by_code(pack(word.symbols(), self.m))
    }

    /// Pairwise-tree total of the weights (1 up to rounding).
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        (0..self.len()).map(|i| (self.word(i), self.weights[i]))
    }
}

fn pack(symbols: &[u8], m: u64) -> u64 {
    symbols.iter().fold(0u64, |acc, &s| acc * m + s as u64)
}

fn unpack(mut code: u64, len: usize, m: u64) -> Word {
    let mut syms = vec![0u8; len];
    for i in (0..len).rev() {
        syms[i] = (code % m) as u8;
        code /= m;
    }
    Word::from_symbols0(syms)
}

/// Direct level-n table: weight(I) = ‖M_I‖^q / s_n(q). Words with vanishing
/// products carry weight 0 for q ≥ 0 and are excluded entirely for q < 0.
pub fn level_weights(
    fam: &MatrixFamily,
    n: usize,
    q: f64,
    p_hat: Option<f64>,
    opts: &EvalOptions,
) -> Result<GibbsTable> {
    let (mut codes, mut logs, _zeros) = build_full_table(fam, n, opts)?;
    if q < 0.0 {
        let mut kept_codes = Vec::with_capacity(codes.len());
        let mut kept_logs = Vec::with_capacity(logs.len());
        for (c, l) in codes.iter().zip(&logs) {
            if l.is_finite() {
                kept_codes.push(*c);
                kept_logs.push(*l);
            }
        }
        codes = kept_codes;
        logs = kept_logs;
    }
    let finite: Vec<f64> = logs.iter().cloned().filter(|l| l.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Degenerate(format!(
            "all products vanish at length {n}"
        )));
    }
    let log_z = log_sum_exp_scaled(&finite, q, opts.threads.max(1));
    let weights: Vec<f64> = logs
        .iter()
        .map(|&l| {
            if l.is_finite() {
                (q * l - log_z).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(GibbsTable {
        level: n,
        source_level: n,
        q,
        p_hat,
        m: fam.spec().m() as u64,
        codes,
        weights,
    })
}

fn fold_one_level(table: &GibbsTable) -> GibbsTable {
    let m = table.m;
    let mut codes = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    while i < table.codes.len() {
        let parent = table.codes[i] / m;
        let mut acc = 0.0;
        while i < table.codes.len() && table.codes[i] / m == parent {
            acc += table.weights[i];
            i += 1;
        }
        codes.push(parent);
        weights.push(acc);
    }
    GibbsTable {
        level: table.level - 1,
        source_level: table.source_level,
        q: table.q,
        p_hat: table.p_hat,
        m,
        codes,
        weights,
    }
}

/// Marginalize a table down to `target` symbols, one level at a time.
pub fn marginalize(table: &GibbsTable, target: usize) -> Result<GibbsTable> {
    if target == 0 || target > table.level {
        return Err(Error::Input(format!(
            "cannot marginalize a level-{} table onto level {target}",
            table.level
        )));
    }
    let mut cur = table.clone();
    while cur.level > target {
        cur = fold_one_level(&cur);
    }
    Ok(cur)
}

/// ν_{N,q} marginalized onto n-cylinders.
pub fn marginal_weights(
    fam: &MatrixFamily,
    n: usize,
    source_level: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<GibbsTable> {
    if source_level <= n {
        return Err(Error::Input(format!(
            "marginal source level N={source_level} must exceed n={n}"
        )));
    }
    let deep = level_weights(fam, source_level, q, None, opts)?;
    marginalize(&deep, n)
}

/// Five-number summary of a ratio distribution.
#[derive(Clone, Debug)]
pub struct RatioDiagnostics {
    pub context: String,
    pub min_ratio: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max_ratio: f64,
    pub count: usize,
    pub excluded: u64,
}

impl RatioDiagnostics {
    fn from_values(context: String, mut values: Vec<f64>, excluded: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Degenerate(format!(
                "no ratios to summarize for {context}"
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(RatioDiagnostics {
            context,
            min_ratio: values[0],
            q25: percentile_sorted(&values, 0.25),
            median: percentile_sorted(&values, 0.5),
            q75: percentile_sorted(&values, 0.75),
            max_ratio: *values.last().expect("nonempty"),
            count: values.len(),
            excluded,
        })
    }

    /// max/min — the finite-level stand-in for C₂/C₁.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// Gibbs-property ratios `ν_N([I])·exp(n·P̂) / ‖M_I‖^q` over all n-words.
/// Words whose product vanishes are excluded (their marginal mass is zero
/// anyway for q > 0) and counted.
pub fn gibbs_ratio_diagnostics(
    fam: &MatrixFamily,
    n: usize,
    source_level: usize,
    q: f64,
    p_hat: f64,
    opts: &EvalOptions,
) -> Result<RatioDiagnostics> {
    if source_level < n + 4 {
        return Err(Error::Input(format!(
            "gibbs diagnostics want N ≥ n+4 (got n={n}, N={source_level})"
        )));
    }
    let marg = marginal_weights(fam, n, source_level, q, opts)?;
    let mut values = Vec::with_capacity(marg.len());
    let mut excluded = 0u64;
    for (word, w) in marg.entries() {
        let prod = fam.word_product(&word)?;
        if prod.is_zero {
            excluded += 1;
            continue;
        }
        let ratio = if w > 0.0 {
            (w.ln() + n as f64 * p_hat - q * prod.log_norm).exp()
        } else {
            0.0
        };
        values.push(ratio);
    }
    RatioDiagnostics::from_values(
        format!("gibbs_ratio n={n} N={source_level} q={q}"),
        values,
        excluded,
    )
}

/// Quasi-Bernoulli ratios `ν([IJ]) / (ν([I])·ν([J]))` over admissible
/// concatenations, from level-N marginals. Both returned summaries cover
/// the same ratio distribution: read the empirical upper constant off
/// `.0.max_ratio` and the lower constant off `.1.min_ratio`. Pairs whose
/// factor mass vanishes are skipped and counted.
pub fn quasi_bernoulli_diagnostics(
    fam: &MatrixFamily,
    n: usize,
    l: usize,
    source_level: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<(RatioDiagnostics, RatioDiagnostics)> {
    if source_level < n + l + 2 {
        return Err(Error::Input(format!(
            "quasi-Bernoulli diagnostics want N ≥ n+ℓ+2 (got n={n}, ℓ={l}, N={source_level})"
        )));
    }
    let deep = level_weights(fam, source_level, q, None, opts)?;
    let joint = marginalize(&deep, n + l)?;
    let first = marginalize(&joint, n)?;
    let second_full = marginalize(&deep, l)?;

    let ml = (fam.spec().m() as u64).pow(l as u32);
    let mut values = Vec::with_capacity(joint.len());
    let mut excluded = 0u64;
    for i in 0..joint.len() {
        let code = joint.codes[i];
        let w_ij = joint.weights[i];
        let w_i = first.weight_by_code(code / ml).unwrap_or(0.0);
        let w_j = second_full.weight_by_code(code % ml).unwrap_or(0.0);
        if w_i <= 0.0 || w_j <= 0.0 {
            excluded += 1;
            continue;
        }
        values.push(w_ij / (w_i * w_j));
    }
    let upper = RatioDiagnostics::from_values(
        format!("quasi_bernoulli_upper n={n} l={l} N={source_level} q={q}"),
        values.clone(),
        excluded,
    )?;
    let lower = RatioDiagnostics::from_values(
        format!("quasi_bernoulli_lower n={n} l={l} N={source_level} q={q}"),
        values,
        excluded,
    )?;
    Ok((upper, lower))
}

/// `max_I |ν_N(σ⁻¹[I]) − ν_N([I])|` over n-words, where the preimage mass
/// sums the level-(n+1) marginals of `jI`.
pub fn shift_invariance_defect(
    fam: &MatrixFamily,
    n: usize,
    source_level: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<f64> {
    if source_level < n + 2 {
        return Err(Error::Input(format!(
            "shift defect wants N ≥ n+2 (got n={n}, N={source_level})"
        )));
    }
    let deep = level_weights(fam, source_level, q, None, opts)?;
    let one_up = marginalize(&deep, n + 1)?;
    let base = marginalize(&one_up, n)?;

    let m = fam.spec().m();
    let mn = (m as u64).pow(n as u32);
    let mut defect: f64 = 0.0;
    for i in 0..base.len() {
        let code = base.codes[i];
        let first_sym = base.word(i).symbols()[0];
        let mut pre = 0.0;
        for j in 0..m as u8 {
            if fam.spec().allowed(j, first_sym) {
                pre += one_up.weight_by_code(j as u64 * mn + code).unwrap_or(0.0);
            }
        }
        defect = defect.max((pre - base.weights[i]).abs());
    }
    Ok(defect)
}

/// Draw `count` words from the exact level-n table by cumulative-weight
/// inversion over lexicographically ordered words. Identical seeds give
/// identical output; words with zero weight are outside the support.
pub fn sample_words(
    fam: &MatrixFamily,
    n: usize,
    q: f64,
    count: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<Vec<Word>> {
    if count == 0 {
        return Err(Error::Input("sample count must be at least 1".into()));
    }
    let table = level_weights(fam, n, q, None, opts)?;
    let mut codes = Vec::new();
    let mut cum = Vec::new();
    let mut acc = 0.0;
    for i in 0..table.len() {
        if table.weights[i] > 0.0 {
            acc += table.weights[i];
            codes.push(table.codes[i]);
            cum.push(acc);
        }
    }
    if codes.is_empty() {
        return Err(Error::Degenerate("sampling support is empty".into()));
    }
    let total = *cum.last().expect("nonempty support");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cum.partition_point(|&c| c <= u).min(codes.len() - 1);
        out.push(unpack(codes[idx], n, table.m));
    }
    Ok(out)
}

/// Sample statistics of the per-symbol log-norm `(1/n)·log‖M_J‖`.
#[derive(Clone, Copy, Debug)]
pub struct LyapunovStats {
    pub mean: f64,
    pub stddev: f64,
    /// Words with vanishing products, excluded from the statistics.
    pub excluded: usize,
}

pub fn empirical_lyapunov(fam: &MatrixFamily, words: &[Word]) -> Result<LyapunovStats> {
    if words.is_empty() {
        return Err(Error::Input("empty sample".into()));
    }
    let n = words[0].len();
    if n == 0 || words.iter().any(|w| w.len() != n) {
        return Err(Error::Input(
            "sample words must share one positive length".into(),
        ));
    }
    let mut xs = Vec::with_capacity(words.len());
    let mut excluded = 0usize;
    for w in words {
        let p = fam.word_product(w)?;
        if p.is_zero {
            excluded += 1;
        } else {
            xs.push(p.log_norm / n as f64);
        }
    }
    if xs.is_empty() {
        return Err(Error::Degenerate("every sampled product vanished".into()));
    }
    let mean = pairwise_sum(&xs) / xs.len() as f64;
    let stddev = if xs.len() > 1 {
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&sq) / (xs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovStats {
        mean,
        stddev,
        excluded,
    })
}

/// `word,weight` rows in lexicographic order with a trailing checksum row
/// carrying the pairwise-tree total.
pub fn table_to_csv(table: &GibbsTable) -> String {
    let mut s = String::from("word,weight\n");
    for (word, w) in table.entries() {
        s.push_str(&format!("{word},{}\n", fmt12(w)));
    }
    s.push_str(&format!("sum,{}\n", fmt12(table.total())));
    s
}

/// `context,min,q25,median,q75,max,count` rows.
pub fn diagnostics_to_csv(diags: &[RatioDiagnostics]) -> String {
    let mut s = String::from("context,min,q25,median,q75,max,count\n");
    for d in diags {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.context,
            fmt12(d.min_ratio),
            fmt12(d.q25),
            fmt12(d.median),
            fmt12(d.q75),
            fmt12(d.max_ratio),
            d.count
        ));
    }
    s
}
