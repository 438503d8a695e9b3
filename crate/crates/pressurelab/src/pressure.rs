//! Partition sums over admissible words, certified pressure brackets, the
//! finite-level pressure estimator, pressure curves and kink detection.
//!
//! Enumeration walks the prefix tree depth-first in lexicographic order,
//! carrying the running product in renormalized form (unit-norm matrix plus
//! a log-scale accumulator) so entries never overflow. Leaf log-norms are
//! reduced with the fixed pairwise tree from [`crate::numeric`], and work
//! may be partitioned by word prefix across threads without changing a
//! single bit of the output.

use crate::error::{Error, Result};
use crate::matrix::{bridge_count_bound, mat_mul, H2Witness, MatrixFamily};
use crate::numeric::{fmt12, log_sum_exp_scaled, EvalOptions};
use crate::sft::SubshiftSpec;

/// Hard cap on enumerated words per level.
pub const ENUM_BUDGET: u64 = 1 << 25;

/// `s_n(q)` in log form, together with the census of vanishing products.
/// For `q < 0` the sum runs over the nonzero products only.
#[derive(Clone, Debug)]
pub struct PartitionSum {
    pub n: usize,
    pub q: f64,
    pub log_value: f64,
    pub restricted: bool,
    pub zero_count: u64,
}

/// How a pressure value was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Enumeration,
    IntegerOracle,
    ClosedFormDemo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Enumeration => "enumeration",
            Method::IntegerOracle => "integer_oracle",
            Method::ClosedFormDemo => "closed_form_demo",
        }
    }
}

/// A pressure value with optional certified bracket. `n_used` is the
/// enumeration level (0 when no enumeration was involved).
#[derive(Clone, Debug)]
pub struct PressureResult {
    pub q: f64,
    pub estimate: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub n_used: usize,
    pub method: Method,
}

/// Leaf log-norms of all nonzero products at one level, in lexicographic
/// word order.
#[derive(Clone, Debug, PartialEq)]
pub struct NormCache {
    pub n: usize,
    log_norms: Vec<f64>,
    pub zero_words: u64,
    pub total_words: u64,
}

impl NormCache {
    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    pub fn nonzero_words(&self) -> u64 {
        self.log_norms.len() as u64
    }

    pub fn max_log_norm(&self) -> Option<f64> {
        if self.log_norms.is_empty() {
            None
        } else {
            Some(
                self.log_norms
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        }
    }

    pub fn min_log_norm(&self) -> Option<f64> {
        if self.log_norms.is_empty() {
            None
        } else {
            Some(self.log_norms.iter().cloned().fold(f64::INFINITY, f64::min))
        }
    }

    /// `log s_n(q)`; error when every product vanishes.
    pub fn log_partition_sum(&self, q: f64, threads: usize) -> Result<f64> {
        if self.log_norms.is_empty() {
            return Err(Error::Degenerate(format!(
                "all {} admissible products vanish at length {}",
                self.total_words, self.n
            )));
        }
        Ok(log_sum_exp_scaled(&self.log_norms, q, threads))
    }
}

// ---------------------------------------------------------------------------
// Depth-first enumeration of renormalized products.

trait LeafSink {
    fn nonzero(&mut self, code: u64, log_norm: f64);
    /// Every length-n word descending from `code` (which has `remaining`
    /// symbols yet to be chosen, the last chosen being `last`) has a
    /// vanishing product.
    fn zero_subtree(&mut self, code: u64, last: u8, remaining: usize);
}

struct SumSink {
    out: Vec<f64>,
    zeros: u64,
    cont: Vec<Vec<u64>>,
}

impl LeafSink for SumSink {
    fn nonzero(&mut self, _code: u64, log_norm: f64) {
        self.out.push(log_norm);
    }
    fn zero_subtree(&mut self, _code: u64, last: u8, remaining: usize) {
        self.zeros += self.cont[last as usize][remaining];
    }
}

struct TableSink<'s> {
    spec: &'s SubshiftSpec,
    codes: Vec<u64>,
    logs: Vec<f64>,
    zeros: u64,
}

impl LeafSink for TableSink<'_> {
    fn nonzero(&mut self, code: u64, log_norm: f64) {
        self.codes.push(code);
        self.logs.push(log_norm);
    }
    fn zero_subtree(&mut self, code: u64, last: u8, remaining: usize) {
        if remaining == 0 {
            self.codes.push(code);
            self.logs.push(f64::NEG_INFINITY);
            self.zeros += 1;
            return;
        }
        let m = self.spec.m() as u64;
        for j in self.spec.successors(last).collect::<Vec<_>>() {
            self.zero_subtree(code * m + j as u64, j, remaining - 1);
        }
    }
}

struct Walker<'f, S: LeafSink> {
    fam: &'f MatrixFamily,
    n: usize,
    k: usize,
    m: u64,
    mats: Vec<Vec<f64>>, // one unit-norm product per level
    logs: Vec<f64>,
    syms: Vec<u8>,
    sink: S,
    // extension scan state (depth > 1 only)
    best: f64,
    any: bool,
}

impl<'f, S: LeafSink> Walker<'f, S> {
    fn new(fam: &'f MatrixFamily, n: usize, sink: S) -> Self {
        let k = fam.depth();
        let d = fam.d();
        let levels = n + k;
        Walker {
            fam,
            n,
            k,
            m: fam.spec().m() as u64,
            mats: vec![vec![0.0; d * d]; levels],
            logs: vec![0.0; levels],
            syms: Vec::with_capacity(levels),
            sink,
            best: f64::NEG_INFINITY,
            any: false,
        }
    }

    fn reset(&mut self) {
        let d = self.fam.d();
        self.syms.clear();
        self.mats[0].fill(0.0);
        for i in 0..d {
            self.mats[0][i * d + i] = 1.0;
        }
        self.logs[0] = 0.0;
    }

    /// Push symbol `j` at position `level`; returns false if the running
    /// product vanished (the symbol stays pushed, callers must `retreat`).
    #[inline]
    fn advance(&mut self, level: usize, j: u8) -> bool {
        self.syms.push(j);
        let lev1 = level + 1;
        if lev1 >= self.k {
            let fam = self.fam;
            let d = fam.d();
            let window = &self.syms[lev1 - self.k..lev1];
            let factor = fam.factor(window);
            let (head, tail) = self.mats.split_at_mut(lev1);
            mat_mul(&head[level], factor.entries(), &mut tail[0], d);
            let nb: f64 = tail[0].iter().sum();
            if nb == 0.0 {
                return false;
            }
            let inv = 1.0 / nb;
            for x in tail[0].iter_mut() {
                *x *= inv;
            }
            self.logs[lev1] = self.logs[level] + nb.ln();
        } else {
            let (head, tail) = self.mats.split_at_mut(lev1);
            tail[0].copy_from_slice(&head[level]);
            self.logs[lev1] = self.logs[level];
        }
        true
    }

    #[inline]
    fn retreat(&mut self) {
        self.syms.pop();
    }

    fn run_prefix(&mut self, prefix: &[u8]) {
        self.reset();
        for (pos, &j) in prefix.iter().enumerate() {
            if !self.advance(pos, j) {
                // every completion of this prefix vanishes
                let code = prefix.iter().fold(0u64, |a, &s| a * self.m + s as u64);
                self.sink.zero_subtree(
                    code,
                    *prefix.last().expect("nonempty prefix"),
                    self.n - prefix.len(),
                );
                return;
            }
        }
        let code = prefix.iter().fold(0u64, |a, &s| a * self.m + s as u64);
        self.walk_word(prefix.len(), code);
    }

    fn walk_word(&mut self, level: usize, code: u64) {
        if level == self.n {
            self.leaf(code);
            return;
        }
        let m = self.fam.spec().m() as u8;
        let remaining = self.n - level - 1;
        if level == 0 {
            for j in 0..m {
                self.visit(level, j, code, remaining);
            }
        } else {
            let last = self.syms[level - 1];
            for j in 0..m {
                if self.fam.spec().allowed(last, j) {
                    self.visit(level, j, code, remaining);
                }
            }
        }
    }

    #[inline]
    fn visit(&mut self, level: usize, j: u8, code: u64, remaining: usize) {
        let child = code * self.m + j as u64;
        if self.advance(level, j) {
            self.walk_word(level + 1, child);
        } else {
            self.sink.zero_subtree(child, j, remaining);
        }
        self.retreat();
    }

    fn leaf(&mut self, code: u64) {
        if self.k == 1 {
            let log = self.logs[self.n];
            self.sink.nonzero(code, log);
            return;
        }
        self.best = f64::NEG_INFINITY;
        self.any = false;
        self.walk_ext(self.n);
        if self.any {
            let best = self.best;
            self.sink.nonzero(code, best);
        } else {
            let last = self.syms[self.n - 1];
            self.sink.zero_subtree(code, last, 0);
        }
    }

    fn walk_ext(&mut self, level: usize) {
        if level == self.n + self.k - 1 {
            self.any = true;
            if self.logs[level] > self.best {
                self.best = self.logs[level];
            }
            return;
        }
        let m = self.fam.spec().m() as u8;
        let last = self.syms[level - 1];
        for j in 0..m {
            if self.fam.spec().allowed(last, j) {
                if self.advance(level, j) {
                    self.walk_ext(level + 1);
                }
                self.retreat();
            }
        }
    }
}

fn check_budget(fam: &MatrixFamily, n: usize) -> Result<u64> {
    let total = fam.spec().word_count(n)?;
    if total > ENUM_BUDGET {
        return Err(Error::SizeGuard(format!(
            "Σ_A,{n} has {total} words, budget is {ENUM_BUDGET}"
        )));
    }
    Ok(total)
}

/// Contiguous prefix chunks for static work splitting. Depth 0 (one empty
/// prefix) when a single thread is requested.
fn partition_prefixes(spec: &SubshiftSpec, n: usize, threads: usize) -> Vec<Vec<u8>> {
    if threads <= 1 || n < 2 {
        return vec![Vec::new()];
    }
    let want = 16 * threads as u64;
    let mut depth = 1usize;
    while depth < n.min(8) && spec.word_count(depth).unwrap_or(u64::MAX) < want {
        depth += 1;
    }
    spec.words(depth)
        .expect("depth ≥ 1")
        .map(|w| w.symbols().to_vec())
        .collect()
}

/// Enumerate nonzero leaf log-norms at level `n` in lexicographic order.
pub fn build_norm_cache(fam: &MatrixFamily, n: usize, opts: &EvalOptions) -> Result<NormCache> {
    if n == 0 {
        return Err(Error::Input("level n must be at least 1".into()));
    }
    let total_words = check_budget(fam, n)?;
    let threads = opts.threads.max(1);
    let prefixes = partition_prefixes(fam.spec(), n, threads);
    let chunk_size = prefixes.len().div_ceil(threads);
    let chunks: Vec<&[Vec<u8>]> = prefixes.chunks(chunk_size.max(1)).collect();

    let run_chunk = |chunk: &[Vec<u8>]| -> (Vec<f64>, u64) {
        let sink = SumSink {
            out: Vec::new(),
            zeros: 0,
            cont: fam.spec().continuation_counts(n),
        };
        let mut walker = Walker::new(fam, n, sink);
        for prefix in chunk {
            walker.run_prefix(prefix);
        }
        (walker.sink.out, walker.sink.zeros)
    };

    let results: Vec<(Vec<f64>, u64)> = if chunks.len() == 1 {
        vec![run_chunk(chunks[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| scope.spawn(move || run_chunk(chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect()
        })
    };

    let mut log_norms = Vec::new();
    let mut zero_words = 0u64;
    for (part, zeros) in results {
        log_norms.extend(part);
        zero_words += zeros;
    }
    Ok(NormCache {
        n,
        log_norms,
        zero_words,
        total_words,
    })
}

/// Enumerate all admissible words at level `n` as packed codes with their
/// log-norms (`−∞` marks a vanished product). Lexicographic order.
pub(crate) fn build_full_table(
    fam: &MatrixFamily,
    n: usize,
    opts: &EvalOptions,
) -> Result<(Vec<u64>, Vec<f64>, u64)> {
    if n == 0 {
        return Err(Error::Input("level n must be at least 1".into()));
    }
    check_budget(fam, n)?;
    let threads = opts.threads.max(1);
    let prefixes = partition_prefixes(fam.spec(), n, threads);
    let chunk_size = prefixes.len().div_ceil(threads);
    let chunks: Vec<&[Vec<u8>]> = prefixes.chunks(chunk_size.max(1)).collect();

    let run_chunk = |chunk: &[Vec<u8>]| -> (Vec<u64>, Vec<f64>, u64) {
        let sink = TableSink {
            spec: fam.spec(),
            codes: Vec::new(),
            logs: Vec::new(),
            zeros: 0,
        };
        let mut walker = Walker::new(fam, n, sink);
        for prefix in chunk {
            walker.run_prefix(prefix);
        }
        (walker.sink.codes, walker.sink.logs, walker.sink.zeros)
    };

    let results: Vec<(Vec<u64>, Vec<f64>, u64)> = if chunks.len() == 1 {
        vec![run_chunk(chunks[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| scope.spawn(move || run_chunk(chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect()
        })
    };

    let mut codes = Vec::new();
    let mut logs = Vec::new();
    let mut zeros = 0u64;
    for (c, l, z) in results {
        codes.extend(c);
        logs.extend(l);
        zeros += z;
    }
    Ok((codes, logs, zeros))
}

// ---------------------------------------------------------------------------
// Partition sums and certified bounds.

pub fn partition_sum(
    fam: &MatrixFamily,
    n: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<PartitionSum> {
    let cache = build_norm_cache(fam, n, opts)?;
    partition_sum_from_cache(&cache, q, opts)
}

pub fn partition_sum_from_cache(
    cache: &NormCache,
    q: f64,
    opts: &EvalOptions,
) -> Result<PartitionSum> {
    let log_value = cache.log_partition_sum(q, opts.threads)?;
    Ok(PartitionSum {
        n: cache.n,
        q,
        log_value,
        restricted: q < 0.0,
        zero_count: cache.zero_words,
    })
}

/// `(1/n)·log s_n(q)`: an upper bound for every `n` since `log s_n` is
/// subadditive in `n` for `q > 0`.
pub fn pressure_upper(fam: &MatrixFamily, n: usize, q: f64, opts: &EvalOptions) -> Result<f64> {
    if q <= 0.0 {
        return Err(Error::Precondition(format!(
            "upper bound needs q > 0, got {q}"
        )));
    }
    if !fam.spec().is_primitive().0 {
        return Err(Error::Precondition(
            "upper bound requires a primitive transition matrix".into(),
        ));
    }
    let cache = build_norm_cache(fam, n, opts)?;
    Ok(cache.log_partition_sum(q, opts.threads)? / n as f64)
}

/// Certified lower bound from gluing copies of the best word at level `n`.
/// Returns `None` (vacuous) when the glued growth factor is below 1.
pub fn pressure_lower(
    fam: &MatrixFamily,
    witness: &H2Witness,
    n: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<Option<f64>> {
    if !witness.satisfied {
        return Err(Error::Precondition(
            "lower bound requires a satisfied bridging witness".into(),
        ));
    }
    if q <= 0.0 {
        return Err(Error::Precondition(format!(
            "lower bound needs q > 0, got {q}"
        )));
    }
    let cache = build_norm_cache(fam, n, opts)?;
    let max_log = cache
        .max_log_norm()
        .ok_or_else(|| Error::Degenerate(format!("all products vanish at length {n}")))?;
    Ok(lower_from_max(witness, fam.spec().m(), n, q, max_log))
}

fn lower_from_max(witness: &H2Witness, m: usize, n: usize, q: f64, max_log: f64) -> Option<f64> {
    let gamma = witness.b / bridge_count_bound(m, witness.r);
    let x = gamma.ln() + max_log;
    if x >= 0.0 {
        Some(q * x / (n + witness.r) as f64)
    } else {
        None
    }
}

/// Cached evaluator for the finite-level pressure estimate at one level.
///
/// The estimate is the two-step difference `(log s_n − log s_{n−2})/2`:
/// constant offsets in `log s_n` cancel exactly, period-two transients are
/// damped, and the remaining bias decays with the subdominant spectral gap.
/// One enumeration pass serves every exponent.
pub struct PressureEvaluator<'f> {
    family: &'f MatrixFamily,
    n: usize,
    threads: usize,
    hi: NormCache,
    lo: NormCache,
    max_log_norm: f64,
    witness: Option<H2Witness>,
}

impl<'f> PressureEvaluator<'f> {
    pub fn new(family: &'f MatrixFamily, n: usize, opts: &EvalOptions) -> Result<Self> {
        if n < 4 {
            return Err(Error::Input(format!(
                "estimator level n={n} must be at least 4"
            )));
        }
        let hi = build_norm_cache(family, n, opts)?;
        let max_log_norm = hi
            .max_log_norm()
            .ok_or_else(|| Error::Degenerate(format!("all products vanish at length {n}")))?;
        // A nonzero product at length n forces nonzero prefixes, so the
        // shorter cache is nonempty too.
        let lo = build_norm_cache(family, n - 2, opts)?;
        let witness = if family.depth() == 1 {
            let w = family.check_h2(family.default_h2_horizon())?;
            w.satisfied.then_some(w)
        } else {
            None
        };
        Ok(PressureEvaluator {
            family,
            n,
            threads: opts.threads.max(1),
            hi,
            lo,
            max_log_norm,
            witness,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &MatrixFamily {
        self.family
    }

    pub fn witness(&self) -> Option<&H2Witness> {
        self.witness.as_ref()
    }

    pub fn cache(&self) -> &NormCache {
        &self.hi
    }

    pub fn estimate(&self, q: f64) -> f64 {
        let hi = self
            .hi
            .log_partition_sum(q, self.threads)
            .expect("cache nonempty");
        let lo = self
            .lo
            .log_partition_sum(q, self.threads)
            .expect("cache nonempty");
        (hi - lo) / 2.0
    }

    pub fn upper(&self, q: f64) -> Option<f64> {
        if q > 0.0 {
            Some(
                self.hi
                    .log_partition_sum(q, self.threads)
                    .expect("cache nonempty")
                    / self.n as f64,
            )
        } else {
            None
        }
    }

    pub fn lower(&self, q: f64) -> Option<f64> {
        if q <= 0.0 {
            return None;
        }
        let w = self.witness.as_ref()?;
        lower_from_max(w, self.family.spec().m(), self.n, q, self.max_log_norm)
    }

    pub fn result(&self, q: f64) -> PressureResult {
        PressureResult {
            q,
            estimate: self.estimate(q),
            lower: self.lower(q),
            upper: self.upper(q),
            n_used: self.n,
            method: Method::Enumeration,
        }
    }
}

pub fn pressure_estimate(
    fam: &MatrixFamily,
    n: usize,
    q: f64,
    opts: &EvalOptions,
) -> Result<PressureResult> {
    Ok(PressureEvaluator::new(fam, n, opts)?.result(q))
}

/// Evaluate the estimator over a strictly increasing grid, reusing one
/// enumeration pass for every point.
pub fn pressure_curve(
    fam: &MatrixFamily,
    q_grid: &[f64],
    n: usize,
    opts: &EvalOptions,
) -> Result<Vec<PressureResult>> {
    if q_grid.is_empty() {
        return Err(Error::Input("empty q grid".into()));
    }
    if q_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("q grid must be strictly increasing".into()));
    }
    let eval = PressureEvaluator::new(fam, n, opts)?;
    Ok(q_grid.iter().map(|&q| eval.result(q)).collect())
}

/// A detected slope discontinuity on a sampled pressure curve.
#[derive(Clone, Copy, Debug)]
pub struct Kink {
    pub q: f64,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl Kink {
    pub fn jump(&self) -> f64 {
        self.right_slope - self.left_slope
    }
}

/// One-sided finite-difference slopes at interior grid points; reports the
/// points where the slopes disagree by more than `jump_threshold`. The grid
/// must be uniform with at least 5 points.
pub fn detect_kink(curve: &[PressureResult], jump_threshold: f64) -> Result<Vec<Kink>> {
    if curve.len() < 5 {
        return Err(Error::Input(format!(
            "kink detection needs at least 5 grid points, got {}",
            curve.len()
        )));
    }
    let h = curve[1].q - curve[0].q;
    if h <= 0.0 {
        return Err(Error::Input("q grid must be increasing".into()));
    }
    for w in curve.windows(2) {
        let step = w[1].q - w[0].q;
        if (step - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Input("kink detection needs a uniform grid".into()));
        }
    }
    let mut out = Vec::new();
    for i in 1..curve.len() - 1 {
        let left = (curve[i].estimate - curve[i - 1].estimate) / h;
        let right = (curve[i + 1].estimate - curve[i].estimate) / h;
        if (right - left).abs() > jump_threshold {
            out.push(Kink {
                q: curve[i].q,
                left_slope: left,
                right_slope: right,
            });
        }
    }
    Ok(out)
}

/// `q,n,estimate,lower,upper,method` with 12 significant digits and empty
/// fields for absent bounds. Byte-stable across runs and thread counts.
pub fn curve_to_csv(curve: &[PressureResult]) -> String {
    let mut s = String::from("q,n,estimate,lower,upper,method\n");
    for r in curve {
        let lower = r.lower.map(fmt12).unwrap_or_default();
        let upper = r.upper.map(fmt12).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt12(r.q),
            r.n_used,
            fmt12(r.estimate),
            lower,
            upper,
            r.method.as_str()
        ));
    }
    s
}
