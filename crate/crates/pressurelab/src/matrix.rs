//! Non-negative matrix families over a subshift: the entry-sum norm,
//! renormalized word products, the bridging irreducibility check with its
//! witness constant, and the locally-constant distortion diagnostic.
//!
//! A family attaches one d×d matrix to every admissible word of a fixed
//! depth k. Depth 1 is the constant-per-symbol case; larger depths model
//! matrix functions that are locally constant on k-cylinders. Products over
//! an n-cylinder then depend on k−1 extension symbols, and `word_product`
//! maximizes the norm over all admissible extensions, so per-cylinder
//! partition terms are exact suprema.

use crate::error::{Error, Result};
use crate::sft::{SubshiftSpec, Word};

/// Dense row-major d×d matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    d: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(d: usize) -> Mat {
        Mat {
            d,
            a: vec![0.0; d * d],
        }
    }

    pub fn identity(d: usize) -> Mat {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Input("matrix must have at least one row".into()));
        }
        let mut a = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Input(format!(
                    "matrix row {} has {} entries, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::Input(format!(
                        "non-finite entry in matrix row {}",
                        i + 1
                    )));
                }
                a.push(x);
            }
        }
        Ok(Mat { d, a })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.a[i * self.d + j] = x;
    }

    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    /// The entry-sum norm `1ᵀB1`.
    pub fn norm(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.a.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.d);
        mat_mul(&self.a, &rhs.a, &mut out.a, self.d);
        out
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat {
            d: self.d,
            a: self.a.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Mat) {
        for (x, y) in self.a.iter_mut().zip(&rhs.a) {
            *x += y;
        }
    }

    /// Kronecker product; the result is (d·d')×(d·d').
    pub fn kron(&self, rhs: &Mat) -> Mat {
        let (da, db) = (self.d, rhs.d);
        let d = da * db;
        let mut out = Mat::zeros(d);
        for i in 0..da {
            for j in 0..da {
                let x = self.get(i, j);
                if x == 0.0 {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.a[(i * db + k) * d + (j * db + l)] = x * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }
}

#[inline]
pub(crate) fn mat_mul(a: &[f64], b: &[f64], out: &mut [f64], d: usize) {
    out.fill(0.0);
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if x == 0.0 {
                continue;
            }
            let row = &b[k * d..(k + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (o, &y) in dst.iter_mut().zip(row) {
                *o += x * y;
            }
        }
    }
}

/// A word product in renormalized form: the actual product is
/// `exp(log_norm) · unit` with `‖unit‖ = 1`, unless `is_zero` is set, in
/// which case the product vanishes exactly. Vanishing is tracked by flag
/// rather than `log_norm = −∞` so that restricted sums over nonzero
/// products stay set-exact.
#[derive(Clone, Debug)]
pub struct NormalizedProduct {
    pub log_norm: f64,
    pub unit: Mat,
    pub is_zero: bool,
}

impl NormalizedProduct {
    fn zero(d: usize) -> Self {
        NormalizedProduct {
            log_norm: 0.0,
            unit: Mat::zeros(d),
            is_zero: true,
        }
    }
}

/// Witness for the bridging irreducibility condition: for every symbol pair
/// the sum of matrix products over connecting words of length ≤ r is
/// entrywise positive. `b` is the minimal entry of those bridged sums
/// normalized by the bridge-count bound `Σ_{k≤r} m^k`; the normalized form
/// keeps the derived gluing constants conservative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Witness {
    pub r: usize,
    pub b: f64,
    pub satisfied: bool,
}

/// `Σ_{k=1}^{r} m^k`, the number of candidate bridges up to length r.
pub(crate) fn bridge_count_bound(m: usize, r: usize) -> f64 {
    let mf = m as f64;
    let mut total = 0.0;
    let mut pw = 1.0;
    for _ in 0..r {
        pw *= mf;
        total += pw;
    }
    total
}

/// A family of non-negative d×d matrices attached to the admissible words
/// of a fixed depth over a subshift.
#[derive(Clone, Debug)]
pub struct MatrixFamily {
    spec: SubshiftSpec,
    d: usize,
    depth: usize,
    codes: Vec<u64>, // admissible depth-words, packed base-m, lex-sorted
    mats: Vec<Mat>,  // aligned with codes
    positive: bool,
}

fn pack(symbols: &[u8], m: usize) -> u64 {
    symbols
        .iter()
        .fold(0u64, |acc, &s| acc * m as u64 + s as u64)
}

impl MatrixFamily {
    /// Constant-per-symbol family (depth 1); `mats[i]` attaches to symbol
    /// `i+1`.
    pub fn depth1(spec: SubshiftSpec, mats: Vec<Mat>) -> Result<Self> {
        if mats.len() != spec.m() {
            return Err(Error::Input(format!(
                "expected {} matrices (one per symbol), got {}",
                spec.m(),
                mats.len()
            )));
        }
        let table = mats
            .into_iter()
            .enumerate()
            .map(|(i, m)| (Word::from_symbols0(vec![i as u8]), m))
            .collect();
        Self::new(spec, 1, table)
    }

    pub fn new(spec: SubshiftSpec, depth: usize, table: Vec<(Word, Mat)>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Input("depth must be at least 1".into()));
        }
        if table.is_empty() {
            return Err(Error::Input("matrix table is empty".into()));
        }
        let d = table[0].1.d();
        if d == 0 {
            return Err(Error::Input("matrix dimension must be at least 1".into()));
        }
        let m = spec.m();

        let mut entries: Vec<(u64, Word, Mat)> = Vec::with_capacity(table.len());
        for (w, mat) in table {
            if w.len() != depth {
                return Err(Error::Input(format!(
                    "matrix key \"{w}\" has length {}, expected depth {depth}",
                    w.len()
                )));
            }
            if !spec.is_admissible(&w)? {
                return Err(Error::Input(format!(
                    "matrix key \"{w}\" is not an admissible word"
                )));
            }
            if mat.d() != d {
                return Err(Error::Input(format!(
                    "matrix for \"{w}\" is {}×{}, expected {d}×{d}",
                    mat.d(),
                    mat.d()
                )));
            }
            for i in 0..d {
                for j in 0..d {
                    let x = mat.get(i, j);
                    if x < 0.0 {
                        return Err(Error::Input(format!(
                            "matrix \"{w}\"[{}][{}] = {x} is negative",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            if mat.norm() == 0.0 {
                return Err(Error::Input(format!("matrix for \"{w}\" is entirely zero")));
            }
            entries.push((pack(w.symbols(), m), w, mat));
        }
        entries.sort_by_key(|e| e.0);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Input(format!(
                    "duplicate matrix key \"{}\"",
                    pair[0].1
                )));
            }
        }

        // Exactly one matrix per admissible depth-word.
        let expected: Vec<Word> = spec.words(depth)?.collect();
        if expected.len() != entries.len() {
            for w in &expected {
                let code = pack(w.symbols(), m);
                if entries.binary_search_by_key(&code, |e| e.0).is_err() {
                    return Err(Error::Input(format!(
                        "missing matrix for admissible word \"{w}\""
                    )));
                }
            }
        }

        let positive = entries.iter().all(|(_, _, mat)| mat.min_entry() > 0.0);
        let codes = entries.iter().map(|e| e.0).collect();
        let mats = entries.into_iter().map(|e| e.2).collect();
        Ok(MatrixFamily {
            spec,
            d,
            depth,
            codes,
            mats,
            positive,
        })
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// All matrix entries strictly positive. Required for the distortion
    /// diagnostic and for certified handling of negative exponents.
    pub fn positive_mode(&self) -> bool {
        self.positive
    }

    /// Matrix attached to a depth-window of symbols.
    pub(crate) fn factor(&self, window: &[u8]) -> &Mat {
        debug_assert_eq!(window.len(), self.depth);
        if self.depth == 1 {
            // Single symbols are all admissible (no dead symbols), so codes
            // are the identity permutation.
            &self.mats[window[0] as usize]
        } else {
            let code = pack(window, self.spec.m());
            let idx = self
                .codes
                .binary_search(&code)
                .expect("window is an admissible depth-word");
            &self.mats[idx]
        }
    }

    /// Per-symbol matrix of a depth-1 family.
    pub fn symbol_matrix(&self, s: u8) -> &Mat {
        assert_eq!(self.depth, 1, "symbol_matrix requires a depth-1 family");
        &self.mats[s as usize]
    }

    pub fn scaled(&self, c: f64) -> Result<MatrixFamily> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Input(format!(
                "scale factor {c} must be positive and finite"
            )));
        }
        let mut fam = self.clone();
        for m in &mut fam.mats {
            *m = m.scaled(c);
        }
        Ok(fam)
    }

    /// Renormalized product over the cylinder of `word`. For depth k > 1
    /// the product depends on k−1 extension symbols; the norm is maximized
    /// exactly over all admissible extensions and the maximizing product is
    /// returned.
    pub fn word_product(&self, word: &Word) -> Result<NormalizedProduct> {
        if word.is_empty() {
            return Err(Error::Input("word must be nonempty".into()));
        }
        if !self.spec.is_admissible(word)? {
            return Err(Error::Input(format!("word {word} is not admissible")));
        }
        let k = self.depth;
        let n = word.len();
        let syms = word.symbols();

        let mut unit = Mat::identity(self.d);
        let mut log_norm = 0.0;
        if n >= k {
            for s in 0..=(n - k) {
                let f = self.factor(&syms[s..s + k]);
                let prod = unit.mul(f);
                let nb = prod.norm();
                if nb == 0.0 {
                    return Ok(NormalizedProduct::zero(self.d));
                }
                unit = prod.scaled(1.0 / nb);
                log_norm += nb.ln();
            }
        }
        if k == 1 {
            return Ok(NormalizedProduct {
                log_norm,
                unit,
                is_zero: false,
            });
        }

        // Positions still missing a factor; their windows reach into the
        // extension.
        let start = n.saturating_sub(k - 1);
        let mut combined = syms.to_vec();
        let mut best: Option<(f64, Mat)> = None;
        self.sup_over_extensions(
            &mut combined,
            n + k - 1,
            start,
            n,
            &unit,
            log_norm,
            &mut best,
        );
        match best {
            Some((log_norm, unit)) => Ok(NormalizedProduct {
                log_norm,
                unit,
                is_zero: false,
            }),
            None => Ok(NormalizedProduct::zero(self.d)),
        }
    }

    fn sup_over_extensions(
        &self,
        combined: &mut Vec<u8>,
        full_len: usize,
        tail_start: usize,
        n: usize,
        unit: &Mat,
        log_norm: f64,
        best: &mut Option<(f64, Mat)>,
    ) {
        if combined.len() == full_len {
            let mut cur = unit.clone();
            let mut log = log_norm;
            for s in tail_start..n {
                let prod = cur.mul(self.factor(&combined[s..s + self.depth]));
                let nb = prod.norm();
                if nb == 0.0 {
                    return;
                }
                cur = prod.scaled(1.0 / nb);
                log += nb.ln();
            }
            if best.as_ref().is_none_or(|(l, _)| log > *l) {
                *best = Some((log, cur));
            }
            return;
        }
        let last = *combined.last().expect("combined starts nonempty");
        for j in self.spec.successors(last) {
            combined.push(j);
            self.sup_over_extensions(combined, full_len, tail_start, n, unit, log_norm, best);
            combined.pop();
        }
    }

    /// Default search horizon for `check_h2`.
    pub fn default_h2_horizon(&self) -> usize {
        self.spec.m() * self.d
    }

    /// Bridging irreducibility check. For r = 1..r_max, sums the matrix
    /// products over all connecting words of length ≤ r for every symbol
    /// pair and looks for entrywise positivity. Returns the least such r
    /// with the witness constant, or an unsatisfied witness.
    ///
    /// Only defined for depth-1 families.
    pub fn check_h2(&self, r_max: usize) -> Result<H2Witness> {
        if self.depth != 1 {
            return Err(Error::Unsupported(
                "bridging irreducibility is defined for depth-1 families".into(),
            ));
        }
        if r_max == 0 {
            return Err(Error::Input("r_max must be at least 1".into()));
        }
        let m = self.spec.m();

        // level[s*m+t] = Σ_{K length k, sKt admissible} M_K, built by the
        // one-step recursion level_k[s][t] = Σ_{s→u} M_u · level_{k−1}[u][t].
        let mut level: Vec<Mat> = vec![Mat::zeros(self.d); m * m];
        for s in 0..m as u8 {
            for u in self.spec.successors(s) {
                for t in 0..m as u8 {
                    if self.spec.allowed(u, t) {
                        level[s as usize * m + t as usize].add_assign(&self.mats[u as usize]);
                    }
                }
            }
        }
        let mut cumulative = level.clone();

        for r in 1..=r_max {
            if r > 1 {
                let mut next: Vec<Mat> = vec![Mat::zeros(self.d); m * m];
                for s in 0..m as u8 {
                    for u in self.spec.successors(s) {
                        let mu = &self.mats[u as usize];
                        for t in 0..m {
                            let tail = &level[u as usize * m + t];
                            next[s as usize * m + t].add_assign(&mu.mul(tail));
                        }
                    }
                }
                for (c, nx) in cumulative.iter_mut().zip(&next) {
                    c.add_assign(nx);
                }
                level = next;
            }
            let min = cumulative
                .iter()
                .map(|mat| mat.min_entry())
                .fold(f64::INFINITY, f64::min);
            if min > 0.0 {
                return Ok(H2Witness {
                    r,
                    b: min / bridge_count_bound(m, r),
                    satisfied: true,
                });
            }
        }
        Ok(H2Witness {
            r: r_max,
            b: 0.0,
            satisfied: false,
        })
    }

    /// Glued-norm constant γ_q = (b / Σ_{k≤r} m^k)^q: for any admissible
    /// I, J some bridge K with |K| ≤ r satisfies
    /// `‖M_{IKJ}‖^q ≥ γ_q ‖M_I‖^q ‖M_J‖^q`.
    pub fn gluing_constant(&self, witness: &H2Witness, q: f64) -> Result<f64> {
        if !witness.satisfied {
            return Err(Error::Precondition(
                "gluing constant requires a satisfied witness".into(),
            ));
        }
        if q < 0.0 {
            return Err(Error::Precondition("gluing constant requires q ≥ 0".into()));
        }
        Ok((witness.b / bridge_count_bound(self.spec.m(), witness.r)).powf(q))
    }

    /// Worst entrywise ratio of the matrix function across any n-cylinder.
    /// Exactly 1 for n ≥ depth; requires positive mode.
    pub fn distortion(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Input("cylinder depth n must be at least 1".into()));
        }
        if !self.positive {
            return Err(Error::Unsupported(
                "distortion ratios require a strictly positive family".into(),
            ));
        }
        if n >= self.depth {
            return Ok(1.0);
        }
        let mut eta: f64 = 1.0;
        for word in self.spec.words(n)? {
            let mut values: Vec<&Mat> = Vec::new();
            for ext in self.spec.words_with_prefix(&word, self.depth)? {
                values.push(self.factor(ext.symbols()));
            }
            for i in 0..self.d {
                for j in 0..self.d {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for v in &values {
                        let x = v.get(i, j);
                        lo = lo.min(x);
                        hi = hi.max(x);
                    }
                    eta = eta.max(hi / lo);
                }
            }
        }
        Ok(eta)
    }
}
