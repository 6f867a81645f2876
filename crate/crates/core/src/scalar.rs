//! Exact values of the form `q0 + q1*s1 + ... + qk*sk`.
//!
//! The `si` are named irrational symbols declared in a [`SymbolTable`]. The
//! caller asserts that the declared values are linearly independent over the
//! rationals together with `1`; under that contract a scalar is zero exactly
//! when all of its coefficients are zero, and every other sign question is
//! settled by interval evaluation with refinement.
//!
//! Only rational-linear structure is supported: there are no products of
//! symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Default number of refinement rounds attempted by [`ExactScalar::sign`].
pub const DEFAULT_REFINE_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("operands belong to different symbol tables")]
    TableMismatch,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("symbol `{0}`: interval must satisfy lo < hi")]
    EmptyInterval(String),
    #[error("symbol `{name}`: refinement rule is inconsistent with its interval ({reason})")]
    BadRefinement { name: String, reason: String },
    #[error("sign undecided after {rounds} refinement rounds (enclosure [{}, {}])", enclosure.0, enclosure.1)]
    Inconclusive {
        rounds: usize,
        enclosure: Box<(BigRational, BigRational)>,
    },
    #[error("cannot parse `{0}` as a rational")]
    BadRational(String),
    #[error("cannot parse scalar `{text}`: {reason}")]
    BadScalar { text: String, reason: String },
}

/// How a symbol's enclosing interval may be narrowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    /// The interval is all that is known.
    None,
    /// A decimal expansion of the value, e.g. `"1.41421356237309504880"`.
    Digits(String),
    /// The unique root inside the interval of the integer polynomial whose
    /// coefficients are listed lowest degree first.
    Root(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub lo: BigRational,
    pub hi: BigRational,
    pub refine: Refinement,
}

impl Symbol {
    pub fn new(name: impl Into<String>, lo: BigRational, hi: BigRational) -> Self {
        Symbol {
            name: name.into(),
            lo,
            hi,
            refine: Refinement::None,
        }
    }

    pub fn with_refinement(mut self, refine: Refinement) -> Self {
        self.refine = refine;
        self
    }

    /// `sqrt(n)` enclosed by `[lo, hi]`, refined by bisection on `x^2 - n`.
    pub fn sqrt(name: impl Into<String>, n: i64, lo: &str, hi: &str) -> Result<Self, ScalarError> {
        let poly = vec![BigInt::from(-n), BigInt::zero(), BigInt::one()];
        Ok(Symbol::new(name, parse_rational(lo)?, parse_rational(hi)?)
            .with_refinement(Refinement::Root(poly)))
    }
}

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(1);

/// The set of irrational symbols a family of scalars is written over.
#[derive(Debug)]
pub struct SymbolTable {
    id: u64,
    symbols: Vec<Symbol>,
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for SymbolTable {}

impl SymbolTable {
    pub fn new(symbols: Vec<Symbol>) -> Result<Arc<Self>, ScalarError> {
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(ScalarError::DuplicateSymbol(s.name.clone()));
            }
            if s.lo >= s.hi {
                return Err(ScalarError::EmptyInterval(s.name.clone()));
            }
            check_refinement(s)?;
        }
        Ok(Arc::new(SymbolTable {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            symbols,
        }))
    }

    pub fn empty() -> Arc<Self> {
        SymbolTable::new(Vec::new()).expect("empty table is valid")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// The scalar `1*name`.
    pub fn symbol(self: &Arc<Self>, name: &str) -> Result<ExactScalar, ScalarError> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| ScalarError::UnknownSymbol(name.to_string()))?;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(idx, BigRational::one());
        Ok(ExactScalar {
            table: Some(Arc::clone(self)),
            rational: BigRational::zero(),
            coeffs,
        })
    }

    /// Parses `q0 + q1*name1 - name2 ...` against this table.
    pub fn parse_scalar(self: &Arc<Self>, text: &str) -> Result<ExactScalar, ScalarError> {
        parse_scalar_expr(self, text)
    }
}

fn check_refinement(s: &Symbol) -> Result<(), ScalarError> {
    let bad = |reason: &str| ScalarError::BadRefinement {
        name: s.name.clone(),
        reason: reason.to_string(),
    };
    match &s.refine {
        Refinement::None => Ok(()),
        Refinement::Digits(d) => {
            let v = parse_rational(d).map_err(|_| bad("digits are not a decimal"))?;
            // The truncated expansion must lie within one ulp of the interval.
            let ulp = digits_ulp(d);
            if v.clone() + ulp < s.lo || v - digits_ulp(d) > s.hi {
                return Err(bad("expansion lies outside the interval"));
            }
            Ok(())
        }
        Refinement::Root(poly) => {
            let a = poly_eval(poly, &s.lo);
            let b = poly_eval(poly, &s.hi);
            if a.is_zero() || b.is_zero() || a.signum() == b.signum() {
                return Err(bad(
                    "polynomial does not change sign strictly inside the interval",
                ));
            }
            Ok(())
        }
    }
}

fn digits_ulp(d: &str) -> BigRational {
    let frac = d.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(frac as u32))
}

fn poly_eval(poly: &[BigInt], x: &BigRational) -> BigRational {
    poly.iter().rev().fold(BigRational::zero(), |acc, c| {
        acc * x + BigRational::from_integer(c.clone())
    })
}

/// An exact rational-linear combination of `1` and declared symbols.
///
/// Pure rationals carry no table and combine with scalars over any table.
#[derive(Clone)]
pub struct ExactScalar {
    table: Option<Arc<SymbolTable>>,
    rational: BigRational,
    coeffs: BTreeMap<usize, BigRational>,
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}

impl PartialEq for ExactScalar {
    fn eq(&self, other: &Self) -> bool {
        let same_table = match (&self.table, &other.table) {
            (Some(a), Some(b)) => a.id == b.id,
            _ => self.coeffs.is_empty() && other.coeffs.is_empty(),
        };
        same_table && self.rational == other.rational && self.coeffs == other.coeffs
    }
}

impl Eq for ExactScalar {}

impl From<BigRational> for ExactScalar {
    fn from(q: BigRational) -> Self {
        ExactScalar {
            table: None,
            rational: q,
            coeffs: BTreeMap::new(),
        }
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from(BigRational::from_integer(n.into()))
    }
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::from(BigRational::zero())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    /// Nonzero symbol coefficients keyed by table index.
    pub fn symbol_coeffs(&self) -> &BTreeMap<usize, BigRational> {
        &self.coeffs
    }

    pub fn table(&self) -> Option<&Arc<SymbolTable>> {
        self.table.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.coeffs.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn join_table(&self, other: &ExactScalar) -> Result<Option<Arc<SymbolTable>>, ScalarError> {
        match (&self.table, &other.table) {
            (Some(a), Some(b)) if a.id != b.id => Err(ScalarError::TableMismatch),
            (Some(a), _) => Ok(Some(Arc::clone(a))),
            (None, b) => Ok(b.clone()),
        }
    }

    pub fn add(&self, other: &ExactScalar) -> Result<ExactScalar, ScalarError> {
        let table = self.join_table(other)?;
        let mut coeffs = self.coeffs.clone();
        for (&k, v) in &other.coeffs {
            let entry = coeffs.entry(k).or_insert_with(BigRational::zero);
            *entry += v;
            if entry.is_zero() {
                coeffs.remove(&k);
            }
        }
        Ok(ExactScalar {
            table,
            rational: &self.rational + &other.rational,
            coeffs,
        })
    }

    pub fn sub(&self, other: &ExactScalar) -> Result<ExactScalar, ScalarError> {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> ExactScalar {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, by: &BigRational) -> ExactScalar {
        if by.is_zero() {
            return ExactScalar {
                table: self.table.clone(),
                rational: BigRational::zero(),
                coeffs: BTreeMap::new(),
            };
        }
        ExactScalar {
            table: self.table.clone(),
            rational: &self.rational * by,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, v * by)).collect(),
        }
    }

    /// Coefficient row indexed by `[1, symbol 0, symbol 1, ...]`.
    pub fn coefficient_row(&self, width: usize) -> Vec<BigRational> {
        let mut row = vec![BigRational::zero(); width + 1];
        row[0] = self.rational.clone();
        for (&k, v) in &self.coeffs {
            row[k + 1] = v.clone();
        }
        row
    }

    /// Sign with the default refinement budget.
    pub fn sign(&self) -> Result<i8, ScalarError> {
        self.sign_with_budget(DEFAULT_REFINE_BUDGET)
    }

    /// Returns -1, 0 or +1. Never guesses: if the enclosure still contains
    /// zero after `budget` refinement rounds the result is
    /// [`ScalarError::Inconclusive`].
    pub fn sign_with_budget(&self, budget: usize) -> Result<i8, ScalarError> {
        if self.coeffs.is_empty() {
            return Ok(sign_of(&self.rational));
        }
        let table = self
            .table
            .as_ref()
            .expect("symbolic scalar carries a table");
        let mut states: Vec<(usize, Enclosure)> = self
            .coeffs
            .keys()
            .map(|&k| (k, Enclosure::start(&table.symbols[k])))
            .collect();
        let mut rounds = 0;
        loop {
            let (lo, hi) = self.enclose(&states);
            if lo.is_positive() {
                return Ok(1);
            }
            if hi.is_negative() {
                return Ok(-1);
            }
            let mut progressed = false;
            if rounds < budget {
                for (k, st) in states.iter_mut() {
                    progressed |= st.refine(&table.symbols[*k]);
                }
            }
            if !progressed {
                return Err(ScalarError::Inconclusive {
                    rounds,
                    enclosure: Box::new((lo, hi)),
                });
            }
            rounds += 1;
        }
    }

    /// Interval enclosure of the value using the declared intervals only.
    pub fn declared_enclosure(&self) -> (BigRational, BigRational) {
        match &self.table {
            None => (self.rational.clone(), self.rational.clone()),
            Some(t) => {
                let states: Vec<_> = self
                    .coeffs
                    .keys()
                    .map(|&k| (k, Enclosure::start(&t.symbols[k])))
                    .collect();
                self.enclose(&states)
            }
        }
    }

    fn enclose(&self, states: &[(usize, Enclosure)]) -> (BigRational, BigRational) {
        let mut lo = self.rational.clone();
        let mut hi = self.rational.clone();
        for (k, st) in states {
            let c = &self.coeffs[k];
            if c.is_positive() {
                lo += c * &st.lo;
                hi += c * &st.hi;
            } else {
                lo += c * &st.hi;
                hi += c * &st.lo;
            }
        }
        (lo, hi)
    }
}

fn sign_of(q: &BigRational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Working interval for one symbol during a sign decision.
#[derive(Debug, Clone)]
struct Enclosure {
    lo: BigRational,
    hi: BigRational,
    digits_used: usize,
}

impl Enclosure {
    fn start(s: &Symbol) -> Self {
        Enclosure {
            lo: s.lo.clone(),
            hi: s.hi.clone(),
            digits_used: 0,
        }
    }

    /// Narrows the interval; returns false when no further progress is possible.
    fn refine(&mut self, s: &Symbol) -> bool {
        match &s.refine {
            Refinement::None => false,
            Refinement::Root(poly) => {
                let two = BigRational::from_integer(2.into());
                let mid = (&self.lo + &self.hi) / two;
                let at_lo = poly_eval(poly, &self.lo);
                let at_mid = poly_eval(poly, &mid);
                if at_mid.is_zero() {
                    // A rational root contradicts the declaration.
                    return false;
                }
                if at_lo.signum() == at_mid.signum() {
                    self.lo = mid;
                } else {
                    self.hi = mid;
                }
                true
            }
            Refinement::Digits(d) => {
                // Early digits may be coarser than the declared interval, so
                // keep reading until one of them narrows it.
                let (int_part, frac) = d.split_once('.').unwrap_or((d.as_str(), ""));
                while self.digits_used < frac.len() {
                    self.digits_used += 1;
                    let truncated = format!("{int_part}.{}", &frac[..self.digits_used]);
                    let t = parse_rational(&truncated).expect("validated digits");
                    let ulp = BigRational::new(
                        BigInt::one(),
                        BigInt::from(10u32).pow(self.digits_used as u32),
                    );
                    let (a, b) = if int_part.starts_with('-') {
                        (&t - &ulp, t)
                    } else {
                        (t.clone(), t + ulp)
                    };
                    let before = &self.hi - &self.lo;
                    if a > self.lo {
                        self.lo = a;
                    }
                    if b < self.hi {
                        self.hi = b;
                    }
                    if &self.hi - &self.lo < before {
                        return true;
                    }
                }
                false
            }
        }
    }
}

impl fmt::Display for ExactScalar {
    /// Canonical form: rational part first (omitted when zero and symbols are
    /// present), then symbols in table order; unit coefficients are elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", fmt_rational(&self.rational));
        }
        let table = self
            .table
            .as_ref()
            .expect("symbolic scalar carries a table");
        let mut first = true;
        if !self.rational.is_zero() {
            write!(f, "{}", fmt_rational(&self.rational))?;
            first = false;
        }
        for (&k, c) in &self.coeffs {
            let name = &table.symbols[k].name;
            let mag = c.abs();
            let body = if mag.is_one() {
                name.clone()
            } else {
                format!("{}*{}", fmt_rational(&mag), name)
            };
            match (first, c.is_negative()) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `p/q` or a decimal such as `-1.414`.
pub fn parse_rational(text: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::BadRational(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = i.starts_with('-');
        let i_digits = i.trim_start_matches(['-', '+']);
        if !i_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = format!("{i_digits}{frac}").parse().map_err(|_| bad())?;
        let q = BigRational::new(n, BigInt::from(10u32).pow(frac.len() as u32));
        return Ok(if negative { -q } else { q });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn parse_scalar_expr(table: &Arc<SymbolTable>, text: &str) -> Result<ExactScalar, ScalarError> {
    let bad = |reason: &str| ScalarError::BadScalar {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    // Split into signed terms at top-level `+`/`-` (a sign directly after `/`
    // or `*` belongs to the number).
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    let mut prev_significant: Option<char> = None;
    for ch in text.chars() {
        let is_sign = ch == '+' || ch == '-';
        let binds_to_number = matches!(prev_significant, None | Some('/') | Some('*'));
        if is_sign && !binds_to_number {
            terms.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
            prev_significant = None;
            continue;
        }
        if is_sign && prev_significant.is_none() && current.trim().is_empty() {
            if ch == '-' {
                negative = !negative;
            }
            continue;
        }
        current.push(ch);
        if !ch.is_whitespace() {
            prev_significant = Some(ch);
        }
    }
    terms.push((negative, current));

    let mut acc = ExactScalar {
        table: Some(Arc::clone(table)),
        rational: BigRational::zero(),
        coeffs: BTreeMap::new(),
    };
    for (neg, term) in terms {
        let term = term.trim();
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let value = match term.split_once('*') {
            Some((coef, name)) => {
                let c = parse_rational(coef).map_err(|_| bad("bad coefficient"))?;
                table
                    .symbol(name.trim())
                    .map_err(|e| bad(&e.to_string()))?
                    .scale(&c)
            }
            None if term.starts_with(|c: char| c.is_ascii_digit() || c == '.') => {
                ExactScalar::from(parse_rational(term).map_err(|_| bad("bad rational"))?)
            }
            None => table.symbol(term).map_err(|e| bad(&e.to_string()))?,
        };
        let value = if neg { value.negate() } else { value };
        acc = acc.add(&value)?;
    }
    if acc.coeffs.is_empty() {
        acc.table = None;
    }
    Ok(acc)
}

fn common_width(values: &[ExactScalar]) -> Result<usize, ScalarError> {
    let mut table: Option<&Arc<SymbolTable>> = None;
    for v in values {
        if let Some(t) = &v.table {
            match table {
                Some(prev) if prev.id != t.id => return Err(ScalarError::TableMismatch),
                _ => table = Some(t),
            }
        }
    }
    Ok(table.map_or(0, |t| t.len()))
}

/// Dimension over the rationals of the span of `values`.
pub fn qrank(values: &[ExactScalar]) -> Result<usize, ScalarError> {
    let width = common_width(values)?;
    let mut rows: Vec<Vec<BigRational>> = values.iter().map(|v| v.coefficient_row(width)).collect();
    Ok(row_echelon(&mut rows).len())
}

/// A nonzero primitive integer vector `a` with `sum a_i * values_i == 0`, or
/// `None` when the values are rationally independent. The first nonzero
/// entry of the returned vector is positive.
pub fn integer_relation(values: &[ExactScalar]) -> Result<Option<Vec<BigInt>>, ScalarError> {
    let width = common_width(values)?;
    let n = values.len();
    // Columns are the values; kernel vectors of this matrix are relations.
    let value_rows: Vec<Vec<BigRational>> =
        values.iter().map(|v| v.coefficient_row(width)).collect();
    let mut m: Vec<Vec<BigRational>> = (0..=width)
        .map(|r| (0..n).map(|c| value_rows[c][r].clone()).collect())
        .collect();
    let pivots = row_echelon(&mut m);
    reduce_above(&mut m, &pivots);
    let Some(free) = (0..n).find(|c| !pivots.contains(c)) else {
        return Ok(None);
    };
    let mut relation = vec![BigRational::zero(); n];
    relation[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        relation[pc] = -m[row][free].clone() / &m[row][pc];
    }
    Ok(Some(clear_denominators(&relation)))
}

fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let flip = ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.sign() == Sign::Minus);
    ints.into_iter()
        .map(|x| {
            let x = x / &gcd;
            if flip {
                -x
            } else {
                x
            }
        })
        .collect()
}

/// Forward elimination in place; returns the pivot column of each nonzero row.
fn row_echelon(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let factor = &row[c] / &pivot[c];
            for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= &factor * y;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn reduce_above(m: &mut [Vec<BigRational>], pivots: &[usize]) {
    for (r, &c) in pivots.iter().enumerate().rev() {
        let pivot = m[r].clone();
        for row in m.iter_mut().take(r) {
            if row[c].is_zero() {
                continue;
            }
            let factor = &row[c] / &pivot[c];
            for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= &factor * y;
            }
        }
    }
}

/// `sum a_i * values_i` computed exactly.
pub fn substitute(relation: &[BigInt], values: &[ExactScalar]) -> Result<ExactScalar, ScalarError> {
    relation
        .iter()
        .zip(values)
        .try_fold(ExactScalar::zero(), |acc, (a, v)| {
            acc.add(&v.scale(&BigRational::from_integer(a.clone())))
        })
}
