//! Pauli-string algebra and qubit Hamiltonians.
//!
//! A [`PauliSum`] is a complex-weighted sum of Pauli strings. Real weights give
//! an ordinary (Hermitian) qubit Hamiltonian, complex weights appear after a
//! non-unitary similarity transform such as the transcorrelated one.
//!
//! Tensor-factor convention: qubit 0 is the most significant factor, so the
//! basis state `|q0 q1 ... q(n-1)>` has index `sum_q q_bit << (n - 1 - q)`.
//!
//! # File format
//!
//! Hamiltonians are stored as TOML documents:
//!
//! ```toml
//! n_qubits = 2
//! hermitian = true          # optional, checked against the coefficients
//!
//! [[terms]]
//! coeff = [0.5, 0.0]        # [real, imaginary]
//! ops = "X0 Z1"             # empty string is the identity term
//! ```
//!
//! Files with a `.txt` extension are read as the printed form of an
//! OpenFermion `QubitOperator`, one `coefficient [ops]` term per `+`:
//!
//! ```text
//! (-0.8105+0j) [] +
//! (0.1721+0j) [Z0] +
//! (0.0452+0j) [X0 X1 Y2 Y3]
//! ```
//!
//! Qubit `k` of such a file maps to qubit `k` here. OpenFermion also treats
//! qubit 0 as the leftmost Kronecker factor, so no reordering is applied.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::guard;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Coefficients smaller than this in modulus are dropped on canonicalization.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            PauliAxis::I => [[ONE, ZERO], [ZERO, ONE]],
            PauliAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliAxis::Y => [[ZERO, -I], [I, ZERO]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn letter(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    /// (flips the bit, picks up a sign from the bit)
    fn bits(self) -> (bool, bool) {
        match self {
            PauliAxis::I => (false, false),
            PauliAxis::X => (true, false),
            PauliAxis::Y => (true, true),
            PauliAxis::Z => (false, true),
        }
    }
}

/// A tensor product of single-qubit Paulis in canonical form: entries sorted
/// by qubit, identities omitted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    ops: Vec<(usize, PauliAxis)>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            ops: Vec::new(),
        }
    }

    pub fn new<It>(n_qubits: usize, ops: It) -> Result<Self>
    where
        It: IntoIterator<Item = (usize, PauliAxis)>,
    {
        let mut map = BTreeMap::new();
        for (q, axis) in ops {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    limit: n_qubits,
                });
            }
            if map.insert(q, axis).is_some() {
                return Err(Error::invalid(format!(
                    "qubit {q} appears twice in a Pauli string"
                )));
            }
        }
        Ok(PauliString {
            n_qubits,
            ops: map
                .into_iter()
                .filter(|&(_, a)| a != PauliAxis::I)
                .collect(),
        })
    }

    /// Parses whitespace-separated tokens such as `"X0 Z3 Y5"`.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for tok in text.split_whitespace() {
            ops.push(parse_token(tok, n_qubits)?);
        }
        Self::new(n_qubits, ops)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[(usize, PauliAxis)] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn axis(&self, qubit: usize) -> PauliAxis {
        self.ops
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .map(|k| self.ops[k].1)
            .unwrap_or(PauliAxis::I)
    }

    /// Dense per-qubit view, `n_qubits` entries long.
    pub fn axes(&self) -> Vec<PauliAxis> {
        let mut out = vec![PauliAxis::I; self.n_qubits];
        for &(q, a) in &self.ops {
            out[q] = a;
        }
        out
    }

    /// Returns `(x_mask, z_mask, y_count)` in the basis-index bit convention.
    fn masks(&self) -> (usize, usize, usize) {
        let n = self.n_qubits;
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
        for &(q, a) in &self.ops {
            let bit = 1usize << (n - 1 - q);
            let (fx, fz) = a.bits();
            if fx {
                x |= bit;
            }
            if fz {
                z |= bit;
            }
            if a == PauliAxis::Y {
                ny += 1;
            }
        }
        (x, z, ny)
    }

    /// `(P v)`, including the phases of `Y`.
    pub fn apply_to_statevector(&self, v: &[C64]) -> Result<Vec<C64>> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .ok_or_else(|| Error::dims("register too large"))?;
        if v.len() != dim {
            return Err(Error::dims(format!(
                "state of length {} for a {}-qubit Pauli string",
                v.len(),
                self.n_qubits
            )));
        }
        let (x, z, ny) = self.masks();
        let y_phase = I.powu(ny as u32);
        let mut out = vec![ZERO; dim];
        for (j, &amp) in v.iter().enumerate() {
            // Y = i X Z: Z sign from the input bit, X flip, then i per Y
            let sign = if (j & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[j ^ x] = amp * y_phase * sign;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(q, a) in &self.ops {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", a.letter(), q)?;
            first = false;
        }
        Ok(())
    }
}

fn parse_token(tok: &str, n_qubits: usize) -> Result<(usize, PauliAxis)> {
    let mut chars = tok.chars();
    let letter = chars.next().ok_or_else(|| Error::invalid("empty token"))?;
    let axis = PauliAxis::from_letter(letter)
        .ok_or_else(|| Error::invalid(format!("unknown Pauli axis `{letter}` in token `{tok}`")))?;
    let digits = chars.as_str();
    let q: usize = digits
        .parse()
        .map_err(|_| Error::invalid(format!("bad qubit index in token `{tok}`")))?;
    if q >= n_qubits {
        return Err(Error::IndexOutOfRange {
            index: q,
            limit: n_qubits,
        });
    }
    Ok((q, axis))
}

/// A complex-weighted sum of distinct Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
    hermitian: bool,
}

impl PauliSum {
    /// Canonicalizes: merges equal strings, prunes coefficients below
    /// [`PRUNE_THRESHOLD`], sorts by string.
    pub fn new<It>(n_qubits: usize, terms: It) -> Result<Self>
    where
        It: IntoIterator<Item = (C64, PauliString)>,
    {
        let mut merged: BTreeMap<PauliString, C64> = BTreeMap::new();
        for (c, s) in terms {
            if s.n_qubits != n_qubits {
                return Err(Error::dims(format!(
                    "{}-qubit string in a {n_qubits}-qubit sum",
                    s.n_qubits
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient on `{s}`")));
            }
            *merged.entry(s).or_insert(ZERO) += c;
        }
        let terms: Vec<_> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD)
            .map(|(s, c)| (c, s))
            .collect();
        let hermitian = terms.iter().all(|(c, _)| c.im == 0.0);
        Ok(PauliSum {
            n_qubits,
            terms,
            hermitian,
        })
    }

    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: vec![(ONE, PauliString::identity(n_qubits))],
            hermitian: true,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn coefficient(&self, s: &PauliString) -> C64 {
        self.terms
            .iter()
            .find(|(_, t)| t == s)
            .map(|(c, _)| *c)
            .unwrap_or(ZERO)
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::dims("adding sums over different qubit counts"));
        }
        PauliSum::new(
            self.n_qubits,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn scale(&self, factor: C64) -> Result<PauliSum> {
        PauliSum::new(
            self.n_qubits,
            self.terms.iter().map(|(c, s)| (c * factor, s.clone())),
        )
    }

    /// Zeroes imaginary parts with modulus `<= tol` and recomputes the
    /// Hermitian flag.
    pub fn clean_imaginary(&self, tol: f64) -> PauliSum {
        let terms = self.terms.iter().map(|(c, s)| {
            let c = if c.im.abs() <= tol {
                C64::new(c.re, 0.0)
            } else {
                *c
            };
            (c, s.clone())
        });
        PauliSum::new(self.n_qubits, terms).expect("cleaning keeps terms valid")
    }

    /// `sum_k c_k (P_k v)`.
    pub fn apply_to_statevector(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![ZERO; v.len()];
        for (c, s) in &self.terms {
            let pv = s.apply_to_statevector(v)?;
            for (o, p) in out.iter_mut().zip(pv) {
                *o += c * p;
            }
        }
        if self.terms.is_empty() && v.len() != 1usize << self.n_qubits {
            return Err(Error::dims("state length does not match the sum"));
        }
        Ok(out)
    }

    /// Dense `2^n x 2^n` matrix. Guarded by [`guard::dense_limit`].
    pub fn dense_matrix(&self) -> Result<CMatrix> {
        guard::check(self.n_qubits, guard::dense_limit())?;
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            let (x, z, ny) = s.masks();
            let phase = c * I.powu(ny as u32);
            for j in 0..dim {
                let sign = if (j & z).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                m[(j ^ x, j)] += phase * sign;
            }
        }
        Ok(m)
    }

    /// Projects a dense matrix onto the Pauli basis, `c_P = Tr[P M] / 2^n`.
    ///
    /// Uses one Walsh-Hadamard transform per X-mask, `O(4^n n)` overall.
    pub fn from_dense(m: &CMatrix) -> Result<PauliSum> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::dims("matrix must be square with power-of-two size"));
        }
        let n = dim.trailing_zeros() as usize;
        guard::check(n, guard::dense_limit())?;
        let norm = 1.0 / dim as f64;
        let mut terms = Vec::new();
        let mut buf = vec![ZERO; dim];
        for x in 0..dim {
            for (k, b) in buf.iter_mut().enumerate() {
                // Tr[P M] = i^{#Y} sum_k (-1)^{k.z} M[k, k^x]
                *b = m[(k, k ^ x)];
            }
            walsh_hadamard(&mut buf);
            for (z, &val) in buf.iter().enumerate() {
                if val.norm() * norm < PRUNE_THRESHOLD {
                    continue;
                }
                let mut ops = Vec::new();
                let mut ny = 0;
                for q in 0..n {
                    let bit = 1usize << (n - 1 - q);
                    let axis = match (x & bit != 0, z & bit != 0) {
                        (false, false) => continue,
                        (true, false) => PauliAxis::X,
                        (false, true) => PauliAxis::Z,
                        (true, true) => {
                            ny += 1;
                            PauliAxis::Y
                        }
                    };
                    ops.push((q, axis));
                }
                let coeff = val * norm * I.powu(ny as u32);
                terms.push((coeff, PauliString::new(n, ops)?));
            }
        }
        PauliSum::new(n, terms)
    }

    /// Canonical TOML serialization with 17 significant digits.
    pub fn to_toml_string(&self) -> String {
        let mut out = format!(
            "n_qubits = {}\nhermitian = {}\n",
            self.n_qubits, self.hermitian
        );
        for (c, s) in &self.terms {
            out.push_str(&format!(
                "\n[[terms]]\ncoeff = [{:.16e}, {:.16e}]\nops = \"{}\"\n",
                c.re, c.im, s
            ));
        }
        out
    }

    pub fn parse(source: &str) -> Result<PauliSum> {
        parse_hamiltonian(source)
    }

    pub fn from_reader<R: std::io::Read>(mut reader: R) -> Result<PauliSum> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        parse_hamiltonian(&buf)
    }

    /// Reads a canonical TOML file, or an OpenFermion text dump when the
    /// extension is `.txt`.
    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<PauliSum> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "txt") {
            parse_openfermion(&text, None)
        } else {
            parse_hamiltonian(&text)
        }
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

fn walsh_hadamard(buf: &mut [C64]) {
    let n = buf.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let (a, b) = (buf[k], buf[k + h]);
                buf[k] = a + b;
                buf[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Particle-number operator under Jordan-Wigner, `sum_i (1 - Z_i) / 2`.
pub fn number_operator(n_qubits: usize) -> Result<PauliSum> {
    if n_qubits == 0 {
        return Err(Error::invalid("number operator needs at least one qubit"));
    }
    let mut terms = vec![(
        C64::new(n_qubits as f64 / 2.0, 0.0),
        PauliString::identity(n_qubits),
    )];
    for q in 0..n_qubits {
        terms.push((
            C64::new(-0.5, 0.0),
            PauliString::new(n_qubits, [(q, PauliAxis::Z)])?,
        ));
    }
    PauliSum::new(n_qubits, terms)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    n_qubits: toml::Spanned<i64>,
    hermitian: Option<toml::Spanned<bool>>,
    #[serde(default)]
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: toml::Spanned<Vec<toml::Spanned<f64>>>,
    ops: toml::Spanned<String>,
}

pub(crate) fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|p| offset - p).unwrap_or(offset + 1);
    (line, col)
}

fn parse_err(source: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = line_col(source, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Reads the canonical Hamiltonian document. Errors carry line and column.
pub fn parse_hamiltonian(source: &str) -> Result<PauliSum> {
    let raw: RawHamiltonian = toml::from_str(source).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        parse_err(source, offset, e.message().to_string())
    })?;

    let n = *raw.n_qubits.get_ref();
    if n < 1 {
        return Err(parse_err(
            source,
            raw.n_qubits.span().start,
            "n_qubits must be >= 1",
        ));
    }
    let n = n as usize;

    let mut terms = Vec::with_capacity(raw.terms.len());
    for term in &raw.terms {
        let parts = term.coeff.get_ref();
        if parts.len() != 2 {
            return Err(parse_err(
                source,
                term.coeff.span().start,
                format!(
                    "coeff must be [real, imaginary], got {} numbers",
                    parts.len()
                ),
            ));
        }
        for p in parts {
            if !p.get_ref().is_finite() {
                return Err(parse_err(source, p.span().start, "non-finite coefficient"));
            }
        }
        let coeff = C64::new(*parts[0].get_ref(), *parts[1].get_ref());

        // token offsets are relative to the string body, one byte past the quote
        let body_start = term.ops.span().start + 1;
        let text = term.ops.get_ref();
        let mut ops = Vec::new();
        let mut cursor = 0;
        for tok in text.split_whitespace() {
            let rel = cursor + text[cursor..].find(tok).unwrap_or(0);
            cursor = rel + tok.len();
            let at = body_start + rel;
            let op = parse_token(tok, n).map_err(|e| match e {
                Error::IndexOutOfRange { index, limit } => parse_err(
                    source,
                    at,
                    format!("qubit index {index} in `{tok}` is not below n_qubits = {limit}"),
                ),
                other => parse_err(source, at, other.to_string()),
            })?;
            ops.push(op);
        }
        let string =
            PauliString::new(n, ops).map_err(|e| parse_err(source, body_start, e.to_string()))?;
        terms.push((coeff, string));
    }

    let sum = PauliSum::new(n, terms)?;
    if let Some(flag) = &raw.hermitian {
        if *flag.get_ref() != sum.hermitian {
            return Err(parse_err(
                source,
                flag.span().start,
                format!(
                    "hermitian = {} contradicts the coefficients (computed {})",
                    flag.get_ref(),
                    sum.hermitian
                ),
            ));
        }
    }
    Ok(sum)
}

/// Parses a Python complex or real literal: `0.5`, `(1e-05-2j)`, `-3j`.
fn parse_python_complex(text: &str) -> Option<C64> {
    let t = text.trim();
    let t = t
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .unwrap_or(t)
        .trim();
    let Some(body) = t.strip_suffix('j') else {
        return t.parse().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, body[k..].parse().ok()?)),
        None => Some(C64::new(0.0, body.parse().ok()?)),
    }
}

/// Reads the printed form of an OpenFermion `QubitOperator`. The qubit count
/// defaults to one past the largest index that appears.
pub fn parse_openfermion(source: &str, n_qubits: Option<usize>) -> Result<PauliSum> {
    let mut raw = Vec::new();
    let mut cursor = 0;
    while let Some(open) = source[cursor..].find('[').map(|k| cursor + k) {
        let close = source[open..]
            .find(']')
            .map(|k| open + k)
            .ok_or_else(|| parse_err(source, open, "unclosed `[`"))?;
        let coeff_text = source[cursor..open].trim().trim_start_matches('+').trim();
        let coeff = parse_python_complex(coeff_text)
            .ok_or_else(|| parse_err(source, cursor, format!("bad coefficient `{coeff_text}`")))?;
        let mut ops = Vec::new();
        for tok in source[open + 1..close].split_whitespace() {
            ops.push(
                parse_token(tok, usize::MAX)
                    .map_err(|e| parse_err(source, open + 1, e.to_string()))?,
            );
        }
        raw.push((coeff, ops));
        cursor = close + 1;
    }
    if !source[cursor..]
        .trim()
        .trim_end_matches('+')
        .trim()
        .is_empty()
    {
        return Err(parse_err(
            source,
            cursor,
            "trailing text after the last term",
        ));
    }
    if raw.is_empty() {
        return Err(parse_err(source, 0, "no terms found"));
    }
    let max_index = raw
        .iter()
        .flat_map(|(_, ops)| ops.iter().map(|(q, _)| q + 1))
        .max()
        .unwrap_or(1);
    let n = match n_qubits {
        Some(n) if n < max_index => {
            return Err(Error::IndexOutOfRange {
                index: max_index - 1,
                limit: n,
            })
        }
        Some(n) => n,
        None => max_index,
    };
    let terms = raw
        .into_iter()
        .map(|(c, ops)| PauliString::new(n, ops).map(|s| (c, s)))
        .collect::<Result<Vec<_>>>()?;
    PauliSum::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parse_single_real_term() {
        let h = parse_hamiltonian("n_qubits = 1\n[[terms]]\ncoeff = [1.0, 0.0]\nops = \"Z0\"\n")
            .unwrap();
        assert_eq!(h.len(), 1);
        assert!(h.is_hermitian());
    }

    #[test]
    fn imaginary_coefficient_is_non_hermitian() {
        let h = parse_hamiltonian("n_qubits = 1\n[[terms]]\ncoeff = [0.0, 1.0]\nops = \"X0\"\n")
            .unwrap();
        assert!(!h.is_hermitian());
    }

    #[test]
    fn duplicate_terms_merge() {
        let src = "n_qubits = 1\n[[terms]]\ncoeff = [0.5, 0.0]\nops = \"Z0\"\n[[terms]]\ncoeff = [0.5, 0.0]\nops = \"Z0\"\n";
        let h = parse_hamiltonian(src).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].0, c(1.0, 0.0));
    }

    #[test]
    fn bad_index_reports_position() {
        let src = "n_qubits = 2\n[[terms]]\ncoeff = [1.0, 0.0]\nops = \"X0 Z7\"\n";
        match parse_hamiltonian(src) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, 11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_token_and_nonfinite_rejected() {
        let bad_axis = "n_qubits = 2\n[[terms]]\ncoeff = [1.0, 0.0]\nops = \"Q0\"\n";
        assert!(matches!(
            parse_hamiltonian(bad_axis),
            Err(Error::Parse { line: 4, .. })
        ));
        let inf = "n_qubits = 2\n[[terms]]\ncoeff = [inf, 0.0]\nops = \"X0\"\n";
        assert!(matches!(
            parse_hamiltonian(inf),
            Err(Error::Parse { line: 3, .. })
        ));
        let syntax = "n_qubits = \n";
        assert!(matches!(
            parse_hamiltonian(syntax),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn hermitian_flag_is_validated() {
        let src = "n_qubits = 1\nhermitian = true\n[[terms]]\ncoeff = [0.0, 1.0]\nops = \"X0\"\n";
        assert!(matches!(
            parse_hamiltonian(src),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn identity_term_survives_io() {
        let src = "n_qubits = 2\n[[terms]]\ncoeff = [-7.5, 0.0]\nops = \"\"\n";
        let h = parse_hamiltonian(src).unwrap();
        assert!(h.terms()[0].1.is_identity());
        assert_eq!(parse_hamiltonian(&h.to_toml_string()).unwrap(), h);
    }

    #[test]
    fn dense_matrix_examples() {
        let empty = PauliSum::zero(1).dense_matrix().unwrap();
        assert_eq!(empty, CMatrix::zeros(2, 2));

        let z = PauliSum::new(1, [(c(1.0, 0.0), PauliString::parse(1, "Z0").unwrap())]).unwrap();
        let m = z.dense_matrix().unwrap();
        assert_eq!(
            m,
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
        );

        let xx =
            PauliSum::new(2, [(c(1.0, 0.0), PauliString::parse(2, "X0 X1").unwrap())]).unwrap();
        let m = xx.dense_matrix().unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let expected = if r + col == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let x0 = PauliSum::new(2, [(c(1.0, 0.0), PauliString::parse(2, "X0").unwrap())]).unwrap();
        let m = x0.dense_matrix().unwrap();
        // X on qubit 0 maps |00> (index 0) to |10> (index 2)
        assert_eq!(m[(2, 0)], c(1.0, 0.0));
    }

    #[test]
    fn dense_guard() {
        let h = PauliSum::zero(guard::DENSE_MATRIX_QUBITS + 1);
        if std::env::var(guard::GUARD_ENV).is_err() {
            assert!(matches!(h.dense_matrix(), Err(Error::GuardExceeded { .. })));
        }
    }

    #[test]
    fn number_operator_on_basis_states() {
        let eval = |n: usize, bits: &str| {
            let op = number_operator(n).unwrap();
            let idx = usize::from_str_radix(bits, 2).unwrap();
            let mut v = vec![ZERO; 1 << n];
            v[idx] = ONE;
            let w = op.apply_to_statevector(&v).unwrap();
            w[idx].re
        };
        assert_abs_diff_eq!(eval(2, "11"), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval(2, "00"), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval(4, "0101"), 2.0, epsilon = 1e-15);
        assert!(number_operator(3).unwrap().is_hermitian());
    }

    #[test]
    fn apply_examples() {
        let x = PauliString::parse(1, "X0").unwrap();
        assert_eq!(
            x.apply_to_statevector(&[ONE, ZERO]).unwrap(),
            vec![ZERO, ONE]
        );
        let y = PauliString::parse(1, "Y0").unwrap();
        assert_eq!(y.apply_to_statevector(&[ONE, ZERO]).unwrap(), vec![ZERO, I]);
        let zz = PauliString::parse(2, "Z0 Z1").unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        assert_eq!(zz.apply_to_statevector(&bell).unwrap(), bell);
        assert!(zz.apply_to_statevector(&[ONE]).is_err());
    }

    #[test]
    fn from_dense_single_qubit_y() {
        let y = PauliSum::new(1, [(c(0.3, -0.2), PauliString::parse(1, "Y0").unwrap())]).unwrap();
        let back = PauliSum::from_dense(&y.dense_matrix().unwrap()).unwrap();
        assert_abs_diff_eq!(back.terms()[0].0.re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(back.terms()[0].0.im, -0.2, epsilon = 1e-15);
    }

    fn axis() -> impl Strategy<Value = PauliAxis> {
        prop_oneof![
            Just(PauliAxis::I),
            Just(PauliAxis::X),
            Just(PauliAxis::Y),
            Just(PauliAxis::Z)
        ]
    }

    fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
        let term = (
            -2.0f64..2.0,
            prop_oneof![Just(0.0), -1.0f64..1.0],
            prop::collection::vec(axis(), n),
        );
        prop::collection::vec(term, 0..6).prop_map(move |ts| {
            let terms = ts.into_iter().map(|(re, im, axes)| {
                (
                    c(re, im),
                    PauliString::new(n, axes.into_iter().enumerate()).unwrap(),
                )
            });
            PauliSum::new(n, terms).unwrap()
        })
    }

    #[test]
    fn openfermion_text_is_read() {
        let text = "(-0.81+0j) [] +\n(0.17+0j) [Z0] +\n(1e-05-2.5e-06j) [X0 Y2] +\n-0.5j [Z1 Z2]\n";
        let h = parse_openfermion(text, None).unwrap();
        assert_eq!(h.n_qubits(), 3);
        assert_eq!(h.coefficient(&PauliString::identity(3)), c(-0.81, 0.0));
        assert_eq!(
            h.coefficient(&PauliString::parse(3, "Z0").unwrap()),
            c(0.17, 0.0)
        );
        assert_eq!(
            h.coefficient(&PauliString::parse(3, "X0 Y2").unwrap()),
            c(1e-5, -2.5e-6)
        );
        assert_eq!(
            h.coefficient(&PauliString::parse(3, "Z1 Z2").unwrap()),
            c(0.0, -0.5)
        );
        assert_eq!(parse_openfermion(text, Some(5)).unwrap().n_qubits(), 5);
        assert!(parse_openfermion(text, Some(2)).is_err());
    }

    #[test]
    fn openfermion_errors_are_located() {
        match parse_openfermion("0.5 [Z0] +\n(1+x) [X1]", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(parse_openfermion("0.5 [Q0]", None).is_err());
        assert!(parse_openfermion("0.5 [Z0", None).is_err());
        assert!(parse_openfermion("0.5 [Z0] junk", None).is_err());
        assert!(parse_openfermion("", None).is_err());
    }

    #[test]
    fn txt_extension_selects_openfermion() {
        let dir = std::env::temp_dir().join(format!("qcmps-of-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h.txt");
        std::fs::write(&path, "(1+0j) [X0 X1] +\n(-1+0j) [Z1]").unwrap();
        let h = PauliSum::read_file(&path).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.len(), 2);
    }

    proptest! {
        #[test]
        fn toml_round_trip(h in pauli_sum(3)) {
            let text = h.to_toml_string();
            let back = parse_hamiltonian(&text).unwrap();
            prop_assert_eq!(&back, &h);
            prop_assert_eq!(back.to_toml_string(), text);
        }

        #[test]
        fn dense_is_linear(a in pauli_sum(3), b in pauli_sum(3)) {
            let lhs = a.add(&b).unwrap().dense_matrix().unwrap();
            let rhs = a.dense_matrix().unwrap() + b.dense_matrix().unwrap();
            prop_assert!((lhs - rhs).camax() < 1e-15);
        }

        #[test]
        fn hermitian_sums_give_hermitian_matrices(h in pauli_sum(3)) {
            let h = h.clean_imaginary(f64::INFINITY);
            prop_assert!(h.is_hermitian());
            let m = h.dense_matrix().unwrap();
            prop_assert!((&m - m.adjoint()).camax() < 1e-15);
        }

        #[test]
        fn pauli_strings_are_involutions(
            axes in prop::collection::vec(axis(), 3),
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        ) {
            let p = PauliString::new(3, axes.into_iter().enumerate()).unwrap();
            let v: Vec<C64> = amps.into_iter().map(|(r, i)| c(r, i)).collect();
            let back = p.apply_to_statevector(&p.apply_to_statevector(&v).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn dense_projection_round_trip(h in pauli_sum(3)) {
            let back = PauliSum::from_dense(&h.dense_matrix().unwrap()).unwrap();
            let diff = back.add(&h.scale(c(-1.0, 0.0)).unwrap()).unwrap();
            prop_assert!(diff.terms().iter().all(|(c, _)| c.norm() < 1e-14));
        }
    }
}
