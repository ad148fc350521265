//! Pauli strings, weighted Pauli sums, and the spin-chain model builders.
//!
//! A [`PauliWord`] is stored as a pair of bit masks over qubit indices
//! (qubit 0 is the least-significant bit): a qubit carries `X` when only its
//! x bit is set, `Z` when only its z bit is set, and `Y` when both are set.

mod dense;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dense::{dense_matrix, exact_evolve, infidelity, DenseOperator, ExactEvolver};

/// Largest qubit index representable in a [`PauliWord`].
pub const MAX_WORD_QUBITS: usize = 64;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli letters on a set of qubits; identity elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliWord {
    x: u64,
    z: u64,
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    /// Builds a word from `(qubit, letter)` pairs. Repeated qubits are rejected.
    pub fn new(letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut word = PauliWord::IDENTITY;
        for &(q, p) in letters {
            if q >= MAX_WORD_QUBITS {
                return Err(Error::InvalidGate(format!(
                    "qubit index {q} exceeds word capacity {MAX_WORD_QUBITS}"
                )));
            }
            let bit = 1u64 << q;
            if word.support_mask() & bit != 0 {
                return Err(Error::InvalidGate(format!("qubit {q} appears twice in word")));
            }
            match p {
                Pauli::X => word.x |= bit,
                Pauli::Z => word.z |= bit,
                Pauli::Y => {
                    word.x |= bit;
                    word.z |= bit;
                }
            }
        }
        Ok(word)
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Result<Self> {
        Self::new(&[(qubit, pauli)])
    }

    pub fn pair(a: usize, pa: Pauli, b: usize, pb: Pauli) -> Result<Self> {
        Self::new(&[(a, pa), (b, pb)])
    }

    pub fn from_masks(x: u64, z: u64) -> Self {
        PauliWord { x, z }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Qubits on which the word acts non-trivially.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn support(&self) -> Vec<usize> {
        bits(self.support_mask()).collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Smallest register size that contains the support.
    pub fn min_qubits(&self) -> usize {
        (u64::BITS - self.support_mask().leading_zeros()) as usize
    }

    pub fn letter(&self, qubit: usize) -> Option<Pauli> {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (true, true) => Some(Pauli::Y),
            (true, false) => Some(Pauli::X),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }

    pub fn letters(&self) -> Vec<(usize, Pauli)> {
        bits(self.support_mask())
            .map(|q| (q, self.letter(q).expect("qubit in support")))
            .collect()
    }

    /// `i^(number of Y letters)`, the constant part of the basis action phase.
    pub(crate) fn y_phase(&self) -> Complex64 {
        match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Action on a computational basis state: `P|b> = phase * |b ^ x_mask>`.
    #[inline]
    pub(crate) fn basis_phase(&self, y_phase: Complex64, b: usize) -> Complex64 {
        if (b as u64 & self.z).count_ones() % 2 == 1 {
            -y_phase
        } else {
            y_phase
        }
    }

    /// True when the word's matrix has only real entries (even number of Ys).
    pub fn is_real(&self) -> bool {
        self.y_count() % 2 == 0
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.letters() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}{}", p.as_char(), q)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliWord {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut letters = Vec::new();
        for factor in s.split('*') {
            let factor = factor.trim();
            let mut chars = factor.chars();
            let letter = chars
                .next()
                .and_then(Pauli::from_char)
                .ok_or_else(|| format!("bad Pauli factor `{factor}`"))?;
            let index: usize = chars
                .as_str()
                .parse()
                .map_err(|_| format!("bad qubit index in `{factor}`"))?;
            letters.push((index, letter));
        }
        PauliWord::new(&letters).map_err(|e| e.to_string())
    }
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(q)
        }
    })
}

/// One weighted term of a [`PauliSum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub word: PauliWord,
}

/// A Hermitian operator written as a real combination of Pauli words.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    /// Validates and wraps a list of terms. At least one term is required,
    /// identity words are rejected, and every coefficient must be finite.
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidSize("a Pauli sum needs at least one qubit".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidConfig("a Pauli sum needs at least one term".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            if !t.coeff.is_finite() {
                return Err(Error::NumericInput(format!("coefficient of term {k} is not finite")));
            }
            if t.word.is_identity() {
                return Err(Error::InvalidConfig(format!(
                    "term {k} is an identity word; constant offsets are not supported"
                )));
            }
            if t.word.min_qubits() > num_qubits {
                return Err(Error::InvalidGate(format!(
                    "term {k} ({}) acts outside a {num_qubits}-qubit register",
                    t.word
                )));
            }
        }
        Ok(PauliSum { num_qubits, terms })
    }

    /// Accepts complex coefficients, rejecting any with a non-zero imaginary part.
    pub fn from_complex_terms(num_qubits: usize, terms: &[(Complex64, PauliWord)]) -> Result<Self> {
        let mut real = Vec::with_capacity(terms.len());
        for (k, (c, word)) in terms.iter().enumerate() {
            if c.im != 0.0 {
                return Err(Error::NonHermitian(format!(
                    "term {k} ({word}) has coefficient {c}"
                )));
            }
            real.push(PauliTerm { coeff: c.re, word: *word });
        }
        Self::new(num_qubits, real)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every word has a real matrix, so the dense form is real symmetric.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.word.is_real())
    }

    /// Concatenates the terms of two sums on the same register.
    pub fn plus(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Shape(format!(
                "cannot add {}-qubit and {}-qubit sums",
                self.num_qubits, other.num_qubits
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PauliSum::new(self.num_qubits, terms)
    }

    /// Parses the one-term-per-line text format: `<coeff> <word>`, where a word
    /// looks like `Z0*Z1` or `X3`. `#` starts a comment. When `num_qubits` is
    /// `None` the register is sized to the largest referenced qubit.
    pub fn parse(text: &str, num_qubits: Option<usize>) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: idx + 1, message };
            let mut fields = line.split_whitespace();
            let coeff_str = fields.next().expect("non-empty line has a field");
            let word_str = fields
                .next()
                .ok_or_else(|| parse_err("expected `<coeff> <word>`".into()))?;
            if fields.next().is_some() {
                return Err(parse_err("trailing fields after the Pauli word".into()));
            }
            let coeff: f64 = coeff_str
                .parse()
                .map_err(|_| parse_err(format!("bad coefficient `{coeff_str}`")))?;
            let word: PauliWord = word_str.parse().map_err(parse_err)?;
            terms.push(PauliTerm { coeff, word });
        }
        if terms.is_empty() {
            return Err(Error::Parse { line: 0, message: "no terms found".into() });
        }
        let needed = terms.iter().map(|t| t.word.min_qubits()).max().unwrap_or(1);
        let n = num_qubits.unwrap_or(needed);
        PauliSum::new(n, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{:?} {}", t.coeff, t.word)?;
        }
        Ok(())
    }
}

fn check_chain(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("spin chains need N >= 2, got {n}")));
    }
    if n > MAX_WORD_QUBITS {
        return Err(Error::InvalidSize(format!("N = {n} exceeds {MAX_WORD_QUBITS}")));
    }
    Ok(())
}

fn bonds(n: usize, periodic: bool) -> impl Iterator<Item = (usize, usize)> {
    let count = if periodic { n } else { n - 1 };
    (0..count).map(move |i| (i, (i + 1) % n))
}

fn push_term(terms: &mut Vec<PauliTerm>, coeff: f64, word: PauliWord) {
    if coeff != 0.0 {
        terms.push(PauliTerm { coeff, word });
    }
}

/// Transverse-field Ising chain `-J Σ Z_i Z_{i+1} - h Σ X_i`.
///
/// All couplings come first, then the field terms. Zero-coefficient terms are
/// dropped, so `J = 1, h = 0` on two sites yields the single term `-Z0*Z1`.
pub fn build_tfim(n: usize, j: f64, h: f64, periodic: bool) -> Result<PauliSum> {
    check_chain(n)?;
    let mut terms = Vec::with_capacity(2 * n);
    for (a, b) in bonds(n, periodic) {
        push_term(&mut terms, -j, PauliWord::pair(a, Pauli::Z, b, Pauli::Z)?);
    }
    for q in 0..n {
        push_term(&mut terms, -h, PauliWord::single(q, Pauli::X)?);
    }
    PauliSum::new(n, terms)
}

/// Anisotropic Heisenberg chain `Σ (Jx X_i X_{i+1} + Jy Y_i Y_{i+1} + Jz Z_i Z_{i+1})`,
/// with the three couplings of each bond adjacent in term order.
pub fn build_xyz(n: usize, jx: f64, jy: f64, jz: f64, periodic: bool) -> Result<PauliSum> {
    check_chain(n)?;
    let mut terms = Vec::with_capacity(3 * n);
    for (a, b) in bonds(n, periodic) {
        push_term(&mut terms, jx, PauliWord::pair(a, Pauli::X, b, Pauli::X)?);
        push_term(&mut terms, jy, PauliWord::pair(a, Pauli::Y, b, Pauli::Y)?);
        push_term(&mut terms, jz, PauliWord::pair(a, Pauli::Z, b, Pauli::Z)?);
    }
    PauliSum::new(n, terms)
}

/// Total magnetization `Σ_i P_i` along one axis.
pub fn magnetization(n: usize, axis: Pauli) -> Result<PauliSum> {
    let terms = (0..n)
        .map(|q| PauliWord::single(q, axis).map(|word| PauliTerm { coeff: 1.0, word }))
        .collect::<Result<Vec<_>>>()?;
    PauliSum::new(n, terms)
}

/// A single unit-weight Pauli word as an observable, e.g. `Z0` or `Z0*Z1`.
pub fn word_observable(n: usize, letters: &[(usize, Pauli)]) -> Result<PauliSum> {
    PauliSum::new(n, vec![PauliTerm { coeff: 1.0, word: PauliWord::new(letters)? }])
}

/// Sums coefficients of repeated words, keyed by `(x_mask, z_mask)`.
pub fn collect_terms(ps: &PauliSum) -> BTreeMap<(u64, u64), f64> {
    let mut out = BTreeMap::new();
    for t in ps.terms() {
        *out.entry((t.word.x_mask(), t.word.z_mask())).or_insert(0.0) += t.coeff;
    }
    out
}
