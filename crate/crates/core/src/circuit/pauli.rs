use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gate::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> Matrix2<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => Matrix2::new(l, o, o, l),
            Pauli::X => Matrix2::new(o, l, l, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(l, o, o, -l),
        }
    }
}

/// Tensor product of single-qubit Paulis; letter `i` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { letters }
    }

    /// `Z ⊗ Z ⊗ … ⊗ Z` on `n` qubits.
    pub fn global_z(n: usize) -> Self {
        PauliString {
            letters: vec![Pauli::Z; n],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Indices of non-identity letters.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    /// Letter placed at `perm[i]` for each input letter `i`.
    pub fn permuted(&self, perm: &[usize]) -> PauliString {
        let mut letters = vec![Pauli::I; self.len()];
        for (i, &p) in self.letters.iter().enumerate() {
            letters[perm[i]] = p;
        }
        PauliString { letters }
    }

    /// Dense `2ⁿ×2ⁿ` matrix.
    pub fn matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for p in &self.letters {
            let pm = p.matrix();
            let pm = DMatrix::from_fn(2, 2, |r, c| pm[(r, c)]);
            m = m.kronecker(&pm);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::invalid(format!("bad Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real-weighted sum of Pauli strings of one width.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    terms: BTreeMap<PauliString, f64>,
    width: usize,
}

impl PauliOperator {
    /// Build from terms; repeated strings are summed.
    pub fn new(terms: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut width = None;
        for (p, c) in terms {
            match width {
                None => width = Some(p.len()),
                Some(w) if w != p.len() => {
                    return Err(Error::invalid(format!(
                        "Pauli string {p} has width {}, expected {w}",
                        p.len()
                    )))
                }
                _ => {}
            }
            *map.entry(p).or_insert(0.0) += c;
        }
        let width = width.ok_or_else(|| Error::invalid("empty Pauli operator"))?;
        if width == 0 {
            return Err(Error::invalid("zero-width Pauli operator"));
        }
        Ok(PauliOperator { terms: map, width })
    }

    pub fn single(p: PauliString) -> Self {
        let width = p.len();
        PauliOperator {
            terms: BTreeMap::from([(p, 1.0)]),
            width,
        }
    }

    pub fn global_z(n: usize) -> Self {
        Self::single(PauliString::global_z(n))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    /// `Σ|c|`, an upper bound on `|⟨O⟩|`.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn permuted(&self, perm: &[usize]) -> PauliOperator {
        PauliOperator {
            terms: self
                .terms
                .iter()
                .map(|(p, &c)| (p.permuted(perm), c))
                .collect(),
            width: self.width,
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.width;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, &c) in &self.terms {
            m += p.matrix() * C64::new(c, 0.0);
        }
        m
    }
}
