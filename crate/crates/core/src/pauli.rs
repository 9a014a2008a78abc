//! Single-qubit Pauli letters and multi-qubit error strings.
//!
//! Operators are tracked modulo global phase, which makes the single-qubit
//! Pauli group the Klein four-group: every letter is its own inverse and the
//! product of two distinct non-identity letters is the third. Letters carry a
//! 2-bit code (`I=0, X=1, Y=2, Z=3`) chosen so that the code of a product is
//! the XOR of the codes; packed base-4 string indices therefore XOR
//! componentwise, which the decoding fast path and the secrecy module's
//! XOR-convolution both exploit. The same numeric order doubles as the
//! lexicographic letter order `I < X < Y < Z` used by enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single-qubit Pauli operator modulo phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Pauli {
    /// Identity.
    I = 0,
    /// Bit flip.
    X = 1,
    /// Combined bit and phase flip.
    Y = 2,
    /// Phase flip.
    Z = 3,
}

impl Pauli {
    /// All four letters in lexicographic (= code) order.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// The 2-bit letter code (`I=0, X=1, Y=2, Z=3`).
    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Inverse of [`Pauli::code`]; rejects values above 3.
    #[inline]
    pub fn from_code(code: u8) -> Result<Pauli> {
        match code {
            0 => Ok(Pauli::I),
            1 => Ok(Pauli::X),
            2 => Ok(Pauli::Y),
            3 => Ok(Pauli::Z),
            _ => Err(Error::code(format!("letter code {code} out of range 0..=3"))),
        }
    }

    /// Symplectic coordinates `(x, z)`: X-part and Z-part bits.
    ///
    /// `I=(0,0)`, `X=(1,0)`, `Y=(1,1)`, `Z=(0,1)`.
    #[inline]
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Letter from symplectic coordinates.
    #[inline]
    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// True for the identity letter.
    #[inline]
    pub fn is_identity(self) -> bool {
        matches!(self, Pauli::I)
    }

    /// One-character name.
    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Parse a one-character name (case-insensitive).
    pub fn from_char(c: char) -> Result<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::code(format!("unknown Pauli letter '{other}'"))),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Product modulo phase. Equals XOR of letter codes (the code map is
/// linear over the symplectic bits).
impl std::ops::Mul for Pauli {
    type Output = Pauli;

    // XOR is not a typo'd operator here: it is the Klein four-group law.
    #[allow(clippy::suspicious_arithmetic_impl)]
    #[inline]
    fn mul(self, rhs: Pauli) -> Pauli {
        // Safe by construction: XOR of two values in 0..=3 stays in 0..=3.
        match self.code() ^ rhs.code() {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

/// A tensor product of Pauli letters: one error pattern on an `N`-qubit block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErrorString(Vec<Pauli>);

impl ErrorString {
    /// Wrap a letter vector.
    pub fn new(letters: Vec<Pauli>) -> ErrorString {
        ErrorString(letters)
    }

    /// The identity pattern on `n` qubits.
    pub fn identity(n: usize) -> ErrorString {
        ErrorString(vec![Pauli::I; n])
    }

    /// Block length.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when the block length is zero.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letters in qubit order.
    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| !p.is_identity()).count()
    }

    /// Componentwise product modulo phase.
    ///
    /// Errors if the block lengths differ.
    pub fn mul(&self, rhs: &ErrorString) -> Result<ErrorString> {
        if self.len() != rhs.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: rhs.len(),
            });
        }
        Ok(ErrorString(
            self.0
                .iter()
                .zip(&rhs.0)
                .map(|(a, b)| *a * *b)
                .collect(),
        ))
    }

    /// Packed base-4 index with the first qubit as the most significant
    /// digit, so numeric order of indices equals lexicographic string order.
    ///
    /// Panics in debug builds past 32 letters (the index would overflow).
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.len() <= 32, "packed index overflows past 32 letters");
        self.0
            .iter()
            .fold(0u64, |acc, p| (acc << 2) | u64::from(p.code()))
    }

    /// Inverse of [`ErrorString::to_index`] for a block of `n` letters.
    pub fn from_index(mut index: u64, n: usize) -> ErrorString {
        let mut letters = vec![Pauli::I; n];
        for slot in letters.iter_mut().rev() {
            // Each 2-bit digit is a valid code, so from_code cannot fail.
            *slot = Pauli::from_code((index & 0b11) as u8).expect("2-bit code");
            index >>= 2;
        }
        ErrorString(letters)
    }

    /// X-part and Z-part bit masks (qubit `i` → bit `i`).
    ///
    /// Errors past 64 qubits, where the masks no longer fit.
    pub fn to_masks(&self) -> Result<(u64, u64)> {
        if self.len() > 64 {
            return Err(Error::LengthMismatch {
                expected: 64,
                got: self.len(),
            });
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (i, p) in self.0.iter().enumerate() {
            let (xi, zi) = p.xz();
            x |= (xi as u64) << i;
            z |= (zi as u64) << i;
        }
        Ok((x, z))
    }

    /// Build a string from X/Z bit masks.
    pub fn from_masks(x: u64, z: u64, n: usize) -> ErrorString {
        let letters = (0..n)
            .map(|i| Pauli::from_xz((x >> i) & 1 == 1, (z >> i) & 1 == 1))
            .collect();
        ErrorString(letters)
    }

    /// Parse from letter names, e.g. `"IXYZ"`.
    pub fn parse(s: &str) -> Result<ErrorString> {
        s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>().map(ErrorString)
    }
}

impl fmt::Display for ErrorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromIterator<Pauli> for ErrorString {
    fn from_iter<T: IntoIterator<Item = Pauli>>(iter: T) -> Self {
        ErrorString(iter.into_iter().collect())
    }
}
