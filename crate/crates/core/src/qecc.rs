//! Concrete nondegenerate codes: syndrome extraction, nondegeneracy
//! checks, and exact output entropy on a codeword.
//!
//! The protocol itself never simulates encoded states — with a
//! nondegenerate code the receiver learns the total error string exactly,
//! so the pipeline works on error strings directly. The codes here exist
//! to *validate* that model at small block lengths: that the relevant
//! error sets really do have distinct syndromes, and that the entropy of
//! a channel's output on a codeword matches the coset-aggregated Shannon
//! entropy used by the capacity bounds.
//!
//! Everything lives in the symplectic (binary) representation: a Pauli
//! string modulo phase is a pair of bitmasks `(x, z)` with letter `j` at
//! bit `j`, and commutation is the symplectic inner product
//! `parity(a.x & b.z) ⊕ parity(a.z & b.x)`.

use std::collections::{HashMap, HashSet};

use crate::channel::PauliChannel;
use crate::error::{Error, Result};
use crate::pauli::{ErrorString, Pauli};
use crate::typicality::DEFAULT_ENUMERATION_CAP;

/// A classical linear code given by its parity-check matrix, used for the
/// bit-flip specialization. Row `i` of `H` is a bitmask over the `n`
/// positions it checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckCode {
    name: String,
    n: usize,
    rows: Vec<u64>,
}

impl ParityCheckCode {
    /// Build and validate: rows must be linearly independent over GF(2)
    /// and fit the length.
    pub fn new(name: impl Into<String>, n: usize, rows: Vec<u64>) -> Result<ParityCheckCode> {
        if n == 0 || n > 64 {
            return Err(Error::code(format!("length {n} outside 1..=64")));
        }
        let mask = ones(n);
        let mut basis = Gf2Basis::new();
        for (i, &row) in rows.iter().enumerate() {
            if row & !mask != 0 {
                return Err(Error::code(format!("row {i} exceeds length {n}")));
            }
            if !basis.insert(u128::from(row)) {
                return Err(Error::code(format!("row {i} is linearly dependent")));
            }
        }
        Ok(ParityCheckCode {
            name: name.into(),
            n,
            rows,
        })
    }

    /// Code length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code dimension `k = n − rank(H)`.
    pub fn k(&self) -> usize {
        self.n - self.rows.len()
    }

    /// Parity-check rows as bitmasks.
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// `H·e` over GF(2), applied to the X-support of the error (a Y letter
    /// flips the bit just as X does; Z letters are invisible to a
    /// classical check).
    pub fn syndrome(&self, e: &ErrorString) -> Result<u64> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: e.len(),
            });
        }
        let (x, _) = e.to_masks()?;
        Ok(self
            .rows
            .iter()
            .enumerate()
            .fold(0u64, |s, (i, &row)| s | (parity(row & x) << i)))
    }
}

/// A stabilizer code given by its generators in symplectic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    /// `(x_mask, z_mask)` per generator.
    generators: Vec<(u64, u64)>,
}

impl StabilizerCode {
    /// Build and validate: generators must pairwise commute and be
    /// linearly independent in the symplectic representation.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        generators: Vec<(u64, u64)>,
    ) -> Result<StabilizerCode> {
        if n == 0 || n > 64 {
            return Err(Error::code(format!("length {n} outside 1..=64")));
        }
        let mask = ones(n);
        let mut basis = Gf2Basis::new();
        for (i, &(x, z)) in generators.iter().enumerate() {
            if x & !mask != 0 || z & !mask != 0 {
                return Err(Error::code(format!("generator {i} exceeds length {n}")));
            }
            if !basis.insert(sympl_vec(x, z, n)) {
                return Err(Error::code(format!("generator {i} is linearly dependent")));
            }
            for (j, &other) in generators[..i].iter().enumerate() {
                if sympl_product((x, z), other) != 0 {
                    return Err(Error::code(format!("generators {j} and {i} anticommute")));
                }
            }
        }
        Ok(StabilizerCode {
            name: name.into(),
            n,
            generators,
        })
    }

    /// Parse generators from Pauli letters, e.g. `["XZZXI", "IXZZX", …]`.
    pub fn from_strings(name: impl Into<String>, generators: &[&str]) -> Result<StabilizerCode> {
        let parsed: Vec<ErrorString> = generators
            .iter()
            .map(|s| ErrorString::parse(s))
            .collect::<Result<_>>()?;
        let n = parsed.first().map_or(0, ErrorString::len);
        let masks = parsed
            .iter()
            .map(|g| {
                if g.len() != n {
                    return Err(Error::code("generators have unequal lengths"));
                }
                g.to_masks()
            })
            .collect::<Result<_>>()?;
        StabilizerCode::new(name, n, masks)
    }

    /// Number of physical qubits.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of logical qubits `k = n − (#generators)`.
    pub fn k(&self) -> usize {
        self.n - self.generators.len()
    }

    /// Generators as `(x, z)` mask pairs.
    pub fn generators(&self) -> &[(u64, u64)] {
        &self.generators
    }

    /// Commutation pattern of the error with each generator; bit `i` is
    /// the symplectic inner product with generator `i`.
    pub fn syndrome(&self, e: &ErrorString) -> Result<u64> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: e.len(),
            });
        }
        let masks = e.to_masks()?;
        Ok(self
            .generators
            .iter()
            .enumerate()
            .fold(0u64, |s, (i, &g)| {
                s | (u64::from(sympl_product(g, masks)) << i)
            }))
    }
}

/// Either flavour of code, for APIs that accept both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Code {
    Classical(ParityCheckCode),
    Stabilizer(StabilizerCode),
}

impl Code {
    /// Code length.
    pub fn n(&self) -> usize {
        match self {
            Code::Classical(c) => c.n(),
            Code::Stabilizer(c) => c.n(),
        }
    }

    /// Display name.
    pub fn name(&self) -> &str {
        match self {
            Code::Classical(c) => &c.name,
            Code::Stabilizer(c) => &c.name,
        }
    }

    /// Number of syndrome bits.
    pub fn syndrome_bits(&self) -> usize {
        match self {
            Code::Classical(c) => c.rows.len(),
            Code::Stabilizer(c) => c.generators.len(),
        }
    }

    /// `2^(syndrome bits)`.
    pub fn syndrome_count(&self) -> u64 {
        1u64 << self.syndrome_bits()
    }

    /// Syndrome of an error string.
    pub fn syndrome(&self, e: &ErrorString) -> Result<u64> {
        match self {
            Code::Classical(c) => c.syndrome(e),
            Code::Stabilizer(c) => c.syndrome(e),
        }
    }

    /// The code's stabilizer generators as symplectic vectors. A classical
    /// check row acts like a Z-type stabilizer: it measures X-support
    /// parity and leaves the codeword basis alone.
    fn stabilizer_vectors(&self) -> Vec<(u64, u64)> {
        match self {
            Code::Classical(c) => c.rows.iter().map(|&r| (0, r)).collect(),
            Code::Stabilizer(c) => c.generators.clone(),
        }
    }
}

/// True iff the syndrome map is injective on the given error set
/// (duplicates in the slice collapse to one set element).
pub fn is_nondegenerate_on(code: &Code, errors: &[ErrorString]) -> Result<bool> {
    let distinct: HashSet<&ErrorString> = errors.iter().collect();
    let mut seen = HashSet::with_capacity(distinct.len());
    for e in distinct {
        if !seen.insert(code.syndrome(e)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entropy in bits of `𝒩^{⊗N}` applied to a codeword.
///
/// Two error strings produce the same output state exactly when they
/// differ by an element of the codeword's full stabilizer — the code
/// stabilizer extended to a maximal commuting (Lagrangian) group by
/// logical operators fixing the chosen codeword. We complete with pure-Z
/// logicals, which always suffice and pin the codeword to the all-zeros
/// logical basis state (so a classical code's codeword is `|0…0⟩`).
/// Distinct cosets give orthogonal outputs, hence the von Neumann entropy
/// is the Shannon entropy of the channel probability aggregated over
/// cosets.
pub fn coset_output_entropy(code: &Code, ch: &PauliChannel) -> Result<f64> {
    let n = code.n();
    let support = ch.support();
    let required = (support.len() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if required > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            required,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }

    let lagrangian = complete_to_lagrangian(&code.stabilizer_vectors(), n)?;
    let mut basis = Gf2Basis::new();
    for &(x, z) in &lagrangian {
        let inserted = basis.insert(sympl_vec(x, z, n));
        debug_assert!(inserted, "Lagrangian basis must be independent");
    }

    // Reduced coset contribution of each letter at each position; the
    // label of a string is the XOR of its letters' contributions (the
    // canonical-representative map is linear over GF(2)).
    let contrib: Vec<[u128; 4]> = (0..n)
        .map(|pos| {
            Pauli::ALL.map(|letter| {
                let (xb, zb) = letter.xz();
                basis.reduce(sympl_vec(u64::from(xb) << pos, u64::from(zb) << pos, n))
            })
        })
        .collect();

    let mut mass: HashMap<u128, f64> = HashMap::new();
    let letters: Vec<(usize, f64)> = support
        .iter()
        .map(|&l| (l.code() as usize, ch.prob(l)))
        .collect();
    accumulate_cosets(&contrib, &letters, 0, 0, 1.0, &mut mass);

    Ok(mass
        .values()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum())
}

/// Depth-first walk over support strings, carrying the running coset
/// label and probability.
fn accumulate_cosets(
    contrib: &[[u128; 4]],
    letters: &[(usize, f64)],
    pos: usize,
    label: u128,
    prob: f64,
    mass: &mut HashMap<u128, f64>,
) {
    if pos == contrib.len() {
        *mass.entry(label).or_insert(0.0) += prob;
        return;
    }
    for &(code, p) in letters {
        accumulate_cosets(
            contrib,
            letters,
            pos + 1,
            label ^ contrib[pos][code],
            prob * p,
            mass,
        );
    }
}

/// Extend commuting, independent generators to a maximal commuting group
/// of rank `n`, adding only pure-Z vectors.
///
/// Pure-Z completion always succeeds: the Z-only vectors commuting with
/// the generators form a space of dimension `n − rank(X-parts)`, of which
/// the generators' own pure-Z span uses `(n−k) − rank(X-parts)`, leaving
/// exactly the `k` needed.
pub fn complete_to_lagrangian(generators: &[(u64, u64)], n: usize) -> Result<Vec<(u64, u64)>> {
    let mut basis = Gf2Basis::new();
    for &(x, z) in generators {
        if !basis.insert(sympl_vec(x, z, n)) {
            return Err(Error::code("generators are linearly dependent"));
        }
    }
    let mut completed: Vec<(u64, u64)> = generators.to_vec();
    // Solve parity(g.x & z) = 0 for all generators g: the nullspace of the
    // X-part matrix.
    for z in gf2_nullspace(&generators.iter().map(|&(x, _)| x).collect::<Vec<_>>(), n) {
        if completed.len() == n {
            break;
        }
        if basis.insert(sympl_vec(0, z, n)) {
            completed.push((0, z));
        }
    }
    if completed.len() != n {
        return Err(Error::code(
            "failed to complete the stabilizer to a maximal commuting group",
        ));
    }
    Ok(completed)
}

/// Low `n` bits set.
fn ones(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Parity of a bitmask, as the low bit.
#[inline]
fn parity(v: u64) -> u64 {
    u64::from(v.count_ones() & 1)
}

/// X-part in bits `0..n`, Z-part in bits `n..2n`.
#[inline]
fn sympl_vec(x: u64, z: u64, n: usize) -> u128 {
    u128::from(x) | (u128::from(z) << n)
}

/// Symplectic inner product: 0 when the Paulis commute, 1 otherwise.
#[inline]
fn sympl_product(a: (u64, u64), b: (u64, u64)) -> u8 {
    (((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) & 1) as u8
}

/// A GF(2) row space kept in fully reduced echelon form, so reduction to
/// the canonical coset representative is a single elimination pass.
struct Gf2Basis {
    /// `(pivot_bit, row)`; each pivot appears in exactly one row.
    rows: Vec<(u128, u128)>,
}

impl Gf2Basis {
    fn new() -> Gf2Basis {
        Gf2Basis { rows: Vec::new() }
    }

    /// Canonical representative of `v`'s coset: eliminate every pivot bit.
    fn reduce(&self, mut v: u128) -> u128 {
        for &(pivot, row) in &self.rows {
            if v & pivot != 0 {
                v ^= row;
            }
        }
        v
    }

    /// Add `v` to the span. Returns false when `v` was already in it.
    fn insert(&mut self, v: u128) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let pivot = 1u128 << (127 - v.leading_zeros());
        // Keep full reduction: clear the new pivot from existing rows.
        for (_, row) in &mut self.rows {
            if *row & pivot != 0 {
                *row ^= v;
            }
        }
        self.rows.push((pivot, v));
        true
    }
}

/// Basis of `{v : parity(row & v) = 0 for all rows}` over `n` bits.
fn gf2_nullspace(rows: &[u64], n: usize) -> Vec<u64> {
    // Row-reduce, tracking pivot columns.
    let mut reduced: Vec<u64> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for &row in rows {
        let mut r = row;
        for (&p, &rr) in pivots.iter().zip(&reduced) {
            if r & (1 << p) != 0 {
                r ^= rr;
            }
        }
        if r != 0 {
            let p = r.trailing_zeros() as usize;
            for rr in &mut reduced {
                if *rr & (1 << p) != 0 {
                    *rr ^= r;
                }
            }
            reduced.push(r);
            pivots.push(p);
        }
    }
    // One basis vector per free column: that column plus the dependent
    // pivot entries.
    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    (0..n)
        .filter(|c| !pivot_set.contains(c))
        .map(|c| {
            let mut v = 1u64 << c;
            for (&p, &rr) in pivots.iter().zip(&reduced) {
                if rr & (1 << c) != 0 {
                    v |= 1 << p;
                }
            }
            v
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Library and text import
// ---------------------------------------------------------------------------

/// Three-bit repetition code, checks `110` and `011`.
pub fn rep3() -> Code {
    Code::Classical(ParityCheckCode::new("rep3", 3, vec![0b011, 0b110]).expect("valid"))
}

/// Five-bit repetition code, adjacent-pair checks.
pub fn rep5() -> Code {
    Code::Classical(
        ParityCheckCode::new("rep5", 5, vec![0b00011, 0b00110, 0b01100, 0b11000])
            .expect("valid"),
    )
}

/// Hamming [7,4] with column `j` of `H` equal to the binary expansion of
/// `j+1`, so a single bit flip at position `j` has syndrome `j+1`.
pub fn hamming74() -> Code {
    let rows = (0..3)
        .map(|bit| {
            (0..7u64)
                .filter(|&col| (col + 1) & (1 << bit) != 0)
                .fold(0u64, |m, col| m | (1 << col))
        })
        .collect();
    Code::Classical(ParityCheckCode::new("hamming74", 7, rows).expect("valid"))
}

/// The [[5,1,3]] five-qubit code, generators `XZZXI` and its cyclic
/// shifts.
pub fn five_qubit() -> Code {
    Code::Stabilizer(
        StabilizerCode::from_strings("five_qubit", &["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"])
            .expect("valid"),
    )
}

/// Look up a built-in code by identifier.
pub fn code_by_id(id: &str) -> Result<Code> {
    match id {
        "rep3" => Ok(rep3()),
        "rep5" => Ok(rep5()),
        "hamming74" => Ok(hamming74()),
        "five_qubit" => Ok(five_qubit()),
        other => Err(Error::code(format!(
            "unknown code '{other}' (built-ins: rep3, rep5, hamming74, five_qubit)"
        ))),
    }
}

/// Parse a code from plain text: one row per line, either `0`/`1` digits
/// (parity-check matrix) or `I`/`X`/`Y`/`Z` letters (stabilizer
/// generators). Blank lines and `#` comments are skipped. Position `j` in
/// a row is position `j` of the code.
pub fn parse_code_text(text: &str) -> Result<Code> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.is_empty() {
        return Err(Error::code("no rows in code text"));
    }
    let classical = lines[0].chars().all(|c| c == '0' || c == '1');
    let n = lines[0].chars().count();
    if classical {
        let rows = lines
            .iter()
            .map(|line| {
                if line.chars().count() != n {
                    return Err(Error::code("rows have unequal lengths"));
                }
                line.chars()
                    .enumerate()
                    .try_fold(0u64, |m, (j, c)| match c {
                        '0' => Ok(m),
                        '1' => Ok(m | (1 << j)),
                        other => Err(Error::code(format!("unexpected character '{other}'"))),
                    })
            })
            .collect::<Result<_>>()?;
        Ok(Code::Classical(ParityCheckCode::new("imported", n, rows)?))
    } else {
        let code = StabilizerCode::from_strings("imported", &lines)?;
        Ok(Code::Stabilizer(code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{binary_entropy, depolarizing_entropy, Alphabet};

    fn weight1_x_errors(n: usize) -> Vec<ErrorString> {
        (0..n).map(|j| ErrorString::from_masks(1 << j, 0, n)).collect()
    }

    fn weight1_pauli_errors(n: usize) -> Vec<ErrorString> {
        let mut out = Vec::new();
        for j in 0..n {
            for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut letters = vec![Pauli::I; n];
                letters[j] = letter;
                out.push(ErrorString::new(letters));
            }
        }
        out
    }

    #[test]
    fn identity_error_has_zero_syndrome_on_every_code() {
        for id in ["rep3", "rep5", "hamming74", "five_qubit"] {
            let code = code_by_id(id).unwrap();
            let e = ErrorString::identity(code.n());
            assert_eq!(code.syndrome(&e).unwrap(), 0, "{id}");
        }
    }

    #[test]
    fn hamming_weight1_syndromes_read_off_the_position() {
        let code = hamming74();
        let syndromes: Vec<u64> = weight1_x_errors(7)
            .iter()
            .map(|e| code.syndrome(e).unwrap())
            .collect();
        // Column j of H is the binary expansion of j+1.
        assert_eq!(syndromes, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn five_qubit_weight1_syndromes_are_distinct_and_nonzero() {
        let code = five_qubit();
        let errors = weight1_pauli_errors(5);
        assert_eq!(errors.len(), 15);
        let syndromes: HashSet<u64> = errors
            .iter()
            .map(|e| code.syndrome(e).unwrap())
            .collect();
        assert_eq!(syndromes.len(), 15);
        assert!(!syndromes.contains(&0));
        // Perfect code: 15 + identity fill all 16 syndromes.
        assert!(is_nondegenerate_on(
            &code,
            &[errors, vec![ErrorString::identity(5)]].concat()
        )
        .unwrap());
    }

    #[test]
    fn rep3_syndrome_table_matches_brute_force() {
        let code = rep3();
        // Independent dot-product oracle over all 8 binary errors. Check
        // row 0 covers positions {0,1}, row 1 covers {1,2}.
        let h = [[1u64, 1, 0], [0, 1, 1]];
        for x in 0..8u64 {
            let e = ErrorString::from_masks(x, 0, 3);
            let mut expect = 0u64;
            for (i, row) in h.iter().enumerate() {
                let dot: u64 = (0..3).map(|j| row[j] * ((x >> j) & 1)).sum();
                expect |= (dot % 2) << i;
            }
            assert_eq!(code.syndrome(&e).unwrap(), expect);
        }
        // IIX and XXI collide (both flip parity of the second check only),
        // so rep3 is degenerate on that pair.
        let iix = ErrorString::parse("IIX").unwrap();
        let xxi = ErrorString::parse("XXI").unwrap();
        assert_eq!(code.syndrome(&iix).unwrap(), code.syndrome(&xxi).unwrap());
        assert!(!is_nondegenerate_on(&code, &[iix, xxi]).unwrap());
    }

    #[test]
    fn hamming_is_nondegenerate_on_weight_le_1() {
        let code = hamming74();
        let mut errors = weight1_x_errors(7);
        errors.push(ErrorString::identity(7));
        assert!(is_nondegenerate_on(&code, &errors).unwrap());
        // Syndromes 0..=7: all 8 used.
        let syndromes: HashSet<u64> = errors
            .iter()
            .map(|e| code.syndrome(e).unwrap())
            .collect();
        assert_eq!(syndromes.len(), 8);
        assert_eq!(code.syndrome_count(), 8);
    }

    #[test]
    fn singleton_sets_are_trivially_nondegenerate() {
        let code = rep3();
        let e = ErrorString::parse("XXX").unwrap();
        assert!(is_nondegenerate_on(&code, std::slice::from_ref(&e)).unwrap());
        // Duplicates collapse to one set element.
        assert!(is_nondegenerate_on(&code, &[e.clone(), e]).unwrap());
    }

    #[test]
    fn syndrome_is_linear() {
        for code in [hamming74(), five_qubit()] {
            let n = code.n();
            let mut seed = 1u64;
            for _ in 0..100 {
                // xorshift for reproducible pairs
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                let a = ErrorString::from_index(seed % (1 << (2 * n)) as u64, n);
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                let b = ErrorString::from_index(seed % (1 << (2 * n)) as u64, n);
                let ab = a.mul(&b).unwrap();
                assert_eq!(
                    code.syndrome(&ab).unwrap(),
                    code.syndrome(&a).unwrap() ^ code.syndrome(&b).unwrap()
                );
            }
        }
    }

    #[test]
    fn css_z_stabilizers_reduce_to_the_classical_syndrome() {
        // Promote each classical code's H to Z-type stabilizers and check
        // X-error syndromes agree.
        for classical in [rep3(), hamming74()] {
            let Code::Classical(pc) = &classical else {
                unreachable!()
            };
            let gens: Vec<(u64, u64)> = pc.rows().iter().map(|&r| (0, r)).collect();
            let stab =
                Code::Stabilizer(StabilizerCode::new("css", pc.n(), gens).unwrap());
            for x in 0..(1u64 << pc.n()) {
                let e = ErrorString::from_masks(x, 0, pc.n());
                assert_eq!(
                    stab.syndrome(&e).unwrap(),
                    classical.syndrome(&e).unwrap()
                );
            }
        }
    }

    #[test]
    fn lagrangian_completion_is_maximal_commuting_and_contains_the_code() {
        for code in [rep3(), rep5(), hamming74(), five_qubit()] {
            let gens = code.stabilizer_vectors();
            let full = complete_to_lagrangian(&gens, code.n()).unwrap();
            assert_eq!(full.len(), code.n());
            for (i, &a) in full.iter().enumerate() {
                for &b in &full[..i] {
                    assert_eq!(sympl_product(a, b), 0);
                }
            }
            // Original generators lie in the span.
            let mut basis = Gf2Basis::new();
            for &(x, z) in &full {
                assert!(basis.insert(sympl_vec(x, z, code.n())));
            }
            for &(x, z) in &gens {
                assert_eq!(basis.reduce(sympl_vec(x, z, code.n())), 0);
            }
        }
    }

    #[test]
    fn identity_channel_output_is_pure() {
        for code in [rep3(), hamming74(), five_qubit()] {
            for alphabet in [Alphabet::Binary, Alphabet::Quaternary] {
                let ch = PauliChannel::identity(alphabet);
                assert_eq!(coset_output_entropy(&code, &ch).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn trivial_one_qubit_code_gives_binary_entropy() {
        // No stabilizers: the completion pins |0⟩, and bit-flip noise
        // makes the rank-2 diagonal state diag(1−p, p).
        let code = Code::Stabilizer(StabilizerCode::new("trivial", 1, vec![]).unwrap());
        for p in [0.0, 0.05, 0.1, 0.3, 0.5] {
            let ch = PauliChannel::bit_flip(p).unwrap();
            let got = coset_output_entropy(&code, &ch).unwrap();
            assert!((got - binary_entropy(p).unwrap()).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn five_qubit_depolarizing_entropy_matches_the_dense_oracle_values() {
        let code = five_qubit();
        let got = coset_output_entropy(&code, &PauliChannel::depolarizing(0.05).unwrap())
            .unwrap();
        assert!((got - 1.734_544_154_010_302_2).abs() < 1e-10, "got {got}");
        let got = coset_output_entropy(&code, &PauliChannel::depolarizing(0.1).unwrap())
            .unwrap();
        assert!((got - 2.804_723_406_667_52).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn coset_entropy_is_bounded_by_the_raw_error_entropy() {
        // ≤ always; strict for the five-qubit code under full depolarizing
        // support (1024 errors land in 32 cosets).
        let ch = PauliChannel::depolarizing(0.05).unwrap();
        let raw = 5.0 * depolarizing_entropy(0.05).unwrap();
        let coset = coset_output_entropy(&five_qubit(), &ch).unwrap();
        assert!((raw - 1.828_225_410_760_070_4).abs() < 1e-12);
        assert!(coset <= raw + 1e-12);
        assert!(coset < raw - 0.05);

        for code in [rep3(), rep5(), hamming74(), five_qubit()] {
            for ch in [
                PauliChannel::bit_flip(0.1).unwrap(),
                PauliChannel::depolarizing(0.1).unwrap(),
            ] {
                let raw = code.n() as f64 * ch.entropy();
                let coset = coset_output_entropy(&code, &ch).unwrap();
                assert!(
                    coset <= raw + 1e-9,
                    "{} under {:?}: {coset} vs {raw}",
                    code.name(),
                    ch.alphabet()
                );
            }
        }
    }

    #[test]
    fn classical_codes_act_nondegenerately_on_bit_flip_noise() {
        // Distinct X-strings always differ outside the pure-Z Lagrangian,
        // so the coset entropy equals the raw entropy exactly.
        for code in [rep3(), rep5(), hamming74()] {
            let ch = PauliChannel::bit_flip(0.1).unwrap();
            let raw = code.n() as f64 * binary_entropy(0.1).unwrap();
            let coset = coset_output_entropy(&code, &ch).unwrap();
            assert!((coset - raw).abs() < 1e-10, "{}", code.name());
        }
    }

    #[test]
    fn classical_code_depolarizing_entropy_is_the_x_marginal() {
        // Z letters act trivially on |0…0⟩, so the output is diagonal in
        // the computational basis with the X-marginal distribution:
        // per letter, P(flip) = p/3 + p/3 = 2p/3.
        let p = 0.1;
        let ch = PauliChannel::depolarizing(p).unwrap();
        let got = coset_output_entropy(&rep3(), &ch).unwrap();
        let want = 3.0 * binary_entropy(2.0 * p / 3.0).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        // A 13-qubit stabilizer code under quaternary support: 4^13 > 2^24.
        let gens: Vec<(u64, u64)> = (0..12).map(|i| (0, 0b11 << i)).collect();
        let code = Code::Stabilizer(StabilizerCode::new("chain", 13, gens).unwrap());
        let ch = PauliChannel::depolarizing(0.1).unwrap();
        assert!(matches!(
            coset_output_entropy(&code, &ch),
            Err(Error::EnumerationTooLarge { .. })
        ));
        // The same length is fine under binary support (2^13 strings).
        let ch = PauliChannel::bit_flip(0.1).unwrap();
        assert!(coset_output_entropy(&code, &ch).is_ok());
    }

    #[test]
    fn code_text_round_trips_the_library() {
        let parsed = parse_code_text("# repetition\n110\n011\n").unwrap();
        let Code::Classical(pc) = &parsed else { panic!() };
        assert_eq!(pc.n(), 3);
        let want = rep3();
        for x in 0..8u64 {
            let e = ErrorString::from_masks(x, 0, 3);
            assert_eq!(parsed.syndrome(&e).unwrap(), want.syndrome(&e).unwrap());
        }

        let parsed = parse_code_text("XZZXI\nIXZZX\nXIXZZ\nZXIXZ\n").unwrap();
        let want = five_qubit();
        for idx in 0..1024u64 {
            let e = ErrorString::from_index(idx, 5);
            assert_eq!(parsed.syndrome(&e).unwrap(), want.syndrome(&e).unwrap());
        }
    }

    #[test]
    fn code_text_rejects_malformed_input() {
        assert!(parse_code_text("").is_err());
        assert!(parse_code_text("110\n01").is_err()); // ragged
        assert!(parse_code_text("110\n110").is_err()); // dependent
        assert!(parse_code_text("XX\nZI").is_err()); // anticommuting
        assert!(parse_code_text("1X0").is_err()); // mixed alphabet
    }

    #[test]
    fn code_by_id_lookup() {
        assert_eq!(code_by_id("rep3").unwrap().n(), 3);
        assert_eq!(code_by_id("rep5").unwrap().n(), 5);
        assert_eq!(code_by_id("hamming74").unwrap().n(), 7);
        assert_eq!(code_by_id("five_qubit").unwrap().n(), 5);
        assert!(code_by_id("golay").is_err());
    }

    #[test]
    fn gf2_nullspace_solves_the_parity_constraints() {
        let rows = vec![0b1011u64, 0b0110];
        let null = gf2_nullspace(&rows, 4);
        assert_eq!(null.len(), 2);
        for v in null {
            for &r in &rows {
                assert_eq!(parity(r & v), 0);
            }
        }
        // Full-rank square matrix → empty nullspace.
        assert!(gf2_nullspace(&[0b01, 0b10], 2).is_empty());
    }
}
