//! Dense density-matrix oracle for the acceptance suite.
//!
//! Everything here is deliberately naive: build the actual `2^n × 2^n`
//! operators, apply the channel as an explicit Kraus sum, and take the
//! eigen-entropy. Slow, obviously correct, and entirely independent of the
//! coset bookkeeping used by the library implementation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use stegosim_core::channel::{string_probability, PauliChannel};
use stegosim_core::pauli::{ErrorString, Pauli};
use stegosim_core::qecc::{complete_to_lagrangian, Code};
use stegosim_core::Alphabet;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The 2×2 matrix of one Pauli letter.
pub fn pauli_matrix(p: Pauli) -> CMat {
    let entries = match p {
        Pauli::I => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        Pauli::X => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        Pauli::Y => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        Pauli::Z => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    };
    CMat::from_row_slice(2, 2, &entries)
}

/// Kronecker product over the letters, position 0 as the first factor.
pub fn string_operator(letters: &[Pauli]) -> CMat {
    let mut m = CMat::identity(1, 1);
    for &letter in letters {
        m = m.kronecker(&pauli_matrix(letter));
    }
    m
}

/// Hermitian operator of a symplectic generator vector (Y where both bits
/// are set).
fn vector_operator(x: u64, z: u64, n: usize) -> CMat {
    let letters: Vec<Pauli> = (0..n)
        .map(|j| Pauli::from_xz((x >> j) & 1 == 1, (z >> j) & 1 == 1))
        .collect();
    string_operator(&letters)
}

/// Rank-one projector onto the codeword the library pins: the joint +1
/// eigenstate of the code's stabilizers completed to a maximal commuting
/// set (pure-Z completions preferred, which selects the all-zero logical
/// computational-basis codeword).
pub fn codeword_projector(code: &Code) -> CMat {
    let n = code.n();
    let generators: Vec<(u64, u64)> = match code {
        Code::Classical(c) => c.rows().iter().map(|&row| (0, row)).collect(),
        Code::Stabilizer(s) => s.generators().to_vec(),
    };
    let full = complete_to_lagrangian(&generators, n).expect("completable stabilizer set");
    assert_eq!(full.len(), n, "a maximal commuting set has n generators");
    let dim = 1usize << n;
    let identity = CMat::identity(dim, dim);
    let mut projector = identity.clone();
    for &(x, z) in &full {
        let g = vector_operator(x, z, n);
        projector = &projector * (&identity + &g) * c(0.5, 0.0);
    }
    let trace: Complex64 = projector.diagonal().iter().sum();
    assert!(
        (trace.re - 1.0).abs() < 1e-9 && trace.im.abs() < 1e-12,
        "projector should be rank one, trace = {trace}"
    );
    projector
}

/// Output entropy of the channel on the pinned codeword, via the explicit
/// Kraus sum and an eigendecomposition.
pub fn dense_output_entropy(code: &Code, channel: &PauliChannel) -> f64 {
    let n = code.n();
    let projector = codeword_projector(code);
    let dim = 1usize << n;
    let mut rho = CMat::zeros(dim, dim);
    let strings: Vec<ErrorString> = match channel.alphabet() {
        Alphabet::Binary => (0..1u64 << n)
            .map(|mask| ErrorString::from_masks(mask, 0, n))
            .collect(),
        Alphabet::Quaternary => (0..4u64.pow(n as u32))
            .map(|idx| ErrorString::from_index(idx, n))
            .collect(),
    };
    for e in &strings {
        let p = string_probability(channel, e).expect("string in the channel alphabet");
        if p == 0.0 {
            continue;
        }
        let op = string_operator(e.letters());
        rho += &op * &projector * op.adjoint() * c(p, 0.0);
    }
    let eigenvalues = rho.symmetric_eigen().eigenvalues;
    let mut h = 0.0;
    for &lambda in eigenvalues.iter() {
        assert!(lambda > -1e-12, "density matrix eigenvalue {lambda} < 0");
        if lambda > 1e-300 {
            h -= lambda * lambda.log2();
        }
    }
    h
}
