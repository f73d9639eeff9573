//! Desk-scale planar surface-code simulator.
//!
//! Qubits live on a (2d-1) x (2d-1) grid: data qubits where the coordinate
//! sum is even, Z-type measurement qubits at (odd row, even column), X-type
//! at (even row, odd column). Each measurement qubit monitors its in-grid
//! data neighbors. Errors are injected as independent depolarizing flips,
//! syndromes extracted ideally (single noiseless round), and corrections
//! inferred by exact minimum-weight matching over the flipped measurement
//! qubits. The logical-X operator runs down data column 0 and logical-Z
//! across data row 0; a residual chain that flips either one is a logical
//! failure.

mod decoder;
mod estimate;

pub use decoder::{
    boundary_weight, decode_mwpm, matching_total_weight, pair_weight, MAX_SYNDROMES_PER_TYPE,
};
pub use estimate::{calibrate_omega, logical_error_rate, logical_failure, ErrorRateEstimate};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceCodeError {
    #[error("code distance must be at least 1, got {0}")]
    BadDistance(u32),
    #[error(
        "{syndromes} flipped {kind} measurements exceed the exact-matching bound of \
         {MAX_SYNDROMES_PER_TYPE}; sample at a lower physical error rate"
    )]
    Tractability { kind: SyndromeKind, syndromes: usize },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("input fidelity {0} outside (0, 1]")]
    BadFidelity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyndromeKind {
    /// Flipped Z-type measurements, signaling X or Y data errors.
    Z,
    /// Flipped X-type measurements, signaling Y or Z data errors.
    X,
}

impl std::fmt::Display for SyndromeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SyndromeKind::Z => "Z-type",
            SyndromeKind::X => "X-type",
        })
    }
}

/// Grid position, row-major ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub r: u16,
    pub c: u16,
}

impl Coord {
    pub fn new(r: u16, c: u16) -> Self {
        Coord { r, c }
    }
}

impl std::fmt::Display for Coord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.r, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Group composition modulo phase: equal non-identity factors cancel,
    /// distinct ones produce the third.
    pub fn compose(self, other: Pauli) -> Pauli {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => p,
            (a, b) if a == b => I,
            (X, Y) | (Y, X) => Z,
            (X, Z) | (Z, X) => Y,
            (Y, Z) | (Z, Y) => X,
            _ => unreachable!(),
        }
    }

    pub fn flips_z_checks(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn flips_x_checks(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

/// Planar surface-code geometry for one distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceCodeLayout {
    pub distance: u32,
    /// Cells per axis; coordinates run over [0, side - 1] squared.
    pub side: u16,
    /// Data qubits, row-major sorted.
    pub data: Vec<Coord>,
    /// Z-type measurement qubits (odd row, even column), sorted.
    pub measure_z: Vec<Coord>,
    /// X-type measurement qubits (even row, odd column), sorted.
    pub measure_x: Vec<Coord>,
    /// Dense grid -> data slot lookup.
    data_slot: Vec<Option<u16>>,
}

pub fn build_layout(distance: u32) -> Result<SurfaceCodeLayout, SurfaceCodeError> {
    if distance < 1 {
        return Err(SurfaceCodeError::BadDistance(distance));
    }
    let side = (2 * distance - 1) as u16;
    let mut data = Vec::new();
    let mut measure_z = Vec::new();
    let mut measure_x = Vec::new();
    let mut data_slot = vec![None; side as usize * side as usize];
    for r in 0..side {
        for c in 0..side {
            let coord = Coord { r, c };
            if (r + c) % 2 == 0 {
                data_slot[(r as usize) * side as usize + c as usize] = Some(data.len() as u16);
                data.push(coord);
            } else if r % 2 == 1 {
                measure_z.push(coord);
            } else {
                measure_x.push(coord);
            }
        }
    }
    Ok(SurfaceCodeLayout {
        distance,
        side,
        data,
        measure_z,
        measure_x,
        data_slot,
    })
}

impl SurfaceCodeLayout {
    pub fn data_count(&self) -> usize {
        self.data.len()
    }

    /// Slot of a data qubit in the dense pattern vectors.
    pub fn data_slot(&self, coord: Coord) -> Option<usize> {
        if coord.r >= self.side || coord.c >= self.side {
            return None;
        }
        self.data_slot[(coord.r as usize) * self.side as usize + coord.c as usize]
            .map(|s| s as usize)
    }

    /// In-grid data qubits adjacent to a measurement qubit.
    pub fn neighbors(&self, of: Coord) -> Vec<Coord> {
        let side = self.side as i32;
        let mut out = Vec::with_capacity(4);
        for (dr, dc) in [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)] {
            let (r, c) = (of.r as i32 + dr, of.c as i32 + dc);
            if r >= 0 && r < side && c >= 0 && c < side {
                let coord = Coord {
                    r: r as u16,
                    c: c as u16,
                };
                if self.data_slot(coord).is_some() {
                    out.push(coord);
                }
            }
        }
        out
    }

    /// Support of the logical-X operator: the data qubits of column 0, the
    /// vertical chain whose X product commutes with every check.
    pub fn logical_x_support(&self) -> Vec<Coord> {
        self.data.iter().copied().filter(|q| q.c == 0).collect()
    }

    /// Support of the logical-Z operator: the data qubits of row 0.
    pub fn logical_z_support(&self) -> Vec<Coord> {
        self.data.iter().copied().filter(|q| q.r == 0).collect()
    }
}

/// Per-data-qubit Pauli assignment, dense over `layout.data` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliPattern {
    pub paulis: Vec<Pauli>,
}

impl PauliPattern {
    pub fn identity(layout: &SurfaceCodeLayout) -> Self {
        PauliPattern {
            paulis: vec![Pauli::I; layout.data_count()],
        }
    }

    pub fn get(&self, layout: &SurfaceCodeLayout, coord: Coord) -> Pauli {
        layout
            .data_slot(coord)
            .map(|s| self.paulis[s])
            .unwrap_or(Pauli::I)
    }

    pub fn apply(&mut self, layout: &SurfaceCodeLayout, coord: Coord, p: Pauli) {
        let slot = layout.data_slot(coord).expect("coordinate holds a data qubit");
        self.paulis[slot] = self.paulis[slot].compose(p);
    }

    /// Qubit-wise composition modulo phase.
    pub fn compose(&self, other: &PauliPattern) -> PauliPattern {
        PauliPattern {
            paulis: self
                .paulis
                .iter()
                .zip(&other.paulis)
                .map(|(&a, &b)| a.compose(b))
                .collect(),
        }
    }

    pub fn weight(&self) -> usize {
        self.paulis.iter().filter(|&&p| p != Pauli::I).count()
    }
}

/// Flipped measurement qubits of one extraction round, sorted per type.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SyndromeMap {
    pub flipped_z: Vec<Coord>,
    pub flipped_x: Vec<Coord>,
}

impl SyndromeMap {
    pub fn is_empty(&self) -> bool {
        self.flipped_z.is_empty() && self.flipped_x.is_empty()
    }
}

/// Independent depolarizing channel: each data qubit suffers X, Y, or Z with
/// probability p/3 each. Deterministic per seed.
pub fn inject_errors(
    layout: &SurfaceCodeLayout,
    p: f64,
    seed: u64,
) -> Result<PauliPattern, SurfaceCodeError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SurfaceCodeError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paulis = layout
        .data
        .iter()
        .map(|_| {
            let u: f64 = rng.gen();
            if u < p / 3.0 {
                Pauli::X
            } else if u < 2.0 * p / 3.0 {
                Pauli::Y
            } else if u < p {
                Pauli::Z
            } else {
                Pauli::I
            }
        })
        .collect();
    Ok(PauliPattern { paulis })
}

/// Ideal one-round parity readout: a Z-type check flips on odd X/Y weight
/// among its neighbors, an X-type check on odd Y/Z weight.
pub fn extract_syndrome(layout: &SurfaceCodeLayout, errors: &PauliPattern) -> SyndromeMap {
    let parity = |checks: &[Coord], flips: fn(Pauli) -> bool| -> Vec<Coord> {
        checks
            .iter()
            .copied()
            .filter(|&m| {
                layout
                    .neighbors(m)
                    .into_iter()
                    .filter(|&q| flips(errors.get(layout, q)))
                    .count()
                    % 2
                    == 1
            })
            .collect()
    };
    SyndromeMap {
        flipped_z: parity(&layout.measure_z, Pauli::flips_z_checks),
        flipped_x: parity(&layout.measure_x, Pauli::flips_x_checks),
    }
}
