//! Exact minimum-weight matching decoder.
//!
//! Each flipped measurement qubit either pairs with another flip of the same
//! type or terminates at its compatible grid boundary (rows for Z-type
//! checks, columns for X-type). Pair cost is half the Manhattan distance;
//! boundary cost is the fewest grid steps to the nearer compatible edge.
//! The globally cheapest assignment is found by dynamic programming over
//! flip subsets, which stays exact and fast up to the per-type cap below.

use super::{Coord, Pauli, PauliPattern, SurfaceCodeError, SurfaceCodeLayout, SyndromeKind, SyndromeMap};

/// Largest per-type flip count the subset dynamic program will handle.
pub const MAX_SYNDROMES_PER_TYPE: usize = 16;

/// Matching cost of pairing two same-type flips: half their Manhattan
/// distance, i.e. the number of data qubits on a shortest connecting chain.
pub fn pair_weight(a: Coord, b: Coord) -> u32 {
    let dr = (a.r as i32 - b.r as i32).unsigned_abs();
    let dc = (a.c as i32 - b.c as i32).unsigned_abs();
    (dr + dc) / 2
}

/// Matching cost of routing a flip to its compatible boundary: grid steps to
/// the nearer of rows 0 / 2d-2 for Z-type checks, columns 0 / 2d-2 for
/// X-type checks.
pub fn boundary_weight(layout: &SurfaceCodeLayout, kind: SyndromeKind, s: Coord) -> u32 {
    let far = layout.side - 1;
    match kind {
        SyndromeKind::Z => (s.r.min(far - s.r)) as u32,
        SyndromeKind::X => (s.c.min(far - s.c)) as u32,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Assignment {
    Pair(usize, usize),
    Boundary(usize),
}

/// Cheapest complete assignment of flips to pairs and boundaries. Ties are
/// broken deterministically: boundary before pairing, lower partner index
/// first.
fn min_weight_plan(
    points: &[Coord],
    boundary: impl Fn(Coord) -> u32,
) -> (u32, Vec<Assignment>) {
    let n = points.len();
    if n == 0 {
        return (0, Vec::new());
    }
    debug_assert!(n <= MAX_SYNDROMES_PER_TYPE);
    let full = 1usize << n;
    let mut dp = vec![u32::MAX; full];
    dp[0] = 0;
    for mask in 1..full {
        let i = mask.trailing_zeros() as usize;
        let without_i = mask & !(1 << i);
        let mut best = boundary(points[i]).saturating_add(dp[without_i]);
        for j in (i + 1)..n {
            if mask & (1 << j) != 0 {
                let cand = pair_weight(points[i], points[j])
                    .saturating_add(dp[without_i & !(1 << j)]);
                if cand < best {
                    best = cand;
                }
            }
        }
        dp[mask] = best;
    }

    let mut plan = Vec::new();
    let mut mask = full - 1;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let without_i = mask & !(1 << i);
        if dp[mask] == boundary(points[i]).saturating_add(dp[without_i]) {
            plan.push(Assignment::Boundary(i));
            mask = without_i;
            continue;
        }
        let mut matched = false;
        for j in (i + 1)..n {
            if mask & (1 << j) != 0 {
                let rest = without_i & !(1 << j);
                if dp[mask] == pair_weight(points[i], points[j]).saturating_add(dp[rest]) {
                    plan.push(Assignment::Pair(i, j));
                    mask = rest;
                    matched = true;
                    break;
                }
            }
        }
        debug_assert!(matched, "dynamic program table is self-consistent");
    }
    (dp[full - 1], plan)
}

/// Total matching weight the decoder would assign to one type's flips.
/// Exposed so an exhaustive reference can audit optimality.
pub fn matching_total_weight(
    layout: &SurfaceCodeLayout,
    kind: SyndromeKind,
    points: &[Coord],
) -> Result<u32, SurfaceCodeError> {
    if points.len() > MAX_SYNDROMES_PER_TYPE {
        return Err(SurfaceCodeError::Tractability {
            kind,
            syndromes: points.len(),
        });
    }
    Ok(min_weight_plan(points, |s| boundary_weight(layout, kind, s)).0)
}

/// Data qubits on the canonical chain between two same-type flips: walk rows
/// first at the start's column, then columns at the end's row.
fn pair_path(a: Coord, b: Coord) -> Vec<Coord> {
    let mut cells = Vec::new();
    let (lo, hi) = (a.r.min(b.r), a.r.max(b.r));
    let mut r = lo + 1;
    while r < hi {
        cells.push(Coord::new(r, a.c));
        r += 2;
    }
    let (lo, hi) = (a.c.min(b.c), a.c.max(b.c));
    let mut c = lo + 1;
    while c < hi {
        cells.push(Coord::new(b.r, c));
        c += 2;
    }
    cells
}

/// Data qubits on the chain from a flip to its nearer compatible boundary
/// (ties go to the coordinate-zero side).
fn boundary_path(layout: &SurfaceCodeLayout, kind: SyndromeKind, s: Coord) -> Vec<Coord> {
    let far = layout.side - 1;
    let mut cells = Vec::new();
    match kind {
        SyndromeKind::Z => {
            if s.r <= far - s.r {
                let mut r = s.r;
                while r > 0 {
                    r -= 1;
                    cells.push(Coord::new(r, s.c));
                    if r == 0 {
                        break;
                    }
                    r -= 1;
                }
            } else {
                let mut r = s.r + 1;
                while r <= far {
                    cells.push(Coord::new(r, s.c));
                    r += 2;
                }
            }
        }
        SyndromeKind::X => {
            if s.c <= far - s.c {
                let mut c = s.c;
                while c > 0 {
                    c -= 1;
                    cells.push(Coord::new(s.r, c));
                    if c == 0 {
                        break;
                    }
                    c -= 1;
                }
            } else {
                let mut c = s.c + 1;
                while c <= far {
                    cells.push(Coord::new(s.r, c));
                    c += 2;
                }
            }
        }
    }
    cells
}

fn apply_corrections(
    layout: &SurfaceCodeLayout,
    correction: &mut PauliPattern,
    points: &[Coord],
    kind: SyndromeKind,
    pauli: Pauli,
) -> Result<(), SurfaceCodeError> {
    if points.len() > MAX_SYNDROMES_PER_TYPE {
        return Err(SurfaceCodeError::Tractability {
            kind,
            syndromes: points.len(),
        });
    }
    let (_, plan) = min_weight_plan(points, |s| boundary_weight(layout, kind, s));
    for step in plan {
        let cells = match step {
            Assignment::Pair(i, j) => pair_path(points[i], points[j]),
            Assignment::Boundary(i) => boundary_path(layout, kind, points[i]),
        };
        for cell in cells {
            correction.apply(layout, cell, pauli);
        }
    }
    Ok(())
}

/// Infer a correction that clears the syndrome: X chains for flipped Z-type
/// checks, Z chains for flipped X-type checks. Errs when either flip count
/// exceeds the exact-matching cap.
pub fn decode_mwpm(
    layout: &SurfaceCodeLayout,
    syndrome: &SyndromeMap,
) -> Result<PauliPattern, SurfaceCodeError> {
    let mut correction = PauliPattern::identity(layout);
    apply_corrections(
        layout,
        &mut correction,
        &syndrome.flipped_z,
        SyndromeKind::Z,
        Pauli::X,
    )?;
    apply_corrections(
        layout,
        &mut correction,
        &syndrome.flipped_x,
        SyndromeKind::X,
        Pauli::Z,
    )?;
    Ok(correction)
}
