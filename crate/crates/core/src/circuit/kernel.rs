//! In-place application of small unitaries to a register stored as a dense
//! vector. Qubit 0 is the most significant bit of the basis index.

use nalgebra::{Matrix2, Matrix4};

use super::gate::C64;

#[inline]
fn stride(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

pub(crate) fn apply_1q(state: &mut [C64], n: usize, q: usize, m: &Matrix2<C64>) {
    let s = stride(n, q);
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    for hi in (0..state.len()).step_by(2 * s) {
        for i0 in hi..hi + s {
            let i1 = i0 + s;
            let (a, b) = (state[i0], state[i1]);
            state[i0] = m00 * a + m01 * b;
            state[i1] = m10 * a + m11 * b;
        }
    }
}

/// Apply a 4×4 unitary whose most significant factor acts on `qa`.
pub(crate) fn apply_2q(state: &mut [C64], n: usize, qa: usize, qb: usize, m: &Matrix4<C64>) {
    let sa = stride(n, qa);
    let sb = stride(n, qb);
    let mask = sa | sb;
    for i in 0..state.len() {
        if i & mask != 0 {
            continue;
        }
        let idx = [i, i | sb, i | sa, i | sa | sb];
        let v = [state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]];
        for (r, &out) in idx.iter().enumerate() {
            state[out] =
                m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
        }
    }
}

/// Controlled-X as a permutation.
pub(crate) fn apply_cx(state: &mut [C64], n: usize, control: usize, target: usize) {
    let sc = stride(n, control);
    let st = stride(n, target);
    for i in 0..state.len() {
        if i & sc != 0 && i & st == 0 {
            state.swap(i, i | st);
        }
    }
}
