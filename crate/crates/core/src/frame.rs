//! Orthonormal frame spanned from two anchor points and the search box.
//!
//! The first frame vector points from the first anchor to the second. The
//! remaining vectors come from Gram-Schmidt on canonical vectors taken
//! cyclically, starting after the axis best aligned with the first vector.
//! Points of the box are coded either by their frame coordinates `P` in
//! `[-1,1] x [-1/2,1/2]^(d-1)` or by their interpretable coordinates `R`:
//!
//! ```text
//! R = M + s * B^T P        P = (1/s) * B (R - M)
//! ```
//!
//! with `M` the anchors' midpoint and `s` their distance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Candidates with a residual norm below this are treated as dependent.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("anchors must have the same non-zero dimension (got {0} and {1})")]
    Dimension(usize, usize),
    #[error("anchors coincide; no direction to span")]
    CoincidentAnchors,
    #[error("Gram-Schmidt exhausted the canonical cycle with {found} of {needed} vectors")]
    Exhausted { found: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodingKind {
    /// Normalized box coordinates.
    P,
    /// Directly interpretable coordinates.
    R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coding {
    pub kind: CodingKind,
    pub values: Vec<f64>,
}

impl Coding {
    pub fn p(values: Vec<f64>) -> Self {
        Self {
            kind: CodingKind::P,
            values,
        }
    }

    pub fn r(values: Vec<f64>) -> Self {
        Self {
            kind: CodingKind::R,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Rows are the frame vectors `g_1..g_d` in canonical coordinates, so
    /// `B w` gives the frame coordinates of `w`.
    pub basis: Vec<Vec<f64>>,
    /// Distance between the anchors.
    pub scale: f64,
    pub midpoint: Vec<f64>,
    /// Zero-based canonical axis most aligned with `g_1`.
    pub pivot: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Builds the frame of the box spanned by `anchor1` and `anchor2`.
pub fn build_frame(anchor1: &[f64], anchor2: &[f64]) -> Result<Frame, FrameError> {
    let d = anchor1.len();
    if d == 0 || anchor2.len() != d {
        return Err(FrameError::Dimension(d, anchor2.len()));
    }
    let link: Vec<f64> = anchor2.iter().zip(anchor1).map(|(b, a)| b - a).collect();
    let scale = norm(&link);
    if !(scale > 0.0) {
        return Err(FrameError::CoincidentAnchors);
    }
    let g1: Vec<f64> = link.iter().map(|v| v / scale).collect();

    // lowest index wins ties
    let mut pivot = 0;
    for i in 1..d {
        if g1[i].abs() > g1[pivot].abs() {
            pivot = i;
        }
    }

    let mut basis = Vec::with_capacity(d);
    basis.push(g1);
    // e_{pivot+1}, e_{pivot+2}, ... cyclically; dependent candidates are skipped
    for offset in 1..=2 * d {
        if basis.len() == d {
            break;
        }
        let axis = (pivot + offset) % d;
        let mut candidate = vec![0.0; d];
        candidate[axis] = 1.0;
        for g in &basis {
            let proj = g[axis];
            for (c, gk) in candidate.iter_mut().zip(g) {
                *c -= proj * gk;
            }
        }
        let len = norm(&candidate);
        if len < DEGENERATE_NORM {
            continue;
        }
        candidate.iter_mut().for_each(|c| *c /= len);
        basis.push(candidate);
    }
    if basis.len() < d {
        return Err(FrameError::Exhausted {
            found: basis.len(),
            needed: d,
        });
    }

    let midpoint = anchor1
        .iter()
        .zip(anchor2)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Ok(Frame {
        basis,
        scale,
        midpoint,
        pivot,
    })
}

impl Frame {
    pub fn dimension(&self) -> usize {
        self.midpoint.len()
    }

    /// Frame coordinates `B w`.
    pub fn to_frame(&self, w: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|g| dot(g, w)).collect()
    }

    /// Canonical coordinates `B^T u`.
    pub fn from_frame(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        for (g, coeff) in self.basis.iter().zip(u) {
            for (o, gk) in out.iter_mut().zip(g) {
                *o += coeff * gk;
            }
        }
        out
    }

    pub fn p_to_r_values(&self, p: &[f64]) -> Vec<f64> {
        let offset = self.from_frame(p);
        self.midpoint
            .iter()
            .zip(offset)
            .map(|(m, o)| m + self.scale * o)
            .collect()
    }

    pub fn r_to_p_values(&self, r: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = r.iter().zip(&self.midpoint).map(|(x, m)| x - m).collect();
        self.to_frame(&centered)
            .into_iter()
            .map(|v| v / self.scale)
            .collect()
    }

    pub fn p_to_r(&self, p: &Coding) -> Coding {
        match p.kind {
            CodingKind::P => Coding::r(self.p_to_r_values(&p.values)),
            CodingKind::R => p.clone(),
        }
    }

    pub fn r_to_p(&self, r: &Coding) -> Coding {
        match r.kind {
            CodingKind::R => Coding::p(self.r_to_p_values(&r.values)),
            CodingKind::P => r.clone(),
        }
    }
}

/// Half-width of the box along frame axis `axis` (zero-based).
pub fn box_half_width(axis: usize) -> f64 {
    if axis == 0 {
        1.0
    } else {
        0.5
    }
}

pub fn in_box(p: &[f64]) -> bool {
    p.iter()
        .enumerate()
        .all(|(i, v)| v.abs() <= box_half_width(i))
}

/// Projects a P-coding onto the box componentwise.
pub fn clamp_to_box(p: &mut [f64]) {
    for (i, v) in p.iter_mut().enumerate() {
        let h = box_half_width(i);
        *v = v.clamp(-h, h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_aligned_two_dimensional() {
        let f = build_frame(&[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_eq!(f.basis[0], vec![1.0, 0.0]);
        assert_eq!(f.pivot, 0);
        assert_eq!(f.basis[1], vec![0.0, 1.0]);
        assert_eq!(f.midpoint, vec![1.0, 0.0]);
        assert_eq!(f.scale, 2.0);
    }

    #[test]
    fn pivot_uses_absolute_value() {
        let f = build_frame(&[0.0, 0.0, 0.0], &[0.1, -3.0, 0.2]).unwrap();
        assert_eq!(f.pivot, 1);
        // next candidates are e_3 then e_1
        assert!(f.basis[1][2] > 0.9);
        assert!(f.basis[2][0] > 0.9);
    }

    #[test]
    fn pivot_tie_takes_lowest_index() {
        let f = build_frame(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(f.pivot, 0);
    }

    #[test]
    fn one_dimensional_frame() {
        let f = build_frame(&[0.45], &[0.55]).unwrap();
        assert_eq!(f.basis, vec![vec![1.0]]);
        assert!((f.scale - 0.1).abs() < 1e-15);
        assert!((f.p_to_r_values(&[1.0])[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn coincident_anchors_rejected() {
        assert_eq!(
            build_frame(&[1.0, 2.0], &[1.0, 2.0]),
            Err(FrameError::CoincidentAnchors)
        );
        assert!(matches!(
            build_frame(&[1.0], &[1.0, 2.0]),
            Err(FrameError::Dimension(..))
        ));
    }

    #[test]
    fn center_maps_to_midpoint() {
        let f = build_frame(&[1.0, 2.0, 3.0], &[-1.0, 0.5, 4.0]).unwrap();
        let r = f.p_to_r(&Coding::p(vec![0.0; 3]));
        assert_eq!(r.kind, CodingKind::R);
        for (a, b) in r.values.iter().zip(&f.midpoint) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn anchors_sit_at_plus_minus_half() {
        let a1 = [1.0, 2.0, 3.0, -4.0];
        let a2 = [0.5, 2.5, 1.0, -3.0];
        let f = build_frame(&a1, &a2).unwrap();
        let p1 = f.r_to_p_values(&a1);
        let p2 = f.r_to_p_values(&a2);
        assert!((p1[0] + 0.5).abs() < 1e-12);
        assert!((p2[0] - 0.5).abs() < 1e-12);
        assert!(p1[1..].iter().chain(&p2[1..]).all(|v| v.abs() < 1e-12));
        assert!(in_box(&p1) && in_box(&p2));
    }

    #[test]
    fn box_membership() {
        assert!(in_box(&[0.0, 0.0]));
        assert!(in_box(&[1.0, -0.5]));
        assert!(!in_box(&[1.0001, 0.0]));
        assert!(!in_box(&[0.0, 0.50001]));
        let mut p = vec![3.0, -0.7, 0.2];
        clamp_to_box(&mut p);
        assert_eq!(p, vec![1.0, -0.5, 0.2]);
    }

    fn anchors(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2..=max_dim).prop_flat_map(|d| {
            (
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            )
        })
    }

    proptest! {
        #[test]
        fn orthonormal_and_isometric((a1, a2) in anchors(20), u in prop::collection::vec(-5.0f64..5.0, 20), v in prop::collection::vec(-5.0f64..5.0, 20)) {
            let f = build_frame(&a1, &a2).unwrap();
            let d = f.dimension();
            for j in 0..d {
                for k in 0..d {
                    let expect = if j == k { 1.0 } else { 0.0 };
                    prop_assert!((dot(&f.basis[j], &f.basis[k]) - expect).abs() < 1e-10);
                }
            }
            let link: Vec<f64> = a2.iter().zip(&a1).map(|(b, a)| b - a).collect();
            let coords = f.to_frame(&link);
            prop_assert!((coords[0] - f.scale).abs() < 1e-10 * f.scale.max(1.0));
            prop_assert!(coords[1..].iter().all(|c| c.abs() < 1e-10));
            let (u, v) = (&u[..d], &v[..d]);
            let du: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
            let img: Vec<f64> = f.from_frame(u).iter().zip(f.from_frame(v)).map(|(x, y)| x - y).collect();
            prop_assert!((norm(&img) - norm(&du)).abs() < 1e-10);
        }

        #[test]
        fn p_r_round_trip((a1, a2) in anchors(12), p in prop::collection::vec(-1.0f64..1.0, 12)) {
            let f = build_frame(&a1, &a2).unwrap();
            let p = &p[..f.dimension()];
            let back = f.r_to_p_values(&f.p_to_r_values(p));
            for (x, y) in p.iter().zip(&back) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
