//! Boundary-crossing probabilities for the sequential z process.
//!
//! `Z_k` is observed at information levels `I_1 < … < I_K` with
//! `E[Z_k] = θ √I_k` and `Cov(Z_j, Z_k) = √(I_j / I_k)`. The sub-density of
//! `Z_k` on the continuation region is carried from look to look on a
//! Simpson grid whose nodes are concentrated around the mean, with the
//! boundaries themselves as grid end points.

use crate::stats::{density, phi, phi_upper};

/// Grid density parameter for full-accuracy evaluations.
pub(crate) const FINE_GRID: usize = 32;
/// Cheaper grid for inner loops of the boundary search.
pub(crate) const SEARCH_GRID: usize = 12;

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Crossings {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

#[cfg(test)]
impl Crossings {
    pub fn total(&self) -> f64 {
        self.upper.iter().chain(&self.lower).sum()
    }
}

/// Sub-density of `Z_k` on the continuation region at one look.
#[derive(Debug, Clone)]
pub(crate) struct SubDensity {
    nodes: Vec<f64>,
    /// Simpson weight times density at each node.
    mass: Vec<f64>,
    info: f64,
}

impl SubDensity {
    /// Probability of continuing past this look.
    pub fn continuation(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// P(continue here, then Z at `next_info` ≥ `c`).
    pub fn upper_next(&self, next_info: f64, c: f64, drift: f64) -> f64 {
        let delta = next_info - self.info;
        let sd = delta.sqrt();
        let (si, sn) = (self.info.sqrt(), next_info.sqrt());
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(&z, &m)| m * phi_upper((c * sn - z * si - drift * delta) / sd))
            .sum()
    }

    /// P(continue here, then Z at `next_info` ≤ `c`).
    pub fn lower_next(&self, next_info: f64, c: f64, drift: f64) -> f64 {
        let delta = next_info - self.info;
        let sd = delta.sqrt();
        let (si, sn) = (self.info.sqrt(), next_info.sqrt());
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(&z, &m)| m * phi((c * sn - z * si - drift * delta) / sd))
            .sum()
    }
}

/// Simpson nodes and weights covering `[lo, hi] ∩ [mean − 3 − 4 ln r, mean + 3 + 4 ln r]`.
fn grid(mean: f64, lo: f64, hi: f64, r: usize) -> (Vec<f64>, Vec<f64>) {
    let rf = r as f64;
    let n = 6 * r - 1;
    let base: Vec<f64> = (1..=n)
        .map(|i| {
            let i_f = i as f64;
            let x = if i < r {
                -3.0 - 4.0 * (rf / i_f).ln()
            } else if i <= 5 * r {
                -3.0 + 3.0 * (i_f - rf) / (2.0 * rf)
            } else {
                3.0 + 4.0 * (rf / (6.0 * rf - i_f)).ln()
            };
            mean + x
        })
        .collect();

    let mut pts = Vec::with_capacity(n + 2);
    if lo > base[0] {
        pts.push(lo);
    }
    pts.extend(base.iter().copied().filter(|&x| x > lo && x < hi));
    if hi < base[n - 1] {
        pts.push(hi);
    }
    if pts.len() < 2 {
        // Continuation region narrower than one grid cell, or entirely
        // outside the grid: integrate over the region itself.
        let (a, b) = (lo.max(base[0]), hi.min(base[n - 1]));
        if a >= b {
            return (Vec::new(), Vec::new());
        }
        pts = vec![a, b];
    }

    let m = pts.len();
    let mut nodes = Vec::with_capacity(2 * m - 1);
    let mut weights = vec![0.0; 2 * m - 1];
    for j in 0..m {
        nodes.push(pts[j]);
        if j + 1 < m {
            nodes.push(0.5 * (pts[j] + pts[j + 1]));
            let h = pts[j + 1] - pts[j];
            weights[2 * j] += h / 6.0;
            weights[2 * j + 1] += 4.0 * h / 6.0;
            weights[2 * j + 2] += h / 6.0;
        }
    }
    (nodes, weights)
}

/// Per-look crossing probabilities plus the sub-density after the last look
/// that has a continuation region.
///
/// `upper` and `lower` are z-scale boundaries; infinities are allowed.
/// If `upper[k] <= lower[k]` every path stops at look `k`.
pub(crate) fn crossings_with_density(
    info: &[f64],
    upper: &[f64],
    lower: &[f64],
    drift: f64,
    r: usize,
    keep_last: bool,
) -> (Crossings, Option<SubDensity>) {
    let k_max = info.len();
    let mut out = Crossings {
        upper: Vec::with_capacity(k_max),
        lower: Vec::with_capacity(k_max),
    };
    let mut sub: Option<SubDensity> = None;

    for k in 0..k_max {
        let mean = drift * info[k].sqrt();
        let (u, l) = (upper[k], lower[k]);
        let stop_all = u <= l;

        let (up, down) = match &sub {
            None if k == 0 => {
                if stop_all {
                    (phi_upper(u - mean), phi(u - mean))
                } else {
                    (phi_upper(u - mean), phi(l - mean))
                }
            }
            None => (0.0, 0.0),
            Some(s) => {
                let up = s.upper_next(info[k], u, drift);
                let down = if stop_all {
                    s.continuation() - up
                } else {
                    s.lower_next(info[k], l, drift)
                };
                (up, down.max(0.0))
            }
        };
        out.upper.push(up);
        out.lower.push(down);

        if stop_all {
            out.upper.resize(k_max, 0.0);
            out.lower.resize(k_max, 0.0);
            sub = None;
            break;
        }
        if k + 1 == k_max && !keep_last {
            break;
        }

        let (nodes, weights) = grid(mean, l, u, r);
        let mass: Vec<f64> = match &sub {
            None => nodes
                .iter()
                .zip(&weights)
                .map(|(&z, &w)| w * density(z - mean))
                .collect(),
            Some(prev) => {
                let delta = info[k] - prev.info;
                let sd = delta.sqrt();
                let (sp, sk) = (prev.info.sqrt(), info[k].sqrt());
                let scale = sk / sd;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&z, &w)| {
                        let centre = z * sk - drift * delta;
                        let g: f64 = prev
                            .nodes
                            .iter()
                            .zip(&prev.mass)
                            .map(|(&zi, &mi)| mi * density((centre - zi * sp) / sd))
                            .sum();
                        w * scale * g
                    })
                    .collect()
            }
        };
        sub = Some(SubDensity {
            nodes,
            mass,
            info: info[k],
        });
    }
    (out, sub)
}

pub(crate) fn crossings(
    info: &[f64],
    upper: &[f64],
    lower: &[f64],
    drift: f64,
    r: usize,
) -> Crossings {
    crossings_with_density(info, upper, lower, drift, r, false).0
}

/// Crossings for looks `0..K-1` plus the sub-density entering the final look.
pub(crate) fn interim_crossings(
    info: &[f64],
    upper: &[f64],
    lower: &[f64],
    drift: f64,
    r: usize,
) -> (Crossings, Option<SubDensity>) {
    let k = info.len();
    debug_assert!(k >= 2);
    crossings_with_density(
        &info[..k - 1],
        &upper[..k - 1],
        &lower[..k - 1],
        drift,
        r,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_look_is_normal_tail() {
        let c = crossings(
            &[1.0],
            &[1.959_963_984_540_054],
            &[1.959_963_984_540_054],
            0.0,
            FINE_GRID,
        );
        assert!((c.upper[0] - 0.025).abs() < 1e-12);
        assert!((c.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_weights_integrate_density() {
        let (nodes, w) = grid(0.3, -1.0, 2.0, FINE_GRID);
        let s: f64 = nodes
            .iter()
            .zip(&w)
            .map(|(&z, &w)| w * density(z - 0.3))
            .sum();
        let exact = phi(2.0 - 0.3) - phi(-1.0 - 0.3);
        assert!((s - exact).abs() < 1e-9, "{s} vs {exact}");
    }

    #[test]
    fn two_look_normalization() {
        let info = [0.5, 1.0];
        for drift in [-2.0, 0.0, 1.5, 3.0] {
            let c = crossings(&info, &[2.8, 1.96], &[0.0, 1.96], drift, FINE_GRID);
            assert!(
                (c.total() - 1.0).abs() < 1e-8,
                "drift {drift}: {}",
                c.total()
            );
        }
    }

    #[test]
    fn continuation_region_left_open_at_the_end() {
        let (c, sub) = crossings_with_density(
            &[0.5, 1.0],
            &[2.0, 2.0],
            &[-2.0, -2.0],
            0.0,
            FINE_GRID,
            true,
        );
        let rest = sub.unwrap().continuation();
        assert!((c.total() + rest - 1.0).abs() < 1e-8);
        assert!((c.upper[1] - c.lower[1]).abs() < 1e-10);
    }

    #[test]
    fn interim_density_feeds_the_final_look() {
        let info = [1.0 / 3.0, 2.0 / 3.0, 1.0];
        let (u, l) = ([2.5, 2.2, 2.0], [-0.5, 0.5, 2.0]);
        let full = crossings(&info, &u, &l, 1.0, FINE_GRID);
        let (head, sub) = interim_crossings(&info, &u, &l, 1.0, FINE_GRID);
        let last = sub.unwrap().upper_next(1.0, 2.0, 1.0);
        assert_eq!(head.upper.len(), 2);
        assert!((last - full.upper[2]).abs() < 1e-12);
    }
}
