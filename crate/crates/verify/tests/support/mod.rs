//! Finite-difference curvature pipeline in plain `f64` with its own index code.
//!
//! Riemann comes from two nested central-difference levels over metric values.
//! Fourth-derivative tensors come from two nested levels over order-two fields
//! (`g⁻¹`, `Γ`, `Rc`, `R`, `W`) evaluated at neighbouring points.

use bachlike_core::curvature::CurvatureBundle;
use bachlike_core::geometry::Geometry;

pub const H: f64 = 1e-3;
const N: usize = 4;

fn shifted(x: &[f64], axis: usize, step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += step;
    y
}

/// Five-point central derivative of a vector-valued function along `axis`.
pub fn d(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], axis: usize) -> Vec<f64> {
    let p1 = f(&shifted(x, axis, H));
    let m1 = f(&shifted(x, axis, -H));
    let p2 = f(&shifted(x, axis, 2.0 * H));
    let m2 = f(&shifted(x, axis, -2.0 * H));
    (0..p1.len())
        .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * H))
        .collect()
}

/// Gauss–Jordan inverse of a 4×4 matrix.
fn inverse(g: &[f64]) -> Vec<f64> {
    let mut a = [0.0; N * N];
    a.copy_from_slice(g);
    let mut inv = [0.0; N * N];
    for i in 0..N {
        inv[i * N + i] = 1.0;
    }
    for c in 0..N {
        let p = (c..N)
            .max_by(|&r, &s| a[r * N + c].abs().total_cmp(&a[s * N + c].abs()))
            .unwrap();
        for k in 0..N {
            a.swap(c * N + k, p * N + k);
            inv.swap(c * N + k, p * N + k);
        }
        let piv = a[c * N + c];
        for k in 0..N {
            a[c * N + k] /= piv;
            inv[c * N + k] /= piv;
        }
        for r in 0..N {
            if r != c {
                let f = a[r * N + c];
                for k in 0..N {
                    a[r * N + k] -= f * a[c * N + k];
                    inv[r * N + k] -= f * inv[c * N + k];
                }
            }
        }
    }
    inv.to_vec()
}

/// `Γ^k_{ij}` at `k·16 + i·4 + j` from differenced metric values.
pub fn christoffel_fd(geom: &Geometry, x: &[f64]) -> Vec<f64> {
    let g = geom.metric_values(x);
    let gi = inverse(&g);
    let metric = |y: &[f64]| geom.metric_values(y);
    let dg: Vec<Vec<f64>> = (0..N).map(|a| d(&metric, x, a)).collect();
    let mut out = vec![0.0; N * N * N];
    for k in 0..N {
        for i in 0..N {
            for j in 0..N {
                out[k * 16 + i * 4 + j] = (0..N)
                    .map(|l| {
                        0.5 * gi[k * N + l]
                            * (dg[i][j * N + l] + dg[j][i * N + l] - dg[l][i * N + j])
                    })
                    .sum();
            }
        }
    }
    out
}

/// `Rm_{ijkl} = g_{kp} R_{ijl}^p` with `R_{ijk}^l = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}`.
pub fn riemann_fd(geom: &Geometry, x: &[f64]) -> Vec<f64> {
    let gamma = christoffel_fd(geom, x);
    let gfun = |y: &[f64]| christoffel_fd(geom, y);
    let dgam: Vec<Vec<f64>> = (0..N).map(|a| d(&gfun, x, a)).collect();
    let g = geom.metric_values(x);
    let gm = |l: usize, i: usize, j: usize| gamma[l * 16 + i * 4 + j];
    let mut up = vec![0.0; 256];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut v = dgam[i][l * 16 + j * 4 + k] - dgam[j][l * 16 + i * 4 + k];
                    for p in 0..N {
                        v += gm(l, i, p) * gm(p, j, k) - gm(l, j, p) * gm(p, i, k);
                    }
                    up[((i * 4 + j) * 4 + k) * 4 + l] = v;
                }
            }
        }
    }
    let mut rm = vec![0.0; 256];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    rm[((i * 4 + j) * 4 + k) * 4 + l] = (0..N)
                        .map(|p| g[k * N + p] * up[((i * 4 + j) * 4 + l) * 4 + p])
                        .sum();
                }
            }
        }
    }
    rm
}

/// Order-two fields at one point: `g⁻¹ | Γ | Rc | R | W`, flattened.
fn low_fields(geom: &Geometry, y: &[f64]) -> Vec<f64> {
    let m = geom.metric_at(y, 3).unwrap();
    let b = CurvatureBundle::new(&m).unwrap();
    let mut out = m.g_inv_values().to_vec();
    out.extend((0..64).map(|o| m.christoffel().value(&[o / 16, (o / 4) % 4, o % 4])));
    out.extend((0..16).map(|o| b.ricci.value(&[o / 4, o % 4])));
    out.push(b.scalar.value());
    out.extend((0..256).map(|o| b.weyl.value(&[o / 64, (o / 16) % 4, (o / 4) % 4, o % 4])));
    out
}

const GI: usize = 0;
const GA: usize = 16;
const RC: usize = 80;
const RS: usize = 96;
const WE: usize = 97;

/// Covariant derivative of a covariant tensor of `rank` slots: the result has
/// the derivative index first, `∇_a T_{i…} = ∂_a T_{i…} − Σ_s Γ^p_{a i_s} T_{…p…}`.
fn covariant(t: &[f64], dt: &[Vec<f64>], gamma: &[f64], rank: usize) -> Vec<f64> {
    let size = N.pow(rank as u32);
    let mut out = vec![0.0; N * size];
    let mut idx = vec![0usize; rank];
    for a in 0..N {
        for o in 0..size {
            let mut rest = o;
            for s in (0..rank).rev() {
                idx[s] = rest % N;
                rest /= N;
            }
            let mut v = dt[a][o];
            for s in 0..rank {
                let stride = N.pow((rank - 1 - s) as u32);
                let base = o - idx[s] * stride;
                for p in 0..N {
                    v -= gamma[p * 16 + a * 4 + idx[s]] * t[base + p * stride];
                }
            }
            out[a * size + o] = v;
        }
    }
    out
}

/// First covariant derivatives at `y`: `∇Rc | ∇R | ∇W` followed by the order-two fields.
fn first_level(geom: &Geometry, y: &[f64]) -> Vec<f64> {
    let f = low_fields(geom, y);
    let lf = |z: &[f64]| low_fields(geom, z);
    let df: Vec<Vec<f64>> = (0..N).map(|a| d(&lf, y, a)).collect();
    let gamma = &f[GA..GA + 64];
    let part = |off: usize, len: usize| -> (Vec<f64>, Vec<Vec<f64>>) {
        (
            f[off..off + len].to_vec(),
            df.iter().map(|v| v[off..off + len].to_vec()).collect(),
        )
    };
    let (rc, drc) = part(RC, 16);
    let (r, dr) = part(RS, 1);
    let (w, dw) = part(WE, 256);
    let mut out = covariant(&rc, &drc, gamma, 2);
    out.extend(covariant(&r, &dr, gamma, 0));
    out.extend(covariant(&w, &dw, gamma, 4));
    out.extend(f);
    out
}

const D_RC: usize = 0;
const D_R: usize = 64;
const D_W: usize = 68;
const LOW: usize = 68 + 1024;

/// `U`, `V` and the four-dimensional Bach tensor at `x`, each 16 entries row-major.
pub struct Quadratic {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub bach: Vec<f64>,
}

pub fn quadratic_fd(geom: &Geometry, x: &[f64]) -> Quadratic {
    let first = first_level(geom, x);
    let fl = |z: &[f64]| first_level(geom, z);
    let dfirst: Vec<Vec<f64>> = (0..N).map(|b| d(&fl, x, b)).collect();
    let low = &first[LOW..];
    let gi = &low[GI..GI + 16];
    let gamma = &low[GA..GA + 64];
    let rc = &low[RC..RC + 16];
    let r = low[RS];
    let w = &low[WE..WE + 256];
    let part = |off: usize, len: usize| -> (Vec<f64>, Vec<Vec<f64>>) {
        (
            first[off..off + len].to_vec(),
            dfirst.iter().map(|v| v[off..off + len].to_vec()).collect(),
        )
    };
    let (drc, ddrc) = part(D_RC, 64);
    let (dr, ddr) = part(D_R, 4);
    let (dw, ddw) = part(D_W, 1024);
    // Second derivatives, outer index first: [b][a][…].
    let hess_rc = covariant(&drc, &ddrc, gamma, 3);
    let hess_r = covariant(&dr, &ddr, gamma, 1);
    let hess_w = covariant(&dw, &ddw, gamma, 5);
    let g = inverse(gi);

    let lap_r: f64 = (0..16).map(|o| gi[o] * hess_r[o]).sum();
    let mut lap_rc = vec![0.0; 16];
    for ij in 0..16 {
        lap_rc[ij] = (0..16).map(|ab| gi[ab] * hess_rc[ab * 16 + ij]).sum();
    }
    let raise2 = |t: &[f64]| {
        let mut up = vec![0.0; 16];
        for a in 0..N {
            for b in 0..N {
                up[a * 4 + b] = (0..16)
                    .map(|pq| gi[a * 4 + pq / 4] * gi[b * 4 + pq % 4] * t[pq])
                    .sum();
            }
        }
        up
    };
    let rc_up = raise2(rc);
    let rc_norm: f64 = (0..16).map(|o| rc[o] * rc_up[o]).sum();
    let rm = riemann_from_weyl(w, rc, r, &g);

    let mut u = vec![0.0; 16];
    let mut v = vec![0.0; 16];
    let mut bach = vec![0.0; 16];
    for i in 0..N {
        for j in 0..N {
            let ij = i * 4 + j;
            let mut rr = 0.0;
            let mut wr = 0.0;
            for p in 0..N {
                for q in 0..N {
                    rr += rm[((i * 4 + p) * 4 + j) * 4 + q] * rc_up[p * 4 + q];
                    wr += w[((i * 4 + p) * 4 + j) * 4 + q] * rc_up[p * 4 + q];
                }
            }
            u[ij] =
                2.0 * rr + lap_rc[ij] - 0.5 * rc_norm * g[ij] - r * rc[ij] - 0.5 * lap_r * g[ij]
                    + 0.25 * r * r * g[ij];
            v[ij] = -hess_r[ij] + lap_r * g[ij] + r * rc[ij] - 0.25 * r * r * g[ij];
            // ∇^k∇^l W_{ikjl}: outer derivative b raised to k, inner a raised to l.
            let mut ddw = 0.0;
            for k in 0..N {
                for l in 0..N {
                    for b in 0..N {
                        for a in 0..N {
                            let inner = ((i * 4 + k) * 4 + j) * 4 + l;
                            ddw +=
                                gi[k * 4 + b] * gi[l * 4 + a] * hess_w[(b * 4 + a) * 256 + inner];
                        }
                    }
                }
            }
            bach[ij] = ddw + 0.5 * wr;
        }
    }
    Quadratic { u, v, bach }
}

/// `Rm = W + (Rc ⊙ g)/(n−2) − R (g ⊙ g)/(2(n−1)(n−2))` with the Kulkarni–Nomizu
/// product arranged so that `g^{ik} Rm_{ijkl} = R_{jl}`.
fn riemann_from_weyl(w: &[f64], rc: &[f64], r: f64, g: &[f64]) -> Vec<f64> {
    let a = |i: usize, j: usize| rc[i * 4 + j] / 2.0 - r * g[i * 4 + j] / 12.0;
    let mut rm = vec![0.0; 256];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let kn = a(i, k) * g[j * 4 + l] + a(j, l) * g[i * 4 + k]
                        - a(i, l) * g[j * 4 + k]
                        - a(j, k) * g[i * 4 + l];
                    rm[((i * 4 + j) * 4 + k) * 4 + l] = w[((i * 4 + j) * 4 + k) * 4 + l] + kn;
                }
            }
        }
    }
    rm
}

/// `max|a − b| / max|a|`.
pub fn relative_gap(exact: &[f64], estimate: &[f64]) -> f64 {
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = exact
        .iter()
        .zip(estimate)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    gap / scale.max(f64::MIN_POSITIVE)
}
