//! Stretched polar grid around an axisymmetric body and its difference operators.

use crate::surfaces::RevolutionBody;

use super::SolverError;

/// Derivatives of a nodal field in log-polar form plus the scaled Hessian.
///
/// With `L = log r` the scaled Hessian `r²∇²u` in the meridian frame
/// `(e_r, e_θ)` is `[[u_LL − u_L, u_Lθ − u_θ], [·, u_θθ + u_L]]` and the
/// rotational eigenvalue is `u_L + cot θ u_θ`, which becomes `u_L + u_θθ`
/// on the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeJet {
    pub r: f64,
    pub theta: f64,
    pub u: f64,
    /// `∂u/∂L` at fixed θ.
    pub u_l: f64,
    /// `∂u/∂θ` at fixed L.
    pub u_t: f64,
    /// `r²(H_rr, H_rθ, H_θθ, μ)`.
    pub hhat: [f64; 4],
}

impl NodeJet {
    /// `|∇u|`.
    pub fn grad_norm(&self) -> f64 {
        self.u_l.hypot(self.u_t) / self.r
    }

    /// Scaled Hessian as an `n × n` matrix, meridian block first.
    pub fn scaled_hessian(&self, n: usize) -> crate::symfunc::SymMat<f64> {
        block_matrix(&self.hhat, n)
    }

    /// Cartesian jet at `(z, ρ, 0, …, 0)`.
    pub fn to_jet(&self, n: usize) -> crate::fields::Jet2<f64> {
        use crate::symfunc::SymMat;
        let (s, c) = self.theta.sin_cos();
        let r2 = self.r * self.r;
        let (ur, ut) = (self.u_l / self.r, self.u_t / self.r);
        let mut x = vec![0.0; n];
        x[0] = self.r * c;
        x[1] = self.r * s;
        let mut g = vec![0.0; n];
        g[0] = ur * c - ut * s;
        g[1] = ur * s + ut * c;
        let [hrr, hrt, htt, mu] = self.hhat.map(|v| v / r2);
        let rot = [[c, -s], [s, c]];
        let b = [[hrr, hrt], [hrt, htt]];
        let h = SymMat::from_fn(n, |i, j| {
            if i < 2 && j < 2 {
                let mut acc = 0.0;
                for a in 0..2 {
                    for bb in 0..2 {
                        acc += rot[i][a] * b[a][bb] * rot[j][bb];
                    }
                }
                acc
            } else if i == j {
                mu
            } else {
                0.0
            }
        });
        crate::fields::Jet2 { x, u: self.u, g, h }
    }
}

pub(crate) fn block_matrix(h: &[f64; 4], n: usize) -> crate::symfunc::SymMat<f64> {
    crate::symfunc::SymMat::from_fn(n, |i, j| match (i, j) {
        (0, 0) => h[0],
        (0, 1) | (1, 0) => h[1],
        (1, 1) => h[2],
        _ if i == j => h[3],
        _ => 0.0,
    })
}

/// Grid on `{γ(θ) ≤ r ≤ R_out}` in coordinates `(s, θ) ∈ [0,1] × [0,π]`
/// with `log r = (1−φ(s)) log γ(θ) + φ(s) log R_out` and
/// `φ(s) = s + β s(1−s)`; β < 0 refines the rows next to the body.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiGrid {
    pub body: RevolutionBody<f64>,
    pub r_out: f64,
    /// Intervals in s.
    pub ns: usize,
    /// Intervals in θ (even).
    pub nth: usize,
    /// Clustering parameter β of the radial map, `|β| < 1`.
    pub cluster: f64,
    theta: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    d2g: Vec<f64>,
    l_out: f64,
}

/// Minimum ratio of the truncation radius to the body's largest radius.
pub const MIN_TRUNCATION_RATIO: f64 = 10.0;

/// Default clustering of the radial map toward the body.
pub const DEFAULT_CLUSTER: f64 = -0.25;

impl AxiGrid {
    pub fn new(body: RevolutionBody<f64>, r_out: f64, ns: usize, nth: usize) -> Result<Self, SolverError> {
        Self::with_cluster(body, r_out, ns, nth, DEFAULT_CLUSTER)
    }

    pub fn with_cluster(
        body: RevolutionBody<f64>,
        r_out: f64,
        ns: usize,
        nth: usize,
        cluster: f64,
    ) -> Result<Self, SolverError> {
        if !(cluster.abs() < 1.0) {
            return Err(SolverError::InvalidGrid(format!("cluster parameter {cluster} must satisfy |β| < 1")));
        }
        if ns < 4 {
            return Err(SolverError::InvalidGrid(format!("N_s = {ns} must be at least 4")));
        }
        if nth < 4 || nth % 2 != 0 {
            return Err(SolverError::InvalidGrid(format!("N_θ = {nth} must be even and at least 4")));
        }
        let gmax = body.max_radius();
        if !(r_out >= MIN_TRUNCATION_RATIO * gmax) {
            return Err(SolverError::InvalidGrid(format!(
                "R_out = {r_out} below {MIN_TRUNCATION_RATIO} × max radius {gmax}"
            )));
        }
        let hth = std::f64::consts::PI / nth as f64;
        let theta: Vec<f64> = (0..=nth).map(|j| j as f64 * hth).collect();
        let mut g = Vec::with_capacity(nth + 1);
        let mut dg = Vec::with_capacity(nth + 1);
        let mut d2g = Vec::with_capacity(nth + 1);
        for (j, &th) in theta.iter().enumerate() {
            let (gm, d1, d2) = body.profile_at(th);
            if !(gm > 0.0) {
                return Err(SolverError::NonStarShaped { theta: th });
            }
            let support = gm * gm / gm.hypot(d1);
            if !(support > 0.0) {
                return Err(SolverError::NonStarShaped { theta: th });
            }
            let q = d1 / gm;
            g.push(gm.ln());
            // the profile is even about both poles
            dg.push(if j == 0 || j == nth { 0.0 } else { q });
            d2g.push(d2 / gm - q * q);
        }
        Ok(Self { body, r_out, ns, nth, cluster, theta, g, dg, d2g, l_out: r_out.ln() })
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn node_count(&self) -> usize {
        (self.ns + 1) * (self.nth + 1)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.nth + 1) + j
    }

    pub fn hs(&self) -> f64 {
        1.0 / self.ns as f64
    }

    pub fn hth(&self) -> f64 {
        std::f64::consts::PI / self.nth as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 / self.ns as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta[j]
    }

    /// `(φ, φ', φ'')` at row i.
    pub fn map(&self, i: usize) -> (f64, f64, f64) {
        self.map_at(self.s(i))
    }

    pub fn map_at(&self, s: f64) -> (f64, f64, f64) {
        let b = self.cluster;
        (s + b * s * (1.0 - s), 1.0 + b * (1.0 - 2.0 * s), -2.0 * b)
    }

    /// `log r` at an arbitrary point `(s, θ)`.
    pub fn log_r_at(&self, s: f64, theta: f64) -> f64 {
        let (phi, _, _) = self.map_at(s);
        let (gamma, _, _) = self.body.profile_at(theta);
        (1.0 - phi) * gamma.ln() + phi * self.l_out
    }

    pub fn log_r(&self, i: usize, j: usize) -> f64 {
        let (phi, _, _) = self.map(i);
        (1.0 - phi) * self.g[j] + phi * self.l_out
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i == self.ns {
            return self.r_out;
        }
        self.log_r(i, j).exp()
    }

    /// `∂(log r)/∂s` at node (i, j).
    pub fn dlds(&self, i: usize, j: usize) -> f64 {
        (self.l_out - self.g[j]) * self.map(i).1
    }

    /// `(log γ)'` and `(log γ)''` at θ_j.
    pub fn log_profile_derivatives(&self, j: usize) -> (f64, f64) {
        (self.dg[j], self.d2g[j])
    }

    /// Contributions of nodal values to `(u_L, u_θ, ĥ_rr, ĥ_rθ, ĥ_θθ, μ̂)` at node (i, j).
    ///
    /// Centered differences in the interior, second-order one-sided
    /// differences on the rows `s = 0` and `s = 1`, even reflection across
    /// the axis.
    pub fn stencil(&self, i: usize, j: usize) -> Vec<(usize, [f64; 6])> {
        let (hs, ht) = (self.hs(), self.hth());
        let s_ops: Vec<(usize, f64, f64)> = if i == 0 {
            vec![(0, -1.5, 2.0), (1, 2.0, -5.0), (2, -0.5, 4.0), (3, 0.0, -1.0)]
        } else if i == self.ns {
            let n = self.ns;
            vec![(n - 3, 0.0, -1.0), (n - 2, 0.5, 4.0), (n - 1, -2.0, -5.0), (n, 1.5, 2.0)]
        } else {
            vec![(i - 1, -0.5, 1.0), (i, 0.0, -2.0), (i + 1, 0.5, 1.0)]
        };
        let reflect = |jj: isize| -> usize {
            let m = self.nth as isize;
            if jj < 0 {
                (-jj) as usize
            } else if jj > m {
                (2 * m - jj) as usize
            } else {
                jj as usize
            }
        };
        let t_ops = [(-1isize, -0.5, 1.0), (0, 0.0, -2.0), (1, 0.5, 1.0)];

        // raw derivatives (u_s, u_ss, u_θ, u_θθ, u_sθ) per node
        let mut raw: Vec<(usize, [f64; 5])> = Vec::with_capacity(16);
        for &(ii, d1, d2) in &s_ops {
            raw.push((self.idx(ii, j), [d1 / hs, d2 / (hs * hs), 0.0, 0.0, 0.0]));
        }
        for &(dj, d1, d2) in &t_ops {
            let jj = reflect(j as isize + dj);
            raw.push((self.idx(i, jj), [0.0, 0.0, d1 / ht, d2 / (ht * ht), 0.0]));
        }
        for &(ii, d1s, _) in &s_ops {
            if d1s == 0.0 {
                continue;
            }
            for &(dj, d1t, _) in &t_ops {
                if d1t == 0.0 {
                    continue;
                }
                let jj = reflect(j as isize + dj);
                raw.push((self.idx(ii, jj), [0.0, 0.0, 0.0, 0.0, d1s * d1t / (hs * ht)]));
            }
        }
        let geo = self.node_geometry(i, j);
        raw.into_iter().map(|(m, c)| (m, geo.apply(&c))).collect()
    }

    fn node_geometry(&self, i: usize, j: usize) -> NodeGeometry {
        let (phi, dphi, d2phi) = self.map(i);
        let d = self.l_out - self.g[j];
        let (dg, d2g) = self.log_profile_derivatives(j);
        let pole = j == 0 || j == self.nth;
        NodeGeometry {
            ls: d * dphi,
            lss: d * d2phi,
            lst: -dphi * dg,
            lt: (1.0 - phi) * dg,
            ltt: (1.0 - phi) * d2g,
            cot: if pole { 0.0 } else { 1.0 / self.theta[j].tan() },
            pole,
        }
    }

    /// Nodal jet from the full value array.
    pub fn jet(&self, u: &[f64], i: usize, j: usize) -> NodeJet {
        let mut acc = [0.0; 6];
        for (m, c) in self.stencil(i, j) {
            for (a, cc) in acc.iter_mut().zip(c) {
                *a += cc * u[m];
            }
        }
        NodeJet {
            r: self.r(i, j),
            theta: self.theta[j],
            u: u[self.idx(i, j)],
            u_l: acc[0],
            u_t: acc[1],
            hhat: [acc[2], acc[3], acc[4], acc[5]],
        }
    }
}

struct NodeGeometry {
    ls: f64,
    lss: f64,
    lst: f64,
    lt: f64,
    ltt: f64,
    cot: f64,
    pole: bool,
}

impl NodeGeometry {
    /// Maps `(u_s, u_ss, u_θ, u_θθ, u_sθ)` to `(u_L, u_θ|_L, ĥ_rr, ĥ_rθ, ĥ_θθ, μ̂)`.
    fn apply(&self, c: &[f64; 5]) -> [f64; 6] {
        let [us, uss, ut, utt, ust] = *c;
        let ul = us / self.ls;
        let ull = (uss - ul * self.lss) / (self.ls * self.ls);
        let ult = (ust - ul * self.lst) / self.ls - ull * self.lt;
        let utl = ut - ul * self.lt;
        let uttl = utt - ull * self.lt * self.lt - 2.0 * ult * self.lt - ul * self.ltt;
        let mu = if self.pole { ul + uttl } else { ul + self.cot * utl };
        [ul, utl, ull - ul, ult - utl, uttl + ul, mu]
    }
}
