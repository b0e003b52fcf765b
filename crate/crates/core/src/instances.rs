//! Generators for the example families: an axis-parallel ellipsoid, the unit
//! disk, a ten-bar planar truss and a synthetic elastic net. Each emits a
//! problem document (with its parameters under `meta`) and, where the upper
//! image is known in closed form, an oracle for certification.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{norm, solve_sym_regularized, Lu, Mat};
use crate::problem::{AtomDoc, BoxDoc, ConeDoc, ConstraintDoc, EqDoc, ProblemDoc, Vcp};
use crate::scalar::Real;

/// Closed-form knowledge of an upper image `P = F[S] + C`.
pub trait UpperImageOracle: Send + Sync {
    /// `count` weakly minimal points of `P`, deterministic in `seed`.
    fn boundary_samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>>;
    fn contains(&self, y: &[f64]) -> bool;
    /// How far an image point is from the weakly minimal surface (zero on it).
    fn surface_residual(&self, y: &[f64]) -> f64;
}

/// `F = id` on `{x : Σ ((x_i - c_i) / a_i)² <= 1}` under the natural order.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidOracle {
    pub center: Vec<f64>,
    pub axes: Vec<f64>,
}

impl UpperImageOracle for EllipsoidOracle {
    fn boundary_samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.center.len();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut w: Vec<f64> = (0..q).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
            // Some weights on the boundary of the orthant reach the weakly
            // minimal rim.
            if rng.gen_bool(0.1) {
                let k = rng.gen_range(0..q);
                w[k] = 0.0;
            }
            let dw: Vec<f64> = w.iter().zip(&self.axes).map(|(wi, a)| wi * a).collect();
            let n = norm(&dw);
            if n < 1e-12 {
                continue;
            }
            // argmin of wᵀx over the ellipsoid
            out.push(
                self.center
                    .iter()
                    .zip(&dw)
                    .zip(&self.axes)
                    .map(|((c, d), a)| c - d * a / n)
                    .collect(),
            );
        }
        out
    }

    /// Some ellipsoid point lies below `y`: the closest candidate in the box
    /// `x <= y` is `min(y, c)` coordinatewise.
    fn contains(&self, y: &[f64]) -> bool {
        let s: f64 = y
            .iter()
            .zip(&self.center)
            .zip(&self.axes)
            .map(|((yi, c), a)| ((c - yi).max(0.0) / a).powi(2))
            .sum();
        s <= 1.0 + 1e-12
    }

    fn surface_residual(&self, y: &[f64]) -> f64 {
        let s: f64 = y
            .iter()
            .zip(&self.center)
            .zip(&self.axes)
            .map(|((yi, c), a)| ((yi - c) / a).powi(2))
            .sum();
        (s.sqrt() - 1.0).abs()
    }
}

/// A generated problem with its optional oracle.
#[derive(Clone)]
pub struct Instance {
    pub name: String,
    pub doc: ProblemDoc,
    pub oracle: Option<Arc<dyn UpperImageOracle>>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("name", &self.name)
            .field("has_oracle", &self.oracle.is_some())
            .finish()
    }
}

impl Instance {
    pub fn vcp<T: Real>(&self) -> Result<Vcp<T>> {
        Vcp::from_document(&self.doc)
    }
}

/// Rebuilds the oracle of a generated document from its `meta` block.
pub fn oracle_for(doc: &ProblemDoc) -> Option<Arc<dyn UpperImageOracle>> {
    let meta = doc.meta.as_ref()?;
    match meta.get("family")?.as_str()? {
        "ellipsoid" => {
            let a = meta.get("a")?.as_f64()?;
            Some(Arc::new(ellipsoid_oracle(a)))
        }
        "disk" => Some(Arc::new(disk_oracle())),
        _ => None,
    }
}

fn ellipsoid_oracle(a: f64) -> EllipsoidOracle {
    EllipsoidOracle {
        center: vec![1.0; 3],
        axes: vec![1.0, a, 5.0],
    }
}

fn disk_oracle() -> EllipsoidOracle {
    EllipsoidOracle {
        center: vec![0.0; 2],
        axes: vec![1.0; 2],
    }
}

fn identity_objectives(q: usize) -> Vec<AtomDoc> {
    (0..q)
        .map(|i| {
            let mut c = vec![0.0; q];
            c[i] = 1.0;
            AtomDoc::Affine { c, r: 0.0 }
        })
        .collect()
}

/// `Σ ((x_i - c_i) / a_i)² <= 1` as a quadratic atom.
fn ellipsoid_constraint(center: &[f64], axes: &[f64]) -> ConstraintDoc {
    let n = center.len();
    let d: Vec<f64> = axes.iter().map(|a| 1.0 / (a * a)).collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        q[i][i] = 2.0 * d[i];
    }
    ConstraintDoc {
        atom: AtomDoc::Quadratic {
            q,
            c: (0..n).map(|i| -2.0 * d[i] * center[i]).collect(),
            r: (0..n).map(|i| d[i] * center[i] * center[i]).sum(),
        },
        ub: 1.0,
    }
}

/// `F = id` on the ellipsoid with center `(1,1,1)` and semi-axes `1, a, 5`.
pub fn ellipsoid(a: f64) -> Result<Instance> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::BadParameter(format!("semi-axis a must be positive, got {a}")));
    }
    let o = ellipsoid_oracle(a);
    let doc = ProblemDoc {
        n: 3,
        cone: ConeDoc::Natural { natural: 3 },
        objectives: identity_objectives(3),
        constraints: vec![ellipsoid_constraint(&o.center, &o.axes)],
        eq: None,
        bounds: None,
        meta: Some(json!({"family": "ellipsoid", "a": a})),
    };
    Ok(Instance {
        name: format!("ellipsoid-a{a}"),
        doc,
        oracle: Some(Arc::new(o)),
    })
}

/// `F = id` on the closed unit disk, natural order in the plane.
pub fn disk() -> Instance {
    let o = disk_oracle();
    let doc = ProblemDoc {
        n: 2,
        cone: ConeDoc::Natural { natural: 2 },
        objectives: identity_objectives(2),
        constraints: vec![ellipsoid_constraint(&o.center, &o.axes)],
        eq: None,
        bounds: None,
        meta: Some(json!({"family": "disk"})),
    };
    Instance {
        name: "disk".into(),
        doc,
        oracle: Some(Arc::new(o)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrussParams {
    /// Bay length (mm).
    pub length: f64,
    /// Member radius (mm).
    pub radius: f64,
    /// Young's modulus (N/mm²).
    pub youngs: f64,
    /// Net load distributed over the free nodes (N).
    pub force: f64,
    /// Bound on tension and compression (N/mm²).
    pub stress: f64,
    /// Restrict every load component to `p >= 0`. Off by default: with free
    /// signs the loads can pin three nodes at once and the upper image
    /// degenerates to two vertices.
    pub nonnegative_loads: bool,
}

impl Default for TrussParams {
    fn default() -> Self {
        TrussParams {
            length: 9000.0,
            radius: 25.0,
            youngs: 70000.0,
            force: 150000.0,
            stress: 170.0,
            nonnegative_loads: false,
        }
    }
}

/// Assembled ten-bar cantilever.
#[derive(Clone, Debug)]
pub struct Truss {
    /// Stiffness over the eight free degrees of freedom `(h, v)` per node.
    pub k: Mat<f64>,
    /// Member stresses per unit nodal displacement.
    pub t: Mat<f64>,
    pub compliance: Mat<f64>,
}

/// Nodes: supports 0 = (0, ℓ), 1 = (0, 0); free 2 = (ℓ, ℓ), 3 = (ℓ, 0),
/// 4 = (2ℓ, ℓ), 5 = (2ℓ, 0).
const TRUSS_MEMBERS: [(usize, usize); 10] = [
    (0, 2),
    (2, 4),
    (1, 3),
    (3, 5),
    (2, 3),
    (4, 5),
    (0, 3),
    (1, 2),
    (2, 5),
    (3, 4),
];

impl Truss {
    pub fn assemble(p: &TrussParams) -> Result<Self> {
        for (name, v) in [
            ("length", p.length),
            ("radius", p.radius),
            ("youngs", p.youngs),
            ("force", p.force),
            ("stress", p.stress),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadParameter(format!("truss {name} must be positive, got {v}")));
            }
        }
        let l = p.length;
        let nodes = [(0.0, l), (0.0, 0.0), (l, l), (l, 0.0), (2.0 * l, l), (2.0 * l, 0.0)];
        let area = PI * p.radius * p.radius;
        // free node i >= 2 owns dofs 2(i-2), 2(i-2)+1
        let dof = |node: usize, k: usize| (node >= 2).then(|| 2 * (node - 2) + k);
        let mut k = Mat::zeros(8, 8);
        let mut t = Mat::zeros(TRUSS_MEMBERS.len(), 8);
        for (m, &(a, b)) in TRUSS_MEMBERS.iter().enumerate() {
            let (dx, dy) = (nodes[b].0 - nodes[a].0, nodes[b].1 - nodes[a].1);
            let len = dx.hypot(dy);
            let dir = [dx / len, dy / len];
            let stiff = p.youngs * area / len;
            // elongation = dirᵀ(u_b - u_a)
            let ends = [(a, -1.0), (b, 1.0)];
            for &(na, sa) in &ends {
                for ka in 0..2 {
                    let Some(ia) = dof(na, ka) else { continue };
                    t[(m, ia)] += sa * dir[ka] * p.youngs / len;
                    for &(nb, sb) in &ends {
                        for kb in 0..2 {
                            if let Some(ib) = dof(nb, kb) {
                                k[(ia, ib)] += stiff * sa * sb * dir[ka] * dir[kb];
                            }
                        }
                    }
                }
            }
        }
        let lu = Lu::new(&k, 1e-12 * k.max_abs()).ok_or(Error::SingularStiffness)?;
        let cols: Vec<Vec<f64>> = (0..8)
            .map(|j| {
                let mut e = vec![0.0; 8];
                e[j] = 1.0;
                lu.solve(&e)
            })
            .collect();
        Ok(Truss {
            k,
            t,
            compliance: Mat::from_cols(&cols),
        })
    }

    /// Nodal displacements under load `p`.
    pub fn displacements(&self, p: &[f64]) -> Vec<f64> {
        self.compliance.mul_vec(p)
    }

    pub fn stresses(&self, p: &[f64]) -> Vec<f64> {
        self.t.mul_vec(&self.displacements(p))
    }
}

/// Distribute a net load over the four free nodes to minimize the largest
/// displacement component of each node, subject to stress bounds.
pub fn truss(p: &TrussParams) -> Result<Instance> {
    let tr = Truss::assemble(p)?;
    let c = &tr.compliance;
    let objectives = (0..4)
        .map(|i| AtomDoc::LinfAffine {
            a: vec![c.row(2 * i).to_vec(), c.row(2 * i + 1).to_vec()],
            b: vec![0.0, 0.0],
        })
        .collect();
    let s = tr.t.mul(c);
    let mut constraints = Vec::new();
    for r in 0..s.rows() {
        for sign in [1.0, -1.0] {
            constraints.push(ConstraintDoc {
                atom: AtomDoc::Affine {
                    c: s.row(r).iter().map(|v| sign * v).collect(),
                    r: 0.0,
                },
                ub: p.stress,
            });
        }
    }
    let doc = ProblemDoc {
        n: 8,
        cone: ConeDoc::Natural { natural: 4 },
        objectives,
        constraints,
        eq: Some(EqDoc {
            e: vec![vec![1.0; 8]],
            f: vec![p.force],
        }),
        bounds: p.nonnegative_loads.then(|| BoxDoc {
            lo: vec![Some(0.0); 8],
            hi: vec![None; 8],
        }),
        meta: Some(json!({
            "family": "truss",
            "length": p.length,
            "radius": p.radius,
            "youngs": p.youngs,
            "force": p.force,
            "stress": p.stress,
            "nonnegative_loads": p.nonnegative_loads,
        })),
    };
    Ok(Instance {
        name: "truss".into(),
        doc,
        oracle: None,
    })
}

/// Standardized regression data: centered response, centered predictors with
/// unit sum of squares.
#[derive(Clone, Debug)]
pub struct RegressionData {
    pub a: Mat<f64>,
    pub b: Vec<f64>,
}

pub fn regression_data(m: usize, n: usize, seed: u64) -> Result<RegressionData> {
    if m < 2 || n < 1 {
        return Err(Error::BadShape(format!("need m >= 2 and n >= 1, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Mat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let nnz = n.min(5).max(1);
    let mut truth = vec![0.0; n];
    for _ in 0..nnz {
        let j = rng.gen_range(0..n);
        truth[j] = rng.sample::<f64, _>(StandardNormal) * 2.0;
    }
    let mut b = a.mul_vec(&truth);
    for bi in &mut b {
        *bi += 0.1 * rng.sample::<f64, _>(StandardNormal);
    }
    for j in 0..n {
        let mean = (0..m).map(|i| a[(i, j)]).sum::<f64>() / m as f64;
        for i in 0..m {
            a[(i, j)] -= mean;
        }
        let ss = (0..m).map(|i| a[(i, j)].powi(2)).sum::<f64>().sqrt();
        if ss == 0.0 {
            return Err(Error::BadShape(format!("column {j} is constant")));
        }
        for i in 0..m {
            a[(i, j)] /= ss;
        }
    }
    let mean = b.iter().sum::<f64>() / m as f64;
    for bi in &mut b {
        *bi -= mean;
    }
    Ok(RegressionData { a, b })
}

/// `(‖Ax - b‖², ‖x‖₁, ‖x‖²)` over a box `‖x‖∞ <= R`, with `R` ten times the
/// largest entry of a lightly regularized least-squares fit.
pub fn elastic_net(m: usize, n: usize, seed: u64) -> Result<Instance> {
    let data = regression_data(m, n, seed)?;
    let RegressionData { a, b } = data;
    let mut g = a.gram();
    for j in 0..n {
        g[(j, j)] += 1e-6;
    }
    let pilot =
        solve_sym_regularized(&g, &a.tr_mul_vec(&b)).ok_or_else(|| Error::BadShape("pilot fit failed".into()))?;
    let r = 10.0 * pilot.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(0.1);
    let rows = |m: &Mat<f64>| m.to_rows();
    let mut q2 = vec![vec![0.0; n]; n];
    for (j, row) in q2.iter_mut().enumerate() {
        row[j] = 2.0;
    }
    let doc = ProblemDoc {
        n,
        cone: ConeDoc::Natural { natural: 3 },
        objectives: vec![
            AtomDoc::SqResidual {
                a: rows(&a),
                b: b.clone(),
            },
            AtomDoc::L1Affine {
                a: rows(&Mat::identity(n)),
                b: vec![0.0; n],
            },
            AtomDoc::Quadratic {
                q: q2,
                c: vec![0.0; n],
                r: 0.0,
            },
        ],
        constraints: vec![],
        eq: None,
        bounds: Some(BoxDoc {
            lo: vec![Some(-r); n],
            hi: vec![Some(r); n],
        }),
        meta: Some(json!({"family": "enet", "m": m, "n": n, "seed": seed, "R": r})),
    };
    Ok(Instance {
        name: format!("enet-{m}x{n}-s{seed}"),
        doc,
        oracle: None,
    })
}
