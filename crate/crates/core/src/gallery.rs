//! Example surfaces with exact jets.

use crate::ambient::{read_samples_csv, AmbientKind, AmbientSpace, Chart, ChartSource, GridParams};
use crate::error::{GeomError, Result};
use crate::jet::{CJet, Jet, VJet};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

/// Complex polynomial, coefficients `(re, im)` in ascending degree.
pub type ComplexPoly = Vec<(f64, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Plane,
    Catenoid,
    Helicoid,
    /// Graph `(u, v, a u² + b uv + c v²)`.
    Graph { a: f64, b: f64, c: f64 },
    /// Real form `(Re p1, Im p1, Re p2, ...)` of a holomorphic curve.
    IsotropicCurve { components: Vec<ComplexPoly> },
    /// `Re Φ(z)` for a polynomial null curve Φ.
    NullCurve { components: Vec<ComplexPoly> },
    LawsonRuled { m: u32, k: u32 },
    LawsonSum { base: Box<SurfaceSpec>, weights: Vec<f64>, angles: Vec<f64> },
    Perturbed { base: Box<SurfaceSpec>, eps: f64, seed: u64 },
    Sampled { path: PathBuf, kind: AmbientKind, stencil_order: usize },
}

/// Validated holomorphic curve `z ↦ (p1(z), …, pn(z))`.
pub fn gen_isotropic_curve(components: Vec<ComplexPoly>) -> Result<SurfaceSpec> {
    if components.is_empty() {
        return Err(GeomError::InvalidSpec("no components".into()));
    }
    // Substantial iff the non-constant parts are linearly independent over C.
    let deg = components.iter().map(|c| c.len()).max().unwrap_or(0);
    if deg < 2 {
        return Err(GeomError::NotSubstantial);
    }
    let n = components.len();
    // Realify the complex (deg-1) x n coefficient matrix; complex rank = real rank / 2.
    let rows = deg - 1;
    let mut a = DMatrix::zeros(2 * rows, 2 * n);
    for (j, comp) in components.iter().enumerate() {
        for d in 1..deg {
            let (re, im) = comp.get(d).copied().unwrap_or((0.0, 0.0));
            let r = 2 * (d - 1);
            a[(r, 2 * j)] = re;
            a[(r, 2 * j + 1)] = -im;
            a[(r + 1, 2 * j)] = im;
            a[(r + 1, 2 * j + 1)] = re;
        }
    }
    let s = a.singular_values();
    let smax = s.max();
    let rank = s.iter().filter(|&&x| x > 1e-10 * smax).count();
    if rank < 2 * n {
        return Err(GeomError::NotSubstantial);
    }
    Ok(SurfaceSpec::IsotropicCurve { components })
}

/// The curve `(z, z²/√2, …, z^n/√n!)`.
pub fn standard_isotropic(n: usize) -> SurfaceSpec {
    let comps = (1..=n)
        .map(|k| {
            let mut c = vec![(0.0, 0.0); k + 1];
            let fact: f64 = (1..=k).product::<usize>() as f64;
            c[k] = (1.0 / fact.sqrt(), 0.0);
            c
        })
        .collect();
    SurfaceSpec::IsotropicCurve { components: comps }
}

/// Enneper's null curve extended by `(z³/3, i z³/3)`: a substantial minimal surface in flat 5-space.
pub fn enneper5() -> SurfaceSpec {
    let t = 1.0 / 3.0;
    SurfaceSpec::NullCurve {
        components: vec![
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (-t, 0.0)],
            vec![(0.0, 0.0), (0.0, 1.0), (0.0, 0.0), (0.0, t)],
            vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (t, 0.0)],
            vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, t)],
        ],
    }
}

pub fn gen_lawson_ruled(m: u32, k: u32) -> Result<SurfaceSpec> {
    if m < 1 || k < 1 {
        return Err(GeomError::InvalidSpec("ruled surface needs m, k >= 1".into()));
    }
    Ok(SurfaceSpec::LawsonRuled { m, k })
}

pub fn gen_lawson_sum(base: SurfaceSpec, weights: Vec<f64>, angles: Vec<f64>) -> Result<SurfaceSpec> {
    if weights.len() != angles.len() || weights.is_empty() {
        return Err(GeomError::InvalidSpec("weights and angles must have equal nonzero length".into()));
    }
    let sum: f64 = weights.iter().map(|a| a * a).sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(GeomError::NotUnitNorm { sum });
    }
    let sorted = angles.windows(2).all(|w| w[0] < w[1]);
    if !sorted || angles.iter().any(|&t| !(0.0..PI).contains(&t)) {
        return Err(GeomError::AnglesNotSorted);
    }
    if base.ambient()?.kind != AmbientKind::Sphere || base.ambient()?.flat_dim != 4 {
        return Err(GeomError::InvalidSpec("Lawson sums need a base surface in the 3-sphere".into()));
    }
    Ok(SurfaceSpec::LawsonSum { base: Box::new(base), weights, angles })
}

pub fn gen_perturbed(base: SurfaceSpec, eps: f64, seed: u64) -> Result<SurfaceSpec> {
    if !(eps >= 0.0) {
        return Err(GeomError::InvalidSpec("perturbation size must be non-negative".into()));
    }
    if eps == 0.0 {
        return Ok(base);
    }
    Ok(SurfaceSpec::Perturbed { base: Box::new(base), eps, seed })
}

fn real_part(z: &CJet, poly: &ComplexPoly) -> (Jet, Jet) {
    let p = CJet::polynomial(z, poly);
    (p.re, p.im)
}

impl SurfaceSpec {
    /// Runs the generator checks on a spec built by hand or deserialized.
    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceSpec::IsotropicCurve { components } => gen_isotropic_curve(components.clone()).map(|_| ()),
            SurfaceSpec::NullCurve { components } if components.len() < 3 => {
                Err(GeomError::InvalidSpec("null curves need at least 3 components".into()))
            }
            SurfaceSpec::LawsonRuled { m, k } => gen_lawson_ruled(*m, *k).map(|_| ()),
            SurfaceSpec::LawsonSum { base, weights, angles } => {
                base.validate()?;
                gen_lawson_sum((**base).clone(), weights.clone(), angles.clone()).map(|_| ())
            }
            SurfaceSpec::Perturbed { base, eps, seed } => {
                base.validate()?;
                gen_perturbed((**base).clone(), *eps, *seed).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn ambient(&self) -> Result<AmbientSpace> {
        Ok(match self {
            SurfaceSpec::Plane | SurfaceSpec::Catenoid | SurfaceSpec::Helicoid | SurfaceSpec::Graph { .. } => {
                AmbientSpace::euclidean(3)
            }
            SurfaceSpec::IsotropicCurve { components } => AmbientSpace::euclidean(2 * components.len()),
            SurfaceSpec::NullCurve { components } => AmbientSpace::euclidean(components.len()),
            SurfaceSpec::LawsonRuled { .. } => AmbientSpace::sphere(4),
            SurfaceSpec::LawsonSum { weights, .. } => AmbientSpace::sphere(4 * weights.len()),
            SurfaceSpec::Perturbed { base, .. } => base.ambient()?,
            SurfaceSpec::Sampled { kind, .. } => {
                return Err(GeomError::InvalidSpec(format!("sampled {kind:?} ambient is read from the file")))
            }
        })
    }

    /// A nondegenerate default domain.
    pub fn default_domain(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            SurfaceSpec::Catenoid | SurfaceSpec::Helicoid => ((0.0, 1.5), (-0.75, 0.75)),
            SurfaceSpec::IsotropicCurve { .. } => ((0.0, 0.5), (0.0, 0.5)),
            SurfaceSpec::NullCurve { .. } => ((0.3, 0.8), (0.3, 0.8)),
            SurfaceSpec::LawsonRuled { .. } | SurfaceSpec::LawsonSum { .. } => ((0.0, 1.0), (0.2, 1.2)),
            SurfaceSpec::Perturbed { base, .. } => base.default_domain(),
            _ => ((-0.5, 0.5), (-0.5, 0.5)),
        }
    }

    pub fn default_grid(&self, n: usize) -> GridParams {
        let (u, v) = self.default_domain();
        GridParams::new(n, n, u, v)
    }

    /// Exact jet of the position map at `(u0, v0)` for pointwise generators.
    pub fn jet_at(&self, u0: f64, v0: f64, order: usize) -> Result<VJet> {
        let u = Jet::var_u(u0, order);
        let v = Jet::var_v(v0, order);
        Ok(match self {
            SurfaceSpec::Plane => VJet::from_components(&[u, v, Jet::zero(order)]),
            SurfaceSpec::Catenoid => {
                let ch = v.cosh();
                VJet::from_components(&[&ch * &u.cos(), &ch * &u.sin(), v])
            }
            SurfaceSpec::Helicoid => {
                let sh = v.sinh();
                VJet::from_components(&[&sh * &u.cos(), &sh * &u.sin(), u])
            }
            SurfaceSpec::Graph { a, b, c } => {
                let z = &(&(&u * &u).scale(*a) + &(&u * &v).scale(*b)) + &(&v * &v).scale(*c);
                VJet::from_components(&[u, v, z])
            }
            SurfaceSpec::IsotropicCurve { components } => {
                let z = CJet::z(u0, v0, order);
                let mut comps = Vec::new();
                for p in components {
                    let (re, im) = real_part(&z, p);
                    comps.push(re);
                    comps.push(im);
                }
                VJet::from_components(&comps)
            }
            SurfaceSpec::NullCurve { components } => {
                let z = CJet::z(u0, v0, order);
                let comps: Vec<Jet> = components.iter().map(|p| real_part(&z, p).0).collect();
                VJet::from_components(&comps)
            }
            SurfaceSpec::LawsonRuled { m, k } => {
                let (m, k) = (*m as f64, *k as f64);
                let (cv, sv) = (v.cos(), v.sin());
                let mu = u.scale(m);
                let ku = u.scale(k);
                VJet::from_components(&[&mu.cos() * &cv, &mu.sin() * &cv, &ku.cos() * &sv, &ku.sin() * &sv])
            }
            SurfaceSpec::Perturbed { base, eps, seed } => {
                let g = base.jet_at(u0, v0, order)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let uu = &u * &u;
                let uv = &u * &v;
                let vv = &v * &v;
                let comps: Vec<Jet> = (0..g.dim())
                    .map(|_| {
                        let c: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                        &(&uu.scale(c[0]) + &uv.scale(c[1])) + &vv.scale(c[2])
                    })
                    .collect();
                let p = VJet::from_components(&comps).scale(*eps);
                let out = g.add(&p);
                if base.ambient()?.kind == AmbientKind::Sphere {
                    out.normalized()
                } else {
                    out
                }
            }
            SurfaceSpec::LawsonSum { .. } | SurfaceSpec::Sampled { .. } => {
                return Err(GeomError::InvalidSpec("not a pointwise generator".into()))
            }
        })
    }

    /// Chart on `grid` with jets of the given order.
    pub fn chart(&self, grid: &GridParams, order: usize) -> Result<Chart> {
        match self {
            SurfaceSpec::Sampled { path, kind, stencil_order } => read_samples_csv(path, *kind, order, *stencil_order),
            SurfaceSpec::LawsonSum { base, weights, angles } => lawson_sum_chart(base, weights, angles, grid, order),
            SurfaceSpec::IsotropicCurve { components } => {
                gen_isotropic_curve(components.clone())?;
                self.pointwise_chart(grid, order)
            }
            _ => self.pointwise_chart(grid, order),
        }
    }

    fn pointwise_chart(&self, grid: &GridParams, order: usize) -> Result<Chart> {
        let ambient = self.ambient()?;
        let jets = (0..grid.len())
            .map(|node| {
                let (u, v) = grid.coords(node);
                self.jet_at(u, v, order)
            })
            .collect::<Result<Vec<_>>>()?;
        Chart { ambient, grid: *grid, jets, source: ChartSource::AnalyticGallery }.finalize()
    }
}

/// Extra jet orders spent by one pass of frame integration on a surface of degree τ.
pub fn family_order_loss(tau: usize) -> usize {
    tau + 1
}

fn lawson_sum_chart(
    base: &SurfaceSpec,
    weights: &[f64],
    angles: &[f64],
    grid: &GridParams,
    order: usize,
) -> Result<Chart> {
    use crate::analysis::{Analysis, AnalysisParams};
    // The ruled base has τ = 1; integration costs τ + 1 orders.
    let base_order = order + family_order_loss(1);
    let base_chart = base.chart(grid, base_order)?;
    let analysis = Analysis::run(base_chart, &AnalysisParams::default())?;
    let mut parts: Vec<Chart> = Vec::new();
    for &theta in angles {
        if theta == 0.0 {
            parts.push(analysis.chart.clone());
        } else {
            parts.push(crate::assoc::standard_minimal_family(&analysis, theta)?.chart);
        }
    }
    let jets = (0..grid.len())
        .map(|node| {
            let scaled: Vec<VJet> = parts
                .iter()
                .zip(weights)
                .map(|(c, a)| c.jets[node].truncate(order).scale(*a))
                .collect();
            let refs: Vec<&VJet> = scaled.iter().collect();
            VJet::stack(&refs)
        })
        .collect();
    Chart {
        ambient: AmbientSpace::sphere(4 * weights.len()),
        grid: *grid,
        jets,
        source: ChartSource::Integrated,
    }
    .finalize()
}
