//! Executes a manifest.

use bachlike_core::geometry::Geometry;
use bachlike_core::quadrature::{
    decay_probe, verify_lemmas, LemmaConfig, LemmaId, RELATIVE_TOLERANCE,
};
use bachlike_core::regime::grid;
use bachlike_core::report::{IdentityReport, LemmaDetail};
use bachlike_core::suite::{IdentityId, PointwiseConfig, PointwiseId, PointwiseRun};

use crate::error::Result;
use crate::manifest::Manifest;
use crate::report::{DecayRecord, Report, RunMetadata, Summary, SCHEMA};

/// Per-point residual rows, point `i` handled by worker `i % threads`.
fn pointwise_rows(run: &PointwiseRun, threads: usize) -> Result<Vec<Vec<Option<f64>>>> {
    let count = run.points().len();
    if threads <= 1 {
        return Ok((0..count)
            .map(|i| run.point_residuals(i))
            .collect::<bachlike_core::Result<_>>()?);
    }
    let mut rows: Vec<Option<bachlike_core::Result<Vec<Option<f64>>>>> = vec![None; count];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                s.spawn(move || {
                    (t..count)
                        .step_by(threads)
                        .map(|i| (i, run.point_residuals(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, row) in h.join().expect("pointwise worker panicked") {
                rows[i] = Some(row);
            }
        }
    });
    Ok(rows
        .into_iter()
        .map(|r| r.expect("every point is assigned to a worker"))
        .collect::<bachlike_core::Result<_>>()?)
}

fn run_geometry(
    m: &Manifest,
    geometry: &Geometry,
    pointwise: &[PointwiseId],
    lemmas: &[LemmaId],
    identities: &mut Vec<IdentityReport>,
    details: &mut Vec<LemmaDetail>,
) -> Result<()> {
    if !pointwise.is_empty() {
        let config = PointwiseConfig {
            samples: m.suite.samples,
            seed: m.suite.seed,
            order: m.suite.jet_order,
            tolerance: m.suite.tolerance,
        };
        let run = PointwiseRun::new(geometry, pointwise, config)?;
        let rows = pointwise_rows(&run, m.suite.threads)?;
        identities.extend(run.finish(&rows));
    }
    if !lemmas.is_empty() {
        // A closed manifold has a single region whatever the level.
        let levels = if geometry.properties().closed {
            &m.quadrature.levels[..1]
        } else {
            &m.quadrature.levels[..]
        };
        for &level in levels {
            let mut config = LemmaConfig::new(level, m.quadrature.q);
            config.seed = m.suite.seed;
            config.bach_like = m.suite.bach_like.iter().map(|p| (p[0], p[1])).collect();
            if let Some(t) = m.quadrature.tolerance {
                config.relative_tolerance = t;
            }
            for o in verify_lemmas(geometry, lemmas, &config)? {
                identities.push(o.report);
                details.push(o.detail);
            }
        }
    }
    Ok(())
}

/// Runs every selected identity on every geometry, then the decay probe and the regime grid.
pub fn run_suite(m: &Manifest) -> Result<Report> {
    m.validate()?;
    let selection = m.selection()?;
    let pointwise: Vec<PointwiseId> = selection
        .iter()
        .filter_map(|id| match id {
            IdentityId::Pointwise(p) => Some(*p),
            IdentityId::Lemma(_) => None,
        })
        .collect();
    let lemmas: Vec<LemmaId> = selection
        .iter()
        .filter_map(|id| match id {
            IdentityId::Lemma(l) => Some(*l),
            IdentityId::Pointwise(_) => None,
        })
        .collect();
    let geometries = m.geometries()?;
    let mut identities = Vec::new();
    let mut details = Vec::new();
    let mut decay = Vec::new();
    for g in &geometries {
        run_geometry(m, g, &pointwise, &lemmas, &mut identities, &mut details)?;
        if let (Some(alpha), true) = (m.quadrature.decay_alpha, g.has_potential()) {
            if !m.quadrature.decay_levels.is_empty() && !g.properties().closed {
                decay.push(DecayRecord {
                    geometry: g.name().to_string(),
                    alpha,
                    points: decay_probe(g, alpha, &m.quadrature.decay_levels, m.quadrature.q)?,
                });
            }
        }
    }
    let regimes = match m.grid_axes()? {
        Some((a, b)) => grid(a, b),
        None => Vec::new(),
    };
    Ok(Report {
        schema: SCHEMA.to_string(),
        run: metadata(m, &geometries, &selection),
        summary: Summary::of(&identities),
        identities,
        details,
        regimes,
        decay,
    })
}

/// Only the regime grid; identities are left empty.
pub fn run_grid(m: &Manifest) -> Result<Report> {
    let (a, b) = match m.grid_axes()? {
        Some(axes) => axes,
        None => {
            let unit = bachlike_core::regime::GridAxis::new(-1.0, 1.0, 0.25)?;
            (unit, unit)
        }
    };
    Ok(Report {
        schema: SCHEMA.to_string(),
        run: metadata(m, &[], &[]),
        identities: Vec::new(),
        details: Vec::new(),
        regimes: grid(a, b),
        decay: Vec::new(),
        summary: Summary::default(),
    })
}

fn metadata(m: &Manifest, geometries: &[Geometry], selection: &[IdentityId]) -> RunMetadata {
    RunMetadata {
        tool: "bachlike".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: bachlike_core::VERSION.to_string(),
        geometries: geometries.iter().map(|g| g.name().to_string()).collect(),
        selection: selection.iter().map(|id| id.as_str().to_string()).collect(),
        seed: m.suite.seed,
        jet_order: m.suite.jet_order,
        samples: m.suite.samples,
        quadrature: m.quadrature.q,
        levels: m.quadrature.levels.clone(),
        pointwise_tolerance: m.suite.tolerance,
        integral_tolerance: m.quadrature.tolerance.unwrap_or(RELATIVE_TOLERANCE),
    }
}
