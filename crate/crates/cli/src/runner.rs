//! Experiment dispatch: run the named experiment, write the JSON report,
//! the aggregate-curve CSV and an SVG plot, and print the summary lines.

use crate::config::RunConfig;
use crate::svg::{self, Frame, SvgDoc};
use anyhow::{Context, Result};
use smcsim::experiments::{
    atlas::AtlasRunParams, run_1d_demo, run_audio, run_phi_atlas, run_relative_position,
    run_rigid_displacement, run_unchanging_medium, Report,
};
use smcsim::{Agent1d, AgentBody, ScanGrid};
use std::fs;
use std::path::PathBuf;

pub struct Artifacts {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub svg: PathBuf,
}

fn chart_from_curves<R: Report>(report: &R, title: &str, timestamp: bool) -> String {
    let curves = report.curves();
    let mut doc = SvgDoc::new(640.0, 360.0);
    let frame = Frame {
        x0: 60.0,
        y0: 40.0,
        w: 460.0,
        h: 260.0,
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    };
    if let Some(first) = curves.first() {
        let series: Vec<(String, Vec<f64>)> = curves
            .iter()
            .filter(|c| c.bins.len() == first.bins.len())
            .map(|c| (c.name.clone(), c.values.clone()))
            .collect();
        svg::line_chart(&mut doc, frame, title, &first.bins, &series);
    }
    doc.finish(timestamp)
}

pub fn execute(config: &RunConfig) -> Result<Artifacts> {
    let body = AgentBody::standard(config.seed);
    let profile = &config.profile;
    let grid = ScanGrid::square(profile.scan_grid)?;

    let (json, csv, svg_text, summary): (String, String, String, Vec<String>) =
        match config.experiment.as_str() {
            "atlas" => {
                let atlas = run_phi_atlas(
                    &body,
                    config.seed,
                    grid,
                    profile.atlas_step,
                    profile.atlas_extent,
                    profile.atlas_sources,
                    &profile.match_config(),
                )?;
                let report = atlas.report(
                    config.seed,
                    AtlasRunParams {
                        grid: profile.scan_grid,
                        jump_step: profile.atlas_step,
                        jump_extent: profile.atlas_extent,
                        sources: profile.atlas_sources,
                        cfg: profile.match_config(),
                    },
                );
                let svg_text = atlas_svg(&atlas, &body, config)?;
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    svg_text,
                    report.summary_lines(),
                )
            }
            "rigid" => {
                let report = run_rigid_displacement(&body, config.seed, &profile.rigid_params())?;
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    chart_from_curves(&report, "association by displacement difference", config.timestamp),
                    report.summary_lines(),
                )
            }
            "medium" => {
                let report = run_unchanging_medium(&body, config.seed, &profile.medium_params())?;
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    chart_from_curves(&report, "accuracy by deformation and jump", config.timestamp),
                    report.summary_lines(),
                )
            }
            "relpos" => {
                let report = run_relative_position(&body, config.seed, &profile.relpos_params())?;
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    chart_from_curves(&report, "association by destination offset", config.timestamp),
                    report.summary_lines(),
                )
            }
            "demo1d" => {
                let agent = Agent1d::new(0.08);
                let report = run_1d_demo(&agent, config.seed, &profile.demo1d_params())?;
                let svg_text = demo1d_svg(&report, config.timestamp);
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    svg_text,
                    report.summary_lines(),
                )
            }
            "audio" => {
                let cell = smcsim::audio::HairCell::standard();
                let report = run_audio(&cell, config.seed, &profile.audio_params())?;
                (
                    report.to_json()?,
                    report.curves_csv()?,
                    chart_from_curves(&report, "association by transposition interval", config.timestamp),
                    report.summary_lines(),
                )
            }
            other => anyhow::bail!("unknown experiment '{other}'"),
        };

    fs::create_dir_all(&config.out)
        .with_context(|| format!("cannot create output directory {}", config.out.display()))?;
    let stem = format!("{}_{}", config.experiment, config.seed);
    let paths = Artifacts {
        json: config.out.join(format!("{stem}.json")),
        csv: config.out.join(format!("{stem}.csv")),
        svg: config.out.join(format!("{stem}.svg")),
    };
    fs::write(&paths.json, json)
        .with_context(|| format!("cannot write {}", paths.json.display()))?;
    fs::write(&paths.csv, csv).with_context(|| format!("cannot write {}", paths.csv.display()))?;
    fs::write(&paths.svg, svg_text)
        .with_context(|| format!("cannot write {}", paths.svg.display()))?;

    for line in summary {
        println!("{line}");
    }
    Ok(paths)
}

/// Contingency heatmap of one photoreceptor plus the arrow field of a
/// sample phi over the true scan positions (plotting uses the oracle view).
fn atlas_svg(
    atlas: &smcsim::experiments::Atlas,
    body: &AgentBody,
    config: &RunConfig,
) -> Result<String> {
    let profile = &config.profile;
    let grid = ScanGrid::square(profile.scan_grid)?;
    let mut rng = smcsim::rng::stream_rng(config.seed, 1);
    let env = smcsim::experiments::scenes::rich_environment(&mut rng, profile.atlas_sources, 3.0);
    let table = smcsim::scan(
        &env,
        body,
        smcsim::experiments::AGENT_HOME,
        grid,
    );
    let mut doc = SvgDoc::new(980.0, 480.0);
    let values: Vec<f64> = (0..table.len()).map(|k| table.s_row(k)[0]).collect();
    svg::heatmap(
        &mut doc,
        Frame {
            x0: 50.0,
            y0: 40.0,
            w: 400.0,
            h: 400.0,
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        },
        "photoreceptor 1 over the scan grid",
        grid.nx,
        grid.ny,
        &values,
    );
    // the sample entry nearest to the middle of the destination list
    let sample = atlas.len() / 2 + atlas.nodes_per_axis / 2;
    let phi = &atlas.phis[sample.min(atlas.len() - 1)];
    let mut arrows = Vec::new();
    for pair in phi.pairs.iter().step_by(17) {
        let from = smcsim::oracle::locate_node(&table, pair.from.as_slice(), 1e-9);
        let to = smcsim::oracle::locate_node(&table, pair.to.as_slice(), 1e-9);
        if let (Some(f), Some(t)) = (from, to) {
            let fp = grid.node_pos(f, &body.retina_range);
            let tp = grid.node_pos(t, &body.retina_range);
            arrows.push((fp.x, fp.y, tp.x, tp.y));
        }
    }
    svg::arrow_field(
        &mut doc,
        Frame {
            x0: 520.0,
            y0: 40.0,
            w: 400.0,
            h: 400.0,
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        },
        &format!(
            "phi field for jump ({:.2},{:.2})",
            atlas.destinations[sample.min(atlas.len() - 1)].delta.x,
            atlas.destinations[sample.min(atlas.len() - 1)].delta.y
        ),
        &arrows,
    );
    Ok(doc.finish(config.timestamp))
}

fn demo1d_svg(report: &smcsim::experiments::Demo1dReport, timestamp: bool) -> String {
    let mut doc = SvgDoc::new(980.0, 400.0);
    let smax = report
        .contingency_before
        .iter()
        .chain(&report.contingency_after)
        .map(|p| p[1])
        .fold(0.0f64, f64::max);
    let frame = Frame {
        x0: 50.0,
        y0: 40.0,
        w: 400.0,
        h: 300.0,
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: smax.max(1e-9),
    };
    doc.text(frame.x0, frame.y0 - 8.0, 13.0, "contingency before (blue) and after (red)");
    for (series, color) in [
        (&report.contingency_before, "#1f77b4"),
        (&report.contingency_after, "#d62728"),
    ] {
        let pts: Vec<(f64, f64)> = series
            .iter()
            .map(|p| (frame.px(p[0]), frame.py(p[1])))
            .collect();
        doc.polyline(&pts, color, 1.2);
    }
    let frame2 = Frame {
        x0: 520.0,
        y0: 40.0,
        w: 400.0,
        h: 300.0,
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    };
    doc.text(frame2.x0, frame2.y0 - 8.0, 13.0, "phi curves from two environments");
    for (series, color) in [(&report.phi_env1, "#1f77b4"), (&report.phi_env2, "#d62728")] {
        for p in series.iter() {
            doc.circle(frame2.px(p[0]), frame2.py(p[1]), 1.5, color);
        }
    }
    doc.finish(timestamp)
}
