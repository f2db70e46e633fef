use std::fs::File;
use std::path::{Path, PathBuf};

use altocc_core::analytics::{asymptote_power, closed_form_curve, quadrature_curve};
use altocc_core::curve::{read_curves, write_curves};
use altocc_core::ingest::{
    altitude_binning, band_points, builtin_bands, read_bands, read_gps, read_sweeps, time_join, write_bins,
    write_points,
};
use altocc_core::los::{default_ground_grid, fit_laws, plos_exact, plos_exact_3d, LawsFile};
use altocc_core::montecarlo::{
    estimates_curve, read_fixed_transmitters, simulate_curve, simulate_hybrid, FixedTransmitterSet,
};
use altocc_core::raytrace::{
    aggregate_power_site, empirical_plos, grid_visibility, write_empirical_plos, write_visibility, BuildingMap,
    Fading, VisibilityResult,
};
use altocc_core::units::watts_to_dbm;
use altocc_core::{AltitudePowerCurve, BreakpointLaws, LinkLos, McEstimate, McOptions};

use crate::config::{Heights, LawsSource, LosChoice, RunConfig};
use crate::error::CliError;
use crate::plot::{Plot, Style};

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub plot: bool,
}

impl Context {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }

    fn write_plot(&self, name: &str, plot: Plot) -> Result<(), CliError> {
        if self.plot {
            self.write(name, plot.render().as_bytes())?;
        }
        Ok(())
    }

    fn write_curves(&self, name: &str, curves: &[AltitudePowerCurve]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_curves(&mut buf, curves)?;
        self.write(name, &buf)
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}

fn dbm_points(curve: &AltitudePowerCurve) -> Vec<(f64, f64)> {
    curve.heights().zip(curve.powers_dbm()).collect()
}

fn curves_plot(title: &str, curves: &[AltitudePowerCurve]) -> Plot {
    curves.iter().fold(Plot::new(title, "height (m)", "power (dBm)"), |p, c| {
        p.with(c.label.clone(), dbm_points(c), Style::Line)
    })
}

fn resolve_laws(cfg: &RunConfig) -> Result<BreakpointLaws, CliError> {
    match (&cfg.laws, &cfg.env) {
        (Some(LawsSource::Inline(laws)), _) => Ok(*laws),
        (Some(LawsSource::File { file }), _) => Ok(LawsFile::read(file)?.laws()),
        (None, Some(env)) => {
            let fit = fit_laws(env, &altocc_core::los::default_height_grid())?;
            eprintln!(
                "fitted laws from env: mu = {:.4}, kappa = {:.4}",
                fit.laws.mu, fit.laws.kappa
            );
            Ok(fit.laws)
        }
        (None, None) => Err(CliError::Config(
            "no LoS laws available: give [laws] (mu, kappa or file) or an [env] triple to fit them from".into(),
        )),
    }
}

pub fn sosgad(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let laws = resolve_laws(cfg)?;
    let radio = cfg.radio.radio()?;
    let heights = cfg.heights()?;
    let defaults = crate::config::SosgadSection {
        guard_radii: Vec::new(),
        densities: Vec::new(),
        quadrature: true,
    };
    let sec = cfg.sosgad.as_ref().unwrap_or(&defaults);
    let radii = if sec.guard_radii.is_empty() { vec![cfg.scenario.guard_radius] } else { sec.guard_radii.clone() };
    let densities = if sec.densities.is_empty() { vec![cfg.scenario.density] } else { sec.densities.clone() };

    let mut curves = Vec::new();
    for &density in &densities {
        for &r0 in &radii {
            let scenario = crate::config::ScenarioSection {
                density,
                guard_radius: r0,
                ..cfg.scenario
            }
            .geometry(heights[0])?;
            let tag = format!("r0={r0} lambda={density}");
            curves.push(closed_form_curve(&scenario, &radio, &laws, &heights, format!("closed-form {tag}"))?);
            if sec.quadrature {
                let q = match cfg.env {
                    Some(env) => quadrature_curve(
                        &scenario,
                        &radio,
                        &cfg.exponents,
                        &heights,
                        |h| move |r| plos_exact_3d(h, r, &env).unwrap_or(0.0),
                        format!("quadrature-exact {tag}"),
                    )?,
                    None => quadrature_curve(
                        &scenario,
                        &radio,
                        &cfg.exponents,
                        &heights,
                        |h| move |r| laws.params_at(h).probability(r),
                        format!("quadrature {tag}"),
                    )?,
                };
                curves.push(q);
            }
        }
        let level = asymptote_power(&radio, density, &laws)?;
        curves.push(AltitudePowerCurve::new(
            format!("asymptote lambda={density}"),
            heights.iter().map(|&h| (h, level)).collect(),
        )?);
    }
    ctx.write_curves("sosgad.csv", &curves)?;
    ctx.write_plot("sosgad.svg", curves_plot("Expected received power", &curves))?;
    println!("sosgad: {} curves over {} heights", curves.len(), heights.len());
    Ok(())
}

pub fn fit_los(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let env = section(&cfg.env, "env")?;
    let heights = cfg.heights()?;
    let fit = fit_laws(env, &heights)?;
    let file = LawsFile::new(fit.laws, *env, fit.rmse);
    ctx.write("laws.toml", file.to_text().as_bytes())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let data = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["height_m", "k_per_m", "r_bp_m", "mu_at_height", "kappa_at_height", "rmse"])
        .map_err(data)?;
    for f in &fit.per_height {
        w.write_record([
            f.height.to_string(),
            format!("{:.9e}", f.params.k),
            format!("{:.6}", f.params.r_bp),
            format!("{:.6}", f.params.k * f.height),
            format!("{:.6}", f.params.r_bp / f.height),
            format!("{:.6e}", f.rmse),
        ])
        .map_err(data)?;
    }
    ctx.write("fit_report.csv", &w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)?;

    let grid = default_ground_grid();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["height_m", "ground_distance_m", "plos_exact", "plos_fit"]).map_err(data)?;
    let mut plot = Plot::new("LoS probability", "ground distance (m)", "probability");
    let shown: Vec<f64> = heights.iter().step_by(heights.len().div_ceil(4)).copied().collect();
    for f in &fit.per_height {
        let mut exact = Vec::new();
        let mut fitted = Vec::new();
        for &r in &grid {
            let e = plos_exact(f.height, r, env)?;
            let a = f.params.probability(r.hypot(f.height));
            w.write_record([f.height.to_string(), r.to_string(), format!("{e:.9}"), format!("{a:.9}")])
                .map_err(data)?;
            exact.push((r, e));
            fitted.push((r, a));
        }
        if shown.contains(&f.height) {
            plot = plot
                .with(format!("exact H={}", f.height), exact, Style::Scatter)
                .with(format!("fit H={}", f.height), fitted, Style::Line);
        }
    }
    ctx.write("plos_fit.csv", &w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)?;
    ctx.write_plot("plos_fit.svg", plot)?;
    println!(
        "fit-los: mu = {:.6}, kappa = {:.6} (spread {:.4}, {:.4}; rmse {:.3e})",
        fit.laws.mu, fit.laws.kappa, fit.mu_spread, fit.kappa_spread, fit.rmse
    );
    Ok(())
}

fn write_mc_stats(estimates: &[McEstimate]) -> Result<Vec<u8>, CliError> {
    let data = |e: csv::Error| CliError::Data(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "height_m",
        "mean_w",
        "mean_dbm",
        "std_error_w",
        "ci95_half_width_w",
        "trials",
        "mean_ue_count",
        "mean_los_count",
        "tail_bound_w",
    ])
    .map_err(data)?;
    for e in estimates {
        w.write_record([
            e.height.to_string(),
            e.mean.to_string(),
            format!("{:.6}", watts_to_dbm(e.mean)),
            e.std_error.to_string(),
            e.half_width.to_string(),
            e.trials.to_string(),
            e.mean_ue_count.to_string(),
            e.mean_los_count.to_string(),
            e.tail_bound.to_string(),
        ])
        .map_err(data)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

pub fn montecarlo(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sec = cfg.montecarlo.clone().unwrap_or_default();
    let heights = cfg.heights()?;
    let radio = cfg.radio.radio()?;
    let scenario = cfg.scenario.geometry(heights[0])?;
    let los = match sec.los {
        LosChoice::Env => LinkLos::Environment(
            *section(&cfg.env, "env").map_err(|_| CliError::Config("los = \"env\" needs an [env] section".into()))?,
        ),
        LosChoice::AlwaysLos => LinkLos::AlwaysLos,
        LosChoice::AlwaysNlos => LinkLos::AlwaysNlos,
    };
    let opts = McOptions {
        trials: sec.trials,
        seed: ctx.seed,
        fading: sec.fading,
    };
    let (estimates, label) = match &sec.transmitters {
        Some(path) => {
            let set = FixedTransmitterSet {
                transmitters: read_fixed_transmitters(open(path)?, sec.origin)?,
                extra_density: sec.extra_density,
            };
            let est = simulate_hybrid(&set, &scenario, &radio, &cfg.exponents, &los, &heights, &opts)?;
            (est, "hybrid")
        }
        None => (simulate_curve(&scenario, &radio, &cfg.exponents, &los, &heights, &opts)?, "monte-carlo"),
    };
    let curve = estimates_curve(&estimates, label)?;
    ctx.write_curves("montecarlo.csv", std::slice::from_ref(&curve))?;
    ctx.write("montecarlo_stats.csv", &write_mc_stats(&estimates)?)?;
    let band = |sign: f64| -> Vec<(f64, f64)> {
        estimates
            .iter()
            .map(|e| (e.height, watts_to_dbm(e.mean + sign * e.half_width)))
            .collect()
    };
    let plot = curves_plot("Monte Carlo received power", std::slice::from_ref(&curve))
        .with("95% upper", band(1.0), Style::Scatter)
        .with("95% lower", band(-1.0), Style::Scatter);
    ctx.write_plot("montecarlo.svg", plot)?;
    println!("montecarlo: {} trials at {} heights, seed {}", opts.trials, heights.len(), ctx.seed);
    Ok(())
}

fn height_tag(h: f64) -> String {
    h.to_string().replace('.', "p")
}

fn visibility_plot(v: &VisibilityResult) -> Plot {
    let (mut los, mut nlos) = (Vec::new(), Vec::new());
    for p in v.active() {
        if p.los { &mut los } else { &mut nlos }.push((p.point.x, p.point.y));
    }
    Plot::new(&format!("Visibility at H = {} m", v.uav_height), "x (m)", "y (m)")
        .with("LoS", los, Style::Scatter)
        .with("NLoS", nlos, Style::Scatter)
}

pub fn raytrace(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sec = section(&cfg.raytrace, "raytrace")?;
    let heights = cfg.heights()?;
    let radio = cfg.radio.radio()?;
    let map = BuildingMap::read(&sec.map)?;
    let grid = sec.grid();
    grid.validate()?;

    let mut results = Vec::with_capacity(heights.len());
    let mut samples = Vec::with_capacity(heights.len());
    for &h in &heights {
        let vis = grid_visibility(&grid, h, sec.ue_height, &map)?;
        samples.push((h, aggregate_power_site(&vis, &radio, &cfg.exponents, Fading::Off, cfg.scenario.guard_radius)?));
        results.push(vis);
    }
    let curve = AltitudePowerCurve::new("ray-trace", samples)?;
    ctx.write_curves("raytrace.csv", std::slice::from_ref(&curve))?;
    ctx.write_plot("raytrace.svg", curves_plot("Ray-traced site power", std::slice::from_ref(&curve)))?;

    let mut buf = Vec::new();
    write_empirical_plos(&mut buf, &empirical_plos(&results, sec.plos_bin)?)?;
    ctx.write("plos_empirical.csv", &buf)?;

    for &h in &sec.dump_heights {
        let vis = match heights.iter().position(|&x| x == h) {
            Some(i) => results[i].clone(),
            None => grid_visibility(&grid, h, sec.ue_height, &map)?,
        };
        let mut buf = Vec::new();
        write_visibility(&mut buf, &vis)?;
        ctx.write(&format!("visibility_h{}.csv", height_tag(h)), &buf)?;
        ctx.write_plot(&format!("visibility_h{}.svg", height_tag(h)), visibility_plot(&vis))?;
    }
    println!(
        "raytrace: {} buildings, {} grid points, {} heights",
        map.buildings().len(),
        grid.len(),
        heights.len()
    );
    Ok(())
}

pub fn ingest(ctx: &Context) -> Result<(), CliError> {
    let sec = section(&ctx.cfg.ingest, "ingest")?;
    let sweeps = read_sweeps(open(&sec.sweeps)?)?;
    let fixes = read_gps(open(&sec.gps)?, sec.site_elevation)?;
    let bands = match &sec.bands {
        Some(path) => read_bands(open(path)?)?,
        None => builtin_bands(),
    };
    let join = time_join(&sweeps, &fixes, sec.max_skew)?;
    let points = band_points(&sweeps, &join, &bands);
    let bins = altitude_binning(&points, sec.bin_width)?;

    let mut buf = Vec::new();
    write_points(&mut buf, &points)?;
    ctx.write("points.csv", &buf)?;
    let mut buf = Vec::new();
    write_bins(&mut buf, &bins)?;
    ctx.write("bins.csv", &buf)?;

    if ctx.plot {
        let mut plot = Plot::new("Measured band power", "altitude (m)", "power (dBm)");
        let mut names: Vec<&str> = Vec::new();
        for p in &points {
            if !names.contains(&p.band.as_str()) {
                names.push(&p.band);
            }
        }
        for name in names {
            let pts = points
                .iter()
                .filter(|p| p.band == name)
                .map(|p| (p.altitude, watts_to_dbm(p.power)))
                .collect();
            let med = bins
                .iter()
                .filter(|b| b.band == name)
                .map(|b| (b.center(), b.median_dbm))
                .collect();
            plot = plot
                .with(name.to_string(), pts, Style::Scatter)
                .with(format!("{name} median"), med, Style::Line);
        }
        ctx.write_plot("ingest.svg", plot)?;
    }
    println!(
        "ingest: {} sweeps, {} fixes, {} joined, {} dropped, {} points, {} bins",
        sweeps.len(),
        fixes.len(),
        join.joined.len(),
        join.dropped,
        points.len(),
        bins.len()
    );
    Ok(())
}

/// Gap statistics between a curve and the reference on shared grid heights.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub label: String,
    pub points: usize,
    pub max_abs_db: f64,
    pub mean_abs_db: f64,
    pub at_height: f64,
}

pub fn compare(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sec = section(&cfg.compare, "compare")?;
    if sec.curves.is_empty() {
        return Err(CliError::Config("[compare] curves is empty".into()));
    }
    let grid = sec.heights.as_ref().map_or_else(|| cfg.heights(), Heights::values)?;

    let mut curves: Vec<AltitudePowerCurve> = Vec::new();
    for path in &sec.curves {
        let read = read_curves(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for mut c in read {
            let base = c.label.clone();
            let mut n = 1;
            while curves.iter().any(|o| o.label == c.label) {
                n += 1;
                c.label = format!("{base} #{n}");
            }
            curves.push(c);
        }
    }
    if curves.is_empty() {
        return Err(CliError::Data("compare inputs hold no curves".into()));
    }

    let table: Vec<Vec<Option<f64>>> = curves
        .iter()
        .map(|c| grid.iter().map(|&h| c.interpolate(h).map(watts_to_dbm)).collect())
        .collect();

    let data = |e: csv::Error| CliError::Data(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("height_m".to_string()).chain(curves.iter().map(|c| format!("{} dBm", c.label))))
        .map_err(data)?;
    for (i, h) in grid.iter().enumerate() {
        w.write_record(
            std::iter::once(h.to_string()).chain(table.iter().map(|col| col[i].map_or(String::new(), |v| format!("{v:.6}")))),
        )
        .map_err(data)?;
    }
    ctx.write("compare.csv", &w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)?;

    let reference = &table[0];
    let mut gaps = Vec::new();
    for (c, col) in curves.iter().zip(&table).skip(1) {
        let diffs: Vec<(f64, f64)> = grid
            .iter()
            .zip(reference.iter().zip(col))
            .filter_map(|(&h, (a, b))| Some((h, (b.as_ref()? - a.as_ref()?).abs())))
            .collect();
        if diffs.is_empty() {
            return Err(CliError::Data(format!(
                "'{}' shares no grid heights with reference '{}'",
                c.label, curves[0].label
            )));
        }
        let (at_height, max_abs_db) = diffs.iter().copied().fold((f64::NAN, -1.0), |m, d| if d.1 > m.1 { d } else { m });
        gaps.push(Gap {
            label: c.label.clone(),
            points: diffs.len(),
            max_abs_db,
            mean_abs_db: diffs.iter().map(|d| d.1).sum::<f64>() / diffs.len() as f64,
            at_height,
        });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["reference", "label", "points", "max_abs_gap_db", "mean_abs_gap_db", "height_of_max_m"])
        .map_err(data)?;
    for g in &gaps {
        w.write_record([
            curves[0].label.clone(),
            g.label.clone(),
            g.points.to_string(),
            format!("{:.6}", g.max_abs_db),
            format!("{:.6}", g.mean_abs_db),
            g.at_height.to_string(),
        ])
        .map_err(data)?;
        println!(
            "compare: '{}' vs '{}': max |gap| {:.6} dB at {} m, mean {:.6} dB over {} heights",
            g.label, curves[0].label, g.max_abs_db, g.at_height, g.mean_abs_db, g.points
        );
    }
    ctx.write("compare_report.csv", &w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)?;

    let mut plot = Plot::new("Comparison", "height (m)", "power (dBm)");
    for (c, col) in curves.iter().zip(&table) {
        let pts = grid.iter().zip(col).filter_map(|(&h, v)| Some((h, (*v)?))).collect();
        plot = plot.with(c.label.clone(), pts, Style::Line);
    }
    ctx.write_plot("compare.svg", plot)?;
    if gaps.is_empty() {
        println!("compare: single curve '{}', nothing to compare against", curves[0].label);
    }
    Ok(())
}
