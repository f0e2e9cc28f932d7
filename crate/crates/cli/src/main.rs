mod args;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use jingleprint::catalogue::{format_calibration_table, run_calibration, Descriptor};
use jingleprint::config::Config;
use jingleprint::corpus::{generate, CorpusSpec};
use jingleprint::identifier::{format_report, scan_stream_with, write_report};
use jingleprint::io::read_image;
use jingleprint::srm::SrmParams;
use jingleprint::{
    median_filter_3x3, quantize, read_truth_csv, segment, sign_segment, Catalogue, CatalogueEntry,
    DescriptorParams, FrameFormat, FrameSource, ScanConfig, Weights,
};

use args::{
    layered_config, CalibrateArgs, CatalogueCommand, Cli, Command, GenCorpusArgs, ScanArgs,
    SegmentImageArgs, SignArgs,
};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

/// The error chain joined with `: `, skipping causes already spelled out
/// by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use jingleprint::Error;
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_io() => 2,
        Some(Error::Config { .. }) => 1,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_ref();
    match cli.command {
        Command::Sign(a) => cmd_sign(a, config),
        Command::Scan(a) => cmd_scan(a, config, cli.jobs),
        Command::Calibrate(a) => cmd_calibrate(a, config, cli.jobs),
        Command::Catalogue(c) => cmd_catalogue(c),
        Command::GenCorpus(a) => cmd_gen_corpus(a),
        Command::SegmentImage(a) => cmd_segment_image(a, config),
    }
}

fn open_source(path: &Path, format: Option<FrameFormat>) -> Result<FrameSource> {
    let format = match format {
        Some(f) => f,
        None => FrameFormat::detect(path)?,
    };
    Ok(FrameSource::open(path, format)?)
}

fn load_or_new(path: &Path) -> Result<Catalogue> {
    if path.exists() {
        Ok(Catalogue::load(path)?)
    } else {
        Ok(Catalogue::new())
    }
}

fn cmd_sign(a: SignArgs, config: Option<&PathBuf>) -> Result<()> {
    let mut flags = a.descriptor.pairs();
    flags.extend(a.fusion.pairs());
    if let Some(n) = a.nframes {
        flags.push(("n_frame", n.to_string()));
    }
    if let Some(t) = a.tstep {
        flags.push(("t_step", t.to_string()));
    }
    let cfg = layered_config(config, &flags)?;

    let mut catalogue = load_or_new(&a.catalogue)?;
    if !a.replace && catalogue.get(&a.id).is_some() {
        return Err(jingleprint::Error::DuplicateProgram(a.id))
            .context("pass --replace to overwrite");
    }
    let mut src = open_source(&a.frames, a.format)?;
    let vsig = sign_segment(&mut src, a.start, cfg.n_frame, cfg.t_step, &cfg.descriptor)?;
    let entry = CatalogueEntry::new(&a.id, &a.channel, vsig, cfg.weights, cfg.thresholds)?;
    let p = *entry.vsig().params();
    catalogue.upsert(entry);
    catalogue.save(&a.catalogue)?;
    println!(
        "{} n_frame={} t_step={} n_color={} tau={} q={:.6} k={:.6} sigma={:.6} n_poi={} nms={}",
        a.id, cfg.n_frame, cfg.t_step, p.n_color, p.tau, p.q, p.k, p.sigma, p.n_poi, p.nms_radius
    );
    Ok(())
}

/// Descriptor parameters for scanning: explicit flags or config values
/// when given, else those the catalogue was built with.
fn scan_descriptor(cfg: &Config, explicit: bool, catalogue: &Catalogue) -> DescriptorParams {
    if explicit || cfg.descriptor != DescriptorParams::default() {
        return cfg.descriptor;
    }
    catalogue
        .entries()
        .first()
        .map(|e| DescriptorParams::from(*e.vsig().params()))
        .unwrap_or(cfg.descriptor)
}

fn cmd_scan(a: ScanArgs, config: Option<&PathBuf>, jobs: usize) -> Result<()> {
    let mut flags = a.descriptor.pairs();
    let explicit = !flags.is_empty();
    flags.extend(a.matching.pairs());
    if let Some(s) = a.stride {
        flags.push(("stride", s.to_string()));
    }
    let cfg = layered_config(config, &flags)?;
    let catalogue = Catalogue::load(&a.catalogue)?;
    let scan_cfg = ScanConfig {
        stride: cfg.stride,
        jobs,
        descriptor: scan_descriptor(&cfg, explicit, &catalogue),
        matching: cfg.matching,
        n_frame: a.nframes,
        t_step: a.tstep,
        cache: !a.no_cache,
        emit_undefined: a.emit_undefined,
        report_path: a.report.clone(),
    };

    let started = Instant::now();
    let mut src = open_source(&a.stream, a.format)?;
    let outcome = scan_stream_with(
        &mut src,
        &catalogue,
        &scan_cfg,
        &|_: &str, _: usize, _: usize, d: bool| d,
    )?;
    for offset in &outcome.undefined {
        eprintln!("undefined {offset}");
    }
    match &a.report {
        Some(path) => write_report(&outcome.detections, path)?,
        None => {
            let text = format_report(&outcome.detections)?;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    eprintln!(
        "scanned {} frames against {} entries: {} detections in {:.2}s",
        outcome.frames_read,
        catalogue.len(),
        outcome.detections.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs, config: Option<&PathBuf>, jobs: usize) -> Result<()> {
    let mut flags = a.matching.pairs();
    if let Some(s) = a.stride {
        flags.push(("stride", s.to_string()));
    }
    let cfg = layered_config(config, &flags)?;
    let mut catalogue = Catalogue::load(&a.catalogue)?;

    let mut selected = catalogue.clone();
    if let Some(ch) = &a.channel {
        let others: Vec<String> = selected
            .entries()
            .iter()
            .filter(|e| e.channel() != ch)
            .map(|e| e.program_id().to_string())
            .collect();
        for id in others {
            selected.remove(&id)?;
        }
        if selected.is_empty() {
            bail!(jingleprint::Error::InvalidParameter(format!(
                "no catalogue entries for channel `{ch}`"
            )));
        }
    }

    let truth: Vec<_> = read_truth_csv(&a.truth)?
        .into_iter()
        .filter(|t| a.channel.is_none() || selected.get(&t.program_id).is_some())
        .collect();
    let base = a.truth.parent().unwrap_or(Path::new("."));
    let mut names: Vec<&str> = truth.iter().map(|t| t.stream_path.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let streams = names
        .iter()
        .map(|name| {
            let path = base.join(name);
            Ok((name.to_string(), open_source(&path, None)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let scan_cfg = ScanConfig {
        stride: cfg.stride,
        jobs,
        descriptor: scan_descriptor(&cfg, false, &selected),
        matching: cfg.matching,
        ..ScanConfig::default()
    };
    let reports = Descriptor::ALL
        .iter()
        .map(|&d| run_calibration(&selected, &truth, &streams, d, &scan_cfg))
        .collect::<jingleprint::Result<Vec<_>>>()?;
    print!("{}", format_calibration_table(&reports));

    let weights = Weights {
        ccv: reports[0].weight,
        poi: reports[1].weight,
    };
    weights.validate()?;
    if a.dry_run {
        return Ok(());
    }
    for e in catalogue.entries_mut() {
        if selected.get(e.program_id()).is_some() {
            e.set_weights(weights)?;
        }
    }
    catalogue.save(&a.catalogue)?;
    println!(
        "updated {} entries: w_ccv={:.6} w_poi={:.6}",
        selected.len(),
        weights.ccv,
        weights.poi
    );
    Ok(())
}

fn cmd_catalogue(c: CatalogueCommand) -> Result<()> {
    match c {
        CatalogueCommand::List { catalogue } => {
            let cat = Catalogue::load(&catalogue)?;
            println!("program_id,channel,n_frame,t_step,w_ccv,w_poi,th_ccv,th_poi");
            for e in cat.entries() {
                let (w, th) = (e.weights(), e.thresholds());
                println!(
                    "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                    e.program_id(),
                    e.channel(),
                    e.vsig().n_frame(),
                    e.vsig().t_step(),
                    w.ccv,
                    w.poi,
                    th.ccv,
                    th.poi
                );
            }
        }
        CatalogueCommand::Remove { catalogue, id } => {
            let mut cat = Catalogue::load(&catalogue)?;
            cat.remove(&id)?;
            cat.save(&catalogue)?;
            println!("removed {id}");
        }
    }
    Ok(())
}

fn cmd_gen_corpus(a: GenCorpusArgs) -> Result<()> {
    let spec = CorpusSpec {
        jingles: a.jingles,
        streams: a.streams,
        frames_per_stream: a.frames,
        plants_per_jingle: a.plants,
        jingle_frames: a.jingle_frames,
        width: a.width,
        height: a.height,
        seed: a.rng_seed,
        noise_amp: a.noise_amp,
        blur: a.blur,
    };
    let corpus = generate(&spec)?;
    let layout = corpus.write(&a.out)?;
    println!(
        "wrote {} jingles, {} streams, {} plants; truth in {}",
        layout.jingle_dirs.len(),
        layout.stream_paths.len(),
        corpus.plants.len(),
        layout.truth_path.display()
    );
    Ok(())
}

fn cmd_segment_image(a: SegmentImageArgs, config: Option<&PathBuf>) -> Result<()> {
    let mut flags = Vec::new();
    if let Some(q) = a.q {
        flags.push(("q", q.to_string()));
    }
    if let Some(n) = a.n_color {
        flags.push(("n_color", n.to_string()));
    }
    if let Some(b) = a.srm_bound {
        let name = match b {
            jingleprint::BoundCombination::Sum => "sum",
            jingleprint::BoundCombination::Quadrature => "quadrature",
        };
        flags.push(("srm_bound", name.to_string()));
    }
    let cfg = layered_config(config, &flags)?;
    let d = cfg.descriptor;

    let frame = read_image(&a.input)?;
    let quantized = quantize(&median_filter_3x3(&frame), d.n_color)?;
    let params = SrmParams {
        q: d.q,
        combination: d.srm_bound,
        ..SrmParams::default()
    };
    let regions = segment(&quantized, &params);
    regions.to_mean_frame().write_pgm(&a.out)?;

    let table = a.regions.unwrap_or_else(|| a.out.with_extension("csv"));
    let mut text = String::from("region_id,size,mean\n");
    for (i, (size, mean)) in regions
        .region_sizes()
        .iter()
        .zip(regions.region_means())
        .enumerate()
    {
        text.push_str(&format!("{i},{size},{mean:.6}\n"));
    }
    std::fs::write(&table, text).with_context(|| format!("{}", table.display()))?;
    println!("{} regions", regions.region_count());
    Ok(())
}
