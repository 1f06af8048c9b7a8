//! `dvpool`: pool feature maps, train and apply linear probes, score predictions.

mod manifest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde::Serialize;

use dvpool::io::{self, NpyArray};
use dvpool::metrics::{nll, scale_logits, temperature_fit, DEFAULT_BINS};
use dvpool::{
    probe, synth, DvppConfig, KappaWeighting, LinearProbe, MetricsReport, PredictionSet, SynthSpec, TrainSpec,
};

use manifest::Recorder;
use report::Report;

#[derive(Parser)]
#[command(name = "dvpool", version, about = "Dual-view pyramid pooling toolkit")]
struct Cli {
    /// Worker threads for per-sample work; defaults to all cores.
    #[arg(long, global = true, env = "DVPOOL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pool N×C×H×W or N×C×D×H×W maps into N×L feature vectors.
    Pool {
        #[arg(long)]
        input: PathBuf,
        /// Pooling config JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score class probabilities (or logits) against labels.
    Metrics(MetricsArgs),
    /// Generate a synthetic dual-view dataset.
    Synth {
        /// Dataset spec JSON; defaults apply to missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a linear probe on feature vectors.
    Probe {
        #[arg(long)]
        features: PathBuf,
        /// Labels as NPY (int64) or CSV with a `label` header.
        #[arg(long)]
        labels: PathBuf,
        /// Training spec JSON; defaults apply to missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a trained probe, writing N×K class probabilities.
    Predict {
        #[arg(long)]
        probe: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long, required_unless_present = "logits", conflicts_with = "logits")]
    probs: Option<PathBuf>,
    #[arg(long)]
    logits: Option<PathBuf>,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, value_enum, default_value_t = Kappa::Unweighted)]
    kappa: Kappa,
    /// Also fit a temperature and report post-scaling ECE and Brier.
    #[arg(long)]
    fit_temperature: bool,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    reliability_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kappa {
    Unweighted,
    Quadratic,
}

impl From<Kappa> for KappaWeighting {
    fn from(k: Kappa) -> Self {
        match k {
            Kappa::Unweighted => KappaWeighting::Unweighted,
            Kappa::Quadratic => KappaWeighting::Quadratic,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_npy(path: &Path) -> Result<NpyArray> {
    io::read_npy_file(path).with_context(|| format!("reading {}", path.display()))
}

fn write_npy(rec: &mut Recorder, path: &Path, array: &NpyArray) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    io::write_npy_file(path, array).with_context(|| format!("writing {}", path.display()))?;
    rec.output(path);
    Ok(())
}

fn read_labels(rec: &mut Recorder, path: &Path) -> Result<Vec<usize>> {
    rec.input(path)?;
    io::read_labels(path).with_context(|| format!("reading labels {}", path.display()))
}

fn read_matrix(rec: &mut Recorder, path: &Path) -> Result<Array2<f64>> {
    rec.input(path)?;
    io::matrix_from_npy(&read_npy(path)?).with_context(|| format!("reading {}", path.display()))
}

fn pool(input: &Path, config: &Path, output: &Path) -> Result<()> {
    let mut rec = Recorder::start("pool");
    rec.input(input)?;
    rec.input(config)?;
    let cfg =
        DvppConfig::from_json(&fs::read_to_string(config)?).with_context(|| format!("config {}", config.display()))?;
    rec.config(&cfg)?;

    let maps = io::feature_maps_from_npy(&read_npy(input)?)?;
    ensure!(!maps.is_empty(), "input holds no samples");
    let len = dvpool::output_len(&cfg, maps[0].shape())?;
    let feats = dvpool::dvpp_batch(&maps, &cfg)?;
    let mut data = Vec::with_capacity(maps.len() * len);
    for f in &feats {
        ensure!(f.len() == len, "pooled length {} disagrees with predicted {len}", f.len());
        data.extend_from_slice(f.data());
    }
    write_npy(&mut rec, output, &NpyArray::f8(vec![maps.len(), len], data)?)?;
    rec.finish(&manifest::beside(output))?;
    eprintln!("pooled {} maps of shape {:?} into {} features each", maps.len(), maps[0].shape(), len);
    Ok(())
}

#[derive(Serialize)]
struct MetricsConfig {
    source: &'static str,
    bins: usize,
    kappa: KappaWeighting,
    fit_temperature: bool,
}

fn metrics(args: &MetricsArgs) -> Result<()> {
    let mut rec = Recorder::start("metrics");
    let (path, from_logits) = match (&args.probs, &args.logits) {
        (Some(p), None) => (p, false),
        (None, Some(l)) => (l, true),
        _ => bail!("pass exactly one of --probs or --logits"),
    };
    let weighting = KappaWeighting::from(args.kappa);
    rec.config(MetricsConfig {
        source: if from_logits { "logits" } else { "probs" },
        bins: args.bins,
        kappa: weighting,
        fit_temperature: args.fit_temperature,
    })?;

    let scores = read_matrix(&mut rec, path)?;
    let labels = read_labels(&mut rec, &args.labels)?;
    ensure!(
        scores.nrows() == labels.len(),
        "dimension mismatch: {} rows of predictions but {} labels",
        scores.nrows(),
        labels.len()
    );
    let set = if from_logits {
        PredictionSet::from_logits(scores.view(), labels.clone())?
    } else {
        PredictionSet::new(scores.clone(), labels.clone())?
    };
    let metrics = MetricsReport::evaluate(&set, args.bins, weighting)?;
    let mut report = Report::new(&set, &metrics, args.bins);

    if args.fit_temperature {
        let logits = if from_logits { scores } else { set.probs().mapv(|p| p.max(f64::MIN_POSITIVE).ln()) };
        let fit = temperature_fit(logits.view(), &labels)?;
        let scaled = PredictionSet::from_logits(scale_logits(logits.view(), fit.temperature).view(), labels.clone())?;
        report.temperature =
            Some(report::temperature_report(&fit, nll(logits.view(), &labels, 1.0), &scaled, args.bins)?);
    }

    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(csv) = &args.reliability_csv {
        fs::write(csv, metrics.reliability.to_csv())?;
        rec.output(csv);
    }
    let manifest_path = match &args.report {
        Some(out) => {
            fs::write(out, &json).with_context(|| format!("writing {}", out.display()))?;
            rec.output(out);
            manifest::beside(out)
        }
        None => {
            let stem = path.file_stem().map_or_else(|| "predictions".into(), |s| s.to_string_lossy().into_owned());
            path.with_file_name(format!("{stem}.metrics.manifest.json"))
        }
    };
    rec.finish(&manifest_path)?;
    Ok(())
}

fn synth(spec: Option<&Path>, out: &Path) -> Result<()> {
    let mut rec = Recorder::start("synth");
    let spec: SynthSpec = match spec {
        Some(p) => {
            rec.input(p)?;
            read_json(p)?
        }
        None => SynthSpec::default(),
    };
    rec.config(&spec)?;
    let ds = synth::generate(&spec)?;
    fs::create_dir_all(out)?;

    write_npy(&mut rec, &out.join("maps.npy"), &io::feature_maps_to_npy(&ds.maps)?)?;
    write_npy(&mut rec, &out.join("labels.npy"), &io::labels_to_npy(&ds.labels))?;
    for (name, (maps, labels)) in [("train", ds.train()), ("test", ds.test())] {
        let stacked = if maps.is_empty() {
            let mut shape = vec![0];
            shape.extend(spec.map_shape());
            NpyArray::f8(shape, Vec::new())?
        } else {
            io::feature_maps_to_npy(&maps)?
        };
        write_npy(&mut rec, &out.join(format!("{name}_maps.npy")), &stacked)?;
        write_npy(&mut rec, &out.join(format!("{name}_labels.npy")), &io::labels_to_npy(&labels))?;
    }
    let manifest_path = out.join("synth_manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&ds.manifest)?)?;
    rec.output(&manifest_path);
    rec.finish(&out.join("run_manifest.json"))?;
    eprintln!("wrote {} samples of shape {:?} to {}", ds.maps.len(), spec.map_shape(), out.display());
    Ok(())
}

fn train_probe(features: &Path, labels: &Path, spec: Option<&Path>, out: &Path) -> Result<()> {
    let mut rec = Recorder::start("probe");
    let spec: TrainSpec = match spec {
        Some(p) => {
            rec.input(p)?;
            read_json(p)?
        }
        None => TrainSpec::default(),
    };
    rec.config(&spec)?;
    let x = read_matrix(&mut rec, features)?;
    let y = read_labels(&mut rec, labels)?;
    let trained = probe::train(x.view(), &y, &spec)?;
    trained.probe.save(out, &spec, &trained.loss_history)?;
    for name in ["weights.npy", "bias.npy", "probe.json"] {
        rec.output(&out.join(name));
    }
    rec.finish(&out.join("run_manifest.json"))?;
    let h = &trained.loss_history;
    eprintln!(
        "trained {}-class probe on {} features: loss {:.6} -> {:.6}",
        trained.probe.num_classes(),
        x.ncols(),
        h[0],
        h[h.len() - 1]
    );
    Ok(())
}

fn predict(probe_dir: &Path, features: &Path, output: &Path) -> Result<()> {
    let mut rec = Recorder::start("predict");
    for name in ["weights.npy", "bias.npy", "probe.json"] {
        rec.input(&probe_dir.join(name))?;
    }
    let (probe, sidecar) =
        LinearProbe::load(probe_dir).with_context(|| format!("loading probe {}", probe_dir.display()))?;
    rec.config(&sidecar.spec)?;
    let x = read_matrix(&mut rec, features)?;
    let probs = probe.predict_proba(x.view())?;
    write_npy(&mut rec, output, &io::matrix_to_npy(&probs))?;
    rec.finish(&manifest::beside(output))?;
    Ok(())
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Pool { input, config, output } => pool(input, config, output),
        Command::Metrics(args) => metrics(args),
        Command::Synth { spec, out } => synth(spec.as_deref(), out),
        Command::Probe { features, labels, spec, out } => train_probe(features, labels, spec.as_deref(), out),
        Command::Predict { probe, features, output } => predict(probe, features, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let result = builder.build().context("building thread pool").and_then(|pool| pool.install(|| run(&cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
