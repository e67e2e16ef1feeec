use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fpee::analysis::{self, adjoint_for, SensitivityOptions, ToCsv};
use fpee::corpus::{self, Kernel};
use fpee::models::ErrorModelSpec;
use fpee::precision::Precision;
use fpee::runtime::PrecisionSpec;
use fpee::transform::emit;
use serde_json::{json, Value as Json};

use crate::source::{self, Loaded};
use crate::{Cli, Command, Common, CorpusCommand, Format};

/// One rendered report, with any extra CSV tables written beside it.
struct Report {
    name: String,
    json: Json,
    csv: String,
    extra_csv: Vec<(String, String)>,
    /// Print the first extra table instead of `csv` when writing to stdout.
    extra_on_stdout: bool,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(args) => emit_report(cli, analyze(cli, args)?),
        Command::Sensitivity(a) => emit_report(cli, sensitivity(cli, a)?),
        Command::Tune(a) => emit_report(cli, tune(cli, a)?),
        Command::Approx(args) => emit_report(cli, approx(cli, args)?),
        Command::Validate(args) => emit_report(cli, validate(cli, args)?),
        Command::DumpAdjoint(a) => {
            let loaded = source::load(&a.file, a.entry.as_deref())?;
            let model: ErrorModelSpec = a.model.parse()?;
            let text = emit(&adjoint_for(&loaded.function, model.id())?);
            match &cli.out {
                Some(dir) => write(dir, &format!("{}.adj", loaded.function.name), &text),
                None => stdout(&text),
            }
        }
        Command::Corpus(CorpusCommand::List) => corpus_list(cli),
        Command::Corpus(CorpusCommand::Run { name, rows, size }) => corpus_run(cli, name, *rows, *size),
    }
}

fn write(dir: &Path, file: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    let path = dir.join(file);
    std::fs::write(&path, text).with_context(|| format!("cannot write `{}`", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn emit_report(cli: &Cli, r: Report) -> Result<()> {
    match (&cli.out, cli.format) {
        (Some(dir), Format::Json) => write(dir, &format!("{}.json", r.name), &pretty(&r.json)),
        (Some(dir), Format::Csv) => {
            write(dir, &format!("{}.csv", r.name), &r.csv)?;
            r.extra_csv.iter().try_for_each(|(file, text)| write(dir, file, text))
        }
        (None, Format::Json) => stdout(&(pretty(&r.json) + "\n")),
        (None, Format::Csv) => match r.extra_csv.first() {
            Some((_, t)) if r.extra_on_stdout => stdout(t),
            _ => stdout(&r.csv),
        },
    }
}

/// Writes to stdout; a closed pipe (`fpee ... | head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn pretty(j: &Json) -> String {
    serde_json::to_string_pretty(j).expect("reports serialize")
}

/// Wraps a report with the provenance needed to reproduce it.
fn envelope(command: &str, loaded: &Loaded, model: &str, inputs: Json, report: Json) -> Json {
    json!({
        "tool": concat!("fpee ", env!("CARGO_PKG_VERSION")),
        "command": command,
        "source": loaded.label,
        "entry": loaded.function.name,
        "model": model,
        "inputs": inputs,
        "report": report,
    })
}

fn precision_spec(args: &Common) -> Result<PrecisionSpec> {
    Ok(match &args.precision_spec {
        Some(a) => PrecisionSpec::from_arg(a)?,
        None => PrecisionSpec::all_double(),
    })
}

fn dump(args: &Common, loaded: &Loaded, model: &ErrorModelSpec) -> Result<()> {
    if let Some(path) = &args.dump_adjoint {
        let text = emit(&adjoint_for(&loaded.function, model.id())?);
        std::fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))?;
    }
    Ok(())
}

fn analyze(cli: &Cli, args: &Common) -> Result<Report> {
    let loaded = source::load(&args.file, args.entry.as_deref())?;
    let default = loaded.kernel.map_or("taylor-default", |k| k.model);
    let (model, model_name) = source::model(args, &loaded, default)?;
    let (rows, provenance) = source::inputs(&loaded, args, cli.seed)?;
    dump(args, &loaded, &model)?;
    let report = analysis::analyze(&loaded.function, &rows, &precision_spec(args)?, &model)?;
    Ok(Report {
        name: "analyze".into(),
        json: envelope("analyze", &loaded, &model_name, provenance, serde_json::to_value(&report)?),
        csv: report.to_csv(),
        extra_csv: vec![],
        extra_on_stdout: false,
    })
}

fn sensitivity(cli: &Cli, a: &crate::SensitivityArgs) -> Result<Report> {
    let args = &a.common;
    let loaded = source::load(&args.file, args.entry.as_deref())?;
    let (rows, provenance) = source::inputs(&loaded, args, cli.seed)?;
    dump(args, &loaded, &ErrorModelSpec::Null)?;
    let opts = SensitivityOptions {
        per_iteration: a.per_iteration.clone(),
        tracked: a.track.clone(),
        threshold: a.threshold,
        normalize: a.normalize,
    };
    let report = analysis::sensitivity(&loaded.function, &rows, &precision_spec(args)?, &opts)?;
    let extra_csv = report.per_iteration.iter().map(|p| ("per_iteration.csv".to_string(), p.to_csv())).collect();
    Ok(Report {
        name: "sensitivity".into(),
        json: envelope("sensitivity", &loaded, "null", provenance, serde_json::to_value(&report)?),
        csv: report.to_csv(),
        extra_on_stdout: a.per_iteration.is_some(),
        extra_csv,
    })
}

fn tune(cli: &Cli, a: &crate::TuneArgs) -> Result<Report> {
    let args = &a.common;
    let loaded = source::load(&args.file, args.entry.as_deref())?;
    let threshold = a
        .threshold
        .or(loaded.kernel.map(|k| k.default_threshold))
        .ok_or_else(|| anyhow!("tune needs --threshold"))?;
    let to: Precision = a.to.parse().map_err(|e: String| anyhow!(e))?;
    let default = loaded.kernel.map_or("taylor-default", |k| k.model);
    let (model, model_name) = source::model(args, &loaded, default)?;
    let (rows, provenance) = source::inputs(&loaded, args, cli.seed)?;
    dump(args, &loaded, &model)?;
    let result = analysis::tune(&loaded.function, &rows, threshold, &model, to)?;
    Ok(Report {
        name: "tune".into(),
        json: envelope("tune", &loaded, &model_name, provenance, serde_json::to_value(&result)?),
        csv: result.to_csv(),
        extra_csv: vec![],
        extra_on_stdout: false,
    })
}

fn approx(cli: &Cli, args: &Common) -> Result<Report> {
    let loaded = source::load(&args.file, args.entry.as_deref())?;
    let map_arg = args.map.as_deref().or(loaded.kernel.and_then(|k| k.approx_map)).unwrap_or("");
    let map = source::approx_map(map_arg)?;
    let (rows, provenance) = source::inputs(&loaded, args, cli.seed)?;
    dump(args, &loaded, &ErrorModelSpec::Approx(map.clone()))?;
    let report = analysis::approx(&loaded.function, &rows, &map)?;
    Ok(Report {
        name: "approx".into(),
        json: envelope("approx", &loaded, "approx-func", provenance, serde_json::to_value(&report)?),
        csv: report.to_csv(),
        extra_csv: vec![("approx.rows.csv".into(), report.rows_csv())],
        extra_on_stdout: false,
    })
}

fn validate(cli: &Cli, args: &Common) -> Result<Report> {
    let loaded = source::load(&args.file, args.entry.as_deref())?;
    if args.precision_spec.is_none() {
        bail!("validate needs --precision-spec");
    }
    let default = loaded.kernel.map_or("taylor-default", |k| k.model);
    let (model, model_name) = source::model(args, &loaded, default)?;
    let (rows, provenance) = source::inputs(&loaded, args, cli.seed)?;
    dump(args, &loaded, &model)?;
    let report = analysis::validate(&loaded.function, &rows, &precision_spec(args)?, &model)?;
    Ok(Report {
        name: "validate".into(),
        json: envelope("validate", &loaded, &model_name, provenance, serde_json::to_value(&report)?),
        csv: report.to_csv(),
        extra_csv: vec![],
        extra_on_stdout: false,
    })
}

fn corpus_list(cli: &Cli) -> Result<()> {
    let ks = corpus::kernels();
    match cli.format {
        Format::Json => {
            let list: Vec<Json> = ks
                .iter()
                .map(|k| {
                    json!({
                        "name": k.name, "file": k.file_name, "entry": k.entry, "size": k.default_size,
                        "rows": k.default_rows, "model": k.model, "threshold": k.default_threshold,
                        "per_iteration": k.per_iteration.map(|(v, _)| v), "approx_map": k.approx_map, "notes": k.notes,
                    })
                })
                .collect();
            stdout(&(pretty(&Json::Array(list)) + "\n"))?;
        }
        Format::Csv => {
            let mut text = String::from("name,entry,size,rows,model,threshold\n");
            for k in ks {
                text += &format!("{},{},{},{},{},{:?}\n", k.name, k.entry, k.default_size, k.default_rows, k.model, k.default_threshold);
            }
            stdout(&text)?;
        }
    }
    Ok(())
}

/// The arguments `corpus run` uses for `k`.
fn kernel_args(k: &Kernel, rows: Option<usize>, size: Option<i64>) -> Common {
    Common {
        file: format!("corpus:{}", k.name),
        entry: None,
        model: None,
        precision_spec: None,
        inputs: None,
        sample: None,
        set: vec![],
        rows,
        size,
        map: None,
        dump_adjoint: None,
    }
}

fn corpus_report(cli: &Cli, k: &Kernel, rows: Option<usize>, size: Option<i64>) -> Result<Report> {
    let common = kernel_args(k, rows, size);
    let mut r = if let Some((var, tracked)) = k.per_iteration {
        sensitivity(
            cli,
            &crate::SensitivityArgs {
                common,
                per_iteration: Some(var.to_string()),
                track: tracked.iter().map(|s| s.to_string()).collect(),
                threshold: Some(k.default_threshold),
                normalize: true,
            },
        )?
    } else if k.approx_map.is_some() {
        approx(cli, &common)?
    } else {
        tune(cli, &crate::TuneArgs { common, threshold: None, to: "single".into() })?
    };
    r.name = k.name.to_string();
    r.extra_csv.iter_mut().for_each(|(file, _)| *file = format!("{}.{file}", k.name));
    Ok(r)
}

fn corpus_run(cli: &Cli, name: &str, rows: Option<usize>, size: Option<i64>) -> Result<()> {
    let ks: Vec<&Kernel> = if name == "all" {
        corpus::kernels().iter().collect()
    } else {
        vec![corpus::get(name).ok_or_else(|| anyhow!("unknown corpus kernel `{name}` (see `fpee corpus list`)"))?]
    };
    if ks.len() == 1 {
        return emit_report(cli, corpus_report(cli, ks[0], rows, size)?);
    }
    if cli.out.is_none() && cli.format == Format::Csv {
        bail!("CSV output for several kernels needs --out");
    }
    let mut all = Vec::new();
    for k in ks {
        log::info!("running {}", k.name);
        let r = corpus_report(cli, k, rows, size)?;
        if cli.out.is_some() {
            emit_report(cli, r)?;
        } else {
            all.push(r.json);
        }
    }
    if cli.out.is_none() {
        stdout(&(pretty(&Json::Array(all)) + "\n"))?;
    }
    Ok(())
}
