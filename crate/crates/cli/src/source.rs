//! Loading a function and its input rows from command-line arguments.

use anyhow::{anyhow, bail, Context, Result};
use fpee::corpus::{self, Kernel};
use fpee::inline::inline_named;
use fpee::ir::Function;
use fpee::models::{ApproxFunctionMap, ApproxImpl, ErrorModelSpec};
use fpee::runtime::{parse_value, read_csv, Inputs, SampleSpec};
use serde_json::{json, Value as Json};

use crate::Common;

pub struct Loaded {
    pub function: Function,
    /// Set for `corpus:` sources.
    pub kernel: Option<&'static Kernel>,
    pub label: String,
}

pub fn load(file: &str, entry: Option<&str>) -> Result<Loaded> {
    let (source, kernel) = match file.strip_prefix("corpus:") {
        Some(name) => {
            let k = corpus::get(name).ok_or_else(|| anyhow!("unknown corpus kernel `{name}` (see `fpee corpus list`)"))?;
            (k.source.to_string(), Some(k))
        }
        None => (std::fs::read_to_string(file).with_context(|| format!("cannot read `{file}`"))?, None),
    };
    let program = fpee::frontend::compile(&source).with_context(|| format!("in `{file}`"))?;
    let name = match (entry, kernel) {
        (Some(e), _) => e.to_string(),
        (None, Some(k)) => k.entry.to_string(),
        (None, None) => program.functions.last().map(|f| f.name.clone()).ok_or_else(|| anyhow!("`{file}` defines no functions"))?,
    };
    let function = inline_named(&program, &name).ok_or_else(|| anyhow!("no function `{name}` in `{file}`"))?;
    log::debug!("loaded `{name}` from {file}");
    Ok(Loaded { function, kernel, label: file.to_string() })
}

/// Parses `--set name=value` pairs against the parameter kinds of `f`.
fn fixed(f: &Function, set: &[String]) -> Result<Inputs> {
    let mut m = Inputs::new();
    for item in set {
        let (name, text) = item.split_once('=').ok_or_else(|| anyhow!("`--set {item}` is not NAME=VALUE"))?;
        let name = name.trim();
        let p = f
            .params
            .iter()
            .find(|p| f.var(**p).name == name)
            .ok_or_else(|| anyhow!("`--set {name}`: `{}` has no such parameter", f.name))?;
        m.insert(name.to_string(), parse_value(&f.var(*p).kind, name, text)?);
    }
    Ok(m)
}

/// Input rows plus a JSON description of where they came from.
pub fn inputs(loaded: &Loaded, args: &Common, seed: Option<u64>) -> Result<(Vec<Inputs>, Json)> {
    let f = &loaded.function;
    let set = fixed(f, &args.set)?;
    let overlay = |mut rows: Vec<Inputs>| {
        for r in &mut rows {
            r.extend(set.clone());
        }
        rows
    };
    if let Some(path) = &args.inputs {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read inputs `{}`", path.display()))?;
        let rows = overlay(read_csv(&text, f)?);
        return Ok((rows.clone(), json!({ "kind": "csv", "path": path, "rows": rows.len() })));
    }
    if let Some(text) = &args.sample {
        let mut spec = SampleSpec::parse(text)?;
        if let Some(s) = seed {
            spec.seed = s;
        }
        let rows = spec.sample(f, &set)?;
        return Ok((rows, json!({ "kind": "sample", "dist": spec.dist, "rows": spec.n, "seed": spec.seed })));
    }
    if let Some(k) = loaded.kernel {
        let (n, seed, size) = (args.rows.unwrap_or(k.default_rows), seed.unwrap_or(0), args.size.unwrap_or(k.default_size));
        let rows = overlay(k.inputs_sized(n, seed, size));
        return Ok((rows, json!({ "kind": "corpus", "kernel": k.name, "rows": n, "seed": seed, "size": size })));
    }
    if f.params.iter().all(|p| set.contains_key(&f.var(*p).name)) {
        return Ok((vec![set], json!({ "kind": "set", "rows": 1 })));
    }
    bail!("no inputs: pass --inputs <csv>, --sample <dist,n,seed> or --set for every parameter")
}

/// Reads `--map` as a file if one exists at that path, otherwise inline.
pub fn approx_map(arg: &str) -> Result<ApproxFunctionMap> {
    let path = std::path::Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("cannot read map `{arg}`"))?
    } else {
        arg.to_string()
    };
    let joined: Vec<&str> = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).collect();
    Ok(ApproxFunctionMap::parse(&joined.join(","), ApproxImpl::Fast)?)
}

/// The model named by `--model`, falling back to `default`. `approx-func`
/// takes its map from `--map` or the kernel.
pub fn model(args: &Common, loaded: &Loaded, default: &str) -> Result<(ErrorModelSpec, String)> {
    let name = args.model.clone().unwrap_or_else(|| default.to_string());
    let spec = if name == "approx-func" {
        let map = args.map.as_deref().or(loaded.kernel.and_then(|k| k.approx_map)).unwrap_or("");
        ErrorModelSpec::Approx(approx_map(map)?)
    } else {
        name.parse::<ErrorModelSpec>()?
    };
    Ok((spec, name))
}
