use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use hhe_core::cipher::{load_params, parse_hex, Cipher, CipherParams, Key, Scheme};
use hhe_core::pipesim::{reference_cycles, simulate, verify_trace, HwConfig, SimReport, TraceLevel, Variant};
use hhe_core::sampler::SamplerStats;
use hhe_core::selftest::{all_ok, run_selftest, SelftestOptions, SuiteStatus};
use hhe_core::{Error, Result};

const PARAMS_DIR_ENV: &str = "HHE_PARAMS_DIR";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
    Bin,
}

#[derive(Parser, Debug)]
#[command(name = "hhe", version, about = "HERA/Rubato keystreams and accelerator cycle model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, default_value = "rubato")]
    scheme: Scheme,
    /// Parameter file; bare names are also looked up in $HHE_PARAMS_DIR.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[arg(long, global = true, default_value = "d3")]
    variant: Variant,
    /// Raw key (4n bytes) or a key seed of at most 16 bytes.
    #[arg(long, global = true)]
    key: Option<String>,
    #[arg(long, global = true, default_value = "")]
    nonce: String,
    #[arg(long, global = true, default_value_t = 1)]
    blocks: usize,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long = "freq-mhz", global = true)]
    freq_mhz: Option<f64>,
    #[arg(long = "fifo-depth", global = true)]
    fifo_depth: Option<usize>,
    #[arg(long, global = true)]
    lanes: Option<usize>,
    /// Key seed; ignored when --key is given.
    #[arg(long, global = true)]
    seed: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Write keystream blocks plus a sampler-statistics sidecar.
    Gen,
    /// Simulate one design point and write its report.
    Sim,
    /// Cycle table for d1/d2/d3 next to the reference numbers.
    Bench,
    /// Simulate with a full trace, check it against the scalar model, write CSV.
    Trace,
    Selftest,
}

/// Everything a command needs, resolved and validated up front.
struct RunSpec {
    command: Command,
    params: CipherParams,
    params_source: String,
    variant: Variant,
    key: Key,
    nonce: Vec<u8>,
    blocks: usize,
    out: Option<PathBuf>,
    format: Format,
    freq_mhz: Option<f64>,
    fifo_depth: Option<usize>,
    lanes: Option<usize>,
}

fn resolve_params_path(p: &Path) -> Result<PathBuf> {
    if p.exists() {
        return Ok(p.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(PARAMS_DIR_ENV) {
        let dir = PathBuf::from(dir);
        for cand in [dir.join(p), dir.join(p).with_extension("params")] {
            if cand.exists() {
                return Ok(cand);
            }
        }
    }
    Err(Error::InvalidParameter(format!("parameter file {} not found", p.display())))
}

impl RunSpec {
    fn resolve(cli: Cli) -> Result<Self> {
        let (params, params_source) = match &cli.params {
            Some(p) => {
                let path = resolve_params_path(p)?;
                (load_params(&path)?, path.display().to_string())
            }
            None => {
                let default = std::env::var_os(PARAMS_DIR_ENV)
                    .map(|d| PathBuf::from(d).join(format!("{}.params", cli.scheme)))
                    .filter(|p| p.exists());
                match default {
                    Some(path) => (load_params(&path)?, path.display().to_string()),
                    None => (CipherParams::for_scheme(cli.scheme), "built-in".to_string()),
                }
            }
        };
        if params.scheme != cli.scheme && cli.params.is_some() {
            eprintln!("note: parameter file selects {}", params.scheme);
        }
        params.validate()?;
        let nonce = parse_hex(&cli.nonce)?;
        hhe_core::cipher::stream_material(&nonce, 0)?;
        let key = match (&cli.key, &cli.seed) {
            (Some(k), _) => Key::from_hex(k, &params)?,
            (None, Some(s)) => Key::derive(&parse_hex(s)?, &params)?,
            (None, None) => Key::zero(&params),
        };
        if cli.blocks == 0 {
            return Err(Error::InvalidParameter("--blocks must be positive".into()));
        }
        if let Some(out) = &cli.out {
            let parent = out.parent().filter(|p| !p.as_os_str().is_empty());
            if parent.is_some_and(|p| !p.is_dir()) {
                return Err(Error::InvalidParameter(format!("output directory of {} does not exist", out.display())));
            }
        }
        let format = cli.format.unwrap_or(match cli.command {
            Command::Trace => Format::Csv,
            Command::Bench | Command::Selftest => Format::Md,
            _ => Format::Json,
        });
        Ok(Self {
            command: cli.command,
            params,
            params_source,
            variant: cli.variant,
            key,
            nonce,
            blocks: cli.blocks,
            out: cli.out,
            format,
            freq_mhz: cli.freq_mhz,
            fifo_depth: cli.fifo_depth,
            lanes: cli.lanes,
        })
    }

    fn hw(&self, variant: Variant) -> Result<HwConfig> {
        let mut cfg = HwConfig::new(variant, self.params.clone());
        if let Some(d) = self.fifo_depth {
            cfg.fifo_depth = d;
        }
        if let Some(l) = self.lanes {
            cfg.lanes = l;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolved configuration, echoed into every output.
    fn echo(&self) -> Value {
        json!({
            "version": VERSION,
            "command": format!("{:?}", self.command).to_lowercase(),
            "params_source": self.params_source,
            "params": self.params,
            "variant": self.variant.label(),
            "key": self.key.to_hex(),
            "nonce": hex::encode(&self.nonce),
            "blocks": self.blocks,
            "freq_mhz": self.freq_mhz,
            "fifo_depth": self.fifo_depth,
            "lanes": self.lanes,
        })
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, bytes)?,
            None => io::stdout().write_all(bytes)?,
        }
        Ok(())
    }
}

fn md_config(spec: &RunSpec) -> String {
    let p = &spec.params;
    format!(
        "<!-- hhe {VERSION}; {} q={} n={} r={} l={}; params: {}; variant {}; key {}; nonce {} -->\n",
        p.scheme,
        p.q,
        p.n,
        p.r,
        p.l,
        spec.params_source,
        spec.variant,
        spec.key.to_hex(),
        hex::encode(&spec.nonce)
    )
}

fn cmd_gen(spec: &RunSpec) -> Result<()> {
    let cipher = Cipher::new(spec.params.clone())?;
    let mut blocks = Vec::with_capacity(spec.blocks);
    let (mut rc, mut noise) = (SamplerStats::default(), SamplerStats::default());
    for b in 0..spec.blocks as u64 {
        let ks = cipher.keystream(&spec.key, &spec.nonce, b)?;
        rc.merge(&ks.rc_stats);
        noise.merge(&ks.noise_stats);
        blocks.push(ks.values);
    }
    let body: Vec<u8> = match spec.format {
        Format::Json => {
            let v = json!({ "config": spec.echo(), "keystream": blocks });
            serde_json::to_vec_pretty(&v).expect("serializable")
        }
        Format::Csv => {
            let mut s = format!("# {}\nblock,index,value\n", spec.echo());
            for (b, ks) in blocks.iter().enumerate() {
                for (i, x) in ks.iter().enumerate() {
                    s += &format!("{b},{},{x}\n", i + 1);
                }
            }
            s.into_bytes()
        }
        Format::Md => {
            let mut s = md_config(spec);
            s += "| block | keystream |\n|---|---|\n";
            for (b, ks) in blocks.iter().enumerate() {
                let vals: Vec<String> = ks.iter().map(u64::to_string).collect();
                s += &format!("| {b} | {} |\n", vals.join(" "));
            }
            s.into_bytes()
        }
        Format::Bin => {
            // magic, config length, config JSON, then u32 BE elements
            let cfg = spec.echo().to_string();
            let mut out = b"HHEKS1".to_vec();
            out.extend((cfg.len() as u32).to_be_bytes());
            out.extend(cfg.as_bytes());
            for x in blocks.iter().flatten() {
                out.extend((*x as u32).to_be_bytes());
            }
            out
        }
    };
    spec.write(&body)?;
    let sidecar = json!({ "config": spec.echo(), "round_constants": rc, "noise": noise });
    let text = serde_json::to_string_pretty(&sidecar).expect("serializable");
    match &spec.out {
        Some(p) => {
            let mut name = p.as_os_str().to_owned();
            name.push(".stats.json");
            fs::write(PathBuf::from(name), text)?;
        }
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn report_row(r: &SimReport, freq: Option<f64>) -> Value {
    let mut v = r.to_json(freq);
    if let Value::Object(m) = &mut v {
        m.remove("blocks");
        m.remove("config");
    }
    v
}

fn cmd_sim(spec: &RunSpec) -> Result<()> {
    let cfg = spec.hw(spec.variant)?;
    let (rep, _) = simulate(&cfg, &spec.key, &spec.nonce, spec.blocks)?;
    let body = match spec.format {
        Format::Json | Format::Bin => {
            let mut v = rep.to_json(spec.freq_mhz);
            v["run"] = spec.echo();
            serde_json::to_string_pretty(&v).expect("serializable")
        }
        Format::Csv => {
            let row = report_row(&rep, spec.freq_mhz);
            format!(
                "# {}\nvariant,latency_cycles,initiation_interval,elements_per_cycle,rng_stall_cycles,fifo_max_occupancy\n{},{},{},{:.4},{},{}\n",
                spec.echo(),
                cfg.variant,
                row["latency_cycles"],
                row["initiation_interval_cycles"],
                rep.elements_per_cycle,
                rep.rng_stall_cycles,
                rep.fifo_max_occupancy
            )
        }
        Format::Md => md_config(spec) + &bench_table(&spec.params, &[(cfg.variant, rep)], spec.freq_mhz),
    };
    spec.write(body.as_bytes())
}

fn reference_for(scheme: Scheme, v: Variant) -> Option<u64> {
    let r = reference_cycles(scheme);
    match v {
        Variant::D1Baseline => Some(r[0]),
        Variant::D2Decoupled => Some(r[1]),
        Variant::D3Full => Some(r[2]),
        Variant::Vectorized => None,
    }
}

fn bench_table(p: &CipherParams, rows: &[(Variant, SimReport)], freq: Option<f64>) -> String {
    let mut s = String::from(
        "| Implementation | Cycles | Reference | Deviation | Elements/cycle | Throughput [Msps] | Freq. [MHz] | Power [W] | RNG stalls | FIFO used |\n\
         |---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for (v, r) in rows {
        let (refc, dev) = match reference_for(p.scheme, *v) {
            Some(c) => (c.to_string(), format!("{:+.1}%", 100.0 * (r.latency_cycles as f64 - c as f64) / c as f64)),
            None => ("-".into(), "-".into()),
        };
        let (msps, f) = match freq {
            Some(f) => {
                let m = r.msps_at(f);
                (format!("{:.1} ({:.1} state)", m.keystream, m.state), format!("{f}"))
            }
            None => ("n/a (out of scope)".into(), "n/a (out of scope)".into()),
        };
        s += &format!(
            "| {v} | {} | {refc} | {dev} | {:.4} | {msps} | {f} | n/a (out of scope) | {} | {} |\n",
            r.latency_cycles, r.elements_per_cycle, r.rng_stall_cycles, r.fifo_max_occupancy
        );
    }
    s
}

fn cmd_bench(spec: &RunSpec) -> Result<()> {
    let variants = [Variant::D1Baseline, Variant::D2Decoupled, Variant::D3Full];
    let rows = variants
        .par_iter()
        .map(|&v| {
            let cfg = spec.hw(v)?;
            let (rep, _) = simulate(&cfg, &spec.key, &spec.nonce, spec.blocks.max(4))?;
            Ok((v, rep))
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match spec.format {
        Format::Md => md_config(spec) + &bench_table(&spec.params, &rows, spec.freq_mhz),
        Format::Json | Format::Bin => {
            let list: Vec<Value> = rows
                .iter()
                .map(|(v, r)| {
                    let mut row = report_row(r, spec.freq_mhz);
                    row["variant"] = v.label().into();
                    row["reference_cycles"] = reference_for(spec.params.scheme, *v).into();
                    row
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "config": spec.echo(), "rows": list })).expect("serializable")
        }
        Format::Csv => {
            let mut s = format!("# {}\nvariant,cycles,reference,deviation_pct,elements_per_cycle,msps,rng_stall_cycles,fifo_max_occupancy\n", spec.echo());
            for (v, r) in &rows {
                let refc = reference_for(spec.params.scheme, *v);
                let dev = refc.map(|c| 100.0 * (r.latency_cycles as f64 - c as f64) / c as f64);
                let msps = spec.freq_mhz.map(|f| r.msps_at(f).keystream);
                s += &format!(
                    "{v},{},{},{},{:.4},{},{},{}\n",
                    r.latency_cycles,
                    refc.map_or(String::new(), |c| c.to_string()),
                    dev.map_or(String::new(), |d| format!("{d:.2}")),
                    r.elements_per_cycle,
                    msps.map_or("n/a".into(), |m| format!("{m:.2}")),
                    r.rng_stall_cycles,
                    r.fifo_max_occupancy
                );
            }
            s
        }
    };
    spec.write(body.as_bytes())
}

fn cmd_trace(spec: &RunSpec) -> Result<()> {
    let mut cfg = spec.hw(spec.variant)?;
    cfg.trace_level = TraceLevel::Full;
    let (rep, trace) = simulate(&cfg, &spec.key, &spec.nonce, spec.blocks)?;
    let cipher = Cipher::new(spec.params.clone())?;
    let gold = (0..(spec.blocks * cfg.lanes) as u64)
        .map(|g| cipher.keystream(&spec.key, &spec.nonce, g).map(|k| k.values))
        .collect::<Result<Vec<_>>>()?;
    let summary = verify_trace(&trace, &gold)?;
    let body = match spec.format {
        Format::Csv => trace.to_csv(),
        _ => serde_json::to_string(&json!({ "config": spec.echo(), "report": report_row(&rep, spec.freq_mhz), "events": trace.events }))
            .expect("serializable"),
    };
    spec.write(body.as_bytes())?;
    eprintln!(
        "trace: {} events, {} blocks match the scalar model",
        trace.events.len(),
        summary.blocks_checked
    );
    Ok(())
}

fn cmd_selftest(spec: &RunSpec) -> Result<bool> {
    let results = run_selftest(&spec.params, &SelftestOptions::default());
    let mut s = String::new();
    for r in &results {
        let (tag, detail) = match &r.status {
            SuiteStatus::Pass(d) => ("PASS", d),
            SuiteStatus::Fail(d) => ("FAIL", d),
            SuiteStatus::Skip(d) => ("SKIP", d),
        };
        s += &format!("{tag} {:<20} {detail} ({} ms)\n", r.name, r.millis);
    }
    let ok = all_ok(&results);
    if spec.format == Format::Json {
        s = serde_json::to_string_pretty(&json!({ "config": spec.echo(), "suites": results, "ok": ok }))
            .expect("serializable");
    } else {
        s = format!("# hhe {VERSION} selftest, {} q={} ({})\n{s}", spec.params.scheme, spec.params.q, spec.params_source);
    }
    spec.write(s.as_bytes())?;
    Ok(ok)
}

fn run(spec: &RunSpec) -> Result<bool> {
    match spec.command {
        Command::Gen => cmd_gen(spec).map(|_| true),
        Command::Sim => cmd_sim(spec).map(|_| true),
        Command::Bench => cmd_bench(spec).map(|_| true),
        Command::Trace => cmd_trace(spec).map(|_| true),
        Command::Selftest => cmd_selftest(spec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match RunSpec::resolve(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&spec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
