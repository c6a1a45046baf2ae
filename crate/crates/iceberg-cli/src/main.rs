use clap::{Parser, Subcommand};
use iceberg::code::{LogicalAction, PauliKind, StabilizerCode};
use iceberg::decoder::{enumerate_fault_counts, DecoderTable};
use iceberg::experiments::{
    parse_specs, postselection_budget, repeated_ec_program, run, sampler_for, source_for, ExperimentOutput,
};
use iceberg::factory::{c422, catalog, catalog_entry, concat_iceberg_m1, concat_iceberg_m2};
use iceberg::gadgets::{targeted_cnot_schedule, verify_action, verify_preparation};
use iceberg::parallel::with_workers;
use iceberg::stats::RatesReport;
use iceberg::synth::{all_plus, verified_fragment};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const CATALOG: [&str; 11] =
    ["c422", "c642", "c312q4", "c513", "c823", "c1224", "c1644", "c2026", "c3246", "c3628", "c4848"];

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Iceberg(#[from] iceberg::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} check(s) failed")]
    Checks(usize),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "iceberg", version, about = "Concatenated Iceberg codes: construction, synthesis and simulation")]
struct Cli {
    /// Worker threads for sampling
    #[arg(long, global = true, env = "ICEBERG_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect catalog codes
    Codes {
        #[command(subcommand)]
        cmd: CodesCmd,
    },
    /// Build decoder lookup tables and write them to disk
    Tables {
        /// Catalog codes to build; all concatenated codes when empty
        names: Vec<String>,
        #[arg(long, default_value = "tables")]
        out: PathBuf,
    },
    /// Run the experiments of a spec file
    Run {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        shots: Option<u64>,
        /// Directory for CSV/JSON artifacts; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact checks: fault counts, distances, budget constants, gadget identities
    Verify {
        /// Code files in the text format, named after a catalog code, to check against the catalog
        #[arg(long = "code-file")]
        code_files: Vec<PathBuf>,
    },
    /// Sampling throughput with one worker and with the configured pool
    Bench {
        #[arg(long, default_value = "c2026")]
        code: String,
        #[arg(long, default_value_t = 0.001)]
        p: f64,
        #[arg(long, default_value_t = 200_000)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CodesCmd {
    /// Names and parameters
    List,
    /// Stabilizer and logical operator table
    Show {
        name: String,
        /// Print the plain text format instead of the labelled table
        #[arg(long)]
        raw: bool,
    },
    /// Distance by enumeration
    Distance { name: String },
}

fn write(path: &Path, body: &[u8]) -> Result<()> {
    fs::write(path, body).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn codes(cmd: CodesCmd) -> Result<()> {
    match cmd {
        CodesCmd::List => {
            println!("{:<8} {:>3} {:>3} {:>3}  css", "name", "n", "k", "d");
            for name in CATALOG {
                let e = catalog_entry(name)?;
                let (n, k, d) = e.expected;
                println!("{name:<8} {n:>3} {k:>3} {d:>3}  {}", e.code.is_css());
            }
        }
        CodesCmd::Show { name, raw } => {
            let c = catalog(&name)?;
            if raw {
                print!("{}", c.to_text());
                return Ok(());
            }
            println!("[[{},{},{}]] {}", c.n, c.k, c.d_known.map_or("?".into(), |d| d.to_string()), c.name);
            for (i, g) in c.generators().iter().enumerate() {
                println!("S{:<3} {}", i + 1, g.letters());
            }
            for i in 0..c.k {
                println!("X{:<3} {}", i + 1, c.logical_x[i].letters());
                println!("Z{:<3} {}", i + 1, c.logical_z[i].letters());
            }
        }
        CodesCmd::Distance { name } => {
            let c = catalog(&name)?;
            let d = if c.is_css() {
                let (dx, dz) = c.css_distance()?;
                dx.min(dz)
            } else {
                c.distance()?
            };
            println!("{d}");
        }
    }
    Ok(())
}

fn tables(names: Vec<String>, out: &Path) -> Result<()> {
    let names = if names.is_empty() {
        ["c1224", "c1644", "c2026", "c3246", "c3628", "c4848"].map(String::from).to_vec()
    } else {
        names
    };
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    for name in names {
        let c = catalog(&name)?;
        for (kind, tag) in [(PauliKind::X, "x"), (PauliKind::Z, "z")] {
            let t = Instant::now();
            let table = DecoderTable::build(&c, kind, None)?;
            let path = out.join(format!("{name}-{tag}.tbl"));
            write(&path, &table.to_bytes())?;
            println!("{} {} syndromes {:.2?}", path.display(), table.rows().len(), t.elapsed());
        }
    }
    Ok(())
}

fn run_specs(path: &Path, seed: Option<u64>, shots: Option<u64>, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut specs = parse_specs(&text)?;
    for s in &mut specs {
        if let Some(seed) = seed {
            s.seed = seed;
        }
        if let Some(shots) = shots {
            s.shots = shots;
        }
        s.validate()?;
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    let mut rows: Vec<RatesReport> = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let label = if spec.name.is_empty() { format!("{stem}-{i}") } else { spec.name.clone() };
        let t = Instant::now();
        match run(spec)? {
            ExperimentOutput::Rates(r) => rows.extend(r),
            ExperimentOutput::Overhead(r) => emit_json(out, &label, &serde_json::to_string_pretty(&r).expect("serializable"))?,
            ExperimentOutput::Histograms(h) => {
                let body = format!("[{}]", h.iter().map(|x| x.to_json()).collect::<Vec<_>>().join(",\n"));
                emit_json(out, &label, &body)?;
            }
        }
        eprintln!("{label}: {} done in {:.1?}", spec.descriptor(), t.elapsed());
    }
    if !rows.is_empty() {
        let csv = RatesReport::to_csv(&rows)?;
        match out {
            Some(dir) => write(&dir.join(format!("{stem}.csv")), csv.as_bytes())?,
            None => print!("{csv}"),
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, label: &str, body: &str) -> Result<()> {
    match out {
        Some(dir) => write(&dir.join(format!("{label}.json")), body.as_bytes()),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

struct Ledger {
    failed: usize,
}

impl Ledger {
    fn check(&mut self, name: &str, ok: bool, detail: impl std::fmt::Display) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn verify(code_files: &[PathBuf]) -> Result<()> {
    let mut l = Ledger { failed: 0 };
    let c = catalog("c3628")?;
    let counts = enumerate_fault_counts(&DecoderTable::build(&c, PauliKind::X, None)?, 5)?;
    l.check(
        "c3628 fault counts",
        counts.n_logical[5] == 54432 && counts.n_reject[4] == 23544,
        format!("c={} c'={}", counts.n_logical[5], counts.n_reject[4]),
    );
    for name in CATALOG {
        let e = catalog_entry(name)?;
        let d = if e.code.is_css() {
            let (dx, dz) = e.code.css_distance()?;
            dx.min(dz)
        } else {
            e.code.distance()?
        };
        l.check(&format!("{name} parameters"), (e.code.n, e.code.k, d) == e.expected, format!("[[{},{},{d}]]", e.code.n, e.code.k));
    }
    for (lp, a, want) in [(0.01, 0.05, 300.0), (0.01, 0.10, 230.0), (0.01, 0.01, 460.0)] {
        let got = postselection_budget(lp, a)?;
        l.check(&format!("budget({lp}, {a})"), (got.round() - want).abs() <= 1.0, format!("{got:.1}"));
    }
    let same = |a: &StabilizerCode, b: &StabilizerCode| a.stabilizer_matrix().same_row_space(&b.stabilizer_matrix());
    l.check("methods agree on c422", same(&concat_iceberg_m1(&c422())?, &concat_iceberg_m2(&c422())?), "row spaces");
    let tower = catalog("c1224")?;
    l.check("methods differ on c1224", !same(&concat_iceberg_m1(&tower)?, &concat_iceberg_m2(&tower)?), "row spaces");
    for name in ["c422", "c642", "c1224", "c1644", "c2026"] {
        let src = source_for(name, None)?;
        let k = src.code().k;
        let mut ok = true;
        let mut count = 0;
        for plus in [0, all_plus(k)] {
            ok &= verify_preparation(&*verified_fragment(&src, plus)?, src.code(), plus)?;
            count += 1;
        }
        ok &= verify_action(&src, 1, |a, b| Ok(vec![a.steane_ec(&b[0])?]), &LogicalAction::identity(k))?;
        let tc = LogicalAction::transversal_cnot(k);
        ok &= verify_action(&src, 2, |a, b| {
            let (x, y) = a.teleported_cnot(&b[0], &b[1])?;
            Ok(vec![x, y])
        }, &tc)?;
        count += 2;
        for c in 0..2 * k {
            for t in (0..2 * k).filter(|&t| t != c) {
                if let Ok(s) = targeted_cnot_schedule(src.code(), c, t) {
                    ok &= verify_action(&src, 2, |a, b| Ok(a.apply_schedule(&s, [b[0].clone(), b[1].clone()])?.to_vec()), &LogicalAction::cnot(2 * k, c, t))?;
                    count += 1;
                }
            }
        }
        l.check(&format!("{name} gadgets"), ok, format!("{count} identities"));
    }
    for path in code_files {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let ok = match (StabilizerCode::from_text(name, &text), catalog(name)) {
            (Ok(file), Ok(cat)) => file.n == cat.n && file.k == cat.k && same(&file, &cat),
            _ => false,
        };
        l.check(&format!("{} matches catalog", path.display()), ok, name);
    }
    match l.failed {
        0 => Ok(()),
        n => Err(CliError::Checks(n)),
    }
}

fn bench(code: &str, p: f64, shots: u64, seed: u64, workers: Option<usize>) -> Result<()> {
    let program = repeated_ec_program(&source_for(code, None)?, 10)?;
    let mut sampler = sampler_for(&program)?;
    sampler.noise.p = p;
    let time = |w: Option<usize>| {
        let t = Instant::now();
        let s = with_workers(w, || sampler.sample(shots, seed));
        (s, shots as f64 / t.elapsed().as_secs_f64())
    };
    let (a, one) = time(Some(1));
    let (b, pool) = time(workers);
    println!("{code} repeated EC at p={p}: {shots} shots, {} accepted, {} errors", a.accepted, a.errors);
    println!("1 worker    {one:>12.0} shots/s");
    println!("pool        {pool:>12.0} shots/s ({}x)", format_args!("{:.2}", pool / one));
    if (a.accepted, a.errors) != (b.accepted, b.errors) {
        eprintln!("warning: worker count changed the outcome");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    let res = with_workers(workers, move || match cli.cmd {
        Cmd::Codes { cmd } => codes(cmd),
        Cmd::Tables { names, out } => tables(names, &out),
        Cmd::Run { spec, seed, shots, out } => run_specs(&spec, seed, shots, out.as_deref()),
        Cmd::Verify { code_files } => verify(&code_files),
        Cmd::Bench { code, p, shots, seed } => bench(&code, p, shots, seed, workers),
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
