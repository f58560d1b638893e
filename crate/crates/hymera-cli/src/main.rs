//! Command-line front end for the hymera laboratory.
//!
//! Exit codes: 0 success, 1 domain violation (a check failed), 2 bad
//! input/config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hymera::channel::{
    average_descending, build_ascending, build_descending, duality_defect,
    fixed_point_central_charge, scaling_spectrum, ConeSchema,
};
use hymera::decomposition::bind_preset;
use hymera::families::{self, classify, Family, ParameterSet};
use hymera::kac::KacTable;
use hymera::perfect::{ame_4_3, perfect_check, push_operator};
use hymera::tensor::Tensor;
use hymera::tiling::{deflate, inflate, BoundaryWord};
use hymera::trials::{
    plot_data_files, report, run_trials, run_trials_parallel, spectra_csv, summarize, ReportFormat,
    TrialConfig,
};

#[derive(Parser)]
#[command(
    name = "hymera",
    about = "Hyperinvariant tensor network laboratory",
    version
)]
struct Cli {
    /// Tolerance for channel checks (trace preservation, complete
    /// positivity, duality).
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Tolerance for algebraic identities (unitarity, isometry).
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_algebraic: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the multitensor constraints of a decomposition's constituents.
    Verify {
        /// Decomposition preset (yqr-54, yqt-54, yqs-54, qr-54, yqr-73).
        #[arg(long)]
        decomposition: String,
        /// Seed for the random parameter draw (required without --params).
        #[arg(long)]
        seed: Option<u64>,
        /// Explicit parameters as JSON, e.g. '{"1":0.3,"2":1.1}'.
        #[arg(long)]
        params: Option<String>,
        /// Fault injection for testing: zero display entry (r,c) of a family,
        /// e.g. --corrupt Y:0,0.
        #[arg(long)]
        corrupt: Option<String>,
    },
    /// Inflate a boundary word through a tiling grammar.
    Inflate {
        /// Grammar preset name (54, 73) or a path to a grammar JSON file.
        #[arg(long, default_value = "54")]
        grammar: String,
        /// Seed word over {a,b}.
        #[arg(long, default_value = "a")]
        word: String,
        /// Number of inflation steps.
        #[arg(long, default_value_t = 3)]
        layers: u32,
        /// Also deflate back and verify the round trip.
        #[arg(long)]
        check_deflate: bool,
        /// Write the words here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the average two-site descending superoperator and print its
    /// scaling dimensions.
    Spectrum {
        #[arg(long)]
        decomposition: String,
        #[arg(long)]
        seed: u64,
        /// Number of retained eigenvalues.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Also estimate the central charge from the fixed-point entropies.
        #[arg(long)]
        charge: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized trial campaign from a JSON config.
    Trials {
        /// Config file: {"decomposition","trials","base_seed","k",...}.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (results.csv, summary.json, plotdata/).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; omit for serial execution.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the Kac table of a minimal model, or one entry.
    Kac {
        /// Minimal model p',q' (coprime, p' > q' >= 2), e.g. --model 4,3.
        #[arg(long)]
        model: String,
        /// Optional single entry r,s.
        #[arg(long)]
        rs: Option<String>,
    },
    /// Check a tensor for perfectness across all bipartitions.
    PerfectCheck {
        /// Tensor JSON file; use the literal `ame43` for the built-in
        /// AME(4,3) example.
        #[arg(long)]
        tensor: String,
    },
    /// Push an operator through an isometric tensor: O' = T O T†.
    Push {
        /// Operator JSON file {"dim":n,"data":[[re,im],...]}.
        #[arg(long)]
        operator: PathBuf,
        /// Tensor JSON file {"legs":[...],"shape":[...],"data":[[re,im],...]}.
        #[arg(long)]
        tensor: PathBuf,
        /// Comma-separated input legs (defaults to the second half).
        #[arg(long)]
        in_legs: Option<String>,
        /// Comma-separated output legs (defaults to the first half).
        #[arg(long)]
        out_legs: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Domain-check failure: the command ran but the property does not hold.
#[derive(Debug)]
struct DomainViolation(String);

impl std::fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for DomainViolation {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<DomainViolation>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Verify {
            decomposition,
            seed,
            params,
            corrupt,
        } => cmd_verify(
            &decomposition,
            seed,
            params.as_deref(),
            corrupt.as_deref(),
            cli.tol_algebraic,
            cli.tol,
        ),
        Command::Inflate {
            grammar,
            word,
            layers,
            check_deflate,
            out,
        } => cmd_inflate(&grammar, &word, layers, check_deflate, out.as_deref()),
        Command::Spectrum {
            decomposition,
            seed,
            k,
            charge,
            out,
        } => cmd_spectrum(&decomposition, seed, k, charge, cli.tol, out.as_deref()),
        Command::Trials {
            config,
            out,
            threads,
        } => cmd_trials(&config, &out, threads),
        Command::Kac { model, rs } => cmd_kac(&model, rs.as_deref()),
        Command::PerfectCheck { tensor } => cmd_perfect_check(&tensor, cli.tol),
        Command::Push {
            operator,
            tensor,
            in_legs,
            out_legs,
            out,
        } => cmd_push(
            &operator,
            &tensor,
            in_legs.as_deref(),
            out_legs.as_deref(),
            cli.tol,
            out.as_deref(),
        ),
    }
}

fn parse_params(text: &str) -> anyhow::Result<ParameterSet> {
    let map: BTreeMap<String, f64> =
        serde_json::from_str(text).context("--params must be a JSON object of index -> value")?;
    let mut p = ParameterSet::new();
    for (k, v) in map {
        let idx: u8 = k.parse().context("parameter index must be 1..=9")?;
        if !(1..=9).contains(&idx) {
            bail!("parameter index {idx} out of range 1..=9");
        }
        p.set(idx, v);
    }
    Ok(p)
}

fn cmd_verify(
    decomposition: &str,
    seed: Option<u64>,
    params: Option<&str>,
    corrupt: Option<&str>,
    tol_algebraic: f64,
    tol_channel: f64,
) -> anyhow::Result<()> {
    let params = match (params, seed) {
        (Some(text), _) => parse_params(text)?,
        (None, Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ParameterSet::sample(&mut rng)
        }
        (None, None) => bail!("--seed is required when --params is not given"),
    };
    let d = bind_preset(decomposition, params.clone())?;
    let letters = [
        d.spec.roles.vertex.clone(),
        d.spec.roles.edge.clone(),
        d.spec.roles.disentangler.clone(),
    ];
    let mut unique: Vec<&str> = letters.iter().map(String::as_str).collect();
    unique.sort_unstable();
    unique.dedup();

    let mut all_ok = true;
    for letter in unique {
        let family = Family::from_letter(letter).ok_or_else(|| anyhow!("bad role {letter}"))?;
        let mut tensor = families::build(family, &params)?;
        if let Some(spec) = corrupt {
            if let Some(rest) = spec.strip_prefix(&format!("{letter}:")) {
                tensor = zero_display_entry(&tensor, rest)?;
            }
        }
        let rep = classify(&tensor)?;
        let ok = family_ok(family, &rep, tol_algebraic);
        all_ok &= ok;
        let status = if ok { "ok" } else { "FAIL" };
        println!(
            "{letter}: vertical {:.3e}  horizontal {:.3e}  scalar {}  z2 {}  antisym {}  [{status}]",
            rep.vertical_unitary,
            rep.horizontal_unitary,
            rep.scalar_constant
                .map(|c| format!("{c:.6}"))
                .unwrap_or_else(|| "-".into()),
            rep.z2_symmetric,
            rep.antisymmetric,
        );
    }

    // channel-level verification of the wired decomposition
    let op = average_descending(&d, 2, None)?;
    let tp = op.trace_preserving_defect();
    let choi = op.choi_min_eigenvalue()?;
    let channel_ok = tp <= tol_channel && choi >= -tol_channel;
    all_ok &= channel_ok;
    println!(
        "average descending superoperator: trace defect {tp:.3e}  choi min {choi:.3e}  [{}]",
        if channel_ok { "ok" } else { "FAIL" }
    );

    if !all_ok {
        return Err(DomainViolation("constraint verification failed".into()).into());
    }
    Ok(())
}

fn family_ok(family: Family, rep: &families::ConstraintReport, tol: f64) -> bool {
    match family {
        Family::Y | Family::Q => rep.vertical_unitary <= tol && rep.z2_symmetric,
        Family::R => rep.vertical_unitary <= tol && rep.horizontal_unitary <= tol,
        Family::T | Family::S => rep.antisymmetric && rep.scalar_constant.is_some_and(|c| c > 0.0),
    }
}

fn zero_display_entry(t: &Tensor, spec: &str) -> anyhow::Result<Tensor> {
    let (r, c) = spec
        .split_once(',')
        .ok_or_else(|| anyhow!("--corrupt wants FAMILY:row,col"))?;
    let (r, c): (usize, usize) = (r.parse()?, c.parse()?);
    if r >= 4 || c >= 4 {
        bail!("--corrupt indices must be < 4");
    }
    let mut data = t.data().to_vec();
    data[(r / 2) * 8 + (r % 2) * 4 + (c / 2) * 2 + c % 2] = Complex64::new(0.0, 0.0);
    Ok(Tensor::new(t.legs().to_vec(), t.shape().to_vec(), data)?)
}

fn cmd_inflate(
    grammar: &str,
    word: &str,
    layers: u32,
    check_deflate: bool,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let g = if Path::new(grammar).is_file() {
        hymera::tiling::InflationGrammar::from_json(&std::fs::read_to_string(grammar)?)?
    } else {
        hymera::decomposition::load_grammar(grammar)?
    };
    if word.is_empty() || word.chars().any(|c| c != 'a' && c != 'b') {
        bail!("seed word must be nonempty over {{a,b}}");
    }
    let mut w = BoundaryWord::seed(word);
    let mut lines = vec![format!(
        "# layer 0: len {} counts {:?}",
        w.len(),
        w.counts()
    )];
    lines.push(w.letters.clone());
    for _ in 0..layers {
        w = inflate(&w, &g);
        lines.push(format!(
            "# layer {}: len {} counts {:?}",
            w.layer,
            w.len(),
            w.counts()
        ));
        lines.push(w.letters.clone());
    }
    if check_deflate {
        let mut back = w.clone();
        for _ in 0..layers {
            back = deflate(&back, &g)?;
        }
        if back.letters != word {
            return Err(DomainViolation("deflate round trip mismatch".into()).into());
        }
        lines.push("# deflate round trip ok".into());
    }
    let text = lines.join("\n") + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumOutput {
    decomposition: String,
    seed: u64,
    scale_factor: f64,
    lambda_magnitudes: Vec<f64>,
    dimensions: Vec<f64>,
    trace_defect: f64,
    choi_min: f64,
    duality_defect: f64,
    central_charge: Option<f64>,
}

fn cmd_spectrum(
    decomposition: &str,
    seed: u64,
    k: usize,
    charge: bool,
    tol: f64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ParameterSet::sample(&mut rng);
    let d = bind_preset(decomposition, params)?;
    let op = average_descending(&d, 2, None)?;
    let s = d.scale_factor()?;
    let spec = scaling_spectrum(&op, s, k)?;

    let cone = ConeSchema::load(&d.spec.cones.two_site[0].0)?;
    let desc = build_descending(&d, &cone)?;
    let asc = build_ascending(&d, &cone)?;
    let duality = duality_defect(&desc, &asc, 20, &mut rng);

    let output = SpectrumOutput {
        decomposition: decomposition.to_string(),
        seed,
        scale_factor: s,
        lambda_magnitudes: spec
            .eigenvalues
            .iter()
            .map(|(re, im)| (re * re + im * im).sqrt())
            .collect(),
        dimensions: spec.dimensions.clone(),
        trace_defect: op.trace_preserving_defect(),
        choi_min: op.choi_min_eigenvalue()?,
        duality_defect: duality,
        central_charge: if charge {
            Some(fixed_point_central_charge(&d)?)
        } else {
            None
        },
    };
    let text = serde_json::to_string_pretty(&output)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    if output.trace_defect > tol || output.choi_min < -tol || output.duality_defect > tol {
        return Err(DomainViolation("channel invariants violated".into()).into());
    }
    Ok(())
}

fn cmd_trials(config_path: &Path, out_dir: &Path, threads: Option<usize>) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config: TrialConfig = serde_json::from_str(&text).context("parsing trial config")?;
    let records = match threads {
        Some(n) => run_trials_parallel(&config, n)?,
        None => run_trials(&config)?,
    };
    let summary = summarize(&records, &config.targets)?;

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("results.csv"), spectra_csv(&records))?;
    std::fs::write(
        out_dir.join("summary.json"),
        report(&records, &summary, ReportFormat::Json)?,
    )?;
    let plotdir = out_dir.join("plotdata");
    std::fs::create_dir_all(&plotdir)?;
    for (name, body) in plot_data_files(&records, config.k) {
        std::fs::write(plotdir.join(name), body)?;
    }
    println!(
        "{} trials ({} failed); envelopes written to {}",
        summary.trials,
        summary.failed,
        out_dir.display()
    );
    for e in &summary.envelopes {
        println!(
            "  delta_{}: min {:.6} max {:.6} mean {:.6} std {:.6}",
            e.index, e.min, e.max, e.mean, e.std
        );
    }
    for c in &summary.containment {
        println!(
            "  target {} ({:.6}): contained = {}",
            c.label, c.delta, c.contained
        );
    }
    Ok(())
}

fn parse_pair(text: &str, what: &str) -> anyhow::Result<(u32, u32)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("{what} wants the form X,Y"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn cmd_kac(model: &str, rs: Option<&str>) -> anyhow::Result<()> {
    let (p, q) = parse_pair(model, "--model")?;
    match rs {
        Some(rs) => {
            let rs = parse_pair(rs, "--rs")?;
            let h = hymera::kac::kac_dimension((p, q), rs)?;
            println!("h_{{{},{}}} = {}  (delta = {})", rs.0, rs.1, h, h.double());
        }
        None => {
            let table = KacTable::new(p, q)?;
            println!("M({p},{q})  central charge {}", table.central_charge());
            for e in &table.entries {
                println!("  h_{{{},{}}} = {}  delta = {}", e.r, e.s, e.h, e.delta);
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct TensorFile {
    legs: Vec<String>,
    shape: Vec<usize>,
    data: Vec<(f64, f64)>,
}

fn load_tensor(path: &Path) -> anyhow::Result<Tensor> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading tensor file {}", path.display()))?;
    let f: TensorFile = serde_json::from_str(&text).context("parsing tensor file")?;
    Ok(Tensor::new(
        f.legs,
        f.shape,
        f.data
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    )?)
}

#[derive(Deserialize)]
struct OperatorFile {
    dim: usize,
    data: Vec<(f64, f64)>,
}

fn load_operator(path: &Path) -> anyhow::Result<Array2<Complex64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading operator file {}", path.display()))?;
    let f: OperatorFile = serde_json::from_str(&text).context("parsing operator file")?;
    if f.data.len() != f.dim * f.dim {
        bail!("operator data length does not match dim^2");
    }
    Ok(Array2::from_shape_vec(
        (f.dim, f.dim),
        f.data
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    )?)
}

fn cmd_perfect_check(tensor: &str, tol: f64) -> anyhow::Result<()> {
    let t = if tensor == "ame43" {
        ame_4_3()
    } else {
        load_tensor(Path::new(tensor))?
    };
    let result = perfect_check(&t, tensor, tol)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    if !result.is_perfect {
        return Err(DomainViolation("tensor is not perfect".into()).into());
    }
    Ok(())
}

fn cmd_push(
    operator: &Path,
    tensor: &Path,
    in_legs: Option<&str>,
    out_legs: Option<&str>,
    tol: f64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let t = load_tensor(tensor)?;
    let op = load_operator(operator)?;
    let legs: Vec<&str> = t.legs().iter().map(String::as_str).collect();
    let half = legs.len() / 2;
    let in_legs: Vec<&str> = match in_legs {
        Some(s) => s.split(',').map(str::trim).collect(),
        None => legs[half..].to_vec(),
    };
    let out_legs: Vec<&str> = match out_legs {
        Some(s) => s.split(',').map(str::trim).collect(),
        None => legs[..half].to_vec(),
    };
    let pushed = push_operator(&t, &op, &in_legs, &out_legs, tol)
        .map_err(|e| anyhow::Error::from(DomainViolation(e.to_string())))?;
    let dim = pushed.nrows();
    let data: Vec<(f64, f64)> = pushed.iter().map(|z| (z.re, z.im)).collect();
    let text = serde_json::to_string_pretty(&serde_json::json!({"dim": dim, "data": data}))?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}
