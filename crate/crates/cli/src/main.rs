use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use incidence::algebra::{
    build_l, compose_check, legal_compositions, matrix_to_csv, two_layer_span_check, LOperator,
};
use incidence::equimap::{bell_identity_check, parameter_breakdown, relaxed_parameters};
use incidence::geometry::{incidence_from_complex, incidence_from_poset, validate_poset};
use incidence::io::{
    complex_from_str, format_signature, layer_from_str, layer_to_json, parse_signature,
    poset_from_str, tensor_from_str, tensor_to_string,
};
use incidence::oracle::{sharing_pattern, verify_case, VerifyCase};
use incidence::tensors::multiplicities;
use incidence::{
    enumerate_valid_partitions, tau, Aggregator, EquivariantMap, IncidenceTensor, Mask,
    OrbitSignature, TensorLayer, TensorSignature,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SIGNATURE_HELP: &str = "\
Signature grammar:
  DIMS[|c:POS=POS...]...
  DIMS is a comma list of node, edge, triangle, tetra or a face size (1, 2, ...);
  append `d` for directed faces (edged, 2d). Each `|c:` clause ties positions
  that must hold the same node; a position is DIM or DIM:SLOT, both 1-based.
Examples:
  node,node
  node,edge|c:1=2:1
  1,2|c:1=2:1";

#[derive(Parser)]
#[command(name = "incidence", version, about = "Equivariant maps over incidence tensors", after_help = SIGNATURE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Count independent parameters of a layer between two signatures.
    Count {
        #[arg(long = "in-signature")]
        input: String,
        #[arg(long = "out-signature")]
        output: Option<String>,
        /// Require output features to be unchanged under reversal of each face.
        #[arg(long)]
        symmetric: bool,
        /// Count the relaxed layer that pools whole axes instead.
        #[arg(long)]
        relaxed: bool,
        #[arg(long, default_value_t = 1)]
        cin: usize,
        #[arg(long, default_value_t = 1)]
        cout: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the valid partitions of a tensor signature and its multiplicities.
    Orbits {
        #[arg(long = "tensor-signature")]
        signature: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Apply a layer file to a tensor file and print the output tensor.
    Apply {
        #[arg(long)]
        layer: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// `none`, `input` (nonzero pattern of the input) or a tensor file whose
        /// nonzero entries form the mask.
        #[arg(long, default_value = "none")]
        mask: String,
        #[arg(long, default_value = "sum")]
        agg: String,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check orbit counts, oracle equivalence, the Bell identity and operator spans.
    Verify {
        #[arg(long = "max-n", default_value_t = 5)]
        max_n: usize,
        #[arg(long = "max-m", default_value_t = 3)]
        max_m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the grid of orbit ids shared by a map from size-M to size-M' faces.
    Sharing {
        #[arg(long)]
        m: usize,
        #[arg(long = "m-prime")]
        m_prime: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Close a facet list into a simplicial complex and report face counts.
    Complex {
        #[arg(long)]
        facets: PathBuf,
        /// Export the incidence between two face sizes, e.g. `1,2`.
        #[arg(long)]
        incidence: Option<String>,
        /// Nodes two same-size faces must share to count as incident.
        #[arg(long)]
        shared: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Validate a graded poset and report its rank sizes.
    Poset {
        #[arg(long)]
        poset: PathBuf,
        /// Export the incidence between two ranks, e.g. `0,1`.
        #[arg(long)]
        incidence: Option<String>,
        /// Rank whose common lower element makes same-rank elements incident.
        #[arg(long)]
        shared: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print one graph operator as a CSV matrix over node and edge slots.
    Operator {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Write seeded random layers and tensors for `apply`.
    #[command(subcommand)]
    Generate(Generate),
}

#[derive(Subcommand)]
enum Generate {
    Layer {
        #[arg(long = "in-signature")]
        input: String,
        #[arg(long = "out-signature")]
        output: Option<String>,
        #[arg(long, default_value_t = 1)]
        cin: usize,
        #[arg(long, default_value_t = 1)]
        cout: usize,
        /// Identity weights instead of random ones.
        #[arg(long, conflicts_with = "zero")]
        identity: bool,
        #[arg(long)]
        zero: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        range: i64,
    },
    Tensor {
        #[arg(long)]
        signature: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        range: i64,
    },
}

/// Exit status 2 for bad arguments, 1 for everything that fails later.
enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<incidence::Error> for Failure {
    fn from(e: incidence::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn signature(text: &str) -> Result<TensorSignature, Failure> {
    parse_signature(text).map_err(|e| Failure::Usage(format!("{e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(text: String, output: Option<&Path>) -> Outcome {
    match output {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn pair(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || {
        Failure::Usage(format!(
            "expected two comma-separated integers, got `{text}`"
        ))
    };
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serializes") + "\n"
}

fn count(
    input: &str,
    output: Option<&str>,
    symmetric: bool,
    relaxed: bool,
    (cin, cout): (usize, usize),
    format: Format,
) -> Outcome {
    let sig_in = signature(input)?;
    let sig_out = output
        .map(signature)
        .transpose()?
        .unwrap_or_else(|| sig_in.clone());
    if relaxed {
        if sig_in.order() != sig_out.order() {
            return Err(Failure::Invalid(
                "relaxed layers keep the tensor order; signatures differ".into(),
            ));
        }
        let d = sig_in.order();
        let per_channel = relaxed_parameters(d);
        let total = per_channel * (cin * cout) as u64;
        return Ok(match format {
            Format::Json => pretty(&json!({"relaxed": true, "order": d, "per_channel_pair": per_channel, "total": total})),
            Format::Csv => format!("order,per_channel_pair,total\n{d},{per_channel},{total}\n"),
            Format::Text => format!("relaxed layer, order {d}: {per_channel} parameters per channel pair\ntotal {total}\n"),
        });
    }
    let oin = OrbitSignature::of_tensor(&sig_in, cin)?;
    let oout = OrbitSignature::of_tensor(&sig_out, cout)?;
    let rows = parameter_breakdown(&oin, &oout, symmetric);
    let total: u64 = rows.iter().map(|r| r.subtotal).sum();
    Ok(match format {
        Format::Json => pretty(&json!({"symmetric": symmetric, "rows": rows, "total": total})),
        Format::Csv => {
            let mut s = String::from("m,m_prime,copies_in,copies_out,tau,subtotal\n");
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.m_in, r.m_out, r.copies_in, r.copies_out, r.tau, r.subtotal
                )
                .unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{} -> {}\n",
                format_signature(&sig_in),
                format_signature(&sig_out)
            );
            for r in &rows {
                writeln!(
                    s,
                    "  m={} -> m'={}: tau={} x {} x {} copies = {}",
                    r.m_in, r.m_out, r.tau, r.copies_in, r.copies_out, r.subtotal
                )
                .unwrap();
            }
            let parts: Vec<String> = rows.iter().map(|r| r.subtotal.to_string()).collect();
            let chan = if cin * cout > 1 {
                format!(" x {cin} x {cout} channels")
            } else {
                String::new()
            };
            writeln!(s, "total {total} (= {}{chan})", parts.join(" + ")).unwrap();
            s
        }
    })
}

fn orbits(text: &str, format: Format) -> Outcome {
    let sig = signature(text)?;
    let parts = enumerate_valid_partitions(&sig)?;
    let kappa = multiplicities(&sig)?;
    Ok(match format {
        Format::Json => {
            let listed: Vec<_> = parts
                .iter()
                .map(|p| json!({"partition": p.to_string(), "m": p.block_count()}))
                .collect();
            let kappa: Vec<_> = kappa
                .iter()
                .map(|&(m, k)| json!({"m": m, "kappa": k}))
                .collect();
            pretty(
                &json!({"signature": format_signature(&sig), "partitions": listed, "multiplicities": kappa}),
            )
        }
        Format::Csv => {
            let mut s = String::from("partition,m\n");
            for p in &parts {
                writeln!(s, "\"{p}\",{}", p.block_count()).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for p in &parts {
                writeln!(s, "{p}  m={}", p.block_count()).unwrap();
            }
            let k: Vec<String> = kappa
                .iter()
                .map(|&(m, k)| format!("kappa_{m}={k}"))
                .collect();
            writeln!(s, "{} partitions; {}", parts.len(), k.join(", ")).unwrap();
            s
        }
    })
}

fn apply(layer: &Path, input: &Path, mask: &str, agg: &str, output: Option<&Path>) -> Outcome {
    let agg: Aggregator = agg
        .parse()
        .map_err(|e: incidence::Error| Failure::Usage(e.to_string()))?;
    let file = layer_from_str(&read(layer)?)?;
    let x = tensor_from_str(&read(input)?)?;
    let sig_in = file
        .input_signature
        .unwrap_or_else(|| x.signature().clone());
    let sig_out = file.output_signature.unwrap_or_else(|| sig_in.clone());
    let layer = TensorLayer::new(sig_in, sig_out, file.map)?;
    let y = layer.apply_with(&x, agg)?;
    let y = match mask {
        "none" => y,
        "input" => y.masked(&Mask::nonzero_of(&x))?,
        path => y.masked(&Mask::nonzero_of(&tensor_from_str(&read(Path::new(
            path,
        ))?)?))?,
    };
    emit(tensor_to_string(&y) + "\n", output)
}

fn verify(max_n: usize, max_m: usize, seed: u64, format: Format) -> Outcome {
    if max_m == 0 || max_n == 0 {
        return Err(Failure::Usage(
            "--max-n and --max-m must be positive".into(),
        ));
    }
    if max_n > 6 || max_m > 3 {
        return Err(Failure::Usage(
            "the dense oracle supports --max-n up to 6 and --max-m up to 3".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<VerifyCase> = Vec::new();
    for m in 1..=max_m {
        for m2 in 1..=max_m {
            for n in m.max(m2)..=max_n {
                cases.push(verify_case(m, m2, n, &mut rng)?);
            }
        }
    }
    let bell: Vec<_> = (1..=4)
        .map(|d| {
            let (lhs, rhs) = bell_identity_check(d)?;
            Ok(json!({"order": d, "sum_of_tau": lhs, "bell": rhs, "match": lhs == rhs}))
        })
        .collect::<Result<_, incidence::Error>>()?;
    let span = two_layer_span_check(5)?;
    let span_ok =
        (span.full, span.single, span.stacked) == (9, 8, 9) && span.stacked == span.predicted;
    let residual = legal_compositions()
        .into_iter()
        .map(|(a, b)| compose_check(a, b, 5).map(|c| c.residual))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let all_pass = cases.iter().all(|c| c.matches)
        && bell.iter().all(|b| b["match"] == true)
        && span_ok
        && residual < 1e-9;
    let report = json!({
        "cases": cases,
        "bell_identity": bell,
        "spans": span,
        "max_composition_residual": residual,
        "pass": all_pass,
    });
    let text = match format {
        Format::Json => pretty(&report),
        Format::Csv => {
            let mut s = String::from(
                "m,m_prime,n,orbit_count,tau,match,max_abs_diff,expected_undercount\n",
            );
            for c in &cases {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    c.m_in,
                    c.m_out,
                    c.n_nodes,
                    c.orbit_count,
                    c.tau,
                    c.matches,
                    c.max_abs_diff,
                    c.expected_undercount
                )
                .unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in &cases {
                let note = if c.expected_undercount {
                    " (N < M+M', undercount expected)"
                } else {
                    ""
                };
                writeln!(
                    s,
                    "{} M={} M'={} N={}: {} orbits, tau {}{note}",
                    if c.matches { "ok  " } else { "FAIL" },
                    c.m_in,
                    c.m_out,
                    c.n_nodes,
                    c.orbit_count,
                    c.tau
                )
                .unwrap();
            }
            writeln!(
                s,
                "spans {}/{}/{}, max composition residual {residual:e}",
                span.full, span.single, span.stacked
            )
            .unwrap();
            writeln!(
                s,
                "{}",
                if all_pass {
                    "all checks passed"
                } else {
                    "verification failed"
                }
            )
            .unwrap();
            s
        }
    };
    if all_pass {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Invalid("verification failed".into()))
    }
}

fn symbol(k: usize) -> char {
    const SYMBOLS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    SYMBOLS.get(k).map_or('?', |&b| b as char)
}

fn sharing(m: usize, m2: usize, n: usize, format: Format) -> Outcome {
    if m == 0 || m2 == 0 || n < m.max(m2) || n > 6 {
        return Err(Failure::Usage("need 1 <= m, m-prime <= n <= 6".into()));
    }
    let grid = sharing_pattern(m, m2, n);
    let distinct = grid.iter().flatten().copied().max().map_or(0, |k| k + 1);
    Ok(match format {
        Format::Csv => grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
                    + "\n"
            })
            .collect(),
        Format::Json => pretty(
            &json!({"m": m, "m_prime": m2, "n": n, "orbits": distinct, "tau": tau(m, m2), "grid": grid}),
        ),
        Format::Text => {
            let mut s = format!("{distinct} orbits (tau = {})\n", tau(m, m2));
            for row in &grid {
                if distinct <= 62 {
                    s.extend(row.iter().map(|&k| symbol(k)));
                } else {
                    s += &row
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(" ");
                }
                s.push('\n');
            }
            s
        }
    })
}

fn export(t: &IncidenceTensor, output: Option<&Path>) -> Result<String, Failure> {
    emit(tensor_to_string(t) + "\n", output)
}

fn complex(
    facets: &Path,
    incidence: Option<&str>,
    shared: Option<usize>,
    output: Option<&Path>,
    format: Format,
) -> Outcome {
    let c = complex_from_str(&read(facets)?)?;
    let mut out = match format {
        Format::Json => {
            pretty(&json!({"n_nodes": c.n_nodes(), "counts": c.counts(), "summary": c.summary()}))
        }
        Format::Csv => {
            let counts: Vec<String> = c.counts().iter().map(usize::to_string).collect();
            format!(
                "size,{}\n",
                (1..=counts.len())
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ) + &format!("count,{}\n", counts.join(","))
        }
        Format::Text => c.summary() + "\n",
    };
    if let Some(spec) = incidence {
        let (a, b) = pair(spec)?;
        let (t, mask) = incidence_from_complex(&c, a, b, shared)?;
        if output.is_none() && format == Format::Text {
            writeln!(out, "incidence {a},{b}: {} ones", mask.count_ones()).unwrap();
        }
        out += &export(&t, output)?;
    }
    Ok(out)
}

fn poset(
    path: &Path,
    incidence: Option<&str>,
    shared: Option<usize>,
    output: Option<&Path>,
    format: Format,
) -> Outcome {
    let p = poset_from_str(&read(path)?)?;
    let report = validate_poset(&p);
    let mut out = match format {
        Format::Json => pretty(&serde_json::to_value(&report).expect("report serializes")),
        Format::Csv => format!(
            "rank,size\n{}",
            report
                .rank_sizes
                .iter()
                .enumerate()
                .map(|(r, s)| format!("{r},{s}\n"))
                .collect::<String>()
        ),
        Format::Text => {
            let sizes: Vec<String> = report.rank_sizes.iter().map(usize::to_string).collect();
            let mut s = format!(
                "{}; rank sizes {}\n",
                if report.valid { "valid" } else { "invalid" },
                sizes.join("/")
            );
            for v in &report.violations {
                writeln!(s, "  {v}").unwrap();
            }
            s
        }
    };
    if !report.valid {
        print!("{out}");
        return Err(Failure::Invalid("poset is not a graded poset".into()));
    }
    if let Some(spec) = incidence {
        let (a, b) = pair(spec)?;
        let (t, mask) = incidence_from_poset(&p, a, b, shared)?;
        if output.is_none() && format == Format::Text {
            writeln!(out, "incidence {a},{b}: {} ones", mask.count_ones()).unwrap();
        }
        out += &export(&t, output)?;
    }
    Ok(out)
}

fn operator(from: usize, to: usize, rank: usize, n: usize) -> Outcome {
    let op = LOperator::new(from, to, rank)?;
    Ok(matrix_to_csv(&build_l(op, n)?))
}

fn generate(cmd: Generate) -> Outcome {
    match cmd {
        Generate::Layer {
            input,
            output,
            cin,
            cout,
            identity,
            zero,
            seed,
            range,
        } => {
            let sig_in = signature(&input)?;
            let sig_out = output
                .as_deref()
                .map(signature)
                .transpose()?
                .unwrap_or_else(|| sig_in.clone());
            let oin = OrbitSignature::of_tensor(&sig_in, cin)?;
            let oout = OrbitSignature::of_tensor(&sig_out, cout)?;
            let map = if identity {
                if oin != oout {
                    return Err(Failure::Invalid(
                        "identity layers need equal signatures and channels".into(),
                    ));
                }
                EquivariantMap::identity(oin)
            } else if zero {
                EquivariantMap::zeros(oin, oout)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                EquivariantMap::random_integers(oin, oout, -range, range, &mut rng)
            };
            let j = layer_to_json(&map, Some(&sig_in), Some(&sig_out));
            Ok(serde_json::to_string_pretty(&j).expect("layer serializes") + "\n")
        }
        Generate::Tensor {
            signature: text,
            n,
            channels,
            seed,
            range,
        } => {
            let sig = signature(&text)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = IncidenceTensor::random_integers(n, sig, channels, -range, range, &mut rng);
            Ok(tensor_to_string(&t) + "\n")
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Count {
            input,
            output,
            symmetric,
            relaxed,
            cin,
            cout,
            format,
        } => count(
            &input,
            output.as_deref(),
            symmetric,
            relaxed,
            (cin, cout),
            format,
        ),
        Command::Orbits { signature, format } => orbits(&signature, format),
        Command::Apply {
            layer,
            input,
            mask,
            agg,
            output,
        } => apply(&layer, &input, &mask, &agg, output.as_deref()),
        Command::Verify {
            max_n,
            max_m,
            seed,
            format,
        } => verify(max_n, max_m, seed, format),
        Command::Sharing {
            m,
            m_prime,
            n,
            format,
        } => sharing(m, m_prime, n, format),
        Command::Complex {
            facets,
            incidence,
            shared,
            output,
            format,
        } => complex(
            &facets,
            incidence.as_deref(),
            shared,
            output.as_deref(),
            format,
        ),
        Command::Poset {
            poset: path,
            incidence,
            shared,
            output,
            format,
        } => poset(
            &path,
            incidence.as_deref(),
            shared,
            output.as_deref(),
            format,
        ),
        Command::Operator { from, to, rank, n } => operator(from, to, rank, n),
        Command::Generate(g) => generate(g),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
