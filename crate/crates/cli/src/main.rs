//! `charp`: dimension tables, Gram matrices, symbol and residue computations,
//! and the machine-verifiable suites, over exact arithmetic in
//! `F_q(t_1..t_d)`.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use charp_core::derham::{binomial, dims};
use charp_core::duality::{certify, gram, GramKind};
use charp_core::fields::PBasisField;
use charp_core::kmilnor::{
    graded_unit_map, symbol_dlog_class, tame_symbol, unit_filtration_level, MilnorSymbol,
    UnitLevel, ValuedField,
};
use charp_core::suites;

#[derive(Parser)]
#[command(
    name = "charp",
    about = "Exact characteristic-p differential calculus, Milnor symbols mod p, and finite duality pairings",
    after_help = "Cost guards on cohomology computations default to 10^7 table entries; \
set CHARP_BUDGET to override.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct OutputOpts {
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format; the table form is derived from the JSON
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Ranks of the de Rham complex: rows (r, dim Omega^r, z_r, b_r) with the
    /// recurrence columns marked pass/fail
    Dims {
        /// Characteristic (prime)
        #[arg(long)]
        p: u64,
        /// Number of p-basis variables (<= 4)
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Gram matrix of a wedge pairing over the deterministic grid bases
    Gram {
        /// Which pairing: phi1 | piphi1 | phi2 | phi3
        #[arg(long)]
        which: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: usize,
        /// Degree r
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// dlog class of a Milnor symbol over a described field
    Symbol {
        /// Field descriptor, e.g. GF(2)(u,t)
        #[arg(long)]
        field: String,
        /// Comma-separated nonzero entries, e.g. "t,u+1"
        #[arg(long)]
        entries: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Tame-symbol residue at the t-adic place (t = the last variable)
    Tame {
        #[arg(long)]
        field: String,
        #[arg(long)]
        entries: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Unit filtration level and graded value of an element of k(t)
    Filtration {
        #[arg(long)]
        field: String,
        /// The unit to analyze
        #[arg(long)]
        x: String,
        /// Level for the graded map (defaults to the filtration level)
        #[arg(long)]
        i: Option<i64>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Graded-piece pairing of the unit filtration: descriptor plus, where
    /// finite, the evaluated pairing data
    Graded {
        /// Case tag: a | b | c | d | e
        #[arg(long)]
        case: String,
        /// Residue-field characteristic (prime)
        #[arg(long)]
        p: u64,
        /// Residue-field p-basis size
        #[arg(long)]
        d: usize,
        /// Symbol-side index (r + q = dim + 1)
        #[arg(long)]
        r: usize,
        /// Cohomology-side index
        #[arg(long)]
        q: usize,
        /// The element `a` for the ramified case (element text over the field)
        #[arg(long)]
        a: Option<String>,
        /// Sample count for the ramified diagram identities
        #[arg(long, default_value = "25")]
        samples: usize,
        #[arg(long, default_value = "1")]
        seed: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the verification suites; exit 0 iff every check passes
    Verify {
        /// all | fields | derham | duality | kmilnor | finab | complexes | gcoh
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "1")]
        seed: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn emit(output: &OutputOpts, json: &serde_json::Value, table: String) -> Result<(), String> {
    let text = match output.format {
        Format::Json => serde_json::to_string_pretty(json).expect("serializable") + "\n",
        Format::Table => table,
    };
    match &output.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| e.to_string())?;
            f.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Dims { p, d, output } => {
            if !is_prime(p) {
                return Err(format!("--p {p} is not prime"));
            }
            if d > 4 {
                return Err("--d must be at most 4 (cost guard)".into());
            }
            let k = PBasisField::rational(p, d).map_err(|e| e.to_string())?;
            let table: Vec<_> = (0..=d + 1)
                .map(|r| dims(&k, r).expect("degree in range"))
                .collect();
            let mut rows = Vec::new();
            let mut all_ok = true;
            let mut lines = vec![format!(
                "{:>2} {:>8} {:>5} {:>5}  {:<9} {:<9} {:<9}",
                "r", "dimOmega", "z_r", "b_r", "z-b=C", "z+b'=pC", "z+brev=pC"
            )];
            for r in 0..=d {
                let dm = table[r];
                let rec1 = dm.z - dm.b == binomial(d, r);
                let rec2 = dm.z + table[r + 1].b == dm.dim_omega;
                let rec3 = dm.z + table[d - r].b == dm.dim_omega;
                all_ok &= rec1 && rec2 && rec3;
                rows.push(serde_json::json!({
                    "r": r,
                    "dim_omega": dm.dim_omega,
                    "z": dm.z,
                    "b": dm.b,
                    "rec_z_minus_b": rec1,
                    "rec_z_plus_next_b": rec2,
                    "rec_z_plus_reversed_b": rec3,
                }));
                lines.push(format!(
                    "{:>2} {:>8} {:>5} {:>5}  {:<9} {:<9} {:<9}",
                    r,
                    dm.dim_omega,
                    dm.z,
                    dm.b,
                    if rec1 { "pass" } else { "FAIL" },
                    if rec2 { "pass" } else { "FAIL" },
                    if rec3 { "pass" } else { "FAIL" },
                ));
            }
            let last = table[d + 1];
            rows.push(serde_json::json!({
                "r": d + 1,
                "dim_omega": last.dim_omega,
                "z": last.z,
                "b": last.b,
            }));
            lines.push(format!(
                "{:>2} {:>8} {:>5} {:>5}",
                d + 1,
                last.dim_omega,
                last.z,
                last.b
            ));
            let json = serde_json::json!({ "p": p, "d": d, "rows": rows });
            emit(&output, &json, lines.join("\n") + "\n")?;
            Ok(all_ok)
        }
        Command::Gram {
            which,
            p,
            d,
            r,
            output,
        } => {
            if !is_prime(p) {
                return Err(format!("--p {p} is not prime"));
            }
            let kind = GramKind::parse(&which)
                .ok_or_else(|| format!("unknown pairing `{which}` (phi1|piphi1|phi2|phi3)"))?;
            if d > 4 {
                return Err("--d must be at most 4 (cost guard)".into());
            }
            if r > d {
                return Err(format!("--r {r} out of range 0..={d}"));
            }
            let k = PBasisField::rational(p, d).map_err(|e| e.to_string())?;
            let g = gram(&k, kind, r).map_err(|e| e.to_string())?;
            let cert = certify(&k, &g);
            let mut json = g.to_json(&k);
            json["certificate"] = serde_json::to_value(cert).expect("serializable");
            let mut lines = vec![format!(
                "{} over GF({p}), d = {d}, r = {r}: {} x {}, rank {}, perfect: {}",
                which, cert.rows, cert.cols, cert.rank, cert.perfect
            )];
            for (i, row) in g.entries.iter().enumerate() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| {
                        let v = if matches!(kind, GramKind::Phi1) {
                            c.clone()
                        } else {
                            k.frobenius(c)
                        };
                        k.format(&v)
                    })
                    .collect();
                lines.push(format!("{:<24} | {}", g.row_labels[i], cells.join("  ")));
            }
            emit(&output, &json, lines.join("\n") + "\n")?;
            Ok(cert.perfect)
        }
        Command::Symbol {
            field,
            entries,
            output,
        } => {
            let k = PBasisField::parse_descriptor(&field).map_err(|e| e.to_string())?;
            let parsed: Result<Vec<_>, _> =
                entries.split(',').map(|t| k.parse(t.trim())).collect();
            let sym = MilnorSymbol::new(parsed.map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let form = symbol_dlog_class(&k, &sym).map_err(|e| e.to_string())?;
            let logarithmic = charp_core::derham::is_logarithmic(&k, &form);
            let json = serde_json::json!({
                "field": k.descriptor(),
                "entries": sym.entries.iter().map(|x| k.format(x)).collect::<Vec<_>>(),
                "dlog": form.to_json(&k),
                "is_zero": form.is_zero(),
                "is_logarithmic": logarithmic,
            });
            let table = format!(
                "dlog class over {}: {}\nzero: {}, logarithmic: {}\n",
                k.descriptor(),
                serde_json::to_string(&form.to_json(&k)).expect("serializable"),
                form.is_zero(),
                logarithmic
            );
            emit(&output, &json, table)?;
            Ok(true)
        }
        Command::Tame {
            field,
            entries,
            output,
        } => {
            let k = PBasisField::parse_descriptor(&field).map_err(|e| e.to_string())?;
            if k.d() == 0 {
                return Err("tame symbols need at least one variable (the uniformizer)".into());
            }
            let vf = ValuedField::new(k.clone());
            let parsed: Result<Vec<_>, _> =
                entries.split(',').map(|t| k.parse(t.trim())).collect();
            let sym = MilnorSymbol::new(parsed.map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let out = tame_symbol(&vf, &sym).map_err(|e| e.to_string())?;
            let kres = vf.residue_field();
            let dlog_class = out.dlog_class(&kres).map_err(|e| e.to_string())?;
            let terms: Vec<serde_json::Value> = out
                .terms
                .iter()
                .map(|(c, s)| {
                    serde_json::json!({
                        "coeff": c,
                        "entries": s.entries.iter().map(|x| kres.format(x)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let json = serde_json::json!({
                "field": k.descriptor(),
                "place": format!("{}-adic", k.var_names().last().expect("d >= 1")),
                "residue_field": kres.descriptor(),
                "tame_symbol": terms,
                "dlog_class": dlog_class.to_json(&kres),
            });
            let table = format!(
                "tame symbol over {} at the {}-adic place: {} terms, dlog {}\n",
                k.descriptor(),
                k.var_names().last().expect("d >= 1"),
                out.terms.len(),
                serde_json::to_string(&dlog_class.to_json(&kres)).expect("serializable"),
            );
            emit(&output, &json, table)?;
            Ok(true)
        }
        Command::Filtration {
            field,
            x,
            i,
            output,
        } => {
            let k = PBasisField::parse_descriptor(&field).map_err(|e| e.to_string())?;
            if k.d() == 0 {
                return Err("the unit filtration needs a uniformizer variable".into());
            }
            let vf = ValuedField::new(k.clone());
            let xe = k.parse(&x).map_err(|e| e.to_string())?;
            if xe.is_zero() {
                return Err("--x must be nonzero".into());
            }
            let level = unit_filtration_level(&vf, &xe);
            let level_json = match level {
                UnitLevel::Finite(n) => serde_json::json!(n),
                UnitLevel::Infinite => serde_json::json!("infinite"),
            };
            let graded = match (level, i) {
                (_, Some(iv)) if iv >= 1 => {
                    Some(graded_unit_map(&vf, &xe, iv).map_err(|e| e.to_string())?)
                }
                (UnitLevel::Finite(n), None) if n >= 1 => {
                    Some(graded_unit_map(&vf, &xe, n).map_err(|e| e.to_string())?)
                }
                _ => None,
            };
            let kres = vf.residue_field();
            let json = serde_json::json!({
                "field": k.descriptor(),
                "x": k.format(&xe),
                "level": level_json,
                "graded": graded.as_ref().map(|g| kres.format(g)),
            });
            let table = format!(
                "level({}) = {}{}\n",
                k.format(&xe),
                match level {
                    UnitLevel::Finite(n) => n.to_string(),
                    UnitLevel::Infinite => "infinite".into(),
                },
                graded
                    .as_ref()
                    .map(|g| format!(", graded value {}", kres.format(g)))
                    .unwrap_or_default()
            );
            emit(&output, &json, table)?;
            Ok(true)
        }
        Command::Graded {
            case,
            p,
            d,
            r,
            q,
            a,
            samples,
            seed,
            output,
        } => {
            if !is_prime(p) {
                return Err(format!("--p {p} is not prime"));
            }
            if d > 4 {
                return Err("--d must be at most 4 (cost guard)".into());
            }
            let kind = charp_core::duality::GradedCase::parse(&case)
                .ok_or_else(|| format!("unknown case `{case}` (a|b|c|d|e)"))?;
            let k = PBasisField::rational(p, d).map_err(|e| e.to_string())?;
            let a_elem = a
                .map(|text| k.parse(&text))
                .transpose()
                .map_err(|e| e.to_string())?;
            let gp = charp_core::duality::graded_piece(&k, kind, r, q, a_elem.clone())
                .map_err(|e| e.to_string())?;
            let mut json = serde_json::json!({
                "case": case,
                "residue_field": k.descriptor(),
                "r": r,
                "q": q,
                "left": gp.left_desc,
                "right": gp.right_desc,
            });
            let mut ok = true;
            let mut extra = String::new();
            if matches!(kind, charp_core::duality::GradedCase::A) && d == 0 {
                let bottom = gp.case_a_bottom().map_err(|e| e.to_string())?;
                let an = bottom.pairing.analysis();
                ok = an.perfect;
                json["bottom"] = serde_json::json!({
                    "pairing": bottom.pairing.to_json(),
                    "wp_image_size": bottom.wp_image_size,
                    "quotient_order": bottom.quotient_order,
                    "perfect": an.perfect,
                });
                extra = format!(", bottom pairing perfect: {}", an.perfect);
            }
            if matches!(kind, charp_core::duality::GradedCase::D) {
                let a_val = a_elem.expect("case d requires --a");
                let rep = charp_core::duality::ramified_case_diagram_check(
                    &k,
                    (r - 1).min(d),
                    &a_val,
                    samples,
                    seed,
                )
                .map_err(|e| e.to_string())?;
                ok = rep.all_pass();
                json["diagram"] = serde_json::to_value(&rep).expect("serializable");
                extra = format!(", diagram identities pass: {}", rep.all_pass());
            }
            let table = format!(
                "case {} over {}: {} x {}{}\n",
                case,
                k.descriptor(),
                gp.left_desc,
                gp.right_desc,
                extra
            );
            emit(&output, &json, table)?;
            Ok(ok)
        }
        Command::Verify {
            suite,
            seed,
            output,
        } => {
            let reports = if suite == "all" {
                suites::run_all(seed)
            } else {
                match suites::run_suite(&suite, seed) {
                    Some(r) => vec![r],
                    None => {
                        return Err(format!(
                            "unknown suite `{suite}` (all|{})",
                            suites::SUITES.join("|")
                        ))
                    }
                }
            };
            let ok = reports.iter().all(|r| r.all_pass());
            let json = serde_json::json!({
                "seed": seed,
                "suites": reports,
                "pass": ok,
            });
            let mut lines = Vec::new();
            for r in &reports {
                lines.push(format!(
                    "suite {}: {}",
                    r.suite,
                    if r.all_pass() { "pass" } else { "FAIL" }
                ));
                for c in &r.checks {
                    lines.push(format!(
                        "  [{}] {} - {}",
                        if c.pass { "pass" } else { "FAIL" },
                        c.name,
                        c.details
                    ));
                }
            }
            emit(&output, &json, lines.join("\n") + "\n")?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
