//! `mubext`: Haagerup spectra, extremality certificates and region data for
//! noisy pairs of mutually unbiased bases.
//!
//! Exit codes: 0 success (or an extremal verdict), 1 negative verdict or
//! reference mismatch, 2 invalid input, 3 numerical failure.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mub_extremal::error::{Error, Result};
use mub_extremal::extremality::{
    certify_fourier, certify_gamma_point, certify_vertex, gamma_parametrize, gamma_polyline,
    region_contains, Certificate, Classification, Verdict,
};
use mub_extremal::finite_group::AbelianGroup;
use mub_extremal::haagerup::{
    compare_clusters, compare_reference, fourier_spectrum_closed_form, has_minus_one, spectrum,
    HaagerupSpectrum, ReferenceComparison,
};
use mub_extremal::mub_catalog::{
    fourier_mub, hadamard_to_mub, load_hadamard, save_hadamard, table1_entry, MubPair, Sign,
    Table1Entry, Table1Id,
};
use mub_extremal::numerics::Tolerances;
use mub_extremal::povm::{noise_lower_bound, Branch};

#[derive(Parser)]
#[command(name = "mubext", version, about = "Extremality of noisy mutually unbiased bases")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Eigenvalue clustering width, also used for the -1 membership test.
    #[arg(long, global = true, env = "MUBEXT_TOL_CLUSTER", default_value_t = 1e-7)]
    tol_cluster: f64,
    /// Relative eigenpair residual bound.
    #[arg(long, global = true, env = "MUBEXT_TOL_EIG_RESIDUAL", default_value_t = 1e-11)]
    tol_eig_residual: f64,
    /// Relative threshold for numerical rank.
    #[arg(long, global = true, env = "MUBEXT_TOL_RANK", default_value_t = 1e-9)]
    tol_rank: f64,
    /// Allowed negative eigenvalue slack for positivity.
    #[arg(long, global = true, env = "MUBEXT_TOL_PSD", default_value_t = 1e-10)]
    tol_psd: f64,
    /// Entrywise matrix comparison tolerance.
    #[arg(long, global = true, env = "MUBEXT_TOL_MATCH", default_value_t = 1e-10)]
    tol_match: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Result<Tolerances> {
        Tolerances::new(
            self.tol_eig_residual,
            self.tol_cluster,
            self.tol_rank,
            self.tol_psd,
            self.tol_match,
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct SourceArgs {
    /// Catalog matrix: d4-f4, d6-m1, d6-m2, d6-m3, d7-m1, d7-m2.
    #[arg(long)]
    catalog: Option<String>,
    /// Fourier pair of the group Z_n1 x Z_n2 x ..., given as "n1,n2,...".
    #[arg(long)]
    group: Option<String>,
    /// Hadamard matrix JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogParams {
    /// Phase parameter a for d4-f4 and d6-m1.
    #[arg(long, allow_hyphen_values = true)]
    param: Option<f64>,
    /// Branch of ± for d6-m2 and d7-m2.
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
}

enum Source {
    Catalog(Table1Entry),
    Group(AbelianGroup),
    File(PathBuf),
}

impl Source {
    fn from_args(src: &SourceArgs, params: &CatalogParams) -> Result<Self> {
        if src.catalog.is_none() && (params.param.is_some() || params.sign.is_some()) {
            return Err(Error::InvalidArgument(
                "--param and --sign only apply to --catalog".into(),
            ));
        }
        if let Some(id) = &src.catalog {
            let id: Table1Id = id.parse()?;
            let sign = match &params.sign {
                Some(s) if id.has_sign_branch() => s.parse::<Sign>()?,
                Some(_) => return Err(Error::InvalidArgument(format!("{id} has no sign branch"))),
                None => Sign::Plus,
            };
            let list: Vec<f64> = match (id.is_parametric(), id.has_sign_branch()) {
                (true, _) => params.param.into_iter().collect(),
                (false, true) => {
                    if params.param.is_some() {
                        return Err(Error::InvalidArgument(format!(
                            "{id} takes no --param; use --sign"
                        )));
                    }
                    vec![sign.factor()]
                }
                (false, false) => params.param.into_iter().collect(),
            };
            return Ok(Source::Catalog(table1_entry(id.as_str(), &list)?));
        }
        if let Some(g) = &src.group {
            return Ok(Source::Group(g.parse()?));
        }
        Ok(Source::File(src.file.clone().expect("clap enforces one source")))
    }

    fn pair(&self, tol: &Tolerances) -> Result<MubPair> {
        match self {
            Source::Catalog(e) => hadamard_to_mub(e.matrix(), e.label(), tol),
            Source::Group(g) => Ok(fourier_mub(g)),
            Source::File(path) => {
                let f = load_hadamard(path)?;
                let label = if f.label.is_empty() {
                    path.display().to_string()
                } else {
                    f.label
                };
                hadamard_to_mub(f.matrix, label, tol)
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of the Haagerup matrix of a pair.
    Spectrum {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: CatalogParams,
        #[command(flatten)]
        output: Output,
    },
    /// Extremality certificate for a point of the arc or the vertex.
    Certify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: CatalogParams,
        #[arg(long, allow_hyphen_values = true, requires = "mu", conflicts_with_all = ["arc_param", "vertex"])]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "lambda")]
        mu: Option<f64>,
        /// Arc parameter ν; the point is (ν, γ_ν) on branch A, (γ_ν, ν) on B.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "vertex")]
        arc_param: Option<f64>,
        #[arg(long, default_value = "A", requires = "arc_param")]
        branch: String,
        /// Certify the vertex (1/(1-d), 1/(1-d)).
        #[arg(long)]
        vertex: bool,
        /// Cross-check with the rank of the Lüders joint observable.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Classified sample grid of the compatibility region and the arc polyline.
    Region {
        #[arg(long)]
        d: usize,
        /// Grid points per axis.
        #[arg(long, default_value_t = 41)]
        n: usize,
        /// Polyline points per arc branch.
        #[arg(long, default_value_t = 21)]
        arc_points: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Compares catalog spectra with their reference values.
    Table1 {
        /// Allowed deviation of an explicit eigenvalue.
        #[arg(long, default_value_t = 1e-8)]
        value_tol: f64,
        /// Allowed polynomial residual for implicitly given eigenvalues.
        #[arg(long, default_value_t = 1e-6)]
        poly_tol: f64,
        /// Parameter values a for the parametric families (default grid if absent).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Parity versus numeric −1 test for Fourier pairs.
    FourierSweep {
        /// Every abelian group of order 2..=max-order, in invariant-factor form.
        #[arg(long, default_value_t = 10)]
        max_order: usize,
        /// Explicit groups instead, e.g. "2,2;3,3;7".
        #[arg(long)]
        groups: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Writes the Hadamard matrix of a pair as JSON.
    Export {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: CatalogParams,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Reals in CSV output: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(output: &Output, default: Format, json: impl FnOnce() -> serde_json::Value, csv: impl FnOnce() -> String) -> Result<()> {
    let text = match output.format.unwrap_or(default) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json()).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => csv(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn spectrum_csv(spec: &HaagerupSpectrum) -> String {
    let mut s = String::from("value,multiplicity\n");
    for c in &spec.clusters {
        writeln!(s, "{},{}", num(c.value), c.multiplicity).unwrap();
    }
    s
}

fn cmd_spectrum(source: &SourceArgs, params: &CatalogParams, output: &Output, tol: &Tolerances) -> Result<u8> {
    let pair = Source::from_args(source, params)?.pair(tol)?;
    let spec = spectrum(&pair, tol)?;
    emit(output, Format::Json, || spec.to_json(tol), || spectrum_csv(&spec))?;
    Ok(0)
}

fn certificate_csv(c: &Certificate) -> String {
    let opt = |x: Option<String>| x.unwrap_or_default();
    format!(
        "pair_label,d,lambda,mu,verdict,minus_one_distance,gram_rank,oracle_agreement\n{},{},{},{},{},{},{},{}\n",
        c.pair_label,
        c.d,
        num(c.lambda),
        num(c.mu),
        c.verdict.as_str(),
        opt(c.minus_one_distance.map(num)),
        opt(c.gram_rank.map(|r| r.to_string())),
        opt(c.oracle_agreement.map(|a| a.to_string())),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    source: &SourceArgs,
    params: &CatalogParams,
    lambda: Option<f64>,
    mu: Option<f64>,
    arc_param: Option<f64>,
    branch: &str,
    vertex: bool,
    oracle: bool,
    output: &Output,
    tol: &Tolerances,
) -> Result<u8> {
    let src = Source::from_args(source, params)?;
    let pair = src.pair(tol)?;
    let d = pair.d();
    let cert = if vertex {
        certify_vertex(&pair, tol)?
    } else {
        let (l, m) = match (lambda, mu, arc_param) {
            (Some(l), Some(m), None) => (l, m),
            (None, None, Some(nu)) => {
                let branch: Branch = branch.parse()?;
                if d == 2 {
                    if !(-1.0..=1.0).contains(&nu) {
                        return Err(Error::OutOfRange { name: "arc-param", value: nu, lo: -1.0, hi: 1.0 });
                    }
                    let other = (1.0 - nu * nu).sqrt();
                    match branch {
                        Branch::A => (nu, other),
                        Branch::B => (other, nu),
                    }
                } else {
                    gamma_parametrize(d, nu, branch)?
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "give --lambda and --mu, --arc-param, or --vertex".into(),
                ))
            }
        };
        let point = region_contains(d, l, m)?;
        if point.classification != Classification::OnGammaArc {
            mub_extremal::extremality::require_on_gamma(d, l, m)?;
        }
        match &src {
            Source::Group(g) => certify_fourier(g, l, m, oracle, tol)?,
            _ => certify_gamma_point(&pair, l, m, oracle, tol)?,
        }
    };
    emit(output, Format::Json, || cert.to_json(), || certificate_csv(&cert))?;
    Ok(if cert.verdict == Verdict::Extremal { 0 } else { 1 })
}

fn cmd_region(d: usize, n: usize, arc_points: usize, output: &Output) -> Result<u8> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d} < 2")));
    }
    if n < 2 || arc_points < 2 {
        return Err(Error::InvalidArgument("grid sizes must be at least 2".into()));
    }
    let lo = if d == 2 { -1.0 } else { noise_lower_bound(d) };
    let mut grid = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let l = lo + (1.0 - lo) * i as f64 / (n - 1) as f64;
            let m = lo + (1.0 - lo) * j as f64 / (n - 1) as f64;
            grid.push(region_contains(d, l, m)?);
        }
    }
    let arc = gamma_polyline(d, arc_points)?;
    let vertex = (d >= 3).then(|| region_contains(d, lo, lo)).transpose()?;
    let json = || {
        serde_json::json!({
            "d": d,
            "grid": grid.iter().map(|p| serde_json::json!([p.lambda, p.mu, p.classification.as_str()])).collect::<Vec<_>>(),
            "arc": arc,
            "vertex": vertex.map(|v| [v.lambda, v.mu]),
        })
    };
    let csv = || {
        let mut s = String::from("kind,lambda,mu,classification\n");
        for p in &grid {
            writeln!(s, "grid,{},{},{}", num(p.lambda), num(p.mu), p.classification.as_str()).unwrap();
        }
        for (l, m) in &arc {
            writeln!(s, "arc,{},{},{}", num(*l), num(*m), Classification::OnGammaArc.as_str()).unwrap();
        }
        if let Some(v) = &vertex {
            writeln!(s, "vertex,{},{},{}", num(v.lambda), num(v.mu), v.classification.as_str()).unwrap();
        }
        s
    };
    emit(output, Format::Csv, json, csv)?;
    Ok(0)
}

/// Default parameter grids: 8 points that avoid the cluster collisions at
/// `a = 0` and `a = π/2`.
fn default_grid(id: Table1Id) -> Vec<f64> {
    let period = if id == Table1Id::D4F4 { PI } else { 2.0 * PI };
    (0..8).map(|k| period * (k as f64 + 0.5) / 8.0).collect()
}

fn cmd_table1(value_tol: f64, poly_tol: f64, grid: Option<&[f64]>, output: &Output, tol: &Tolerances) -> Result<u8> {
    let mut results: Vec<(ReferenceComparison, Option<String>)> = Vec::new();
    let mut run = |entry: Table1Entry, note: Option<String>| -> Result<()> {
        let pair = hadamard_to_mub(entry.matrix(), entry.label(), tol)?;
        let spec = spectrum(&pair, tol)?;
        results.push((compare_reference(&spec, &entry, value_tol, poly_tol, tol), note));
        Ok(())
    };
    for id in Table1Id::ALL {
        if id.is_parametric() {
            let points = grid.map(<[f64]>::to_vec).unwrap_or_else(|| default_grid(id));
            for a in points {
                run(table1_entry(id.as_str(), &[a])?, None)?;
            }
        } else if id.has_sign_branch() {
            for s in [1.0, -1.0] {
                run(table1_entry(id.as_str(), &[s])?, None)?;
            }
        } else {
            run(table1_entry(id.as_str(), &[])?, None)?;
        }
    }
    // Collision point: the ±|sin a| clusters merge at 0, which must also be
    // the spectrum of the Fourier pair of Z_4.
    let z4 = fourier_spectrum_closed_form(&"4".parse()?, tol);
    let entry = table1_entry("d4-f4", &[0.0])?;
    let spec = spectrum(&hadamard_to_mub(entry.matrix(), entry.label(), tol)?, tol)?;
    let cross = compare_clusters(&spec.clusters, &z4.clusters);
    let mut cmp = compare_reference(&spec, &entry, value_tol, poly_tol, tol);
    cmp.passed &= cross.is_some_and(|dev| dev <= value_tol);
    results.push((
        cmp,
        Some(format!(
            "merged clusters; Z4 closed form deviation {}",
            cross.map_or("pattern differs".to_string(), |d| format!("{d:.3e}"))
        )),
    ));

    let all = results.iter().all(|(c, _)| c.passed);
    let json = || {
        serde_json::json!({
            "passed": all,
            "entries": results.iter().map(|(c, note)| {
                let mut v = serde_json::to_value(c).expect("serializable");
                v["note"] = serde_json::json!(note);
                v
            }).collect::<Vec<_>>(),
        })
    };
    let csv = || {
        let mut s = String::from("entry,passed,max_deviation,max_poly_residual,detail\n");
        for (c, note) in &results {
            let poly = c
                .rows
                .iter()
                .filter(|r| r.expected_value.is_none())
                .map(|r| r.deviation)
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
            let failing: Vec<&str> = c.rows.iter().filter(|r| !r.passed).map(|r| r.expr.as_str()).collect();
            let detail = if !failing.is_empty() {
                format!("mismatch: {}", failing.join(" | "))
            } else if !c.unmatched.is_empty() {
                format!("{} unexpected clusters", c.unmatched.len())
            } else {
                note.clone().unwrap_or_default()
            };
            writeln!(
                s,
                "{},{},{},{},\"{}\"",
                c.label,
                c.passed,
                num(c.max_deviation),
                poly.map(num).unwrap_or_default(),
                detail
            )
            .unwrap();
        }
        s
    };
    emit(output, Format::Csv, json, csv)?;
    for (c, _) in results.iter().filter(|(c, _)| !c.passed) {
        eprintln!("mismatch: {}", c.label);
    }
    Ok(if all { 0 } else { 1 })
}

/// Invariant-factor lists `n1 | n2 | …` with product in `2..=max`.
fn groups_up_to(max: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, product: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        let start = prefix.last().copied().unwrap_or(2);
        let mut n = start;
        while product * n <= max {
            if prefix.last().is_none_or(|&p| n % p == 0) {
                prefix.push(n);
                out.push(prefix.clone());
                extend(prefix, product * n, max, out);
                prefix.pop();
            }
            n += 1;
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max, &mut out);
    out.sort_by_key(|f| (f.iter().product::<usize>(), f.len(), f.clone()));
    out
}

fn cmd_fourier_sweep(max_order: usize, groups: Option<&str>, output: &Output, tol: &Tolerances) -> Result<u8> {
    let list: Vec<AbelianGroup> = match groups {
        Some(spec) => spec
            .split(';')
            .map(|g| g.trim().parse())
            .collect::<Result<_>>()?,
        None => {
            if max_order < 2 {
                return Err(Error::InvalidArgument(format!("max order must be at least 2, got {max_order}")));
            }
            groups_up_to(max_order)
                .into_iter()
                .map(|f| {
                    let f: Vec<i64> = f.into_iter().map(|n| n as i64).collect();
                    mub_extremal::finite_group::make_group(&f)
                })
                .collect::<Result<_>>()?
        }
    };
    let mut rows = Vec::new();
    for g in &list {
        let numeric = spectrum(&fourier_mub(g), tol)?;
        let closed = fourier_spectrum_closed_form(g, tol);
        let (present, distance) = has_minus_one(&numeric, tol);
        let closed_ok = compare_clusters(&numeric.clusters, &closed.clusters).is_some_and(|d| d <= tol.cluster);
        let even = g.order() % 2 == 0;
        rows.push((g.to_string(), g.order(), even, present, distance, present == even && closed_ok));
    }
    let all = rows.iter().all(|r| r.5);
    let json = || {
        serde_json::json!({
            "all_agree": all,
            "rows": rows.iter().map(|(g, order, even, present, dist, agree)| serde_json::json!({
                "group": g, "order": order, "parity": if *even { "even" } else { "odd" },
                "has_minus_one": present, "distance_to_minus_one": dist, "agree": agree,
            })).collect::<Vec<_>>(),
        })
    };
    let csv = || {
        let mut s = String::from("group,order,parity,has_minus_one,distance_to_minus_one,agree\n");
        for (g, order, even, present, dist, agree) in &rows {
            let parity = if *even { "even" } else { "odd" };
            writeln!(s, "{g},{order},{parity},{present},{},{agree}", num(*dist)).unwrap();
        }
        s
    };
    emit(output, Format::Csv, json, csv)?;
    Ok(if all { 0 } else { 1 })
}

fn cmd_export(source: &SourceArgs, params: &CatalogParams, out: &PathBuf, tol: &Tolerances) -> Result<u8> {
    let pair = Source::from_args(source, params)?.pair(tol)?;
    save_hadamard(pair.hadamard(), pair.label(), out)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let tol = cli.tol.tolerances()?;
    match &cli.command {
        Command::Spectrum { source, params, output } => cmd_spectrum(source, params, output, &tol),
        Command::Certify {
            source,
            params,
            lambda,
            mu,
            arc_param,
            branch,
            vertex,
            oracle,
            output,
        } => cmd_certify(source, params, *lambda, *mu, *arc_param, branch, *vertex, *oracle, output, &tol),
        Command::Region { d, n, arc_points, output } => cmd_region(*d, *n, *arc_points, output),
        Command::Table1 {
            value_tol,
            poly_tol,
            grid,
            output,
        } => cmd_table1(*value_tol, *poly_tol, grid.as_deref(), output, &tol),
        Command::FourierSweep {
            max_order,
            groups,
            output,
        } => cmd_fourier_sweep(*max_order, groups.as_deref(), output, &tol),
        Command::Export { source, params, out } => cmd_export(source, params, out, &tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InvalidMatrix { report, .. } = &e {
                eprintln!("{report}");
            }
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
