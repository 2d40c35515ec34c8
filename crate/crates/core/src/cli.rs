//! Command-line front end. Every command prints one JSON document (or writes it to
//! `--out`); failures print `{"code","module","message"}` to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::diagnostics::{coefficient_growth, diagnose};
use crate::dynamics::contraction::log_space;
use crate::dynamics::rotation::linspace;
use crate::dynamics::{
    arnold_tongues, contraction_bounds, default_ladder, deviate_torsion, neumann_run, radius_tongues, CertGrid,
    ContractionChoice, NeumannOptions, RotationMap, ScanOptions, Sternberg,
};
use crate::error::{Error, Result};
use crate::maps::{FoliationMap, MapDescription, Number, OmegaInput};
use crate::normalizer::{solve_homological, Gauge, Normalization};
use crate::precision::{format_real, Precision};
use crate::series::{RadialSeries, SeriesJson};
use crate::transforms::{
    apply_gauge, first_nonvanishing_invariant, monomialize_conservative, polynomial_normal_form, GaugeMap,
    NormalFormPair, PolyTarget,
};

#[derive(Parser, Debug)]
#[command(name = "elliptic-nf", version, about = "Normal forms of foliation-preserving planar maps")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "ELLIPTIC_NF_BITS", default_value_t = 256)]
    pub bits: u32,

    /// Output file (directory for `tongues`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    /// A, B, C or custom (custom needs --map).
    #[arg(long, default_value = "A")]
    pub family: String,
    /// literal | golden | quad:p,q,D,r | cf:a0,a1,...
    #[arg(long, default_value = "golden")]
    pub omega: String,
    #[arg(long, default_value = "1")]
    pub modulus: String,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 16)]
    pub order: usize,
    /// JSON map description; overrides the family flags.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the homological equation and certify the conjugacy.
    Normalize {
        #[command(flatten)]
        map: MapArgs,
        /// basic | kill_torsion_above_d | strong_contraction | custom:v1,v2,... | prescribed:v1,...
        #[arg(long)]
        gauge: Option<String>,
    },
    /// Gauge maps, monomialization, invariants and polynomial normal forms.
    Transform {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_enum, default_value = "polynomial")]
        kind: TransformKind,
        /// Coefficients `a_1, a_2, ...` of the gauge radial part.
        #[arg(long, allow_hyphen_values = true)]
        gauge_a: Option<String>,
        /// Coefficients `b_1, b_2, ...` of the gauge angular part.
        #[arg(long, allow_hyphen_values = true)]
        gauge_b: Option<String>,
        #[arg(long, value_enum, default_value = "polynomial")]
        target: TargetArg,
    },
    /// Neumann ladder for the torsion of a normalization, optionally deviated.
    Neumann {
        #[command(flatten)]
        map: MapArgs,
        /// `k=K[,delta=X]`: add `X u^K` to the torsion.
        #[arg(long)]
        n_deviation: Option<String>,
        /// Start point `re[,im]`.
        #[arg(long, default_value = "0.1", allow_hyphen_values = true)]
        z: String,
        /// Largest M of the ladder `25 * 2^j`, or an explicit list `M1,M2,...`.
        #[arg(long, default_value = "100000")]
        ladder: String,
        #[arg(long, default_value_t = 12)]
        jet_order: usize,
    },
    /// Rotation-number scans with plateau boundaries; writes CSV and SVG under --out.
    Tongues {
        #[command(flatten)]
        map: MapArgs,
        /// Fixed `t` values of the Arnold family (`--family arnold`).
        #[arg(long, default_value = "0.05", allow_hyphen_values = true)]
        t: String,
        /// Scanned range `lo,hi` of `s` (Arnold) or of the radius.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        /// Number of scan points.
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        q_max: u64,
        #[arg(long, default_value_t = 8192)]
        iterations: usize,
    },
    /// Continued fraction, Brjuno sums, coefficient growth and slope reduction.
    Diagnose {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Also write the growth profile as CSV.
        #[arg(long)]
        growth_csv: Option<PathBuf>,
    },
    /// Table of the special conjugacy built from a fundamental annulus.
    Sternberg {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0.1)]
        r0: f64,
        /// `radii,angles` of the sample table.
        #[arg(long, default_value = "5,8")]
        grid: String,
    },
    /// Sandwich bounds for the radial contraction and their certification.
    Contraction {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        a_minus: Option<f64>,
        #[arg(long)]
        a_plus: Option<f64>,
        /// `r_points,m_points`.
        #[arg(long, default_value = "24,26")]
        grid: String,
        #[arg(long, default_value_t = 100_000)]
        m_max: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Gauge,
    Monomialize,
    Invariant,
    Polynomial,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetArg {
    Polynomial,
    SplitModulus,
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("{what}: '{x}' is not a number"))))
        .collect()
}

fn pair(s: &str, what: &str) -> Result<(f64, f64)> {
    match floats(s, what)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Config(format!("{what}: expected two comma-separated values"))),
    }
}

fn build_map(args: &MapArgs, bits: u32) -> Result<FoliationMap> {
    let desc = match &args.map {
        Some(path) => serde_json::from_str::<MapDescription>(&fs::read_to_string(path)?)?,
        None => MapDescription {
            family: args.family.parse()?,
            omega: OmegaInput::Text(args.omega.clone()),
            modulus: Number::Text(args.modulus.clone()),
            a: Some(Number::Text(args.a.clone())),
            d: Some(args.d),
            order: Some(args.order),
            f: None,
            g: None,
            validity_radius: None,
        },
    };
    desc.build(Some(args.order), bits)
}

/// Parses `basic`, `kill_torsion_above_d`, `strong_contraction`, `custom:...`, `prescribed:...`.
pub fn parse_gauge(s: &str) -> Result<Gauge> {
    let (head, body) = s.split_once(':').unwrap_or((s, ""));
    match head.trim() {
        "basic" => Ok(Gauge::Basic),
        "kill_torsion_above_d" | "kill" => Ok(Gauge::KillTorsionAboveD),
        "strong_contraction" | "strong" => Ok(Gauge::StrongContraction),
        "custom" | "custom_diagonal" => Ok(Gauge::CustomDiagonal(floats(body, "gauge")?)),
        "prescribed" | "prescribed_torsion" => Ok(Gauge::PrescribedTorsion(floats(body, "gauge")?)),
        other => Err(Error::Config(format!("unknown gauge '{other}'"))),
    }
}

fn default_gauge(map: &FoliationMap) -> Gauge {
    if map.multiplier.is_unimodular() {
        Gauge::Basic
    } else {
        Gauge::StrongContraction
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn radial_from(values: &[f64], order: usize, bits: u32) -> RadialSeries {
    let mut v = vec![0.0];
    v.extend(values.iter().take(order));
    RadialSeries::from_f64(&v, order, bits)
}

fn header(map: &FoliationMap, command: &str) -> Value {
    let lambda = map.lambda();
    json!({
        "command": command,
        "bits": map.prec(),
        "map": serde_json::to_value(map.to_description()).expect("map json"),
        "lambda": [format_real(&lambda.re), format_real(&lambda.im)],
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn normalization(map: &FoliationMap, order: usize) -> Result<Normalization> {
    solve_homological(map, order, default_gauge(map))
}

fn cmd_normalize(map: &FoliationMap, order: usize, gauge: Option<&str>) -> Result<Value> {
    let gauge = match gauge {
        Some(g) => parse_gauge(g)?,
        None => default_gauge(map),
    };
    let norm = solve_homological(map, order, gauge)?;
    Ok(merge(header(map, "normalize"), norm.to_json()))
}

fn cmd_transform(
    map: &FoliationMap,
    order: usize,
    kind: TransformKind,
    gauge_a: Option<&str>,
    gauge_b: Option<&str>,
    target: TargetArg,
) -> Result<Value> {
    let bits = map.prec();
    let norm = normalization(map, order)?;
    let half = order / 2;
    let nstar = norm.n.with_order(half);
    let f = map.f.with_order(half);
    let lambda = map.lambda();
    let body = match kind {
        TransformKind::Gauge | TransformKind::Invariant => {
            let a = radial_from(&floats(gauge_a.unwrap_or(""), "gauge-a")?, half, bits);
            let b = radial_from(&floats(gauge_b.unwrap_or(""), "gauge-b")?, half, bits);
            let h = GaugeMap::new(a, b)?;
            let pair = apply_gauge(&nstar, &f, &h, &lambda, half)?;
            if kind == TransformKind::Gauge {
                json!({
                    "alpha": SeriesJson::from_radial(&pair.alpha),
                    "beta": SeriesJson::from_radial(&pair.beta),
                })
            } else {
                let base = NormalFormPair { alpha: f.clone(), beta: nstar.clone(), lambda: lambda.clone() };
                let tol = Precision::new(bits)?.tolerance();
                json!({ "invariant": first_nonvanishing_invariant(&base, &pair, tol)? })
            }
        }
        TransformKind::Monomialize => {
            if !map.is_conservative() {
                return Err(Error::Transform("monomialization needs a conservative map (f = 0)".into()));
            }
            let m = monomialize_conservative(&nstar, &lambda)?;
            json!({
                "p": m.p,
                "n_p": format_real(&m.n_p),
                "astar": SeriesJson::from_radial(&m.astar),
                "beta": SeriesJson::from_radial(&m.beta),
                "residual": m.residual,
            })
        }
        TransformKind::Polynomial => {
            let target = match target {
                TargetArg::Polynomial => PolyTarget::Polynomial,
                TargetArg::SplitModulus => PolyTarget::SplitModulus,
            };
            let pair = NormalFormPair { alpha: f, beta: nstar, lambda };
            let p = polynomial_normal_form(&pair, target)?;
            json!({
                "target": p.target,
                "r": p.r,
                "b": format_real(&p.b),
                "c": format_real(&p.c),
                "g": SeriesJson::from_radial(&p.g),
                "factor": SeriesJson::from_uni(&p.factor),
                "f1": SeriesJson::from_radial(&p.f1),
                "phi": SeriesJson::from_radial(&p.phi),
                "gamma": SeriesJson::from_radial(&p.gamma),
                "certified_order": p.certified_order,
                "residual": p.residual,
            })
        }
    };
    let kind_name = format!("{kind:?}").to_lowercase();
    Ok(merge(header(map, "transform"), json!({ "kind": kind_name, "result": body })))
}

fn parse_deviation(s: &str) -> Result<(usize, f64)> {
    let mut k = None;
    let mut delta = 1e-2;
    for part in s.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("n-deviation: '{part}' is not key=value")))?;
        match key.trim() {
            "k" => k = Some(val.trim().parse::<usize>().map_err(|_| Error::Config(format!("n-deviation: bad k '{val}'")))?),
            "delta" => delta = val.trim().parse().map_err(|_| Error::Config(format!("n-deviation: bad delta '{val}'")))?,
            other => return Err(Error::Config(format!("n-deviation: unknown key '{other}'"))),
        }
    }
    let k = k.ok_or_else(|| Error::Config("n-deviation: missing k".into()))?;
    if k == 0 {
        return Err(Error::Config("n-deviation: k must be at least 1".into()));
    }
    Ok((k, delta))
}

fn parse_ladder(s: &str) -> Result<Vec<u64>> {
    let v: Vec<u64> = s
        .split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Config(format!("ladder: '{x}' is not a count"))))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [] => Err(Error::Config("ladder: empty".into())),
        [max] => Ok(default_ladder(*max)),
        _ => Ok(v),
    }
}

fn cmd_neumann(map: &FoliationMap, order: usize, deviation: Option<&str>, z: &str, ladder: &str, jet_order: usize) -> Result<Value> {
    let zv = floats(z, "z")?;
    let z = match zv.as_slice() {
        [re] => Complex64::new(*re, 0.0),
        [re, im] => Complex64::new(*re, *im),
        _ => return Err(Error::Config("z: expected re or re,im".into())),
    };
    let norm = normalization(map, order)?;
    let (n, dev) = match deviation {
        Some(s) => {
            let (k, delta) = parse_deviation(s)?;
            (deviate_torsion(&norm.n, k, delta), Some(json!({ "k": k, "delta": delta })))
        }
        None => (norm.n.clone(), None),
    };
    let opts = NeumannOptions { ladder: parse_ladder(ladder)?, jet_order };
    let run = neumann_run(map, &n, z, &opts)?;
    Ok(merge(
        header(map, "neumann"),
        json!({
            "deviation": dev,
            "torsion": SeriesJson::from_radial(&n),
            "run": run,
        }),
    ))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_tongues(
    args: &MapArgs,
    bits: u32,
    t: &str,
    range: Option<&str>,
    grid: usize,
    q_max: u64,
    iterations: usize,
    out: Option<&Path>,
) -> Result<Value> {
    let opts = ScanOptions { q_max, iterations, ..ScanOptions::default() };
    if grid < 2 {
        return Err(Error::Config("grid: need at least 2 points".into()));
    }
    let (scan, head) = if args.family.eq_ignore_ascii_case("arnold") {
        let (lo, hi) = pair(range.unwrap_or("-0.5,0.5"), "range")?;
        let ts = floats(t, "t")?;
        if ts.is_empty() {
            return Err(Error::Config("t: no values".into()));
        }
        (arnold_tongues(&linspace(lo, hi, grid), &ts, &opts)?, json!({ "command": "tongues", "family": "arnold" }))
    } else {
        let map = build_map(args, bits)?;
        let (lo, hi) = pair(range.unwrap_or("0.01,0.3"), "range")?;
        (radius_tongues(&map, &linspace(lo, hi, grid), &opts)?, header(&map, "tongues"))
    };
    let mut files = Vec::new();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for (name, content) in
            [("tongues.csv", scan.to_csv()), ("plateaus.csv", scan.plateaus_csv()), ("tongues.svg", scan.to_svg())]
        {
            let path = dir.join(name);
            write_file(&path, &content)?;
            files.push(path.display().to_string());
        }
    }
    let plateaus: Vec<_> = scan.plateaus().cloned().collect();
    let max_width = plateaus.iter().map(|p| p.width).fold(0.0, f64::max);
    Ok(merge(
        head,
        json!({
            "kind": scan.kind,
            "lines": scan.lines.len(),
            "plateaus": plateaus,
            "max_width": max_width,
            "files": files,
        }),
    ))
}

fn cmd_diagnose(map: &FoliationMap, order: usize, depth: usize, growth_csv: Option<&Path>) -> Result<Value> {
    let report = diagnose(map, order, depth)?;
    if let Some(path) = growth_csv {
        let norm = normalization(map, order)?;
        write_file(path, &coefficient_growth(&norm).to_csv())?;
    }
    Ok(merge(header(map, "diagnose"), json!({ "report": report })))
}

fn cmd_sternberg(map: &FoliationMap, order: usize, r0: f64, grid: &str) -> Result<Value> {
    let (nr, nt) = pair(grid, "grid")?;
    let (nr, nt) = (nr as usize, nt as usize);
    if nr == 0 || nt == 0 {
        return Err(Error::Config("grid: need positive counts".into()));
    }
    let norm = normalization(map, order)?;
    let normal = RotationMap::from_normalization(map, &norm);
    let st = Sternberg::new(map, normal.clone(), r0)?;
    let (_, r1) = st.radii();
    let mut rows = Vec::with_capacity(nr * nt);
    for r in log_space(r1 * 0.05, r0, nr) {
        for j in 0..nt {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / nt as f64);
            let phi = st.eval(z)?;
            let lhs = st.eval(map.apply(z))?;
            rows.push(json!({
                "z": complex_json(z),
                "phi": complex_json(phi),
                "radius_defect": phi.norm() - z.norm(),
                "conjugacy_defect": (lhs - normal.apply(phi)).norm(),
            }));
        }
    }
    Ok(merge(
        header(map, "sternberg"),
        json!({ "r0": r0, "r1": r1, "normal_form": normal, "table": rows }),
    ))
}

fn cmd_contraction(map: &FoliationMap, a_minus: Option<f64>, a_plus: Option<f64>, grid: &str, m_max: u64) -> Result<Value> {
    let (rp, mp) = pair(grid, "grid")?;
    let choice = ContractionChoice { a_minus, a_plus, r_max: None };
    let grid = CertGrid { r_points: rp as usize, m_points: mp as usize, m_max, ..CertGrid::default() };
    let bounds = contraction_bounds(map, &choice, &grid)?;
    Ok(merge(header(map, "contraction"), json!({ "bounds": bounds })))
}

/// Runs a parsed command and returns the JSON document it produced.
pub fn execute(cli: &Cli) -> Result<Value> {
    let bits = Precision::new(cli.bits)?.bits();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Normalize { map, gauge } => cmd_normalize(&build_map(map, bits)?, map.order, gauge.as_deref()),
        Command::Transform { map, kind, gauge_a, gauge_b, target } => {
            cmd_transform(&build_map(map, bits)?, map.order, *kind, gauge_a.as_deref(), gauge_b.as_deref(), *target)
        }
        Command::Neumann { map, n_deviation, z, ladder, jet_order } => {
            cmd_neumann(&build_map(map, bits)?, map.order, n_deviation.as_deref(), z, ladder, *jet_order)
        }
        Command::Tongues { map, t, range, grid, q_max, iterations } => {
            cmd_tongues(map, bits, t, range.as_deref(), *grid, *q_max, *iterations, out)
        }
        Command::Diagnose { map, depth, growth_csv } => {
            cmd_diagnose(&build_map(map, bits)?, map.order, *depth, growth_csv.as_deref())
        }
        Command::Sternberg { map, r0, grid } => cmd_sternberg(&build_map(map, bits)?, map.order, *r0, grid),
        Command::Contraction { map, a_minus, a_plus, grid, m_max } => {
            cmd_contraction(&build_map(map, bits)?, *a_minus, *a_plus, grid, *m_max)
        }
    }
}

/// `{"code","module","message"}`.
pub fn error_json(e: &Error) -> String {
    json!({ "code": e.code(), "module": e.module(), "message": e.to_string() }).to_string()
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = Error::Config(e.to_string().lines().next().unwrap_or("invalid arguments").to_string());
            eprintln!("{}", error_json(&err));
            return 2;
        }
    };
    let result = execute(&cli).and_then(|doc| {
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        match (&cli.command, &cli.out) {
            (Command::Tongues { .. }, _) | (_, None) => print!("{text}"),
            (_, Some(path)) => write_file(path, &text)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            if e.module() == "cli" {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_and_ladder_syntax() {
        assert_eq!(parse_gauge("basic").unwrap(), Gauge::Basic);
        assert_eq!(parse_gauge("custom:0.5,-1").unwrap(), Gauge::CustomDiagonal(vec![0.5, -1.0]));
        assert!(parse_gauge("fancy").is_err());
        assert_eq!(parse_ladder("100").unwrap(), vec![25, 50, 100]);
        assert_eq!(parse_ladder("10,20").unwrap(), vec![10, 20]);
        assert_eq!(parse_deviation("k=1").unwrap(), (1, 1e-2));
        assert_eq!(parse_deviation("k=2,delta=0.5").unwrap(), (2, 0.5));
        assert!(parse_deviation("delta=0.5").is_err());
    }

    #[test]
    fn error_document_shape() {
        let v: Value = serde_json::from_str(&error_json(&Error::RationalOmega("1/3".into()))).unwrap();
        assert_eq!(v["code"], "maps.rational_omega");
        assert_eq!(v["module"], "maps");
    }
}
