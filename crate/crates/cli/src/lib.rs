//! Config-driven scenario runner behind the `sidebands` binary.
//!
//! A run file is TOML with a `name`, an optional `output_dir` and exactly one
//! scenario table (`[rates]`, `[spectrum]`, `[fock]`, `[cat]`, `[correlations]`,
//! `[lamb-dicke]`, `[drift]` or `[device]`). Unknown keys are rejected.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use sidebands::error::Error as CoreError;
use sidebands::scenarios::{
    self, CatConfig, CorrelationConfig, DeviceConfig, DriftConfig, FockConfig, LambDickeConfig, RatesConfig, Report,
    ScenarioConfig, SpectrumConfig,
};

/// Overrides the default output root `out`.
pub const OUTPUT_ROOT_VAR: &str = "SIDEBANDS_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Configs shipped with the binary, addressable by name.
pub const BUNDLED: [(&str, &str); 13] = [
    ("rates", include_str!("../configs/rates.toml")),
    ("fig3", include_str!("../configs/fig3.toml")),
    ("fig4", include_str!("../configs/fig4.toml")),
    ("fig5a", include_str!("../configs/fig5a.toml")),
    ("fig5b", include_str!("../configs/fig5b.toml")),
    ("fig5c", include_str!("../configs/fig5c.toml")),
    ("fig5d", include_str!("../configs/fig5d.toml")),
    ("fig6a", include_str!("../configs/fig6a.toml")),
    ("fig6b", include_str!("../configs/fig6b.toml")),
    ("fig7", include_str!("../configs/fig7.toml")),
    ("lamb-dicke", include_str!("../configs/lamb-dicke.toml")),
    ("device-silicon", include_str!("../configs/device-silicon.toml")),
    ("device-diamond", include_str!("../configs/device-diamond.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug)]
pub enum CliError {
    /// Bad config; `line` is 1-based when known.
    Config { origin: String, line: Option<usize>, message: String },
    Numerical(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { origin, line: Some(l), message } => write!(f, "{origin}:{l}: {message}"),
            CliError::Config { origin, line: None, message } => write!(f, "{origin}: {message}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    output_dir: Option<PathBuf>,
    rates: Option<RatesConfig>,
    spectrum: Option<SpectrumConfig>,
    fock: Option<FockConfig>,
    cat: Option<CatConfig>,
    correlations: Option<CorrelationConfig>,
    #[serde(rename = "lamb-dicke")]
    lamb_dicke: Option<LambDickeConfig>,
    drift: Option<DriftConfig>,
    device: Option<DeviceConfig>,
}

/// A parsed run file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub name: String,
    /// Relative paths are taken from the output root.
    pub output_dir: Option<PathBuf>,
    pub scenario: ScenarioConfig,
    source: String,
    origin: String,
}

impl RunConfig {
    /// Parse and validate; `origin` names the source in error messages.
    pub fn parse(source: &str, origin: &str) -> Result<Self, CliError> {
        let config_error = |line, message| CliError::Config { origin: origin.to_string(), line, message };
        let raw: RawConfig = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| line_of(source, s.start));
            config_error(line, e.message().to_string())
        })?;
        if raw.name.is_empty() || raw.name.contains(['/', '\\']) || raw.name.starts_with('.') {
            return Err(config_error(find_key(source, None, "name"), format!("invalid run name `{}`", raw.name)));
        }
        let mut found = Vec::new();
        let mut push = |s: Option<ScenarioConfig>| found.extend(s);
        push(raw.rates.map(ScenarioConfig::Rates));
        push(raw.spectrum.map(ScenarioConfig::Spectrum));
        push(raw.fock.map(ScenarioConfig::Fock));
        push(raw.cat.map(ScenarioConfig::Cat));
        push(raw.correlations.map(ScenarioConfig::Correlations));
        push(raw.lamb_dicke.map(ScenarioConfig::LambDicke));
        push(raw.drift.map(ScenarioConfig::Drift));
        push(raw.device.map(ScenarioConfig::Device));
        let scenario = match found.len() {
            1 => found.pop().expect("one scenario"),
            0 => return Err(config_error(None, "no scenario table; expected one of [rates], [spectrum], [fock], [cat], [correlations], [lamb-dicke], [drift], [device]".into())),
            _ => {
                let names: Vec<&str> = found.iter().map(ScenarioConfig::name).collect();
                let line = table_line(source, found[1].name());
                return Err(config_error(line, format!("exactly one scenario table allowed, found {}", names.join(", "))));
            }
        };
        let config = Self { name: raw.name, output_dir: raw.output_dir, scenario, source: source.to_string(), origin: origin.to_string() };
        config.scenario.validate().map_err(|e| config.map_error(e))?;
        Ok(config)
    }

    /// A bundled name or a path to a TOML file.
    pub fn load(spec: &str) -> Result<Self, CliError> {
        if let Some(src) = bundled(spec) {
            return Self::parse(src, &format!("<bundled {spec}>"));
        }
        let path = Path::new(spec);
        let source = fs::read_to_string(path).map_err(|e| CliError::Config {
            origin: spec.to_string(),
            line: None,
            message: format!("cannot read config ({e}); bundled configs: {}", bundled_names().join(", ")),
        })?;
        Self::parse(&source, spec)
    }

    pub fn run(&self) -> Result<Report, CliError> {
        scenarios::run(&self.scenario).map_err(|e| self.map_error(e))
    }

    /// Output directory under `root`.
    pub fn output_path(&self, root: &Path) -> PathBuf {
        match &self.output_dir {
            Some(d) => root.join(d),
            None => root.join(&self.name),
        }
    }

    fn map_error(&self, e: CoreError) -> CliError {
        let table = self.scenario.name();
        let (line, message) = match &e {
            CoreError::InvalidConfig { field, .. } => {
                let (section, key) = match field.rsplit_once('.') {
                    Some((s, k)) => (Some(format!("{table}.{s}")), k),
                    None => (Some(table.to_string()), field.as_str()),
                };
                let line = find_key(&self.source, section.as_deref(), key).or_else(|| table_line(&self.source, table));
                (line, e.to_string())
            }
            CoreError::CutoffTooSmall { .. } => {
                (find_key(&self.source, Some(table), "cutoff").or_else(|| table_line(&self.source, table)), e.to_string())
            }
            CoreError::InvalidArgument(_) => (table_line(&self.source, table), e.to_string()),
            _ => return CliError::Numerical(e.to_string()),
        };
        CliError::Config { origin: self.origin.clone(), line, message }
    }
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn header_of(line: &str) -> Option<&str> {
    let t = line.trim();
    let inner = t.strip_prefix("[[").and_then(|r| r.split_once("]]")).map(|(h, _)| h);
    inner.or_else(|| t.strip_prefix('[').and_then(|r| r.split_once(']')).map(|(h, _)| h)).map(str::trim)
}

fn table_line(source: &str, table: &str) -> Option<usize> {
    source.lines().position(|l| header_of(l) == Some(table)).map(|i| i + 1)
}

/// First `key = ...` line inside `table` (or its subtables), or at top level when `table` is None.
fn find_key(source: &str, table: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<&str> = None;
    for (i, line) in source.lines().enumerate() {
        if let Some(h) = header_of(line) {
            current = Some(h);
            continue;
        }
        let inside = match (table, current) {
            (None, None) => true,
            (Some(t), Some(c)) => c == t || c.starts_with(&format!("{t}.")),
            _ => false,
        };
        let lhs = line.split_once('=').map(|(k, _)| k.trim().trim_matches('"'));
        if inside && lhs == Some(key) {
            return Some(i + 1);
        }
    }
    None
}

/// Write `summary.json` and the data files into `dir`.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let summary = report.to_json().map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut written = Vec::new();
    let path = dir.join("summary.json");
    fs::write(&path, summary).map_err(io(&path))?;
    written.push(path);
    for f in &report.files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Parser, Debug)]
#[command(name = "sidebands", version, about = "Run multi-phonon sideband scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one scenario from a config file or a bundled config name.
    Run {
        config: String,
        /// Exit with status 1 if any embedded check or convergence gate fails.
        #[arg(long)]
        check: bool,
        /// Cap on worker threads.
        #[arg(long, value_name = "K")]
        threads: Option<usize>,
        /// Output directory; overrides the config and the output root.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List the bundled configs.
    List,
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::List => {
            for n in bundled_names() {
                println!("{n}");
            }
            EXIT_OK
        }
        Command::Run { config, check, threads, out } => match run_command(&config, check, threads, out) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    }
}

fn run_command(spec: &str, check: bool, threads: Option<usize>, out: Option<PathBuf>) -> Result<i32, CliError> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::Config { origin: "--threads".into(), line: None, message: "must be >= 1".into() });
        }
        // Fails only if the pool already exists, e.g. on a second run in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let config = RunConfig::load(spec)?;
    let report = config.run()?;
    let dir = out.unwrap_or_else(|| config.output_path(&output_root()));
    write_outputs(&report, &dir)?;

    println!("{}: {} -> {}", config.name, report.scenario, dir.display());
    for c in &report.checks {
        println!("  [{}] {} = {} (want {})", if c.passed { "pass" } else { "FAIL" }, c.name, c.value, c.condition);
    }
    for g in &report.gates {
        println!(
            "  [{}] gate {} N={} vs N+5: change {:.3e}",
            if g.passed { "pass" } else { "FAIL" },
            g.quantity,
            g.cutoff,
            g.change
        );
    }
    for w in &report.warnings {
        println!("  warning: {w}");
    }
    if check && !report.passed() {
        for f in report.failures() {
            eprintln!("failed {f}");
        }
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_err(src: &str) -> (Option<usize>, String) {
        match RunConfig::parse(src, "test.toml") {
            Err(CliError::Config { line, message, .. }) => (line, message),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn every_bundled_config_parses() {
        for (name, src) in BUNDLED {
            let c = RunConfig::parse(src, name).unwrap();
            assert_eq!(c.name, name);
        }
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let (line, msg) = config_err("name = \"x\"\n\n[rates]\nlambda = 1.0\nlamda = 2.0\n");
        assert_eq!(line, Some(5));
        assert!(msg.contains("lamda"), "{msg}");
    }

    #[test]
    fn unknown_top_level_table_is_rejected() {
        let (line, _) = config_err("name = \"x\"\n[rates]\n[plots]\nkind = 1\n");
        assert_eq!(line, Some(3));
    }

    #[test]
    fn invalid_value_points_at_the_key() {
        let (line, msg) = config_err("name = \"x\"\n[fock]\nn = 2\nomega = -1.0\n");
        assert_eq!(line, Some(4));
        assert!(msg.contains("omega"), "{msg}");
    }

    #[test]
    fn nested_invalid_value_points_at_the_subtable_key() {
        let src = "name = \"c\"\n[cat]\n[cat.trajectory]\npoints = 100\n[cat.ensemble]\npoints = 1\n";
        let (line, _) = config_err(src);
        assert_eq!(line, Some(6));
    }

    #[test]
    fn missing_or_duplicate_scenario_is_rejected() {
        let (line, msg) = config_err("name = \"x\"\n");
        assert_eq!(line, None);
        assert!(msg.contains("no scenario"));
        let (line, _) = config_err("name = \"x\"\n[rates]\n[device.params]\nl = 1.0\n");
        assert!(line.is_some());
    }

    #[test]
    fn type_error_reports_line() {
        let (line, _) = config_err("name = \"x\"\n[spectrum]\npoints = \"many\"\n");
        assert_eq!(line, Some(3));
    }

    #[test]
    fn bad_config_exits_with_2() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "name = \"bad\"\n[rates]\norders = [0]\n").unwrap();
        let code = main_with(["sidebands", "run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert_eq!(main_with(["sidebands", "run", "no-such-config"]), EXIT_CONFIG);
        assert_eq!(main_with(["sidebands", "frobnicate"]), EXIT_CONFIG);
    }

    #[test]
    fn numerical_failure_exits_with_3() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stiff.toml");
        // A tolerance far below machine precision makes the step size underflow.
        let src = "name = \"stiff\"\n[fock]\nn = 1\npoints = 3\n[fock.integrator]\nrtol = 1e-300\natol = 1e-300\n";
        fs::write(&path, src).unwrap();
        let out = dir.path().join("o");
        assert_eq!(main_with(["sidebands", "run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_NUMERICAL);
    }

    #[test]
    fn run_writes_identical_outputs_twice() {
        let dir = tempfile::tempdir().unwrap();
        let read = |d: &Path| {
            let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(d)
                .unwrap()
                .map(|e| e.unwrap().path())
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
                .collect();
            v.sort();
            v
        };
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        for d in [&a, &b] {
            assert_eq!(main_with(["sidebands", "run", "fig5a", "--check", "--threads", "2", "--out", d.to_str().unwrap()]), EXIT_OK);
        }
        let (ra, rb) = (read(&a), read(&b));
        assert_eq!(ra.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["populations.csv", "summary.json"]);
        assert_eq!(ra, rb);
    }

    #[test]
    fn summary_has_schema_parameters_and_gates() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(main_with(["sidebands", "run", "rates", "--check", "--out", dir.path().to_str().unwrap()]), EXIT_OK);
        let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        for key in ["\"schema_version\": 1", "\"scenario\": \"rates\"", "\"parameters\"", "\"gates\"", "\"checks\""] {
            assert!(text.contains(key), "missing {key}");
        }
        assert!(dir.path().join("rates.csv").exists());
    }

    #[test]
    fn failed_check_exits_with_1_only_under_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("strict.toml");
        fs::write(&path, "name = \"strict\"\n[fock]\nn = 1\npoints = 101\nmin_peak = 0.999\n").unwrap();
        let out = dir.path().join("o");
        let args = |check: bool| {
            let mut v = vec!["sidebands", "run", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
            if check {
                v.push("--check");
            }
            v.into_iter().map(String::from).collect::<Vec<_>>()
        };
        assert_eq!(main_with(args(false)), EXIT_OK);
        assert_eq!(main_with(args(true)), EXIT_CHECK_FAILED);
    }

    #[test]
    fn output_dir_is_taken_relative_to_root() {
        let c = RunConfig::parse("name = \"d\"\noutput_dir = \"sub/dev\"\n[device]\n[device.params]\nl = 3.47e-6\nw = 5e-8\nt = 5e-8\nyoungs_modulus = 1.3e11\ndensity = 2330.0\ngradient = 1e7\ntip_distance = 2.5e-8\ntemperature = 0.01\n", "t").unwrap();
        assert_eq!(c.output_path(Path::new("/r")), PathBuf::from("/r/sub/dev"));
        let s = RunConfig::load("device-silicon").unwrap();
        assert_eq!(s.output_path(Path::new("/r")), PathBuf::from("/r/device-silicon"));
    }

    #[test]
    fn zero_threads_is_a_config_error() {
        assert_eq!(main_with(["sidebands", "run", "rates", "--threads", "0"]), EXIT_CONFIG);
    }
}
