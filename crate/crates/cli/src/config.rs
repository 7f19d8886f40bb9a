//! Run configuration: defaults, then a `key = value` file, then flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracoc::fracops::Order;
use fracoc::model::{FocpSpec, TerminalMode};
use fracoc::problems::{builtin, example41_exact, Quadratic, BUILTINS};
use fracoc::solver::Route;

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value, got {line:?}", no + 1);
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_kv(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_kv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    v.parse().with_context(|| format!("{key} = {v:?} is not a valid number"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    Fractional,
    Approximate,
    Both,
}

impl RouteChoice {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "frac" | "fractional" | "a" => RouteChoice::Fractional,
            "approx" | "approximate" | "b" => RouteChoice::Approximate,
            "both" => RouteChoice::Both,
            _ => bail!("unknown route {s:?} (frac, approx or both)"),
        })
    }

    pub fn routes(self) -> Vec<Route> {
        match self {
            RouteChoice::Fractional => vec![Route::Fractional],
            RouteChoice::Approximate => vec![Route::Approximate],
            RouteChoice::Both => vec![Route::Fractional, Route::Approximate],
        }
    }
}

impl fmt::Display for RouteChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouteChoice::Fractional => "frac",
            RouteChoice::Approximate => "approx",
            RouteChoice::Both => "both",
        })
    }
}

/// A problem from the quadratic catalog with numeric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineProblem {
    pub coeffs: Quadratic,
    pub m: f64,
    pub n: f64,
    pub a: f64,
    pub x_start: f64,
    pub terminal: String,
    pub t_final: Option<f64>,
    pub x_final: Option<f64>,
}

impl InlineProblem {
    pub const KEYS: [&'static str; 7] = ["m", "n", "a", "x_start", "terminal", "t_final", "x_final"];

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let mut p = InlineProblem {
            coeffs: Quadratic::default(),
            m: 1.0,
            n: 1.0,
            a: 0.0,
            x_start: 0.0,
            terminal: "fixed_both".into(),
            t_final: None,
            x_final: None,
        };
        for (k, v) in kv {
            match k.as_str() {
                "m" => p.m = num(k, v)?,
                "n" => p.n = num(k, v)?,
                "a" => p.a = num(k, v)?,
                "x_start" => p.x_start = num(k, v)?,
                "terminal" => p.terminal = v.clone(),
                "t_final" => p.t_final = Some(num(k, v)?),
                "x_final" => p.x_final = Some(num(k, v)?),
                _ if Quadratic::KEYS.contains(&k.as_str()) => {
                    p.coeffs.set(k, num(k, v)?);
                }
                _ => {}
            }
        }
        p.mode()?;
        Ok(p)
    }

    fn mode(&self) -> Result<TerminalMode> {
        let need = |v: Option<f64>, key: &str| v.with_context(|| format!("terminal = {} needs {key}", self.terminal));
        Ok(match self.terminal.as_str() {
            "fixed_both" => TerminalMode::FixedBoth {
                t_final: need(self.t_final, "t_final")?,
                x_final: need(self.x_final, "x_final")?,
            },
            "fixed_time" => TerminalMode::FixedTimeFreeState {
                t_final: need(self.t_final, "t_final")?,
            },
            "fixed_state" => TerminalMode::FreeTimeFixedState {
                x_final: need(self.x_final, "x_final")?,
            },
            "free" => TerminalMode::FreeTimeFreeState,
            other => bail!("unknown terminal {other:?} (fixed_both, fixed_time, fixed_state, free)"),
        })
    }

    pub fn spec(&self, order: Order) -> Result<FocpSpec> {
        Ok(self.coeffs.spec(order, self.m, self.n, self.a, self.x_start, self.mode()?))
    }

    /// Every field as `key = value` pairs.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("m".into(), fmt_f(self.m)),
            ("n".into(), fmt_f(self.n)),
            ("a".into(), fmt_f(self.a)),
            ("x_start".into(), fmt_f(self.x_start)),
            ("terminal".into(), self.terminal.clone()),
        ];
        if let Some(t) = self.t_final {
            out.push(("t_final".into(), fmt_f(t)));
        }
        if let Some(x) = self.x_final {
            out.push(("x_final".into(), fmt_f(x)));
        }
        for k in Quadratic::KEYS {
            out.push((k.into(), fmt_f(self.coeffs.get(k).unwrap_or(0.0))));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Builtin(String),
    Inline(Box<InlineProblem>),
}

impl Problem {
    /// A built-in name, or a path to a problem file.
    pub fn resolve(name: &str) -> Result<Self> {
        if BUILTINS.contains(&name) {
            return Ok(Problem::Builtin(name.into()));
        }
        let path = Path::new(name);
        if path.is_file() {
            return Ok(Problem::Inline(Box::new(InlineProblem::from_kv(&read_kv(path)?)?)));
        }
        bail!("{name:?} is neither a built-in problem ({}) nor a readable file", BUILTINS.join(", "))
    }

    pub fn name(&self) -> &str {
        match self {
            Problem::Builtin(n) => n,
            Problem::Inline(_) => "inline",
        }
    }

    pub fn spec(&self, order: Order) -> Result<FocpSpec> {
        match self {
            Problem::Builtin(n) => Ok(builtin(n, order).expect("resolved name")?),
            Problem::Inline(p) => p.spec(order),
        }
    }

    /// Exact state trajectory, when one is known.
    pub fn reference(&self, order: Order) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            Problem::Builtin(n) if n == "example41" => {
                let (x, _) = example41_exact(order).ok()?;
                Some(Box::new(x))
            }
            Problem::Builtin(n) if n == "classical_toy" => Some(Box::new(|t| t)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub alpha: f64,
    pub k: usize,
    pub mesh: usize,
    pub tol: f64,
    pub route: RouteChoice,
    pub t_guess: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Builtin("example41".into()),
            alpha: 0.5,
            k: 2,
            mesh: 2000,
            tol: 1e-10,
            route: RouteChoice::Both,
            t_guess: 1.0,
            out: PathBuf::from("fracoc-out"),
        }
    }
}

/// Values given on the command line; `None` keeps the file or default value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub mesh: Option<usize>,
    pub tol: Option<f64>,
    pub route: Option<String>,
    pub t_guess: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {

    pub fn load(file: Option<&Path>, over: &Overrides) -> Result<Self> {
        let mut c = RunConfig::default();
        if let Some(path) = file {
            let kv = read_kv(path)?;
            for (k, v) in &kv {
                match k.as_str() {
                    "problem" if v != "inline" => c.problem = Problem::resolve(v)?,
                    "problem" => c.problem = Problem::Inline(Box::new(InlineProblem::from_kv(&kv)?)),
                    "alpha" => c.alpha = num(k, v)?,
                    "K" | "k" => c.k = num(k, v)?,
                    "mesh" => c.mesh = num(k, v)?,
                    "tol" => c.tol = num(k, v)?,
                    "route" => c.route = RouteChoice::parse(v)?,
                    "t_guess" => c.t_guess = num(k, v)?,
                    "out" => c.out = PathBuf::from(v),
                    _ if InlineProblem::KEYS.contains(&k.as_str()) || Quadratic::KEYS.contains(&k.as_str()) => {}
                    _ => bail!("unknown configuration key {k:?}"),
                }
            }
        }
        if let Some(p) = &over.problem {
            c.problem = Problem::resolve(p)?;
        }
        c.alpha = over.alpha.unwrap_or(c.alpha);
        c.k = over.k.unwrap_or(c.k);
        c.mesh = over.mesh.unwrap_or(c.mesh);
        c.tol = over.tol.unwrap_or(c.tol);
        if let Some(r) = &over.route {
            c.route = RouteChoice::parse(r)?;
        }
        c.t_guess = over.t_guess.unwrap_or(c.t_guess);
        if let Some(o) = &over.out {
            c.out = o.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.k < 2 {
            bail!("K must be at least 2, got {}", self.k);
        }
        if self.mesh < 32 {
            bail!("mesh must be at least 32, got {}", self.mesh);
        }
        if !(self.tol > 0.0) {
            bail!("tol must be positive, got {}", self.tol);
        }
        if !(self.t_guess > 0.0) {
            bail!("t_guess must be positive, got {}", self.t_guess);
        }
        Ok(())
    }

    pub fn order(&self) -> Order {
        Order::new(self.alpha).expect("validated")
    }

    /// Every parameter as `key = value` pairs, inline coefficients included.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("problem".to_string(), self.problem.name().to_string()),
            ("alpha".into(), fmt_f(self.alpha)),
            ("K".into(), self.k.to_string()),
            ("mesh".into(), self.mesh.to_string()),
            ("tol".into(), fmt_f(self.tol)),
            ("route".into(), self.route.to_string()),
            ("t_guess".into(), fmt_f(self.t_guess)),
        ];
        if let Problem::Inline(p) = &self.problem {
            out.extend(p.entries());
        }
        out
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

/// `2,3,4` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("{p:?} is not a positive integer")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parsing() {
        let kv = parse_kv("# comment\nalpha = 0.3\n\nK=3 # trailing\n").unwrap();
        assert_eq!(kv["alpha"], "0.3");
        assert_eq!(kv["K"], "3");
        assert!(parse_kv("alpha 0.3").is_err());
    }

    #[test]
    fn overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.cfg");
        std::fs::write(&file, "problem = example42\nalpha = 0.3\nK = 3\nroute = approx\n").unwrap();
        let over = Overrides {
            k: Some(4),
            ..Overrides::default()
        };
        let c = RunConfig::load(Some(&file), &over).unwrap();
        assert_eq!(c.problem, Problem::Builtin("example42".into()));
        assert_eq!((c.alpha, c.k, c.route), (0.3, 4, RouteChoice::Approximate));
        assert_eq!(c.mesh, 2000);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |o: Overrides| RunConfig::load(None, &o).is_err();
        assert!(bad(Overrides { alpha: Some(1.0), ..Default::default() }));
        assert!(bad(Overrides { k: Some(1), ..Default::default() }));
        assert!(bad(Overrides { mesh: Some(16), ..Default::default() }));
        assert!(bad(Overrides { tol: Some(0.0), ..Default::default() }));
        assert!(bad(Overrides { route: Some("sideways".into()), ..Default::default() }));
        assert!(bad(Overrides { problem: Some("nope".into()), ..Default::default() }));
    }

    #[test]
    fn inline_problem() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.cfg");
        std::fs::write(&file, "m = 1\nn = 0\nru = 1\nc0 = 1\nfu = 1\nterminal = fixed_state\nx_final = 1\n").unwrap();
        let p = Problem::resolve(file.to_str().unwrap()).unwrap();
        let spec = p.spec(Order::new(0.5).unwrap()).unwrap();
        assert!(spec.terminal.is_free_time());
        assert_eq!(spec.n_coef, 0.0);
        std::fs::write(&file, "terminal = fixed_both\nt_final = 1\n").unwrap();
        assert!(Problem::resolve(file.to_str().unwrap()).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("2, 3,4").unwrap(), vec![2, 3, 4]);
        assert!(parse_list("2,x").is_err());
    }
}
