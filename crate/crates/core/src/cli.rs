//! Command-line front end: solve scenarios, re-price reference paths,
//! benchmark the two solvers against each other, and validate scenario
//! files. All results go to standard output, diagnostics about failures to
//! standard error.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::mip;
use crate::rational::Rational;
use crate::scenario::{
    builtin_fixture, diagnose_scenario, load_scenario, Fixture, FixtureName, PathFixture,
    RouteKind, Scenario,
};
use crate::solution::{Solution, SolveMethod, SolveStats};
use crate::two_stage;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

/// Objectives further apart than this (in minutes) count as disagreement.
/// Solvers work in exact arithmetic, so any real divergence is far larger.
fn agreement_tolerance() -> Rational {
    Rational::new(1, 1_000_000_000)
}

/// One solver's answer, ready for rendering.
pub struct SolveReport {
    pub method: SolveMethod,
    pub solution: Solution,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Source {
    Fixture(String),
    File(PathBuf),
}

impl Source {
    fn label(&self) -> String {
        match self {
            Source::Fixture(name) => name.clone(),
            Source::File(path) => path.display().to_string(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum MethodChoice {
    Mip,
    TwoStage,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, PartialEq, Eq)]
enum Command {
    Solve {
        source: Source,
        method: MethodChoice,
        format: Format,
    },
    Recompute {
        source: Source,
        format: Format,
    },
    Bench {
        source: Source,
        repeats: usize,
    },
    Validate {
        source: Source,
    },
    Help,
}

const USAGE: &str = "\
towplan - workshop selection and rerouting planner for broken-down vehicles

usage:
  towplan solve     (--fixture NAME | --scenario PATH) [--method mip|two-stage|both] [--format table|json]
  towplan recompute --fixture urban_paths [--format table|json]
  towplan bench     (--fixture NAME | --scenario PATH) [--repeats N]
  towplan validate  (--scenario PATH | --fixture NAME)
  towplan help

fixtures: base_highway, modified_highway, urban_paths (recompute only)
exit codes: 0 success, 2 usage/parse/validation, 3 infeasible, 4 solver disagreement";

/// Runs the CLI and returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let command = match parse_args(args) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("{USAGE}");
            return EXIT_PARSE;
        }
    };
    match command {
        Command::Help => {
            println!("{USAGE}");
            EXIT_OK
        }
        Command::Solve {
            source,
            method,
            format,
        } => cmd_solve(&source, method, format),
        Command::Recompute { source, format } => cmd_recompute(&source, format),
        Command::Bench { source, repeats } => cmd_bench(&source, repeats),
        Command::Validate { source } => cmd_validate(&source),
    }
}

fn parse_args(args: &[String]) -> Result<Command, String> {
    let Some(subcommand) = args.first() else {
        return Err("missing subcommand".to_string());
    };
    let mut fixture: Option<String> = None;
    let mut scenario: Option<PathBuf> = None;
    let mut method: Option<MethodChoice> = None;
    let mut format: Option<Format> = None;
    let mut repeats: Option<usize> = None;

    let mut rest = args[1..].iter();
    while let Some(flag) = rest.next() {
        let mut value = || {
            rest.next()
                .cloned()
                .ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag.as_str() {
            "--fixture" => fixture = Some(value()?),
            "--scenario" => scenario = Some(PathBuf::from(value()?)),
            "--method" => {
                method = Some(match value()?.as_str() {
                    "mip" => MethodChoice::Mip,
                    "two-stage" => MethodChoice::TwoStage,
                    "both" => MethodChoice::Both,
                    other => return Err(format!("unknown method {other:?}")),
                })
            }
            "--format" => {
                format = Some(match value()?.as_str() {
                    "table" => Format::Table,
                    "json" => Format::Json,
                    other => return Err(format!("unknown format {other:?}")),
                })
            }
            "--repeats" => {
                let raw = value()?;
                let n: usize = raw
                    .parse()
                    .map_err(|_| format!("--repeats {raw:?} is not a positive integer"))?;
                if n == 0 {
                    return Err("--repeats must be at least 1".to_string());
                }
                repeats = Some(n);
            }
            other => return Err(format!("unknown flag {other}")),
        }
    }

    let source = match (fixture, scenario) {
        (Some(_), Some(_)) => {
            return Err("--fixture and --scenario are mutually exclusive".to_string())
        }
        (Some(name), None) => Some(Source::Fixture(name)),
        (None, Some(path)) => Some(Source::File(path)),
        (None, None) => None,
    };
    let require_source = |source: Option<Source>| {
        source.ok_or_else(|| "need --fixture NAME or --scenario PATH".to_string())
    };

    Ok(match subcommand.as_str() {
        "help" | "--help" | "-h" => Command::Help,
        "solve" => Command::Solve {
            source: require_source(source)?,
            method: method.unwrap_or(MethodChoice::Both),
            format: format.unwrap_or(Format::Table),
        },
        "recompute" => Command::Recompute {
            source: require_source(source)?,
            format: format.unwrap_or(Format::Table),
        },
        "bench" => Command::Bench {
            source: require_source(source)?,
            repeats: repeats.unwrap_or(100),
        },
        "validate" => Command::Validate {
            source: require_source(source)?,
        },
        other => return Err(format!("unknown subcommand {other:?}")),
    })
}

fn load_solvable(source: &Source) -> Result<Scenario, (String, i32)> {
    match source {
        Source::Fixture(name) => match builtin_fixture(name) {
            Ok(Fixture::Scenario(s)) => Ok(s),
            Ok(Fixture::Paths(_)) => Err((
                format!(
                    "fixture {name:?} only carries reference paths and cannot be solved; \
                     use `towplan recompute --fixture {name}`"
                ),
                EXIT_PARSE,
            )),
            Err(e) => Err((e.to_string(), EXIT_PARSE)),
        },
        Source::File(path) => load_scenario(path).map_err(|e| (e.to_string(), EXIT_PARSE)),
    }
}

fn cmd_solve(source: &Source, method: MethodChoice, format: Format) -> i32 {
    let scenario = match load_solvable(source) {
        Ok(s) => s,
        Err((message, code)) => {
            eprintln!("error: {message}");
            return code;
        }
    };

    let mut reports = Vec::new();
    if matches!(method, MethodChoice::Mip | MethodChoice::Both) {
        match mip::solve_scenario(&scenario) {
            Ok((solution, stats)) => reports.push(SolveReport {
                method: SolveMethod::Mip,
                solution,
                stats,
            }),
            Err(e) => {
                eprintln!("error: mip: {e}");
                return EXIT_INFEASIBLE;
            }
        }
    }
    if matches!(method, MethodChoice::TwoStage | MethodChoice::Both) {
        match two_stage::select_workshop(&scenario) {
            Ok((solution, stats)) => reports.push(SolveReport {
                method: SolveMethod::TwoStage,
                solution,
                stats,
            }),
            Err(e) => {
                eprintln!("error: two-stage: {e}");
                return EXIT_INFEASIBLE;
            }
        }
    }

    let agreement = (reports.len() == 2).then(|| {
        let difference = (reports[0].solution.total_min - reports[1].solution.total_min).abs();
        (difference <= agreement_tolerance(), difference)
    });

    match format {
        Format::Table => {
            for report in &reports {
                print!("{}", render_report_table(report));
            }
            if let Some((agree, difference)) = agreement {
                if agree {
                    println!(
                        "agreement: objectives equal ({} min)",
                        fmt_min(reports[0].solution.total_min)
                    );
                } else {
                    println!(
                        "agreement: objectives differ by {} min (mip {}, two-stage {})",
                        fmt_min(difference),
                        fmt_min(reports[0].solution.total_min),
                        fmt_min(reports[1].solution.total_min)
                    );
                }
            }
        }
        Format::Json => {
            println!("{}", solve_json(&source.label(), &reports, agreement));
        }
    }

    match agreement {
        Some((false, _)) => EXIT_DISAGREEMENT,
        _ => EXIT_OK,
    }
}

fn cmd_recompute(source: &Source, format: Format) -> i32 {
    let fixture = match source {
        Source::Fixture(name) => match builtin_fixture(name) {
            Ok(Fixture::Paths(p)) => p,
            Ok(Fixture::Scenario(_)) => {
                eprintln!(
                    "error: fixture {name:?} is a solvable scenario; \
                     use `towplan solve --fixture {name}`"
                );
                return EXIT_PARSE;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_PARSE;
            }
        },
        Source::File(_) => {
            eprintln!(
                "error: recompute works on the built-in path fixture; use --fixture urban_paths"
            );
            return EXIT_PARSE;
        }
    };
    match format {
        Format::Table => print!("{}", render_recompute_table(source, &fixture)),
        Format::Json => println!("{}", recompute_json(&source.label(), &fixture)),
    }
    EXIT_OK
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[(samples.len() - 1) / 2]
}

fn cmd_bench(source: &Source, repeats: usize) -> i32 {
    let scenario = match load_solvable(source) {
        Ok(s) => s,
        Err((message, code)) => {
            eprintln!("error: {message}");
            return code;
        }
    };

    // warm-up round so neither method pays first-touch costs in the samples
    if mip::solve_scenario(&scenario).is_err() || two_stage::select_workshop(&scenario).is_err() {
        eprintln!("error: scenario is not solvable, nothing to benchmark");
        return EXIT_INFEASIBLE;
    }

    let mut mip_samples = Vec::with_capacity(repeats);
    let mut two_stage_samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let t = Instant::now();
        let _ = mip::solve_scenario(&scenario);
        mip_samples.push(t.elapsed());
        let t = Instant::now();
        let _ = two_stage::select_workshop(&scenario);
        two_stage_samples.push(t.elapsed());
    }
    let mip_median = median(mip_samples);
    let two_stage_median = median(two_stage_samples);

    println!("bench {}: {repeats} repeats", source.label());
    println!("  mip        median {}", fmt_duration(mip_median));
    println!("  two-stage  median {}", fmt_duration(two_stage_median));
    let ratio = mip_median.as_secs_f64() / two_stage_median.as_secs_f64().max(1e-12);
    println!("  speedup    {ratio:.1}x (mip / two-stage)");
    EXIT_OK
}

fn cmd_validate(source: &Source) -> i32 {
    let text = match source {
        Source::File(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_PARSE;
            }
        },
        Source::Fixture(name) => match FixtureName::from_name(name) {
            Ok(FixtureName::BaseHighway) => crate::scenario::BASE_HIGHWAY_SCN.to_string(),
            Ok(FixtureName::ModifiedHighway) => crate::scenario::MODIFIED_HIGHWAY_SCN.to_string(),
            Ok(FixtureName::UrbanPaths) => {
                eprintln!("error: urban_paths is a path fixture, not a scenario file");
                return EXIT_PARSE;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_PARSE;
            }
        },
    };
    match diagnose_scenario(&text) {
        Ok(diagnosis) => {
            if diagnosis.is_clean() {
                println!(
                    "{}",
                    diagnosis.summary.expect("clean diagnosis has summary")
                );
                EXIT_OK
            } else {
                for problem in &diagnosis.problems {
                    println!("{problem}");
                }
                EXIT_PARSE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_PARSE
        }
    }
}

fn fmt_min(value: Rational) -> String {
    format!("{:.2}", value.to_f64())
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

fn join_ids<T: std::fmt::Display>(ids: &[T]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_report_table(report: &SolveReport) -> String {
    let s = &report.solution;
    let mut out = String::new();
    out.push_str(&format!("method: {}\n", report.method));
    out.push_str(&format!("  workshop: {}\n", s.workshop));
    out.push_str(&format!(
        "  schedule    {:>10} min\n",
        fmt_min(s.schedule_min)
    ));
    out.push_str(&format!(
        "  maintenance {:>10} min\n",
        fmt_min(s.maintenance_min)
    ));
    for route in &s.routes {
        out.push_str(&format!(
            "  route {}     {:>10} min   links {}   nodes {}\n",
            route.route,
            fmt_min(route.driving_min),
            join_ids(&route.links),
            join_ids(&route.nodes),
        ));
    }
    out.push_str(&format!(
        "  driving     {:>10} min\n",
        fmt_min(s.driving_min())
    ));
    out.push_str(&format!("  total       {:>10} min\n", fmt_min(s.total_min)));
    out.push_str(&format!(
        "  expansions {}   wall {}\n",
        report.stats.expansions,
        fmt_duration(report.stats.wall_time)
    ));
    out
}

fn render_recompute_table(source: &Source, fixture: &PathFixture) -> String {
    let workshop = fixture.selected_workshop();
    let params = fixture.workshop_params(workshop);
    let mut out = String::new();
    out.push_str(&format!("path recomputation: {}\n", source.label()));
    out.push_str(&format!("  workshop: {workshop}\n"));
    out.push_str(&format!(
        "  schedule    {:>10} min\n",
        fmt_min(params.schedule_min)
    ));
    out.push_str(&format!(
        "  maintenance {:>10} min\n",
        fmt_min(params.maintenance_min)
    ));
    let mut driving = Rational::ZERO;
    for route in RouteKind::ALL {
        let time = fixture.route_driving_min(route);
        driving += time;
        out.push_str(&format!(
            "  route {}     {:>10} min   links {}   nodes {}\n",
            route,
            fmt_min(time),
            join_ids(fixture.route_links(route)),
            join_ids(fixture.route_nodes(route)),
        ));
    }
    out.push_str(&format!("  driving     {:>10} min\n", fmt_min(driving)));
    out.push_str(&format!(
        "  total       {:>10} min\n",
        fmt_min(fixture.total_min())
    ));
    out
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn routes_json(routes: &[crate::solution::RoutePath], indent: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("{indent}\"routes\": [\n"));
    for (i, route) in routes.iter().enumerate() {
        let links: Vec<String> = route.links.iter().map(|l| l.to_string()).collect();
        let nodes: Vec<String> = route.nodes.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!(
            "{indent}  {{\"route\": {}, \"links\": [{}], \"nodes\": [{}], \"driving_min\": {}}}{}\n",
            route.route,
            links.join(", "),
            nodes.join(", "),
            fmt_min(route.driving_min),
            if i + 1 < routes.len() { "," } else { "" },
        ));
    }
    out.push_str(&format!("{indent}]"));
    out
}

fn solve_json(label: &str, reports: &[SolveReport], agreement: Option<(bool, Rational)>) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"scenario\": {},\n", json_string(label)));
    out.push_str("  \"reports\": [\n");
    for (i, report) in reports.iter().enumerate() {
        let s = &report.solution;
        out.push_str("    {\n");
        out.push_str(&format!(
            "      \"method\": {},\n",
            json_string(report.method.as_str())
        ));
        out.push_str(&format!("      \"workshop\": {},\n", s.workshop));
        out.push_str(&format!(
            "      \"schedule_min\": {},\n",
            fmt_min(s.schedule_min)
        ));
        out.push_str(&format!(
            "      \"maintenance_min\": {},\n",
            fmt_min(s.maintenance_min)
        ));
        out.push_str(&format!(
            "      \"driving_min\": {},\n",
            fmt_min(s.driving_min())
        ));
        out.push_str(&format!("      \"total_min\": {},\n", fmt_min(s.total_min)));
        out.push_str(&routes_json(&s.routes, "      "));
        out.push_str(",\n");
        // wall time deliberately omitted: json output is byte-stable
        out.push_str(&format!(
            "      \"expansions\": {}\n",
            report.stats.expansions
        ));
        out.push_str("    }");
        out.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]");
    if let Some((agree, difference)) = agreement {
        out.push_str(",\n");
        out.push_str(&format!(
            "  \"agreement\": {{\"methods_agree\": {}, \"difference_min\": {}}}\n",
            agree,
            fmt_min(difference)
        ));
    } else {
        out.push('\n');
    }
    out.push('}');
    out
}

fn recompute_json(label: &str, fixture: &PathFixture) -> String {
    let workshop = fixture.selected_workshop();
    let params = fixture.workshop_params(workshop);
    let routes: Vec<crate::solution::RoutePath> = RouteKind::ALL
        .into_iter()
        .map(|route| crate::solution::RoutePath {
            route,
            nodes: fixture.route_nodes(route).to_vec(),
            links: fixture.route_links(route).to_vec(),
            driving_min: fixture.route_driving_min(route),
        })
        .collect();
    let driving: Rational = routes.iter().map(|r| r.driving_min).sum();
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"scenario\": {},\n", json_string(label)));
    out.push_str(&format!("  \"workshop\": {workshop},\n"));
    out.push_str(&format!(
        "  \"schedule_min\": {},\n",
        fmt_min(params.schedule_min)
    ));
    out.push_str(&format!(
        "  \"maintenance_min\": {},\n",
        fmt_min(params.maintenance_min)
    ));
    out.push_str(&format!("  \"driving_min\": {},\n", fmt_min(driving)));
    out.push_str(&format!(
        "  \"total_min\": {},\n",
        fmt_min(fixture.total_min())
    ));
    out.push_str(&routes_json(&routes, "  "));
    out.push_str("\n}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_solve_defaults() {
        let cmd = parse_args(&args(&["solve", "--fixture", "base_highway"])).unwrap();
        assert_eq!(
            cmd,
            Command::Solve {
                source: Source::Fixture("base_highway".to_string()),
                method: MethodChoice::Both,
                format: Format::Table,
            }
        );
    }

    #[test]
    fn parse_rejects_conflicting_sources() {
        let err = parse_args(&args(&[
            "solve",
            "--fixture",
            "base_highway",
            "--scenario",
            "x.scn",
        ]))
        .unwrap_err();
        assert!(err.contains("mutually exclusive"));
    }

    #[test]
    fn parse_rejects_unknown_method() {
        assert!(parse_args(&args(&[
            "solve",
            "--fixture",
            "base_highway",
            "--method",
            "magic"
        ]))
        .is_err());
    }

    #[test]
    fn parse_bench_repeats() {
        let cmd = parse_args(&args(&[
            "bench",
            "--fixture",
            "base_highway",
            "--repeats",
            "7",
        ]))
        .unwrap();
        assert_eq!(
            cmd,
            Command::Bench {
                source: Source::Fixture("base_highway".to_string()),
                repeats: 7,
            }
        );
        assert!(parse_args(&args(&[
            "bench",
            "--fixture",
            "base_highway",
            "--repeats",
            "0"
        ]))
        .is_err());
    }

    #[test]
    fn median_is_deterministic() {
        let ms = |n: u64| Duration::from_millis(n);
        assert_eq!(median(vec![ms(3), ms(1), ms(2)]), ms(2));
        assert_eq!(median(vec![ms(4), ms(1), ms(2), ms(3)]), ms(2));
        assert_eq!(median(vec![ms(5)]), ms(5));
    }

    #[test]
    fn json_strings_are_escaped() {
        assert_eq!(json_string("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
    }

    #[test]
    fn disagreement_exit_code_logic() {
        // Fabricated difference above the tolerance must map to exit 4.
        let same = Rational::ZERO;
        let different = Rational::new(1, 2);
        assert!(same <= agreement_tolerance());
        assert!(different > agreement_tolerance());
    }
}
