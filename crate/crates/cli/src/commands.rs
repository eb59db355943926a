use std::fmt::Write as _;

use grid_antichains::asymptotics::{self, asymptotic_report};
use grid_antichains::chains::{trial_seed, ChainSampler, LevelDistribution};
use grid_antichains::containers::{
    audit_premises, build_containers, certified_upper_bound, count_within_log2, ContainerParams, Round,
};
use grid_antichains::exact::{count_downsets, erdos_szekeres_n3, partition_count};
use grid_antichains::level_graph::LevelGraph;
use grid_antichains::num::{fmt_ratio, from_biguint, int, parse_ratio, ratio};
use grid_antichains::supersat::{self, exhaustive_audit, random_audit};
use grid_antichains::{Error, GridBox, Limits, Result};
use serde_json::{json, Value};

use crate::{AsymArgs, ChainsArgs, Command, ContainersArgs, CountArgs, LevelArgs, SupersatArgs};

/// What a command produced, in every format.
pub struct Outcome {
    pub json: Value,
    pub csv: String,
    pub text: String,
    /// Some checked bound or invariant failed.
    pub violation: bool,
}

impl Outcome {
    /// A single record: one CSV row and one `key: value` line per field.
    fn flat(fields: Vec<(&str, String)>, json: Value, violation: bool) -> Self {
        let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
        let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
        let csv = format!("{}\n{}\n", keys.join(","), values.join(","));
        let text = fields.iter().map(|(k, v)| format!("{k}: {v}\n")).collect();
        Outcome {
            json,
            csv,
            text,
            violation,
        }
    }
}

pub fn run(command: &Command, limits: &Limits) -> Result<Outcome> {
    match command {
        Command::Count(a) => count(a, limits),
        Command::Chains(a) => chains(a, limits),
        Command::Supersat(a) => supersat(a, limits),
        Command::Containers(a) => containers(a, limits),
        Command::Asym(a) => asym(a),
        Command::LevelGraph(a) => level_graph(a, limits),
        Command::Distribution(a) => distribution(a, limits),
    }
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(String::new, T::to_string)
}

fn count(a: &CountArgs, limits: &Limits) -> Result<Outcome> {
    let dim = match (a.dim, a.d) {
        (Some(dim), _) => dim,
        (None, Some(d)) => d + 1,
        (None, None) => return Err(Error::OutOfRange("one of --D or --d is required".into())),
    };
    let bx = GridBox::new(a.n, dim)?;
    let count = match a.d {
        Some(d) => partition_count(d, a.n, limits)?,
        None => count_downsets(&bx, limits)?,
    };
    let middle = bx.middle_layer_size();
    // 2^N antichains live inside the middle layer
    let lower_ok = u64::try_from(&middle).is_ok_and(|m| count.bits() > m);
    let n3 = match a.d {
        Some(d) => Some(erdos_szekeres_n3(d, a.n, limits)?),
        None => None,
    };
    let certified = if a.certified {
        let r = certified_upper_bound(&bx, &ContainerParams::standard(&bx), false, limits)?;
        Some(r.certified_log2_upper)
    } else {
        None
    };
    let upper_ok = certified.as_ref().map(|c| count_within_log2(&count, c));
    let violation = !lower_ok || upper_ok == Some(false);
    let json = json!({
        "n": a.n,
        "dim": dim,
        "d": a.d,
        "count": count.to_string(),
        "middle_layer": middle.to_string(),
        "trivial_lower_log2": middle.to_string(),
        "lower_bound_holds": lower_ok,
        "erdos_szekeres_n3": n3.as_ref().map(ToString::to_string),
        "certified_log2_upper": certified.as_ref().map(fmt_ratio),
        "upper_bound_holds": upper_ok,
    });
    let fields = vec![
        ("n", a.n.to_string()),
        ("D", dim.to_string()),
        ("d", opt(&a.d)),
        ("count", count.to_string()),
        ("middle_layer", middle.to_string()),
        ("trivial_lower_log2", middle.to_string()),
        ("erdos_szekeres_n3", opt(&n3)),
        ("certified_log2_upper", certified.as_ref().map(fmt_ratio).unwrap_or_default()),
    ];
    Ok(Outcome::flat(fields, json, violation))
}

fn chains(a: &ChainsArgs, limits: &Limits) -> Result<Outcome> {
    let bx = GridBox::new(a.n, a.dim)?;
    let sampler = ChainSampler::new(&bx, limits)?;
    let sizes = bx.level_sizes();
    let out_of_scope = sampler.out_of_scope();
    let mut csv = String::from("trial,seed,chains,bound,partition_ok,bound_ok,sizes_ok,closest_ok\n");
    let mut counts = Vec::new();
    let (mut partition_fail, mut bound_fail, mut sizes_fail, mut closest_fail) = (0u64, 0u64, 0u64, 0u64);
    let mut first = None;
    for t in 0..a.trials {
        let seed = trial_seed(a.seed, t);
        let dec = sampler.sample(seed);
        let p = dec.verify_partition().is_ok();
        let b = dec.check_chain_count_bound();
        let s = dec.verify_matching_sizes(&sizes).is_ok();
        let c = dec.verify_closest_ranks().is_ok();
        partition_fail += u64::from(!p);
        bound_fail += u64::from(!b);
        sizes_fail += u64::from(!s);
        closest_fail += u64::from(!c);
        let _ = writeln!(
            csv,
            "{t},{seed},{},{},{p},{b},{s},{c}",
            dec.len(),
            fmt_ratio(&dec.chain_count_bound())
        );
        counts.push(dec.len() as u64);
        if t == 0 && a.emit {
            first = Some(dec);
        }
    }
    let bound = grid_antichains::chains::chain_count_bound(&bx);
    let max = counts.iter().copied().max();
    let min = counts.iter().copied().min();
    let mean = (!counts.is_empty()).then(|| ratio(counts.iter().sum::<u64>(), counts.len() as u64));
    let margin = max.map(|m| &bound - int(m));
    // Outside the scaled regime's range only the partition itself is owed.
    let violation = partition_fail > 0 || (!out_of_scope && bound_fail + sizes_fail + closest_fail > 0);
    let plans: Vec<Value> = sampler
        .levels()
        .iter()
        .map(|l| serde_json::to_value(&l.plan).unwrap_or(Value::Null))
        .collect();
    let mut json = json!({
        "n": a.n,
        "dim": a.dim,
        "trials": a.trials,
        "middle_layer": bx.middle_layer_size().to_string(),
        "bound": fmt_ratio(&bound),
        "min_chains": min,
        "max_chains": max,
        "mean_chains": mean.as_ref().map(fmt_ratio),
        "margin": margin.as_ref().map(fmt_ratio),
        "out_of_scope": out_of_scope,
        "partition_failures": partition_fail,
        "bound_failures": bound_fail,
        "size_failures": sizes_fail,
        "closest_rank_failures": closest_fail,
        "levels": plans,
    });
    let mut text = format!(
        "box [{}]^{}: {} samples, chains min {} max {} mean {}, bound {}\n\
         failures: partition {partition_fail}, bound {bound_fail}, sizes {sizes_fail}, closest rank {closest_fail}\n",
        a.n,
        a.dim,
        a.trials,
        opt(&min),
        opt(&max),
        mean.as_ref().map(fmt_ratio).unwrap_or_default(),
        fmt_ratio(&bound)
    );
    if out_of_scope {
        text.push_str("out of scope: some scaled level has D <= 3 and uses a fixed maximum matching\n");
    }
    if let Some(dec) = first {
        text.push_str(&dec.to_text());
        json["first_sample"] = json!(dec
            .chains()
            .iter()
            .map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>());
    }
    Ok(Outcome {
        json,
        csv,
        text,
        violation,
    })
}

fn supersat(a: &SupersatArgs, limits: &Limits) -> Result<Outcome> {
    let bx = GridBox::new(a.n, a.dim)?;
    let small = bx.total_points_usize().is_some_and(|t| t <= 20);
    let exhaustive = if small { Some(exhaustive_audit(&bx, a.a, limits)?) } else { None };
    let random = random_audit(&bx, a.a, a.trials, a.seed, limits)?;
    let violation = !random.passed() || exhaustive.as_ref().is_some_and(|e| !e.passed());
    let mut csv = String::new();
    if let Some(e) = &exhaustive {
        let _ = writeln!(
            csv,
            "# exhaustive: {} sets, {} active, {} violations",
            e.sets_checked, e.active, e.violations
        );
    }
    csv.push_str(supersat::CSV_HEADER);
    csv.push('\n');
    for r in &random.reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let summary = |s: &supersat::AuditSummary| {
        format!(
            "{} audit, a = {}: {} sets, {} with b > 0, {} violations, min margin {}\n",
            s.mode,
            s.a,
            s.sets_checked,
            s.active,
            s.violations,
            s.min_margin.as_ref().map(fmt_ratio).unwrap_or_else(|| "-".into())
        )
    };
    let mut text = format!(
        "box [{}]^{}, threshold a(1 + 3n/D)N = {}\n",
        a.n,
        a.dim,
        fmt_ratio(&supersat::threshold(&bx, a.a))
    );
    if let Some(e) = &exhaustive {
        text.push_str(&summary(e));
    }
    text.push_str(&summary(&random));
    let json = json!({
        "n": a.n,
        "dim": a.dim,
        "a": a.a,
        "threshold": fmt_ratio(&supersat::threshold(&bx, a.a)),
        "exhaustive": exhaustive,
        "random": random,
    });
    Ok(Outcome {
        json,
        csv,
        text,
        violation,
    })
}

/// Parses `d:m,d:m,…`.
fn parse_rounds(bx: &GridBox, text: &str) -> Result<ContainerParams> {
    let rounds = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (d, m) = part
                .split_once(':')
                .ok_or_else(|| Error::OutOfRange(format!("round `{part}` is not of the form d:m")))?;
            let parse = |s: &str| {
                parse_ratio(s.trim()).ok_or_else(|| Error::OutOfRange(format!("`{s}` is not a rational")))
            };
            Ok(Round {
                d: parse(d)?,
                m: parse(m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ContainerParams::new(from_biguint(&bx.total_points()), rounds)
}

fn containers(a: &ContainersArgs, limits: &Limits) -> Result<Outcome> {
    let bx = GridBox::new(a.n, a.dim)?;
    let params = match &a.rounds {
        Some(text) => parse_rounds(&bx, text)?,
        None => ContainerParams::standard(&bx),
    };
    let report = certified_upper_bound(&bx, &params, true, limits)?;
    let fits = bx.total_points_usize().is_some_and(|t| t <= 128);
    let premises = if fits {
        Some(audit_premises(&bx, &params, a.trials, a.seed, limits)?)
    } else {
        None
    };
    let family = if a.family {
        let fam = build_containers(&bx, &params, limits)?;
        let items = fam.check_items();
        let uncovered = match fam.uncovered_antichain(limits) {
            Ok(u) => Some(u),
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        };
        Some((fam, items, uncovered))
    } else {
        None
    };
    let premise_violations: u64 = premises.iter().flatten().map(|p| p.violations).sum();
    let violation = !report.above_middle_layer
        || report.above_exact == Some(false)
        || premise_violations > 0
        || family.as_ref().is_some_and(|(_, items, uncovered)| {
            !items.count_ok || !items.size_ok || matches!(uncovered, Some(Some(_)))
        });
    let mut json = json!({
        "bound": report,
        "premises": premises,
    });
    let fields = vec![
        ("n", a.n.to_string()),
        ("D", a.dim.to_string()),
        ("middle_layer", report.middle_layer.to_string()),
        ("log2_container_count_bound", fmt_ratio(&report.log2_container_count_bound)),
        ("max_container_size_bound", fmt_ratio(&report.max_container_size_bound)),
        ("certified_log2_upper", fmt_ratio(&report.certified_log2_upper)),
        ("exact_count", opt(&report.exact_count)),
        ("exact_log2", opt(&report.exact_log2)),
        ("above_middle_layer", report.above_middle_layer.to_string()),
        ("above_exact", opt(&report.above_exact)),
        ("premise_violations", premise_violations.to_string()),
    ];
    let mut out = Outcome::flat(fields, Value::Null, violation);
    if let Some((fam, items, uncovered)) = &family {
        json["family"] = json!({
            "items": items,
            "complete": uncovered.as_ref().map(Option::is_none),
            "uncovered": uncovered.clone().flatten().map(|u| u.iter().map(ToString::to_string).collect::<Vec<_>>()),
            "containers": fam.containers().iter().map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        let _ = writeln!(
            out.text,
            "family: {} containers from {} fingerprints (bound {}), largest {} (bound {}), complete: {}",
            items.containers,
            items.fingerprints,
            items.count_bound,
            items.max_container_size,
            items.size_bound,
            uncovered.as_ref().map_or("unknown".into(), |u| u.is_none().to_string())
        );
    }
    out.json = json;
    Ok(out)
}

fn asym(a: &AsymArgs) -> Result<Outcome> {
    let dims: Vec<usize> = match a.dim {
        Some(d) => vec![d],
        None => (a.from..=a.to).step_by(a.step.max(1)).collect(),
    };
    let reports = dims
        .iter()
        .map(|&d| asymptotic_report(a.n, d, None))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = format!("{}\n", asymptotics::CSV_HEADER);
    let mut text = String::new();
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
        let _ = writeln!(
            text,
            "n={} D={}: exact {} estimate {} relative error {}",
            r.n,
            r.dim,
            r.middle_layer,
            r.clt_estimate.to_scientific(12),
            r.relative_error.to_scientific(6)
        );
    }
    Ok(Outcome {
        json: json!({ "n": a.n, "rows": reports }),
        csv,
        text,
        violation: false,
    })
}

fn level_graph(a: &LevelArgs, limits: &Limits) -> Result<Outcome> {
    let bx = GridBox::new(a.n, a.dim)?;
    let g = LevelGraph::build(&bx, a.level, limits)?;
    let mut csv = String::from("lower,upper,coord,color,weight\n");
    let mut edges = Vec::new();
    for e in g.edges() {
        let (lo, up) = (&g.lower()[e.lower], &g.upper()[e.upper]);
        let _ = writeln!(csv, "\"{lo}\",\"{up}\",{},{},{}", e.coord, e.color, e.weight);
        edges.push(json!({
            "lower": lo.to_string(),
            "upper": up.to_string(),
            "coord": e.coord,
            "color": e.color,
            "weight": e.weight,
        }));
    }
    let violation = !g.check_degree_identity();
    Ok(Outcome {
        json: json!({
            "n": a.n,
            "dim": a.dim,
            "level": a.level,
            "delta": g.delta(),
            "lower_size": g.lower().len(),
            "upper_size": g.upper().len(),
            "degree_identity_holds": !violation,
            "edges": edges,
        }),
        csv,
        text: g.to_edge_list(),
        violation,
    })
}

fn distribution(a: &LevelArgs, limits: &Limits) -> Result<Outcome> {
    let bx = GridBox::new(a.n, a.dim)?;
    let lvl = LevelDistribution::build(&bx, a.level, limits)?;
    let record = lvl.distribution.to_record();
    let edge_names: Vec<String> = lvl
        .graph
        .edges()
        .iter()
        .map(|e| format!("{}-{}", lvl.graph.lower()[e.lower], lvl.graph.upper()[e.upper]))
        .collect();
    let mut csv = String::from("probability,edges\n");
    let mut text = format!(
        "level {} ({:?}): {} atoms, matchings of size {}\n",
        a.level,
        lvl.plan.regime,
        record.atoms.len(),
        record.size
    );
    for atom in &record.atoms {
        let names: Vec<&str> = atom.edges.iter().map(|&e| edge_names[e].as_str()).collect();
        let _ = writeln!(csv, "{},{}", atom.probability, names.join(" "));
        let _ = writeln!(text, "{} {}", atom.probability, names.join(" "));
    }
    Ok(Outcome {
        json: json!({
            "n": a.n,
            "dim": a.dim,
            "plan": lvl.plan,
            "edges": edge_names,
            "distribution": record,
        }),
        csv,
        text,
        violation: false,
    })
}
