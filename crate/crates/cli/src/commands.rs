use gentropy::acceptance::run_suite;
use gentropy::dynent::{
    entropy_trace_partial, sandwich_check, standard_subsequence_trace, EntropyTrace, SymbolicSystem,
};
use gentropy::gfun::{
    estimate_elasticity, estimate_ratio_limits, estimate_u, parse_g_spec, DEFAULT_DEPTH,
};
use gentropy::systems::{build_r_for_target, ConstructionState};
use gentropy::towers::{lower_bound_schedule, verify_schedule};
use gentropy::GFunction;
use serde_json::{json, Value};

use crate::output::{csv_field, real, Artifact};
use crate::{Command, Failure, OutputArgs, SystemArgs};

const STANDARD_EXAMPLE: &str = "stdexample";

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Classify { g, out } => classify(&g, &out),
        Command::Trace { g, system, out } => trace(&g, &system, &out),
        Command::Sandwich {
            g1,
            g2,
            system,
            out,
        } => sandwich(&g1, &g2, &system, &out),
        Command::Construct {
            g,
            gamma,
            stages,
            out,
        } => construct(&g, gamma, stages as usize, &out),
        Command::Towers { g, m, stages, out } => towers(&g, m, stages as usize, &out),
        Command::Verify { suite, out } => verify(&suite, &out),
    }
}

fn config(command: &str, out: &OutputArgs, fields: Value) -> Value {
    let mut c = json!({ "command": command, "format": out.format(), "seed": out.seed });
    if let (Value::Object(c), Value::Object(f)) = (&mut c, fields) {
        c.extend(f);
    }
    c
}

fn classify(spec: &str, out: &OutputArgs) -> Result<(), Failure> {
    let g = parse_g_spec(spec)?;
    let limits = estimate_ratio_limits(&g, &GFunction::shannon(), DEFAULT_DEPTH, 2)?;
    let u2 = estimate_u(&g, 2.0, DEFAULT_DEPTH)?;
    let e = estimate_elasticity(&g, DEFAULT_DEPTH)?;
    println!("g           {}", g.name());
    println!("class       {}", limits.classification.as_str());
    println!("C_i         {}", limits.liminf_est);
    println!("C^s         {}", limits.limsup_est);
    println!("U(2)        {u2:.6}");
    println!("elasticity  {e:.6}");
    let rows = [
        ("C_i", limits.liminf_est),
        ("C_s", limits.limsup_est),
        ("U2", u2),
        ("elasticity", e),
    ];
    let mut csv = format!("quantity,value\nclass,{}\n", limits.classification.as_str());
    for (k, v) in rows {
        csv.push_str(&format!("{k},{v:e}\n"));
    }
    let art = Artifact {
        config: config("classify", out, json!({ "g": spec })),
        body: json!({
            "g": g.name(),
            "ratio_limits": limits,
            "u2": real(u2),
            "elasticity": real(e),
        }),
        csv,
    };
    art.write(out.output.as_deref(), out.format())
}

fn standard_state(sys: &SystemArgs, g: &GFunction) -> Result<ConstructionState, Failure> {
    let gamma = sys
        .gamma
        .ok_or_else(|| Failure::Usage("stdexample needs --gamma".into()))?;
    Ok(build_r_for_target(
        g,
        gamma,
        sys.stages.unwrap_or(3) as usize,
    )?)
}

/// The system, building the standard example against `g` when requested.
fn system(sys: &SystemArgs, g: &GFunction) -> Result<SymbolicSystem, Failure> {
    if sys.system.trim() == STANDARD_EXAMPLE {
        Ok(SymbolicSystem::Standard(Box::new(standard_state(sys, g)?)))
    } else {
        if sys.gamma.is_some() || sys.stages.is_some() {
            return Err(Failure::Usage(
                "--gamma and --stages apply to stdexample only".into(),
            ));
        }
        Ok(SymbolicSystem::parse(&sys.system)?)
    }
}

fn trace_of(system: &SymbolicSystem, g: &GFunction, n_max: u64) -> Result<EntropyTrace, Failure> {
    Ok(match system {
        SymbolicSystem::Standard(st) => standard_subsequence_trace(st, g)?,
        _ => entropy_trace_partial(system, g, n_max)?,
    })
}

fn truncation(t: &EntropyTrace) -> Result<(), Failure> {
    match &t.truncated {
        Some(tr) => Err(Failure::Numeric(format!(
            "{} truncated after n = {}: {}",
            t.g_name, tr.deepest_valid, tr.reason
        ))),
        None => Ok(()),
    }
}

fn trace(spec: &str, sys: &SystemArgs, out: &OutputArgs) -> Result<(), Failure> {
    let g = parse_g_spec(spec)?;
    let system = system(sys, &g)?;
    let t = trace_of(&system, &g, sys.n_max)?;
    if let Some(last) = t.values.last() {
        println!(
            "n = {}  H_n = {:e}  H_n/n = {:e}",
            last.n, last.h, last.rate
        );
    }
    println!("liminf {}  limsup {}", t.liminf_est, t.limsup_est);
    let art = Artifact {
        config: config("trace", out, json!({ "g": spec, "system": sys })),
        body: json!({ "trace": t }),
        csv: t.to_csv(),
    };
    // Partial traces are written before the failure is reported.
    art.write(out.output.as_deref(), out.format())?;
    truncation(&t)
}

fn sandwich(s1: &str, s2: &str, sys: &SystemArgs, out: &OutputArgs) -> Result<(), Failure> {
    let g1 = parse_g_spec(s1)?;
    let g2 = parse_g_spec(s2)?;
    if sys.system.trim() == STANDARD_EXAMPLE {
        return Err(Failure::Usage(
            "sandwich needs a Bernoulli or Sturmian system".into(),
        ));
    }
    let system = system(sys, &g1)?;
    let r = sandwich_check(&system, &g1, &g2, sys.n_max)?;
    println!(
        "C_i {}  C^s {}  h1 {}  h2 {}",
        r.c_lower, r.c_upper, r.h1, r.h2
    );
    println!(
        "lower bound {}  upper bound {}",
        ok(r.lower_ok),
        ok(r.upper_ok)
    );
    let mut csv = String::from("n,H1_n,H1_n_over_n,H2_n,H2_n_over_n\n");
    for (a, b) in r.trace1.values.iter().zip(&r.trace2.values) {
        csv.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            a.n, a.h, a.rate, b.h, b.rate
        ));
    }
    let art = Artifact {
        config: config(
            "sandwich",
            out,
            json!({ "g1": s1, "g2": s2, "system": sys }),
        ),
        body: json!({ "report": r, "passed": r.passed() }),
        csv,
    };
    art.write(out.output.as_deref(), out.format())?;
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Check("sandwich bounds violated".into()))
    }
}

fn construct(spec: &str, gamma: f64, stages: usize, out: &OutputArgs) -> Result<(), Failure> {
    let g = parse_g_spec(spec)?;
    let st = build_r_for_target(&g, gamma, stages)?;
    let mut csv = String::from("stage,N,log2_R,gamma_ratio,rejected\n");
    for (i, s) in st.stages.iter().enumerate() {
        println!(
            "stage {}  N = {}  log2 R = {}  γ_N/γ = {:.6}",
            i + 1,
            s.n,
            s.r.log2,
            s.gamma_ratio
        );
        csv.push_str(&format!(
            "{},{},{:e},{:e},{}\n",
            i + 1,
            s.n,
            s.r.log2,
            s.gamma_ratio,
            s.rejected
        ));
    }
    let art = Artifact {
        config: config(
            "construct",
            out,
            json!({ "g": spec, "gamma": gamma, "stages": stages }),
        ),
        body: json!({ "state": st }),
        csv,
    };
    art.write(out.output.as_deref(), out.format())
}

fn towers(spec: &str, m: f64, stages: usize, out: &OutputArgs) -> Result<(), Failure> {
    let g = parse_g_spec(spec)?;
    let s = lower_bound_schedule(&g, m, stages)?;
    let check = verify_schedule(&g, &s)?;
    let mut csv = String::from("stage,delta,N,ratio,bound\n");
    for st in &s.stages {
        println!(
            "stage {}  δ = {:e}  N = {}  bound = {:.6}",
            st.index, st.delta, st.n, st.bound
        );
        csv.push_str(&format!(
            "{},{:e},{},{:e},{:e}\n",
            st.index, st.delta, st.n, st.ratio, st.bound
        ));
    }
    println!(
        "tail bound {:.6}  verification {}",
        s.tail_bound(),
        ok(check.passed())
    );
    let art = Artifact {
        config: config(
            "towers",
            out,
            json!({ "g": spec, "m": m, "stages": stages }),
        ),
        body: json!({
            "schedule": s,
            "tail_bound": real(s.tail_bound()),
            "check": check,
            "passed": check.passed(),
        }),
        csv,
    };
    art.write(out.output.as_deref(), out.format())?;
    if check.passed() {
        Ok(())
    } else {
        Err(Failure::Check(
            "tower schedule failed re-verification".into(),
        ))
    }
}

fn verify(suite: &str, out: &OutputArgs) -> Result<(), Failure> {
    let results = run_suite(suite, out.seed)?;
    let mut csv = String::from("id,name,passed,detail\n");
    let mut rows = Vec::new();
    for r in &results {
        println!("{}", r.line());
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.id,
            r.name,
            r.passed,
            csv_field(&r.detail)
        ));
        // Timings stay out of the artifact so reruns are byte-identical.
        rows.push(json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    let art = Artifact {
        config: config("verify", out, json!({ "suite": suite })),
        body: json!({ "criteria": rows, "failed": failed }),
        csv,
    };
    art.write(out.output.as_deref(), out.format())?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} criteria failed")))
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}
