//! Weighted-MaxSAT descent over the binary bound counter. The hard part of
//! the weighted formula admits exactly the schedules whose peak fits under
//! the bit-spelled bound, and the soft bits make the bound the cost, so the
//! optimum cost is the optimal peak. When an external solver command is
//! configured its answer is ingested as an incumbent — after the model is
//! verified against the hard clauses and its claimed cost recomputed — and
//! the embedded descent below still performs the closing unsatisfiable
//! call, so external output is never trusted for the proof itself.

use std::io::Write as _;
use std::process::Stdio;
use std::time::{Duration, Instant};

use crate::cnf::{encode_pb_leq, lit, write_wcnf, Lit, WcnfDialect, WcnfFormula};
use crate::encode::{encode, peak::peak_layer_binary, EncoderKind};
use crate::error::{Error, Result};
use crate::solver::{new_session, SolveOutcome};

use super::{model_schedule, push_delta, run_init, InitEnd, IterationResult, Phase, Run};

pub(super) fn drive(run: &mut Run) -> Result<()> {
    let mut base = encode(run.inst, EncoderKind::Compact, run.opts.encode)?;
    let mut warmup = new_session(run.opts.backend, run.opts.seed)?;
    warmup.add_formula(&base.formula);
    let end = run_init(run, &base, warmup.as_mut())?;
    run.retire(warmup.as_ref());
    if !matches!(end, InitEnd::Exhausted) {
        return Ok(());
    }
    let wcnf = peak_layer_binary(&mut base, run.bounds.lower, run.best_peak())?;
    if let Some(cmd) = &run.opts.maxsat_cmd {
        match run_external(cmd, &wcnf, WcnfDialect::default(), run.deadline)? {
            ExternalOutcome::Optimal { model, cost }
            | ExternalOutcome::Satisfiable { model, cost } => {
                let (peak, sol) = model_schedule(&base, &model)?;
                debug_assert!(peak <= cost, "bound bits dominate the decoded peak");
                run.improve(peak, sol);
                run.log(Phase::Search, Some(cost), None, IterationResult::Sat { peak });
            }
            ExternalOutcome::Unsat => {
                return Err(Error::Protocol {
                    msg: "solver reported unsatisfiable hard clauses, but a schedule is known"
                        .into(),
                    raw: String::new(),
                });
            }
            ExternalOutcome::TimedOut => {
                run.timed_out = true;
                run.log(Phase::Search, None, None, IterationResult::TimedOut);
                return Ok(());
            }
        }
    }
    // Embedded descent on the bound value; doubles as the machine check on
    // whatever the external solver claimed.
    let bits: Vec<(u64, Lit)> = (0..base.vars.bin_count())
        .map(|b| (1u64 << b, lit(base.vars.bin(b).unwrap(), true)))
        .collect();
    let mut mirror = wcnf.hard.clone();
    let mut session = new_session(run.opts.backend, run.opts.seed.wrapping_add(1))?;
    session.add_formula(&wcnf.hard);
    loop {
        let target = run.best_peak() - 1;
        let from = mirror.clauses().len();
        encode_pb_leq(&mut mirror, &bits, target as i64);
        push_delta(session.as_mut(), &mirror, from);
        match session.solve(run.deadline) {
            SolveOutcome::Sat(model) => {
                let (peak, sol) = model_schedule(&base, &model)?;
                debug_assert!(peak <= target, "bound bits dominate the decoded peak");
                run.improve(peak, sol);
                run.log(
                    Phase::Search,
                    Some(target),
                    None,
                    IterationResult::Sat { peak },
                );
            }
            SolveOutcome::Unsat => {
                run.closing_unsat = true;
                run.log(Phase::Closing, Some(target), None, IterationResult::Unsat);
                break;
            }
            SolveOutcome::TimedOut => {
                run.timed_out = true;
                run.log(Phase::Search, Some(target), None, IterationResult::TimedOut);
                break;
            }
        }
    }
    run.retire(session.as_ref());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum ExternalOutcome {
    Optimal { model: Vec<bool>, cost: u64 },
    Satisfiable { model: Vec<bool>, cost: u64 },
    Unsat,
    TimedOut,
}

fn excerpt(s: &str) -> String {
    const LIMIT: usize = 400;
    if s.len() <= LIMIT {
        s.trim_end().to_string()
    } else {
        let mut end = LIMIT;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &s[..end])
    }
}

fn protocol(msg: impl Into<String>, raw: &str) -> Error {
    Error::Protocol {
        msg: msg.into(),
        raw: excerpt(raw),
    }
}

/// Split a command template into argv, honoring single and double quotes.
/// Every `{file}` occurrence is replaced by `path`; templates that never
/// mention it get the path appended as the final argument.
pub(super) fn split_command(template: &str, path: &str) -> Result<Vec<String>> {
    let mut args: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut in_token = false;
    let mut quote: Option<char> = None;
    for ch in template.chars() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => cur.push(ch),
            None => match ch {
                '\'' | '"' => {
                    quote = Some(ch);
                    in_token = true;
                }
                c if c.is_whitespace() => {
                    if in_token {
                        args.push(std::mem::take(&mut cur));
                        in_token = false;
                    }
                }
                c => {
                    cur.push(c);
                    in_token = true;
                }
            },
        }
    }
    if quote.is_some() {
        return Err(Error::InvalidArgument(
            "unterminated quote in solver command".into(),
        ));
    }
    if in_token {
        args.push(cur);
    }
    if args.is_empty() {
        return Err(Error::InvalidArgument("empty solver command".into()));
    }
    let mut mentioned = false;
    for a in &mut args {
        if a.contains("{file}") {
            *a = a.replace("{file}", path);
            mentioned = true;
        }
    }
    if !mentioned {
        args.push(path.to_string());
    }
    Ok(args)
}

/// Decode a `v`-line model: either one bitstring whose length is the
/// variable count (new-format solvers) or signed DIMACS literals.
fn parse_model(tokens: &[String], nvars: u32) -> std::result::Result<Vec<bool>, String> {
    if tokens.is_empty() {
        return Err("status promised a model but no v line followed".into());
    }
    let mut model = vec![false; nvars as usize + 1];
    let concat_len: usize = tokens.iter().map(|t| t.len()).sum();
    let bitstring = concat_len == nvars as usize
        && tokens
            .iter()
            .all(|t| !t.is_empty() && t.bytes().all(|b| b == b'0' || b == b'1'));
    if bitstring {
        let mut v = 1;
        for t in tokens {
            for b in t.bytes() {
                model[v] = b == b'1';
                v += 1;
            }
        }
        return Ok(model);
    }
    for t in tokens {
        let x: i64 = t
            .parse()
            .map_err(|_| format!("unparseable literal token {t:?}"))?;
        if x == 0 {
            continue;
        }
        let var = x.unsigned_abs();
        if var > u64::from(nvars) {
            return Err(format!("literal {x} out of range ({nvars} variables)"));
        }
        model[var as usize] = x > 0;
    }
    Ok(model)
}

/// Interpret solver output: `s` status, last `o` cost, accumulated `v`
/// model. Models are verified against the hard clauses and costs
/// recomputed; any disagreement with the solver's claims is an error, never
/// silently accepted.
fn parse_output(stdout: &str, wcnf: &WcnfFormula) -> Result<ExternalOutcome> {
    let nvars = wcnf.hard.var_count();
    let mut status: Option<String> = None;
    let mut claimed: Option<u64> = None;
    let mut tokens: Vec<String> = Vec::new();
    for line in stdout.lines() {
        let line = line.trim_end();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("o ") {
            if let Ok(v) = rest.trim().parse::<u64>() {
                claimed = Some(v);
            }
        } else if let Some(rest) = line.strip_prefix("v ") {
            tokens.extend(rest.split_whitespace().map(str::to_string));
        }
    }
    let Some(status) = status else {
        return Err(protocol("solver printed no status line", stdout));
    };
    match status.as_str() {
        "UNSATISFIABLE" => Ok(ExternalOutcome::Unsat),
        "OPTIMUM FOUND" | "SATISFIABLE" => {
            let model = parse_model(&tokens, nvars).map_err(|m| protocol(m, stdout))?;
            if !wcnf.hard.satisfied_by(&model) {
                return Err(protocol("reported model violates hard clauses", stdout));
            }
            let cost = wcnf.cost_of_model(&model);
            if let Some(c) = claimed {
                if c != cost {
                    return Err(protocol(
                        format!("solver claimed cost {c} but the model costs {cost}"),
                        stdout,
                    ));
                }
            }
            if status == "OPTIMUM FOUND" {
                Ok(ExternalOutcome::Optimal { model, cost })
            } else {
                Ok(ExternalOutcome::Satisfiable { model, cost })
            }
        }
        other => Err(protocol(format!("unrecognized status {other:?}"), stdout)),
    }
}

/// Write the problem to a temp file, run the external command against it,
/// and interpret the output. The process is killed at the deadline; a
/// verified model printed before the kill still counts (as satisfiable,
/// not optimal). Stdout and stderr are drained on their own threads so a
/// chatty solver can never deadlock on a full pipe.
pub(super) fn run_external(
    cmd: &str,
    wcnf: &WcnfFormula,
    dialect: WcnfDialect,
    deadline: Option<Instant>,
) -> Result<ExternalOutcome> {
    let mut file = tempfile::Builder::new()
        .prefix("peak-")
        .suffix(".wcnf")
        .tempfile()?;
    write_wcnf(wcnf, dialect, file.as_file_mut())?;
    file.as_file_mut().flush()?;
    let path = file
        .path()
        .to_str()
        .ok_or_else(|| Error::InvalidArgument("temp path is not valid UTF-8".into()))?
        .to_string();
    let args = split_command(cmd, &path)?;
    let mut child = std::process::Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Config(format!("failed to launch solver {:?}: {e}", args[0])))?;
    let out_pipe = child.stdout.take().expect("stdout was piped");
    let err_pipe = child.stderr.take().expect("stderr was piped");
    fn drain(mut pipe: impl std::io::Read + Send + 'static) -> std::thread::JoinHandle<String> {
        std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = pipe.read_to_end(&mut buf);
            String::from_utf8_lossy(&buf).into_owned()
        })
    }
    let out_thread = drain(out_pipe);
    let err_thread = drain(err_pipe);
    let killed = loop {
        match child.try_wait()? {
            Some(_) => break false,
            None => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    let _ = child.kill();
                    let _ = child.wait();
                    break true;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    };
    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();
    if killed {
        return Ok(match parse_output(&stdout, wcnf) {
            Ok(ExternalOutcome::Optimal { model, cost })
            | Ok(ExternalOutcome::Satisfiable { model, cost }) => {
                ExternalOutcome::Satisfiable { model, cost }
            }
            _ => ExternalOutcome::TimedOut,
        });
    }
    parse_output(&stdout, wcnf).map_err(|e| match e {
        Error::Protocol { msg, raw } if raw.is_empty() && !stderr.trim().is_empty() => {
            Error::Protocol {
                msg,
                raw: excerpt(&stderr),
            }
        }
        e => e,
    })
}
