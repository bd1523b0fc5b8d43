//! Line based stepper over a dynamic causality structure.

use std::io::{self, BufRead, Write};

use dyncaus_core::dynamic::Delta;
use dyncaus_core::{Dces, DcesState, Error, EventId, Relation};
use serde_json::json;

const HELP: &str = "commands: EVENT | fire EVENT | whatif EVENT | undo | enabled | show | show caus | help | quit";

fn pairs(r: &Relation) -> String {
    r.iter().map(|(c, t)| format!("{c}->{t}")).collect::<Vec<_>>().join(" ")
}

struct Stepper<'a> {
    dces: &'a Dces,
    history: Vec<DcesState>,
}

impl Stepper<'_> {
    fn current(&self) -> &DcesState {
        self.history.last().expect("history starts with the initial state")
    }

    fn enabled(&self) -> Result<Vec<EventId>, Error> {
        Ok(self.dces.enabled_steps(self.current())?.into_keys().collect())
    }

    fn describe(&self, before: Option<&DcesState>, now: &DcesState, json: bool) -> Result<String, Error> {
        let enabled: Vec<EventId> = self.dces.enabled_steps(now)?.into_keys().collect();
        let delta = before.map(|b| Delta::between(b, now)).unwrap_or_default();
        if json {
            let v = json!({ "config": now.config, "caus": now.caus, "enabled": enabled, "delta": delta });
            return Ok(format!("{v}\n"));
        }
        let names: Vec<&str> = now.config.iter().map(EventId::as_str).collect();
        let mut t = format!("config {{{}}}\n", names.join(","));
        if !delta.added.is_empty() {
            t += &format!("added {}\n", pairs(&delta.added));
        }
        if !delta.dropped.is_empty() {
            t += &format!("dropped {}\n", pairs(&delta.dropped));
        }
        let names: Vec<&str> = enabled.iter().map(EventId::as_str).collect();
        t += &format!("enabled {}\n", names.join(" "));
        Ok(t)
    }

    /// Output for one command, or a diagnostic.
    fn command(&mut self, line: &str, json: bool) -> Result<Option<String>, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let event = |name: &str| EventId::new(name).map_err(|e| e.to_string());
        let fire = |s: &Self, name: &str| -> Result<DcesState, String> {
            s.dces.fire(s.current(), &event(name)?).map_err(|e| match e {
                Error::StepRejected(c) => format!("{name} is not enabled (condition {c})"),
                e => e.to_string(),
            })
        };
        let out = match words.as_slice() {
            [] => return Ok(None),
            ["help"] => format!("{HELP}\n"),
            ["undo"] => {
                if self.history.len() == 1 {
                    return Err("nothing to undo at the initial state".into());
                }
                self.history.pop();
                self.describe(None, self.current(), json).map_err(|e| e.to_string())?
            }
            ["enabled"] => {
                let enabled = self.enabled().map_err(|e| e.to_string())?;
                if json {
                    format!("{}\n", json!(enabled))
                } else {
                    let names: Vec<&str> = enabled.iter().map(EventId::as_str).collect();
                    format!("{}\n", names.join(" "))
                }
            }
            ["show"] => self.describe(None, self.current(), json).map_err(|e| e.to_string())?,
            ["show", "caus"] => {
                let caus = &self.current().caus;
                if json {
                    format!("{}\n", json!(caus))
                } else {
                    caus.iter().map(|(c, t)| format!("{c} -> {t}\n")).collect()
                }
            }
            ["whatif", name] => {
                let next = fire(self, name)?;
                self.describe(Some(self.current()), &next, json).map_err(|e| e.to_string())?
            }
            ["fire", name] | [name] => {
                let next = fire(self, name)?;
                self.history.push(next);
                let n = self.history.len();
                self.describe(Some(&self.history[n - 2]), self.current(), json).map_err(|e| e.to_string())?
            }
            _ => return Err(format!("unknown command {line:?}; {HELP}")),
        };
        Ok(Some(out))
    }
}

/// Reads commands until end of input or `quit`. Diagnostics go to the
/// error stream and do not end the session.
pub fn run(dces: &Dces, input: impl BufRead, out: &mut impl Write, json: bool) -> io::Result<()> {
    let mut s = Stepper { dces, history: vec![dces.initial_state()] };
    let first = s.describe(None, s.current(), json).map_err(io::Error::other)?;
    out.write_all(first.as_bytes())?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line == "quit" || line == "exit" {
            break;
        }
        match s.command(line, json) {
            Ok(Some(text)) => out.write_all(text.as_bytes())?,
            Ok(None) => {}
            Err(msg) => eprintln!("error: {msg}"),
        }
        out.flush()?;
    }
    Ok(())
}
