//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to
//! stderr. Exit status: 0 clean, 1 findings (violations, undefined terms,
//! malformed statements), 2 usage or validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mbsr_core::glossary::{find_undefined, term_usage};
use mbsr_core::metrics::calculate;
use mbsr_core::rules::{apply_verdicts, build_matrix, check_scope, EvidenceField, RuleResult};
use mbsr_core::{analyze_statement, Clock, ExpressionKind, FixedClock, LinkKind, Model, SubjectArticle, Verdict};

use crate::config::{load_catalog, CONFIG_ENV};
use crate::corpus::load_corpus;
use crate::history;
use crate::relmap;
use crate::report::{generate_report, Template};
use crate::reqif::{export_reqif, Mapping};
use crate::table::{export_table, matrix_csv, matrix_markdown, DEFAULT_COLUMNS};
use crate::time::{format_timestamp, parse_timestamp, SystemClock};
use crate::xmi::export_xmi;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Md,
    Xmi,
    Reqif,
    Dot,
}

#[derive(Debug, Parser)]
#[command(
    name = "mbsr",
    version,
    about = "Lint, trace, measure and export structured requirements"
)]
pub struct Cli {
    /// Corpus file (.mbsr)
    #[arg(long, global = true, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// Requirement set or requirement id limiting the command
    #[arg(long, global = true, value_name = "ID")]
    pub scope: Option<String>,
    /// Catalog override file
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write data output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Treat discouraged Trace links as errors
    #[arg(long, global = true)]
    pub strict: bool,
    /// Fixed clock for metrics, ISO-8601 (e.g. 2024-02-05T00:00:00Z)
    #[arg(long, global = true, value_name = "TIME")]
    pub now: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every requirement in scope against the automated rules
    Lint,
    /// Show the slot decomposition of one requirement
    Parse { id: String },
    /// Compute pattern completeness, optionally appending to a history file
    Metrics {
        /// Count only this expression kind (requirement or need)
        #[arg(long = "type", value_name = "KIND")]
        kind: Option<String>,
        #[arg(long, value_name = "PATH")]
        history: Option<PathBuf>,
    },
    /// Relation map and upstream/downstream closure of one expression
    Trace {
        id: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Follow only these link kinds (comma separated)
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
    },
    /// Satisfaction matrix of requirements by rules
    Matrix {
        /// Rule columns (comma separated); default is every rule plus TBX
        #[arg(long, value_delimiter = ',')]
        rules: Vec<String>,
    },
    /// Export as xmi, reqif, csv (requirement table) or md (report)
    Export {
        /// Attribute mapping file, required for reqif
        #[arg(long, value_name = "PATH")]
        mapping: Option<PathBuf>,
        /// Table columns for csv (comma separated)
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Report template for md: overview or set-review
        #[arg(long, default_value = "overview")]
        template: String,
    },
    /// Glossary term usage, or with --check the undefined-term report
    Glossary {
        #[arg(long)]
        check: bool,
    },
    /// Load and validate the corpus only
    Validate,
}

/// Data produced by a command and the exit status it asks for.
struct Outcome {
    data: String,
    status: i32,
}

fn clean(data: String) -> Result<Outcome> {
    Ok(Outcome {
        data,
        status: EXIT_CLEAN,
    })
}

/// Run with explicit arguments (first item is the program name) and streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return if err.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_CLEAN
            };
        }
    };
    match execute(&cli, stderr) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, &outcome.data).with_context(|| format!("cannot write {}", path.display()))
                }
                None => stdout.write_all(outcome.data.as_bytes()).context("cannot write output"),
            };
            match written {
                Ok(()) => outcome.status,
                Err(err) => {
                    let _ = writeln!(stderr, "error: {err:#}");
                    EXIT_ERROR
                }
            }
        }
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            EXIT_ERROR
        }
    }
}

fn load(cli: &Cli, stderr: &mut dyn Write) -> Result<Model> {
    let path = cli
        .corpus
        .as_ref()
        .ok_or_else(|| anyhow!("--corpus <PATH> is required"))?;
    let mut catalog = load_catalog(cli.config.as_deref())?;
    if cli.strict {
        catalog.options.forbid_trace = true;
    }
    let loaded = load_corpus(path, Arc::new(catalog)).with_context(|| format!("{}", path.display()))?;
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "warning: {}: {w}", path.display());
    }
    Ok(loaded.model)
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<Outcome> {
    let model = load(cli, stderr)?;
    let scope = cli.scope.as_deref();
    if let Some(s) = scope {
        model.scope_members(Some(s))?;
    }
    match &cli.command {
        Command::Lint => lint(&model, scope, cli.format, stderr),
        Command::Parse { id } => parse(&model, id),
        Command::Metrics { kind, history } => metrics(cli, &model, scope, kind.as_deref(), history.as_ref()),
        Command::Trace { id, depth, kinds } => trace(&model, id, *depth, kinds, cli.format),
        Command::Matrix { rules } => matrix(&model, scope, rules, cli.format),
        Command::Export {
            mapping,
            columns,
            template,
        } => export(&model, scope, cli.format, mapping.as_ref(), columns, template),
        Command::Glossary { check } => glossary(&model, scope, *check),
        Command::Validate => {
            let data = format!(
                "ok: {} elements, {} terms, {} requirements, {} sets, {} links\n",
                model.elements().count(),
                model.glossary().terms().count(),
                model.expressions().count(),
                model.sets().count(),
                model.links().count()
            );
            clean(data)
        }
    }
}

fn evidence_source<'a>(model: &'a Model, r: &RuleResult, field: &EvidenceField) -> &'a str {
    let e = model.expression(&r.requirement_id).expect("checked expressions exist");
    match field {
        EvidenceField::Text => &e.text,
        EvidenceField::Attribute(key) => e.attributes.get(key).and_then(|v| v.free_text()).unwrap_or_default(),
    }
}

fn field_name(field: &EvidenceField) -> &str {
    match field {
        EvidenceField::Text => "text",
        EvidenceField::Attribute(key) => key,
    }
}

fn lint(model: &Model, scope: Option<&str>, format: Option<Format>, stderr: &mut dyn Write) -> Result<Outcome> {
    let results = check_scope(model, scope)?;
    let violations = results.iter().filter(|r| r.verdict == Verdict::Violate).count();
    let data = match format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut out = String::new();
            for chunk in results.chunk_by(|a, b| a.requirement_id == b.requirement_id) {
                let automated: Vec<String> = chunk
                    .iter()
                    .filter(|r| r.verdict != Verdict::Manual)
                    .map(|r| format!("{} {}", r.rule_id, r.verdict.letter()))
                    .collect();
                out.push_str(&format!("{}: {}\n", chunk[0].requirement_id, automated.join(", ")));
                for r in chunk.iter().filter(|r| r.verdict == Verdict::Violate) {
                    for ev in &r.evidence {
                        let excerpt = ev.span.slice(evidence_source(model, r, &ev.field));
                        out.push_str(&format!(
                            "  {} violated at {} {}: \"{excerpt}\" ({})\n",
                            r.rule_id,
                            field_name(&ev.field),
                            ev.span,
                            ev.note
                        ));
                    }
                }
            }
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "requirement",
                "rule",
                "verdict",
                "field",
                "start",
                "end",
                "excerpt",
                "note",
            ])?;
            for r in &results {
                if r.evidence.is_empty() {
                    w.write_record([&r.requirement_id, &r.rule_id, r.verdict.as_str(), "", "", "", "", ""])?;
                }
                for ev in &r.evidence {
                    let excerpt = ev.span.slice(evidence_source(model, r, &ev.field));
                    w.write_record([
                        r.requirement_id.as_str(),
                        &r.rule_id,
                        r.verdict.as_str(),
                        field_name(&ev.field),
                        &ev.span.start.to_string(),
                        &ev.span.end.to_string(),
                        excerpt,
                        &ev.note,
                    ])?;
                }
            }
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?
        }
        other => bail!("lint cannot produce {other:?} output"),
    };
    let checked = results
        .iter()
        .map(|r| &r.requirement_id)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let _ = writeln!(stderr, "{violations} violation(s) across {checked} requirement(s)");
    Ok(Outcome {
        data,
        status: if violations > 0 { EXIT_FINDINGS } else { EXIT_CLEAN },
    })
}

fn parse(model: &Model, id: &str) -> Result<Outcome> {
    let e = model
        .expression(id)
        .ok_or_else(|| anyhow!("unknown requirement `{id}`"))?;
    let mut out = format!("{id}\ntext: {}\n", e.text);
    if e.element_kind == ExpressionKind::Need {
        out.push_str("kind: Need (no structured statement)\n");
        return clean(out);
    }
    let analysis = analyze_statement(&e.text, model.glossary(), model.catalog());
    let Some(st) = model.effective_statement(id) else {
        out.push_str("pattern: none\nissues: no \"shall\" keyword\n");
        return Ok(Outcome {
            data: out,
            status: EXIT_FINDINGS,
        });
    };
    out.push_str(&format!("pattern: {}\n", st.pattern));
    let article = match &st.article {
        SubjectArticle::Default => "default".to_string(),
        SubjectArticle::Omitted => "none".to_string(),
        SubjectArticle::Verbatim(a) => a.clone(),
    };
    out.push_str(&format!("article: {article}\n"));
    for key in st.pattern.slot_order() {
        let Some(slot) = st.slot(*key) else {
            out.push_str(&format!("{key} {}: (empty)\n", key.label()));
            continue;
        };
        let span = analysis
            .diagnostics
            .slot_span(*key)
            .filter(|s| s.slice(&e.text) == slot.text)
            .map(|s| format!(" [{s}]"))
            .unwrap_or_default();
        let binding = slot.binding.as_ref().map(|b| format!(" -> {b}")).unwrap_or_default();
        out.push_str(&format!("{key} {}: {}{span}{binding}\n", key.label(), slot.text));
    }
    let unconsumed: Vec<String> = analysis
        .diagnostics
        .unconsumed
        .iter()
        .map(|s| format!("{s} \"{}\"", s.slice(&e.text)))
        .collect();
    out.push_str(&format!("shall count: {}\n", analysis.diagnostics.shall_count));
    out.push_str(&format!(
        "unconsumed: {}\n",
        if unconsumed.is_empty() {
            "(none)".to_string()
        } else {
            unconsumed.join(", ")
        }
    ));
    let issues: Vec<String> = analysis.issues.iter().map(ToString::to_string).collect();
    let stored_complete = e.statement.is_some() && st.is_complete();
    let status = if issues.is_empty() || stored_complete {
        EXIT_CLEAN
    } else {
        EXIT_FINDINGS
    };
    out.push_str(&format!(
        "issues: {}\n",
        if issues.is_empty() {
            "(none)".to_string()
        } else {
            issues.join("; ")
        }
    ));
    Ok(Outcome { data: out, status })
}

fn metrics(
    cli: &Cli,
    model: &Model,
    scope: Option<&str>,
    kind: Option<&str>,
    history_path: Option<&PathBuf>,
) -> Result<Outcome> {
    let type_filter = kind
        .map(|k| k.parse::<ExpressionKind>().map_err(|e| anyhow!(e)))
        .transpose()?;
    let clock: Box<dyn Clock> = match &cli.now {
        Some(t) => Box::new(FixedClock(parse_timestamp(t).with_context(|| format!("--now `{t}`"))?)),
        None => Box::new(SystemClock),
    };
    let mut table = match history_path {
        Some(p) => history::load(p).with_context(|| format!("{}", p.display()))?,
        None => Default::default(),
    };
    let instance = calculate(model, &mut table, scope, type_filter, clock.as_ref())?;
    if let Some(p) = history_path {
        history::append(p, &instance).with_context(|| format!("{}", p.display()))?;
    }
    let data = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => history::to_csv(&table)?,
        Format::Md => {
            let mut out = String::from("| Timestamp | Scope | Type | Total | SR1 | SR2 | SR3 | SR4 | SR5 | Complete | Percent |\n|---|---|---|---|---|---|---|---|---|---|---|\n");
            for i in table.instances() {
                let slots: Vec<String> = i.per_slot_filled.iter().map(usize::to_string).collect();
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} |\n",
                    format_timestamp(i.timestamp),
                    i.scope_id.as_deref().unwrap_or("*"),
                    i.type_filter.map_or("*", |t| t.as_str()),
                    i.total,
                    slots.join(" | "),
                    i.complete_count,
                    i.pct_text()
                ));
            }
            out
        }
        other => bail!("metrics cannot produce {other:?} output"),
    };
    clean(data)
}

fn trace(model: &Model, id: &str, depth: usize, kinds: &[String], format: Option<Format>) -> Result<Outcome> {
    let kinds: Vec<LinkKind> = kinds
        .iter()
        .map(|k| k.parse().map_err(|e: String| anyhow!(e)))
        .collect::<Result<_>>()?;
    let filter = (!kinds.is_empty()).then_some(kinds.as_slice());
    let map = model.relation_map(id, depth, filter)?;
    let data = match format.unwrap_or(Format::Text) {
        Format::Dot => relmap::to_dot(&map),
        Format::Text => {
            let trace = model.bidirectional_trace(id)?;
            format!("{}\n{}", relmap::to_text(&map), relmap::trace_text(id, &trace))
        }
        other => bail!("trace cannot produce {other:?} output"),
    };
    clean(data)
}

fn matrix(model: &Model, scope: Option<&str>, rules: &[String], format: Option<Format>) -> Result<Outcome> {
    let mut judged = model.clone();
    apply_verdicts(&mut judged, &check_scope(model, scope)?)?;
    let filter = (!rules.is_empty()).then_some(rules);
    let m = build_matrix(&judged, scope, filter)?;
    let data = match format.unwrap_or(Format::Csv) {
        Format::Csv => matrix_csv(&m)?,
        Format::Md | Format::Text => matrix_markdown(&m),
        other => bail!("matrix cannot produce {other:?} output"),
    };
    clean(data)
}

fn export(
    model: &Model,
    scope: Option<&str>,
    format: Option<Format>,
    mapping: Option<&PathBuf>,
    columns: &[String],
    template: &str,
) -> Result<Outcome> {
    let data = match format.unwrap_or(Format::Xmi) {
        Format::Xmi => export_xmi(model, scope)?,
        Format::Reqif => {
            let path = mapping.ok_or_else(|| anyhow!("reqif export needs --mapping <PATH>"))?;
            export_reqif(model, scope, &Mapping::load(path)?)?
        }
        Format::Csv if columns.is_empty() => export_table(model, scope, &DEFAULT_COLUMNS)?,
        Format::Csv => export_table(model, scope, columns)?,
        Format::Md => generate_report(model, scope, template.parse::<Template>().map_err(|e| anyhow!(e))?)?,
        other => bail!("export cannot produce {other:?} output"),
    };
    clean(data)
}

fn glossary(model: &Model, scope: Option<&str>, check: bool) -> Result<Outcome> {
    let members = model.scope_members(scope)?;
    if !check {
        let usage = term_usage(members.iter().map(|e| e.text.as_str()), model.glossary());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["term", "uses"])?;
        for (term, n) in usage {
            w.write_record([term.to_string(), n.to_string()])?;
        }
        return clean(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?);
    }
    let names: Vec<&str> = model.elements().map(|e| e.name.as_str()).collect();
    let mut out = String::new();
    let mut found = false;
    for e in members {
        let undefined = find_undefined(&e.text, model.glossary(), &names);
        if !undefined.is_empty() {
            found = true;
            out.push_str(&format!("{}: {}\n", e.id, undefined.join(", ")));
        }
    }
    Ok(Outcome {
        data: out,
        status: if found { EXIT_FINDINGS } else { EXIT_CLEAN },
    })
}
