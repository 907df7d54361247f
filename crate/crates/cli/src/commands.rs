use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use serde::Serialize;
use sgml_core::ied::{generate_ied_config, parse_mapping, parse_settings_with, CyberPhysicalMapping, ProtectionDefaults, ProtectionSettings};
use sgml_core::multisub::{check_intersub_consistency, merge_scd, merge_ssd_sed, CollisionPolicy, MergeReport};
use sgml_core::plcopen::{extract_st, parse_plcopen, PlcError};
use sgml_core::power::{build_document_graph, emit_model, merge_parameters, parse_parameters};
use sgml_core::scada::{parse_scada_xml, scada_to_json};
use sgml_core::scl::{check_invariants, parse_scl, parse_scl_with, resolve_references, serialize_scl, ParseOptions, SclDocument, SclError, SclKind};
use sgml_core::validate::{validate_proprietary, DocumentKind, ValidationReport};

use crate::discover::{read_input, InputKind};
use crate::error::{CliError, StageExt};
use crate::output::{to_json_bytes, Staged};
use crate::pipeline::{FileReport, Pipeline, PipelineConfig};

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub strict: bool,
    pub collision_policy: CollisionPolicy,
    pub protection: ProtectionDefaults,
}

impl Context {
    fn write_report(&self, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(path) = &self.report {
            std::fs::write(path, bytes)
                .with_context(|| format!("writing {}", path.display()))
                .stage("report")?;
        }
        Ok(())
    }

    /// Write `files` below `--out`, or print `primary` when no output
    /// directory was given.
    fn emit(&self, files: &Staged, primary: Option<&str>) -> Result<(), CliError> {
        match (&self.out, primary) {
            (Some(dir), _) => files
                .write_into(dir)
                .with_context(|| format!("writing {}", dir.display()))
                .stage("write"),
            (None, Some(p)) => {
                let bytes = files.get(p).expect("primary artifact is staged");
                std::io::stdout().write_all(bytes).stage("write")
            }
            (None, None) => Err(CliError::failed("write", anyhow!("this command needs --out DIR"))),
        }
    }
}

fn load_scl(path: &Path, stage: &'static str) -> Result<SclDocument, CliError> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .stage(stage)?;
    parse_scl(&bytes).map_err(|e| CliError::failed(stage, anyhow::Error::new(e).context(path.display().to_string())))
}

fn read(path: &Path, stage: &'static str) -> Result<Vec<u8>, CliError> {
    std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .stage(stage)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn scl_report(bytes: &[u8]) -> Result<ValidationReport, SclError> {
    let doc = parse_scl_with(bytes, ParseOptions::LENIENT)?;
    let mut report = ValidationReport::default();
    for v in check_invariants(&doc) {
        report.error("scl-invariant", "/SCL", v.to_string());
    }
    for link in resolve_references(&doc).dangling() {
        if doc.kind == SclKind::Sed && link.kind == sgml_core::scl::LinkKind::Terminal {
            continue;
        }
        report.error("scl-reference", link.source_path.clone(), format!("unresolved reference to {:?}", link.target));
    }
    Ok(report)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    valid: bool,
    files: &'a [FileReport],
}

pub fn validate(ctx: &Context, files: &[PathBuf], kind: Option<DocumentKind>) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for path in files {
        let name = path.display().to_string();
        let (detected, bytes) = match kind {
            Some(k) => (Some(InputKind::Proprietary(k)), read(path, "validate")?),
            None => read_input(path).stage("validate")?,
        };
        let Some(detected) = detected else {
            return Err(CliError::failed("validate", anyhow!("{name}: not a document kind this tool knows")));
        };
        let report = match detected {
            InputKind::Proprietary(k) => validate_proprietary(k, &bytes).map_err(|e| CliError::failed("validate", anyhow!("{name}: {e}")))?,
            InputKind::Scl(_) => scl_report(&bytes).map_err(|e| CliError::failed("validate", anyhow::Error::new(e).context(name.clone())))?,
            InputKind::PlcOpen => match parse_plcopen(&bytes) {
                Ok(_) => ValidationReport::default(),
                Err(PlcError::MalformedXml(e)) => return Err(CliError::failed("validate", anyhow!("{name}: {e}"))),
                Err(e) => {
                    let mut r = ValidationReport::default();
                    r.error("plcopen-structure", "/project", e.to_string());
                    r
                }
            },
        };
        for f in &report.errors {
            eprintln!("{name}: error [{}] {}: {}", f.rule_id, f.path, f.message);
        }
        for f in &report.warnings {
            eprintln!("{name}: warning [{}] {}: {}", f.rule_id, f.path, f.message);
        }
        reports.push(FileReport::new(&name, detected, report));
    }
    let failing = reports
        .iter()
        .filter(|r| !r.errors.is_empty() || (ctx.strict && !r.warnings.is_empty()))
        .count();
    let bytes = to_json_bytes(&ValidateOutput {
        valid: failing == 0,
        files: &reports,
    });
    match &ctx.report {
        Some(_) => ctx.write_report(&bytes)?,
        None => std::io::stdout().write_all(&bytes).stage("report")?,
    }
    if failing > 0 {
        return Err(CliError::invalid("validate", format!("{failing} file(s) failed validation")));
    }
    Ok(())
}

pub fn topology(ctx: &Context, scl: &Path, params: Option<&Path>) -> Result<(), CliError> {
    let doc = load_scl(scl, "topology")?;
    let graph = build_document_graph(&doc).stage("topology")?;
    let mut files = Staged::default();
    let mut text = graph.to_json();
    text.push('\n');
    files.add("topology.json", text).stage("topology")?;
    let mut primary = "topology.json";
    if let Some(p) = params {
        let spec = parse_parameters(&read(p, "power")?).stage("power")?;
        let model = merge_parameters(&doc, &spec).stage("power")?;
        files.add("power-model.json", emit_model(&model)).stage("power")?;
        primary = "power-model.json";
    }
    ctx.emit(&files, Some(primary))
}

fn finish_merge(ctx: &Context, doc: &SclDocument, mut report: MergeReport, names: &[String], file: &str) -> Result<(), CliError> {
    report.name_sources(names);
    let mut files = Staged::default();
    files.add(file, serialize_scl(doc).stage("merge")?).stage("merge")?;
    let mut json = report.to_json();
    json.push('\n');
    files.add("merge-report.json", json.clone()).stage("merge")?;
    ctx.write_report(json.as_bytes())?;
    if ctx.strict && !report.warnings.is_empty() {
        return Err(CliError::invalid("merge", report.warnings.join("; ")));
    }
    ctx.emit(&files, Some(file))
}

pub fn merge_scd_files(ctx: &Context, inputs: &[PathBuf]) -> Result<(), CliError> {
    let docs = inputs.iter().map(|p| load_scl(p, "merge")).collect::<Result<Vec<_>, _>>()?;
    let (merged, report) = merge_scd(&docs, ctx.collision_policy).stage("merge")?;
    let names: Vec<String> = inputs.iter().map(|p| file_name(p)).collect();
    finish_merge(ctx, &merged, report, &names, "merged.scd")
}

pub fn merge_ssd_files(ctx: &Context, inputs: &[PathBuf]) -> Result<(), CliError> {
    let mut ssds = Vec::new();
    let mut seds = Vec::new();
    let mut names = (Vec::new(), Vec::new());
    for p in inputs {
        let doc = load_scl(p, "merge")?;
        if doc.kind == SclKind::Sed {
            seds.push(doc);
            names.1.push(file_name(p));
        } else {
            ssds.push(doc);
            names.0.push(file_name(p));
        }
    }
    let (merged, report) = merge_ssd_sed(&ssds, &seds).stage("merge")?;
    let check = check_intersub_consistency(&merged, &seds);
    if !check.valid() {
        ctx.write_report(&to_json_bytes(&check))?;
        for f in &check.errors {
            eprintln!("error [{}] {}: {}", f.rule_id, f.path, f.message);
        }
        return Err(CliError::invalid("merge", format!("{} consistency error(s)", check.errors.len())));
    }
    let all: Vec<String> = names.0.into_iter().chain(names.1).collect();
    finish_merge(ctx, &merged, report, &all, "merged.ssd")
}

pub fn ied(
    ctx: &Context,
    scl: &Path,
    mapping: Option<&Path>,
    settings: Option<&Path>,
    name: Option<&str>,
) -> Result<(), CliError> {
    let doc = load_scl(scl, "ied")?;
    let map = match mapping {
        Some(p) => parse_mapping(&read(p, "ied")?).stage("ied")?,
        None => CyberPhysicalMapping::default(),
    };
    let settings = match (settings, name) {
        (Some(p), _) => parse_settings_with(&read(p, "ied")?, &ctx.protection).stage("ied")?,
        (None, Some(n)) => ProtectionSettings {
            ied_name: n.to_string(),
            nominal_current: None,
            nominal_voltage: None,
            nominal_power: None,
            functions: Vec::new(),
        },
        (None, None) => match doc.ieds.iter().filter(|i| !i.is_switch()).collect::<Vec<_>>().as_slice() {
            [only] => ProtectionSettings {
                ied_name: only.name.clone(),
                nominal_current: None,
                nominal_voltage: None,
                nominal_power: None,
                functions: Vec::new(),
            },
            _ => return Err(CliError::failed("ied", anyhow!("give --settings or --ied to pick the IED"))),
        },
    };
    if let Some(n) = name {
        if n != settings.ied_name {
            return Err(CliError::failed("ied", anyhow!("--ied {n} but the settings are for {}", settings.ied_name)));
        }
    }
    let config = generate_ied_config(&doc, &map, &settings).stage("ied")?;
    let mut files = Staged::default();
    for (file, bytes) in config.bundle_files().stage("ied")? {
        files.add(format!("{}/{file}", config.ied_name), bytes).stage("ied")?;
    }
    ctx.emit(&files, None)
}

pub fn scada(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let project = parse_scada_xml(&read(input, "scada")?).stage("scada")?;
    let mut files = Staged::default();
    files.add("scada.json", scada_to_json(&project)).stage("scada")?;
    ctx.emit(&files, Some("scada.json"))
}

pub fn plc(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let project = parse_plcopen(&read(input, "plc")?).stage("plc")?;
    let (units, report) = extract_st(&project);
    let mut files = Staged::default();
    for u in units {
        files.add(u.file_name(), u.source).stage("plc")?;
    }
    let mut json = report.to_json();
    json.push('\n');
    files.add("skip-report.json", json.clone()).stage("plc")?;
    ctx.write_report(json.as_bytes())?;
    ctx.emit(&files, None)
}

pub fn pipeline(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let out = ctx
        .out
        .clone()
        .ok_or_else(|| CliError::failed("config", anyhow!("pipeline needs --out DIR")))?;
    let config = PipelineConfig {
        input_dir: input.to_path_buf(),
        output_dir: out,
        collision_policy: ctx.collision_policy,
        protection: ctx.protection,
        strict: ctx.strict,
    };
    let mut run = Pipeline::new(&config);
    let result = run.run();
    if let Err(e) = &result {
        run.report.record_failure(e);
    }
    ctx.write_report(&run.report.to_json())?;
    for w in &run.report.warnings {
        eprintln!("warning: {w}");
    }
    let staged = result?;
    eprintln!(
        "wrote {} files to {}",
        staged.paths().count(),
        config.output_dir.display()
    );
    Ok(())
}
