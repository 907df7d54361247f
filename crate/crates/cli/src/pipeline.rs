use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde::Serialize;
use sgml_core::ied::{
    generate_ied_config, parse_mapping, parse_settings_with, validate_mapping, CyberPhysicalMapping,
    ProtectionDefaults, ProtectionSettings,
};
use sgml_core::multisub::{check_intersub_consistency, merge_scd, merge_ssd_sed, CollisionPolicy};
use sgml_core::plcopen::{extract_st, parse_plcopen, SkipReport};
use sgml_core::power::{emit_model, merge_parameters, parse_parameters, ParameterSpec, PowerSystemModel};
use sgml_core::scada::{parse_scada_xml, scada_to_json, ScadaProject};
use sgml_core::scl::{parse_scl, serialize_scl, SclDocument, SclKind};
use sgml_core::validate::{validate_proprietary, DocumentKind, Finding, ValidationReport};

use crate::cyber::build_cyber_topology;
use crate::discover::{discover, Discovered, InputFile, InputKind};
use crate::error::{CliError, StageExt};
use crate::output::{to_json_bytes, Staged, MANIFEST};

pub const PTOC50_RANGE: (f64, f64) = (3.0, 4.0);

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub collision_policy: CollisionPolicy,
    pub protection: ProtectionDefaults,
    /// Treat warnings as failures.
    pub strict: bool,
}

impl PipelineConfig {
    pub fn new(input_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input_dir: input_dir.into(),
            output_dir: output_dir.into(),
            collision_policy: CollisionPolicy::default(),
            protection: ProtectionDefaults::default(),
            strict: false,
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        check_multiplier(self.protection.ptoc50_multiplier)?;
        let input = self
            .input_dir
            .canonicalize()
            .map_err(|e| CliError::failed("config", anyhow!("input directory {}: {e}", self.input_dir.display())))?;
        if absolute(&self.output_dir) == input {
            return Err(CliError::failed("config", anyhow!("input and output directories must differ")));
        }
        Ok(())
    }
}

pub fn check_multiplier(m: f64) -> Result<(), CliError> {
    let (lo, hi) = PTOC50_RANGE;
    if !(lo..=hi).contains(&m) {
        return Err(CliError::failed(
            "config",
            anyhow!("PTOC50 multiplier {m} is outside [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

fn absolute(p: &Path) -> PathBuf {
    if let Ok(c) = p.canonicalize() {
        return c;
    }
    match (p.parent(), p.file_name()) {
        (Some(parent), Some(name)) => {
            let parent = if parent.as_os_str().is_empty() { Path::new(".") } else { parent };
            absolute(parent).join(name)
        }
        _ => p.to_path_buf(),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InputEntry {
    pub file: String,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FileReport {
    pub file: String,
    pub kind: String,
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl FileReport {
    pub fn new(file: &str, kind: impl ToString, report: ValidationReport) -> Self {
        FileReport {
            file: file.to_string(),
            kind: kind.to_string(),
            errors: report.errors,
            warnings: report.warnings,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    Ok,
    Invalid,
    Failed,
}

/// Everything learned during a run, written with `--report` whether or not
/// the run succeeded.
#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub inputs: Vec<InputEntry>,
    pub ignored: Vec<String>,
    pub validation: Vec<FileReport>,
    pub warnings: Vec<String>,
    pub defaulted_devices: Vec<String>,
}

impl RunReport {
    pub fn record_failure(&mut self, err: &CliError) {
        self.status = match err {
            CliError::Invalid { .. } => Status::Invalid,
            CliError::Failed { .. } => Status::Failed,
        };
        self.failed_stage = Some(err.stage().to_string());
        self.message = Some(err.to_string());
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_json_bytes(self)
    }
}

struct Parsed<'a> {
    file: &'a InputFile,
    doc: SclDocument,
}

pub struct Pipeline<'c> {
    config: &'c PipelineConfig,
    pub report: RunReport,
}

impl<'c> Pipeline<'c> {
    pub fn new(config: &'c PipelineConfig) -> Self {
        Pipeline {
            config,
            report: RunReport::default(),
        }
    }

    fn warn(&mut self, message: String) {
        self.report.warnings.push(message);
    }

    /// Run every stage and return the staged output tree, manifest included.
    /// Nothing is written to disk.
    pub fn build(&mut self) -> Result<Staged, CliError> {
        self.config.check()?;
        let inputs = discover(&self.config.input_dir).stage("discover")?;
        self.report.inputs = inputs
            .files
            .iter()
            .map(|f| InputEntry {
                file: f.name.clone(),
                kind: f.kind.to_string(),
            })
            .collect();
        self.report.ignored = inputs.ignored.clone();

        self.validate(&inputs)?;
        let mut out = Staged::default();
        let (merged_ssd, cyber_docs) = self.merge(&inputs, &mut out)?;
        let model = self.power(&inputs, &merged_ssd, &mut out)?;
        self.cyber(&cyber_docs, &mut out)?;
        self.ieds(&inputs, &cyber_docs, &model, &mut out)?;
        self.scada(&inputs, &mut out)?;
        self.plc(&inputs, &mut out)?;
        let manifest = out.manifest();
        out.add(MANIFEST, manifest).stage("manifest")?;
        if self.config.strict && !self.report.warnings.is_empty() {
            return Err(CliError::invalid(
                "strict",
                format!("{} warning(s) with --strict", self.report.warnings.len()),
            ));
        }
        Ok(out)
    }

    /// Build and, on success, replace the output directory.
    pub fn run(&mut self) -> Result<Staged, CliError> {
        let out = self.build()?;
        out.commit(&self.config.output_dir).stage("write")?;
        Ok(out)
    }

    fn validate(&mut self, inputs: &Discovered) -> Result<(), CliError> {
        let mut errors = 0;
        let mut warnings = 0;
        for f in &inputs.files {
            let InputKind::Proprietary(kind) = f.kind else { continue };
            let report = validate_proprietary(kind, &f.bytes).map_err(|e| CliError::failed("validate", anyhow!("{}: {e}", f.name)))?;
            errors += report.errors.len();
            warnings += report.warnings.len();
            self.report.validation.push(FileReport::new(&f.name, kind, report));
        }
        if errors > 0 || (self.config.strict && warnings > 0) {
            let bad: Vec<&str> = self
                .report
                .validation
                .iter()
                .filter(|r| !r.errors.is_empty() || (self.config.strict && !r.warnings.is_empty()))
                .map(|r| r.file.as_str())
                .collect();
            return Err(CliError::invalid(
                "validate",
                format!("{errors} error(s), {warnings} warning(s) in {}", bad.join(", ")),
            ));
        }
        Ok(())
    }

    fn parse_all<'a>(inputs: &'a Discovered, kinds: &[SclKind]) -> Result<Vec<Parsed<'a>>, CliError> {
        let mut out = Vec::new();
        for f in &inputs.files {
            let InputKind::Scl(kind) = f.kind else { continue };
            if !kinds.contains(&kind) {
                continue;
            }
            let doc = parse_scl(&f.bytes).map_err(|e| CliError::failed("scl", anyhow::Error::new(e).context(f.name.clone())))?;
            out.push(Parsed { file: f, doc });
        }
        Ok(out)
    }

    /// Returns the merged substation document and the documents the network
    /// view is built from, merged SCD first.
    fn merge(&mut self, inputs: &Discovered, out: &mut Staged) -> Result<(SclDocument, Vec<SclDocument>), CliError> {
        let scds = Self::parse_all(inputs, &[SclKind::Scd])?;
        let ssds = Self::parse_all(inputs, &[SclKind::Ssd])?;
        let seds = Self::parse_all(inputs, &[SclKind::Sed])?;
        let devices = Self::parse_all(inputs, &[SclKind::Icd, SclKind::Cid])?;
        if scds.is_empty() && ssds.is_empty() {
            return Err(CliError::failed("discover", anyhow!("no SSD or SCD document in the input directory")));
        }
        let names = |p: &[Parsed]| p.iter().map(|x| x.file.name.clone()).collect::<Vec<_>>();
        let docs = |p: &[Parsed]| p.iter().map(|x| x.doc.clone()).collect::<Vec<_>>();

        let merged_scd = if scds.is_empty() {
            None
        } else {
            let (doc, mut report) = merge_scd(&docs(&scds), self.config.collision_policy).stage("merge")?;
            report.name_sources(&names(&scds));
            out.add("scl/merged.scd", serialize_scl(&doc).stage("merge")?).stage("merge")?;
            out.add("scl/merge-scd-report.json", with_newline(report.to_json())).stage("merge")?;
            for w in report.warnings {
                self.warn(format!("merge-scd: {w}"));
            }
            Some(doc)
        };

        let sed_docs = docs(&seds);
        let (sources, source_names) = if !ssds.is_empty() {
            (docs(&ssds), names(&ssds))
        } else {
            (vec![merged_scd.clone().expect("an SCD exists")], vec!["scl/merged.scd".to_string()])
        };
        let (merged_ssd, mut report) = merge_ssd_sed(&sources, &sed_docs).stage("merge")?;
        report.name_sources(&source_names.iter().cloned().chain(names(&seds)).collect::<Vec<_>>());
        out.add("scl/merged.ssd", serialize_scl(&merged_ssd).stage("merge")?).stage("merge")?;
        out.add("scl/merge-ssd-report.json", with_newline(report.to_json())).stage("merge")?;
        for w in report.warnings {
            self.warn(format!("merge-ssd: {w}"));
        }

        if !sed_docs.is_empty() {
            let view = match &merged_scd {
                Some(scd) => {
                    let mut v = scd.clone();
                    v.substations = merged_ssd.substations.clone();
                    v
                }
                None => merged_ssd.clone(),
            };
            let check = check_intersub_consistency(&view, &sed_docs);
            for w in &check.warnings {
                self.warn(format!("consistency: {}: {}", w.path, w.message));
            }
            if !check.valid() {
                let errors = check.errors.len();
                self.report.validation.push(FileReport::new("scl/merged", "consistency", check));
                return Err(CliError::invalid(
                    "merge",
                    format!("{errors} inter-substation consistency error(s)"),
                ));
            }
        }

        let mut cyber_docs: Vec<SclDocument> = merged_scd.into_iter().collect();
        cyber_docs.extend(devices.into_iter().map(|p| p.doc));
        cyber_docs.extend(sed_docs);
        Ok((merged_ssd, cyber_docs))
    }

    fn power(&mut self, inputs: &Discovered, ssd: &SclDocument, out: &mut Staged) -> Result<PowerSystemModel, CliError> {
        let files: Vec<&InputFile> = inputs.proprietary(DocumentKind::ParameterSpec).collect();
        if files.is_empty() {
            return Err(CliError::failed("power", anyhow!("no parameter file in the input directory")));
        }
        let mut spec = ParameterSpec::default();
        for f in files {
            let part = parse_parameters(&f.bytes).map_err(|e| CliError::failed("power", anyhow::Error::new(e).context(f.name.clone())))?;
            spec.entries.extend(part.entries);
        }
        let model = merge_parameters(ssd, &spec).stage("power")?;
        self.report.defaulted_devices = model.defaulted_devices().into_iter().map(str::to_string).collect();
        out.add("power-model.json", emit_model(&model)).stage("power")?;
        Ok(model)
    }

    fn cyber(&mut self, docs: &[SclDocument], out: &mut Staged) -> Result<(), CliError> {
        let refs: Vec<&SclDocument> = docs.iter().collect();
        let topo = build_cyber_topology(&refs);
        for c in &topo.unpaired_cables {
            self.warn(format!("cyber: cable {c:?} does not join exactly two ports"));
        }
        out.add("cyber-topology.json", to_json_bytes(&topo)).stage("cyber")
    }

    fn ieds(
        &mut self,
        inputs: &Discovered,
        docs: &[SclDocument],
        model: &PowerSystemModel,
        out: &mut Staged,
    ) -> Result<(), CliError> {
        let mut mapping = CyberPhysicalMapping::default();
        for f in inputs.proprietary(DocumentKind::Mapping) {
            let part = parse_mapping(&f.bytes).map_err(|e| CliError::failed("ied", anyhow::Error::new(e).context(f.name.clone())))?;
            mapping.entries.extend(part.entries);
        }
        let mut settings: BTreeMap<String, ProtectionSettings> = BTreeMap::new();
        for f in inputs.proprietary(DocumentKind::Thresholds) {
            let s = parse_settings_with(&f.bytes, &self.config.protection)
                .map_err(|e| CliError::failed("ied", anyhow::Error::new(e).context(f.name.clone())))?;
            if settings.contains_key(&s.ied_name) {
                return Err(CliError::failed("ied", anyhow!("{}: second settings file for IED {:?}", f.name, s.ied_name)));
            }
            settings.insert(s.ied_name.clone(), s);
        }

        let home = |ied: &str| docs.iter().find(|d| d.ied(ied).is_some());
        let mut check = ValidationReport::default();
        for (i, entry) in mapping.entries.iter().enumerate() {
            let path = format!("/Mapping/Entry[{}]", i + 1);
            let single = CyberPhysicalMapping {
                entries: vec![entry.clone()],
            };
            match home(entry.ied()) {
                Some(doc) => {
                    for mut finding in validate_mapping(&single, doc, model).errors {
                        finding.path = finding.path.replacen("/Mapping/Entry[1]", &path, 1);
                        check.errors.push(finding);
                    }
                }
                None => check.error(
                    "mapping-cyber-target",
                    format!("{path}/@cyberAttr"),
                    format!("no IED named {:?} in the SCL inputs", entry.ied()),
                ),
            }
        }
        if !check.valid() {
            let n = check.errors.len();
            self.report.validation.push(FileReport::new("mapping", DocumentKind::Mapping, check));
            return Err(CliError::invalid("ied", format!("{n} mapping error(s)")));
        }
        if let Some(name) = settings.keys().find(|n| home(n).is_none()) {
            return Err(CliError::failed("ied", anyhow!("settings name IED {name:?}, which no SCL input describes")));
        }

        let mut seen = HashSet::new();
        for doc in docs {
            for ied in &doc.ieds {
                if ied.is_switch() || !seen.insert(ied.name.clone()) {
                    continue;
                }
                let s = settings.get(&ied.name).cloned().unwrap_or_else(|| ProtectionSettings {
                    ied_name: ied.name.clone(),
                    nominal_current: None,
                    nominal_voltage: None,
                    nominal_power: None,
                    functions: Vec::new(),
                });
                let config = generate_ied_config(doc, &mapping, &s)
                    .map_err(|e| CliError::failed("ied", anyhow::Error::new(e).context(ied.name.clone())))?;
                for (file, bytes) in config.bundle_files().stage("ied")? {
                    out.add(format!("ieds/{}/{file}", ied.name), bytes).stage("ied")?;
                }
            }
        }
        Ok(())
    }

    fn scada(&mut self, inputs: &Discovered, out: &mut Staged) -> Result<(), CliError> {
        let files: Vec<&InputFile> = inputs.proprietary(DocumentKind::ScadaProject).collect();
        let project = match files.as_slice() {
            [] => ScadaProject::default(),
            [f] => parse_scada_xml(&f.bytes).map_err(|e| CliError::failed("scada", anyhow::Error::new(e).context(f.name.clone())))?,
            many => {
                let names: Vec<&str> = many.iter().map(|f| f.name.as_str()).collect();
                return Err(CliError::failed("scada", anyhow!("more than one SCADA project: {}", names.join(", "))));
            }
        };
        out.add("scada.json", scada_to_json(&project)).stage("scada")
    }

    fn plc(&mut self, inputs: &Discovered, out: &mut Staged) -> Result<(), CliError> {
        let mut skipped = SkipReport::default();
        for f in inputs.of_kind(InputKind::PlcOpen) {
            let project = parse_plcopen(&f.bytes).map_err(|e| CliError::failed("plc", anyhow::Error::new(e).context(f.name.clone())))?;
            let (units, report) = extract_st(&project);
            for u in units {
                out.add(format!("plc/{}", u.file_name()), u.source)
                    .map_err(|e| CliError::failed("plc", e.context(f.name.clone())))?;
            }
            skipped.skipped.extend(report.skipped);
        }
        out.add("plc/skip-report.json", with_newline(skipped.to_json())).stage("plc")
    }
}

fn with_newline(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}
