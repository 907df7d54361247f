//! PLCopen TC6 XML projects and their structured-text program units.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::xml::{self, Element, XmlError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlcError {
    #[error(transparent)]
    MalformedXml(#[from] XmlError),
    #[error("root element is <{0}>, expected <project>")]
    NotAProject(String),
    #[error("POU {0:?} has no interface")]
    MissingInterface(String),
    #[error("POU {0:?} has an empty ST body")]
    EmptyStBody(String),
    #[error("duplicate POU name {0:?}")]
    DuplicatePou(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PouType {
    Program,
    FunctionBlock,
    Function,
}

impl PouType {
    fn parse(s: &str) -> Option<PouType> {
        match s {
            "program" => Some(PouType::Program),
            "functionBlock" => Some(PouType::FunctionBlock),
            "function" => Some(PouType::Function),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PouType::Program => "program",
            PouType::FunctionBlock => "functionBlock",
            PouType::Function => "function",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VarClass {
    Input,
    Output,
    InOut,
    Local,
    Temp,
    External,
    Global,
}

impl VarClass {
    const SECTIONS: [(&'static str, VarClass); 7] = [
        ("inputVars", VarClass::Input),
        ("outputVars", VarClass::Output),
        ("inOutVars", VarClass::InOut),
        ("localVars", VarClass::Local),
        ("tempVars", VarClass::Temp),
        ("externalVars", VarClass::External),
        ("globalVars", VarClass::Global),
    ];

    fn of_section(name: &str) -> Option<VarClass> {
        Self::SECTIONS.iter().find(|(s, _)| *s == name).map(|(_, c)| *c)
    }

    fn section(self) -> &'static str {
        Self::SECTIONS.iter().find(|(_, c)| *c == self).map(|(s, _)| *s).unwrap_or("localVars")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Variable {
    pub name: String,
    pub var_class: VarClass,
    /// Elementary type name (`BOOL`, `REAL`), the name of a derived type, or
    /// the lower-cased constructor for anonymous types (`array`, `pointer`).
    pub data_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BodyLanguage {
    #[serde(rename = "ST")]
    St,
    #[serde(rename = "LD")]
    Ld,
    #[serde(rename = "FBD")]
    Fbd,
    #[serde(rename = "other")]
    Other,
}

impl fmt::Display for BodyLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BodyLanguage::St => "ST",
            BodyLanguage::Ld => "LD",
            BodyLanguage::Fbd => "FBD",
            BodyLanguage::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Pou {
    pub name: String,
    pub pou_type: PouType,
    pub variables: Vec<Variable>,
    pub body_language: BodyLanguage,
    /// Structured-text source; empty unless the body is ST.
    pub body_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlcProject {
    pub project_name: String,
    pub pous: Vec<Pou>,
}

fn data_type(type_el: Option<&Element>) -> String {
    let Some(t) = type_el.and_then(|t| t.children.first()) else {
        return String::new();
    };
    match t.local_name() {
        "derived" => t.attr("name").unwrap_or("").to_string(),
        "string" | "wstring" => t.local_name().to_uppercase(),
        other if other.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_') => other.to_string(),
        other => other.to_ascii_lowercase(),
    }
}

/// Text of an ST body: the `xhtml:p` wrapper when present, otherwise the
/// element's own text.
fn st_text(st: &Element) -> String {
    match st.children.first() {
        Some(p) => p.text.clone(),
        None => st.text.clone(),
    }
}

fn parse_pou(el: &Element) -> Result<Pou, PlcError> {
    let name = el.attr("name").unwrap_or("").to_string();
    let pou_type = el.attr("pouType").and_then(PouType::parse).unwrap_or(PouType::Program);
    let interface = el.child("interface").ok_or_else(|| PlcError::MissingInterface(name.clone()))?;
    let mut variables = Vec::new();
    for section in &interface.children {
        let Some(var_class) = VarClass::of_section(section.local_name()) else { continue };
        for v in section.children_named("variable") {
            variables.push(Variable {
                name: v.attr("name").unwrap_or("").to_string(),
                var_class,
                data_type: data_type(v.child("type")),
                address: v.attr("address").map(str::to_string),
            });
        }
    }
    let lang_el = el.child("body").and_then(|b| b.children.first());
    let (body_language, body_text) = match lang_el.map(|l| (l.local_name(), l)) {
        Some(("ST", st)) => {
            let text = st_text(st);
            if text.trim().is_empty() {
                return Err(PlcError::EmptyStBody(name));
            }
            (BodyLanguage::St, text)
        }
        Some(("LD", _)) => (BodyLanguage::Ld, String::new()),
        Some(("FBD", _)) => (BodyLanguage::Fbd, String::new()),
        _ => (BodyLanguage::Other, String::new()),
    };
    Ok(Pou {
        name,
        pou_type,
        variables,
        body_language,
        body_text,
    })
}

pub fn parse_plcopen(bytes: &[u8]) -> Result<PlcProject, PlcError> {
    let doc = xml::parse(bytes)?;
    let root = &doc.root;
    if root.local_name() != "project" {
        return Err(PlcError::NotAProject(root.name.clone()));
    }
    let project_name = root
        .child("contentHeader")
        .and_then(|h| h.attr("name"))
        .unwrap_or("")
        .to_string();
    let mut project = PlcProject {
        project_name,
        pous: Vec::new(),
    };
    let mut names = HashSet::new();
    let pous = root
        .children_named("types")
        .flat_map(|t| t.children_named("pous"))
        .flat_map(|p| p.children_named("pou"));
    for el in pous {
        let pou = parse_pou(el)?;
        if !names.insert(pou.name.clone()) {
            return Err(PlcError::DuplicatePou(pou.name));
        }
        project.pous.push(pou);
    }
    Ok(project)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StUnit {
    pub pou_name: String,
    #[serde(skip)]
    pub source: Vec<u8>,
}

impl StUnit {
    pub fn file_name(&self) -> String {
        format!("{}.st", self.pou_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedPou {
    pub pou_name: String,
    pub body_language: BodyLanguage,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SkipReport {
    pub skipped: Vec<SkippedPou>,
}

impl SkipReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One unit per ST-bodied POU, in project order. Graphical and other
/// bodies are listed in the skip report.
pub fn extract_st(project: &PlcProject) -> (Vec<StUnit>, SkipReport) {
    let mut units = Vec::new();
    let mut report = SkipReport::default();
    for p in &project.pous {
        match p.body_language {
            BodyLanguage::St => units.push(StUnit {
                pou_name: p.name.clone(),
                source: p.body_text.as_bytes().to_vec(),
            }),
            lang => report.skipped.push(SkippedPou {
                pou_name: p.name.clone(),
                body_language: lang,
                reason: format!("{lang} bodies are not translated to structured text"),
            }),
        }
    }
    (units, report)
}

fn cdata(text: &str) -> String {
    format!("<![CDATA[{}]]>", text.replace("]]>", "]]]]><![CDATA[>"))
}

fn escape_attr(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('"', "&quot;")
}

fn type_el(token: &str) -> String {
    if token.is_empty() {
        return String::new();
    }
    let elementary = token.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
    match token {
        "STRING" => "<string/>".into(),
        "WSTRING" => "<wstring/>".into(),
        t if elementary => format!("<{t}/>"),
        t if t.chars().all(|c| c.is_ascii_lowercase()) => format!("<{t}/>"),
        t => format!("<derived name=\"{}\"/>", escape_attr(t)),
    }
}

/// Serialize as a PLCopen TC6 project, ST bodies as CDATA.
pub fn write_plcopen(project: &PlcProject) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<project xmlns=\"http://www.plcopen.org/xml/tc6_0201\" xmlns:xhtml=\"http://www.w3.org/1999/xhtml\">\n");
    out.push_str("  <fileHeader companyName=\"\" productName=\"sgml\" productVersion=\"1\" creationDateTime=\"1970-01-01T00:00:00\"/>\n");
    out.push_str(&format!(
        "  <contentHeader name=\"{}\"><coordinateInfo/></contentHeader>\n",
        escape_attr(&project.project_name)
    ));
    out.push_str("  <types>\n    <dataTypes/>\n    <pous>\n");
    for p in &project.pous {
        out.push_str(&format!(
            "      <pou name=\"{}\" pouType=\"{}\">\n        <interface>\n",
            escape_attr(&p.name),
            p.pou_type.as_str()
        ));
        let mut i = 0;
        while i < p.variables.len() {
            let class = p.variables[i].var_class;
            out.push_str(&format!("          <{}>\n", class.section()));
            while i < p.variables.len() && p.variables[i].var_class == class {
                let v = &p.variables[i];
                let addr = v
                    .address
                    .as_ref()
                    .map(|a| format!(" address=\"{}\"", escape_attr(a)))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "            <variable name=\"{}\"{addr}><type>{}</type></variable>\n",
                    escape_attr(&v.name),
                    type_el(&v.data_type)
                ));
                i += 1;
            }
            out.push_str(&format!("          </{}>\n", class.section()));
        }
        out.push_str("        </interface>\n        <body>");
        match p.body_language {
            BodyLanguage::St => out.push_str(&format!("<ST><xhtml:p>{}</xhtml:p></ST>", cdata(&p.body_text))),
            BodyLanguage::Ld => out.push_str("<LD/>"),
            BodyLanguage::Fbd => out.push_str("<FBD/>"),
            BodyLanguage::Other => out.push_str("<IL><xhtml:p/></IL>"),
        }
        out.push_str("</body>\n      </pou>\n");
    }
    out.push_str("    </pous>\n  </types>\n  <instances><configurations/></instances>\n</project>\n");
    out
}
