//! Diagram file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Context, Diagram, DiagramError, End, Transistor, Wire, WireId};
use crate::coeff::{coeff_parse, CoefficientSystem, GroupSpec};
use crate::presentation::{parse_presentation, Direction};

#[derive(Serialize, Deserialize)]
struct DiagramFile {
    presentation: String,
    #[serde(default)]
    coeffs: BTreeMap<String, String>,
    wires: Vec<WireFile>,
    #[serde(default)]
    transistors: Vec<TransistorFile>,
    #[serde(default)]
    annular: bool,
}

#[derive(Serialize, Deserialize)]
struct WireFile {
    label: String,
    #[serde(default = "unit")]
    coeff: String,
    bottom: AttachFile,
    top: AttachFile,
}

fn unit() -> String {
    "1".into()
}

#[derive(Serialize, Deserialize)]
struct AttachFile {
    site: Site,
    index: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Site {
    Frame(String),
    Transistor { transistor: usize, side: String },
}

#[derive(Serialize, Deserialize)]
struct TransistorFile {
    rel: usize,
    dir: String,
}

/// Pretty-printed JSON in canonical order.
pub fn diagram_to_json(d: &Diagram) -> String {
    let pres = d.pres();
    let coeffs = pres
        .letters()
        .map(|l| (pres.letter_name(l).to_string(), d.coeffs().spec(l).to_string()))
        .collect();
    let end = |e: End, frame: &str, side: &str| match e {
        End::Frame(i) => AttachFile { site: Site::Frame(frame.into()), index: i },
        End::Transistor(t, i) => AttachFile { site: Site::Transistor { transistor: t, side: side.into() }, index: i },
    };
    let file = DiagramFile {
        presentation: pres.to_string(),
        coeffs,
        wires: d
            .wires
            .iter()
            .map(|w| WireFile {
                label: pres.letter_name(w.label).to_string(),
                coeff: d.coeffs().spec(w.label).format_element(&w.coeff),
                bottom: end(w.bottom, "frame_bottom", "top"),
                top: end(w.top, "frame_top", "bottom"),
            })
            .collect(),
        transistors: d
            .transistors
            .iter()
            .map(|t| TransistorFile { rel: t.relation, dir: t.dir.sign().to_string() })
            .collect(),
        annular: d.annular,
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

fn slot(list: &mut Vec<Option<WireId>>, index: usize, w: WireId, what: &str) -> Result<(), DiagramError> {
    if list.len() <= index {
        list.resize(index + 1, None);
    }
    if list[index].replace(w).is_some() {
        return Err(DiagramError::Malformed(format!("{what} slot {index} used twice")));
    }
    Ok(())
}

fn dense(list: Vec<Option<WireId>>, what: &str) -> Result<Vec<WireId>, DiagramError> {
    list.into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| DiagramError::Malformed(format!("{what} slot {i} is empty"))))
        .collect()
}

/// Parses and validates a diagram file.
pub fn diagram_from_json(text: &str) -> Result<Diagram, DiagramError> {
    let file: DiagramFile = serde_json::from_str(text).map_err(|e| DiagramError::Malformed(e.to_string()))?;
    let pres = parse_presentation(&file.presentation).map_err(|e| DiagramError::Malformed(format!("presentation: {e}")))?;
    let mut specs = vec![GroupSpec::Trivial; pres.alphabet().len()];
    for (name, spec) in &file.coeffs {
        let l = pres.letter(name).ok_or_else(|| DiagramError::Malformed(format!("coeffs: unknown letter `{name}`")))?;
        specs[l.index()] = spec.parse().map_err(|e| DiagramError::Malformed(format!("coeffs.{name}: {e}")))?;
    }
    let coeffs = CoefficientSystem::new(&pres, specs)?;
    let ctx = Context::new(pres, coeffs);

    let nt = file.transistors.len();
    let mut transistors = Vec::with_capacity(nt);
    for (i, t) in file.transistors.iter().enumerate() {
        let dir = match t.dir.as_str() {
            "+" | "positive" => Direction::Positive,
            "-" | "negative" => Direction::Negative,
            other => return Err(DiagramError::Malformed(format!("transistors[{i}].dir `{other}`"))),
        };
        transistors.push((t.rel, dir));
    }
    let mut tops: Vec<Vec<Option<WireId>>> = vec![Vec::new(); nt];
    let mut bottoms: Vec<Vec<Option<WireId>>> = vec![Vec::new(); nt];
    let mut top_ports = Vec::new();
    let mut bottom_ports = Vec::new();
    let mut wires = Vec::with_capacity(file.wires.len());
    for (i, w) in file.wires.iter().enumerate() {
        let field = |f: &str| format!("wires[{i}].{f}");
        let label = ctx.pres().letter(&w.label).ok_or_else(|| DiagramError::Malformed(field("label")))?;
        let coeff = coeff_parse(ctx.coeffs().spec(label), &w.coeff)
            .map_err(|e| DiagramError::Malformed(format!("{}: {e}", field("coeff"))))?;
        let top = match &w.top.site {
            Site::Frame(s) if s == "frame_top" => {
                slot(&mut top_ports, w.top.index, i, "top port")?;
                End::Frame(w.top.index)
            }
            Site::Transistor { transistor, side } if side == "bottom" && *transistor < nt => {
                slot(&mut bottoms[*transistor], w.top.index, i, "transistor bottom")?;
                End::Transistor(*transistor, w.top.index)
            }
            _ => return Err(DiagramError::Malformed(field("top"))),
        };
        let bottom = match &w.bottom.site {
            Site::Frame(s) if s == "frame_bottom" => {
                slot(&mut bottom_ports, w.bottom.index, i, "bottom port")?;
                End::Frame(w.bottom.index)
            }
            Site::Transistor { transistor, side } if side == "top" && *transistor < nt => {
                slot(&mut tops[*transistor], w.bottom.index, i, "transistor top")?;
                End::Transistor(*transistor, w.bottom.index)
            }
            _ => return Err(DiagramError::Malformed(field("bottom"))),
        };
        wires.push(Wire { label, coeff, top, bottom });
    }
    let transistors = transistors
        .into_iter()
        .zip(tops.into_iter().zip(bottoms))
        .map(|((relation, dir), (top, bottom))| {
            Ok(Transistor { relation, dir, top: dense(top, "transistor top")?, bottom: dense(bottom, "transistor bottom")? })
        })
        .collect::<Result<Vec<_>, DiagramError>>()?;
    let d = Diagram {
        ctx,
        wires,
        transistors,
        top_ports: dense(top_ports, "top port")?,
        bottom_ports: dense(bottom_ports, "bottom port")?,
        annular: file.annular,
    };
    d.validate()?;
    Ok(d.canonical())
}
