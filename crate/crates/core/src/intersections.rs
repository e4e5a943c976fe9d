//! Property-sharing regions among selected entity types, plus the VIS
//! documents (knowledge lotus, UpSet) and their SVG renderings.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fca::FormalContext;

pub const MAX_REGION_ETYPES: usize = 16;
pub const MAX_LOTUS_ETYPES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntersectionError {
    #[error("unknown entity type <{0}>")]
    UnknownEtype(String),
    #[error("entity type <{0}> selected twice")]
    DuplicateEtype(String),
    #[error("at least 2 entity types must be selected, got {0}")]
    TooFewEtypes(usize),
    #[error("{got} entity types selected, the limit is {limit}")]
    TooManyEtypes { got: usize, limit: usize },
    #[error("malformed VIS document: {0}")]
    MalformedVis(String),
}

/// Bit `i` of a mask stands for `selected[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTable {
    selected: Vec<String>,
    set_sizes: Vec<usize>,
    // only non-empty regions are stored
    regions: BTreeMap<u32, BTreeSet<String>>,
}

impl RegionTable {
    pub fn selected(&self) -> &[String] {
        &self.selected
    }

    /// Properties shared by exactly the etypes in `mask`.
    pub fn region(&self, mask: u32) -> BTreeSet<String> {
        self.regions.get(&mask).cloned().unwrap_or_default()
    }

    pub fn non_empty(&self) -> impl Iterator<Item = (u32, &BTreeSet<String>)> {
        self.regions.iter().map(|(m, s)| (*m, s))
    }

    /// `|prop(selected[i])|`.
    pub fn set_size(&self, i: usize) -> usize {
        self.set_sizes[i]
    }

    pub fn members(&self, mask: u32) -> Vec<String> {
        (0..self.selected.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.selected[i].clone())
            .collect()
    }

    pub fn union_size(&self) -> usize {
        self.regions.values().map(BTreeSet::len).sum()
    }
}

pub fn compute_regions(ctx: &FormalContext, selected: &[String]) -> Result<RegionTable, IntersectionError> {
    if selected.len() < 2 {
        return Err(IntersectionError::TooFewEtypes(selected.len()));
    }
    if selected.len() > MAX_REGION_ETYPES {
        return Err(IntersectionError::TooManyEtypes {
            got: selected.len(),
            limit: MAX_REGION_ETYPES,
        });
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(selected.len());
    for e in selected {
        if !seen.insert(e) {
            return Err(IntersectionError::DuplicateEtype(e.clone()));
        }
        rows.push(ctx.row_index(e).ok_or_else(|| IntersectionError::UnknownEtype(e.clone()))?);
    }
    let mut regions: BTreeMap<u32, BTreeSet<String>> = BTreeMap::new();
    for (j, p) in ctx.col_labels.iter().enumerate() {
        let mask = rows
            .iter()
            .enumerate()
            .filter(|(_, &r)| ctx.cells[r][j])
            .fold(0u32, |m, (i, _)| m | (1 << i));
        if mask != 0 {
            regions.entry(mask).or_default().insert(p.clone());
        }
    }
    Ok(RegionTable {
        selected: selected.to_vec(),
        set_sizes: rows.iter().map(|&r| ctx.row_sum(r)).collect(),
        regions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisVariant {
    Lotus,
    Upset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisRegion {
    pub members: Vec<String>,
    pub count: usize,
    pub properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisDocument {
    pub variant: VisVariant,
    pub etypes: Vec<String>,
    pub set_sizes: BTreeMap<String, usize>,
    pub regions: Vec<VisRegion>,
}

impl VisDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("VIS documents serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, IntersectionError> {
        let doc: VisDocument =
            serde_json::from_str(text).map_err(|e| IntersectionError::MalformedVis(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), IntersectionError> {
        let bad = |msg: String| Err(IntersectionError::MalformedVis(msg));
        let etypes: HashSet<&String> = self.etypes.iter().collect();
        if etypes.len() != self.etypes.len() {
            return bad("duplicate entity type".into());
        }
        if self.variant == VisVariant::Lotus && self.etypes.len() > MAX_LOTUS_ETYPES {
            return bad(format!("lotus with {} entity types", self.etypes.len()));
        }
        for k in self.set_sizes.keys() {
            if !etypes.contains(k) {
                return bad(format!("set size for unlisted entity type <{k}>"));
            }
        }
        let mut masks = HashSet::new();
        for r in &self.regions {
            if r.members.is_empty() {
                return bad("region without members".into());
            }
            if r.count != r.properties.len() {
                return bad(format!("region count {} but {} properties", r.count, r.properties.len()));
            }
            let mut members = BTreeSet::new();
            for m in &r.members {
                if !etypes.contains(m) || !members.insert(m) {
                    return bad(format!("bad region member <{m}>"));
                }
            }
            if !masks.insert(members) {
                return bad("repeated region".into());
            }
        }
        Ok(())
    }
}

fn base_document(table: &RegionTable, variant: VisVariant) -> VisDocument {
    VisDocument {
        variant,
        etypes: table.selected.clone(),
        set_sizes: table
            .selected
            .iter()
            .cloned()
            .zip(table.set_sizes.iter().copied())
            .collect(),
        regions: Vec::new(),
    }
}

fn vis_region(table: &RegionTable, mask: u32) -> VisRegion {
    let properties: Vec<String> = table.region(mask).into_iter().collect();
    VisRegion {
        members: table.members(mask),
        count: properties.len(),
        properties,
    }
}

/// Every non-empty mask with its count, in mask order. Singleton masks are
/// the petals.
pub fn lotus_data(table: &RegionTable) -> Result<VisDocument, IntersectionError> {
    let k = table.selected.len();
    if k > MAX_LOTUS_ETYPES {
        return Err(IntersectionError::TooManyEtypes {
            got: k,
            limit: MAX_LOTUS_ETYPES,
        });
    }
    let mut doc = base_document(table, VisVariant::Lotus);
    doc.regions = (1..(1u32 << k)).map(|m| vis_region(table, m)).collect();
    Ok(doc)
}

/// Non-empty regions by descending count, then mask.
pub fn upset_data(table: &RegionTable) -> VisDocument {
    let mut masks: Vec<(usize, u32)> = table.regions.iter().map(|(m, s)| (s.len(), *m)).collect();
    masks.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut doc = base_document(table, VisVariant::Upset);
    doc.regions = masks.into_iter().map(|(_, m)| vis_region(table, m)).collect();
    doc
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn short_name(iri: &str) -> &str {
    let tail = iri.rsplit(['#', '/']).find(|s| !s.is_empty());
    tail.unwrap_or(iri)
}

const LABEL_W: f64 = 140.0;
const SET_BAR_W: f64 = 160.0;
const ROW_H: f64 = 22.0;
const COL_W: f64 = 26.0;
const INTER_BAR_H: f64 = 160.0;
const MARGIN: f64 = 20.0;

pub fn render_svg(vis: &VisDocument) -> Result<String, IntersectionError> {
    vis.validate()?;
    Ok(match vis.variant {
        VisVariant::Upset => render_upset(vis),
        VisVariant::Lotus => render_lotus(vis),
    })
}

fn svg_open(out: &mut String, width: f64, height: f64, variant: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" data-variant="{variant}">"#
    );
    out.push_str("<style>text{font-family:sans-serif;font-size:11px}</style>\n");
}

fn upset_set_size(vis: &VisDocument, e: &str) -> usize {
    vis.set_sizes.get(e).copied().unwrap_or(0)
}

fn render_upset(vis: &VisDocument) -> String {
    let n_sets = vis.etypes.len();
    let n_regions = vis.regions.len();
    let matrix_x = MARGIN + SET_BAR_W + LABEL_W;
    let matrix_y = MARGIN + INTER_BAR_H;
    let width = matrix_x + COL_W * n_regions as f64 + MARGIN;
    let height = matrix_y + ROW_H * n_sets as f64 + MARGIN;
    let max_set = vis.etypes.iter().map(|e| upset_set_size(vis, e)).max().unwrap_or(0).max(1) as f64;
    let max_region = vis.regions.iter().map(|r| r.count).max().unwrap_or(0).max(1) as f64;

    let mut out = String::new();
    svg_open(&mut out, width, height, "upset");
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{matrix_x:.2}" y1="{MARGIN:.2}" x2="{matrix_x:.2}" y2="{matrix_y:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{matrix_x:.2}" y1="{matrix_y:.2}" x2="{width:.2}" y2="{matrix_y:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{MARGIN:.2}" y1="{matrix_y:.2}" x2="{:.2}" y2="{matrix_y:.2}" stroke="black"/>"#,
        MARGIN + SET_BAR_W
    );
    for (i, e) in vis.etypes.iter().enumerate() {
        let size = upset_set_size(vis, e);
        let w = SET_BAR_W * size as f64 / max_set;
        let y = matrix_y + ROW_H * i as f64 + 4.0;
        let _ = writeln!(
            out,
            r##"<rect class="set-bar" x="{:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}" fill="#4a7ab5"><title>{} ({size})</title></rect>"##,
            MARGIN + SET_BAR_W - w,
            ROW_H - 8.0,
            escape(e)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            MARGIN + SET_BAR_W + 6.0,
            y + ROW_H - 11.0,
            escape(short_name(e))
        );
    }
    for (j, r) in vis.regions.iter().enumerate() {
        let x = matrix_x + COL_W * j as f64;
        let h = (INTER_BAR_H - 16.0) * r.count as f64 / max_region;
        let _ = writeln!(
            out,
            r##"<rect class="intersection-bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="#333333"><title>{}: {}</title></rect>"##,
            x + 4.0,
            matrix_y - h,
            COL_W - 8.0,
            escape(&r.members.join(" & ")),
            r.count
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x + COL_W / 2.0,
            matrix_y - h - 3.0,
            r.count
        );
        for (i, e) in vis.etypes.iter().enumerate() {
            let filled = if r.members.contains(e) { "#333333" } else { "#dddddd" };
            let _ = writeln!(
                out,
                r#"<circle class="dot" cx="{:.2}" cy="{:.2}" r="5" fill="{filled}"/>"#,
                x + COL_W / 2.0,
                matrix_y + ROW_H * i as f64 + ROW_H / 2.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn render_lotus(vis: &VisDocument) -> String {
    let k = vis.etypes.len();
    let size = 420.0;
    let (cx, cy) = (size / 2.0, size / 2.0);
    let legend_y = size;
    let shared: Vec<&VisRegion> = vis.regions.iter().filter(|r| r.members.len() > 1).collect();
    let height = legend_y + ROW_H * (shared.len() as f64 + 1.0) + MARGIN;

    let mut out = String::new();
    svg_open(&mut out, size, height, "lotus");
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{MARGIN:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="black"/>"#,
        size - MARGIN
    );
    let petal_count = |e: &String| {
        vis.regions
            .iter()
            .find(|r| r.members.len() == 1 && &r.members[0] == e)
            .map_or(0, |r| r.count)
    };
    for (i, e) in vis.etypes.iter().enumerate() {
        let angle = 360.0 * i as f64 / k.max(1) as f64;
        let rad = (angle - 90.0).to_radians();
        let (lx, ly) = (cx + 150.0 * rad.cos(), cy + 150.0 * rad.sin());
        let _ = writeln!(
            out,
            r##"<ellipse class="petal" cx="{cx:.2}" cy="{:.2}" rx="48" ry="95" transform="rotate({angle:.2} {cx:.2} {cy:.2})" fill="#e8902e" fill-opacity="0.35" stroke="#b36200"><title>{}</title></ellipse>"##,
            cy - 85.0,
            escape(e)
        );
        let _ = writeln!(
            out,
            r#"<text class="petal-count" x="{lx:.2}" y="{ly:.2}" text-anchor="middle">{} ({})</text>"#,
            escape(short_name(e)),
            petal_count(e)
        );
    }
    for (i, r) in shared.iter().enumerate() {
        let names: Vec<&str> = r.members.iter().map(|m| short_name(m)).collect();
        let _ = writeln!(
            out,
            r#"<text class="shared-count" x="{MARGIN:.2}" y="{:.2}">{}: {}</text>"#,
            legend_y + ROW_H * (i as f64 + 1.0),
            escape(&names.join(" & ")),
            r.count
        );
    }
    out.push_str("</svg>\n");
    out
}
