//! Formal-context matrix and the CSV exports (FCA, triples, CUE).

use thiserror::Error;

use crate::cue::CueReport;
use crate::rdf::{Graph, Term};
use crate::schema::SchemaContext;

#[derive(Debug, Error)]
pub enum FcaError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed FCA table: {0}")]
    Malformed(String),
}

/// Boolean etype × property matrix; rows and columns in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormalContext {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<bool>>,
}

impl FormalContext {
    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.cells[i].iter().filter(|c| **c).count()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        self.cells.iter().filter(|row| row[j]).count()
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().flatten().filter(|c| **c).count()
    }
}

pub fn build_context(schema: &SchemaContext) -> FormalContext {
    let row_labels: Vec<String> = schema.etypes().iter().cloned().collect();
    let col_labels: Vec<String> = schema.properties().iter().cloned().collect();
    let cells = row_labels
        .iter()
        .map(|e| col_labels.iter().map(|p| schema.is_associated(e, p)).collect())
        .collect();
    FormalContext {
        row_labels,
        col_labels,
        cells,
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    // writing into a Vec cannot fail
    w.into_inner().expect("in-memory csv writer")
}

pub fn export_fca_csv(ctx: &FormalContext) -> Vec<u8> {
    let mut w = writer();
    let header = std::iter::once("etype").chain(ctx.col_labels.iter().map(String::as_str));
    w.write_record(header).expect("in-memory csv writer");
    for (label, row) in ctx.row_labels.iter().zip(&ctx.cells) {
        let cells = row.iter().map(|c| if *c { "1" } else { "0" });
        w.write_record(std::iter::once(label.as_str()).chain(cells))
            .expect("in-memory csv writer");
    }
    finish(w)
}

/// Reads a table written by [`export_fca_csv`].
pub fn import_fca_csv(bytes: &[u8]) -> Result<FormalContext, FcaError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(false).from_reader(bytes);
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| FcaError::Malformed("missing header".into()))??;
    if header.get(0) != Some("etype") {
        return Err(FcaError::Malformed("first header cell must be \"etype\"".into()));
    }
    let col_labels: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut ctx = FormalContext {
        col_labels,
        ..Default::default()
    };
    for rec in records {
        let rec = rec?;
        let mut fields = rec.iter();
        let label = fields.next().unwrap_or_default().to_string();
        let row = fields
            .map(|c| match c {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(FcaError::Malformed(format!("cell {other:?} in row {label}"))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        ctx.row_labels.push(label);
        ctx.cells.push(row);
    }
    Ok(ctx)
}

pub fn export_triples_csv(graph: &Graph) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["subject", "predicate", "object", "object_kind", "datatype", "language"])
        .expect("in-memory csv writer");
    for t in graph.triples() {
        let (datatype, language) = match &t.object {
            Term::Literal(lit) => match &lit.language {
                Some(lang) => (String::new(), lang.clone()),
                None => (lit.datatype.clone().unwrap_or_default(), String::new()),
            },
            _ => (String::new(), String::new()),
        };
        w.write_record([
            t.subject.value(),
            t.predicate.value(),
            t.object.value(),
            t.object.kind().as_str(),
            &datatype,
            &language,
        ])
        .expect("in-memory csv writer");
    }
    finish(w)
}

pub fn export_cue_csv(report: &CueReport) -> Vec<u8> {
    let mut w = writer();
    w.write_record(["etype", "cue_e", "cue_er", "n_props"])
        .expect("in-memory csv writer");
    for row in &report.per_etype {
        w.write_record([
            row.etype.clone(),
            format!("{:.4}", row.cue_e),
            format!("{:.4}", row.cue_er),
            row.n_props.to_string(),
        ])
        .expect("in-memory csv writer");
    }
    let mut out = finish(w);
    let s = &report.schema_level;
    let cue_kr = s.cue_kr.map(|v| format!("{v:.4}")).unwrap_or_default();
    out.extend_from_slice(
        format!(
            "#cue_k={:.4}\n#cue_kr={}\n#n_etypes={}\n#n_props={}\n",
            s.cue_k, cue_kr, s.n_etypes, s.n_props_total
        )
        .as_bytes(),
    );
    out
}
