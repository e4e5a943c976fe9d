use schemaforge_core::fca::FormalContext;
use schemaforge_core::intersections::{compute_regions, lotus_data, render_svg, upset_data, VisDocument, VisVariant};

fn context() -> FormalContext {
    FormalContext {
        row_labels: vec!["http://x/A&B".into(), "http://x/C".into(), "http://x/D".into()],
        col_labels: vec!["p".into(), "q".into(), "r".into(), "s".into()],
        cells: vec![
            vec![true, true, false, true],
            vec![false, true, true, true],
            vec![false, false, true, true],
        ],
    }
}

fn class_count(doc: &roxmltree::Document, class: &str) -> usize {
    doc.descendants().filter(|n| n.attribute("class") == Some(class)).count()
}

#[test]
fn upset_svg_is_well_formed() {
    let ctx = context();
    let table = compute_regions(&ctx, &ctx.row_labels).unwrap();
    let vis = upset_data(&table);
    let svg = render_svg(&vis).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert_eq!(class_count(&doc, "set-bar"), 3);
    assert_eq!(class_count(&doc, "intersection-bar"), vis.regions.len());
    // bar heights follow the counts
    let heights: Vec<f64> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("intersection-bar"))
        .map(|n| n.attribute("height").unwrap().parse().unwrap())
        .collect();
    for (h, r) in heights.iter().zip(&vis.regions) {
        let expected = heights[0] * r.count as f64 / vis.regions[0].count as f64;
        assert!((h - expected).abs() < 0.01);
    }
}

#[test]
fn lotus_and_empty_svgs_are_well_formed() {
    let ctx = context();
    let table = compute_regions(&ctx, &ctx.row_labels).unwrap();
    let svg = render_svg(&lotus_data(&table).unwrap()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(class_count(&doc, "petal"), 3);

    let empty = VisDocument {
        variant: VisVariant::Lotus,
        etypes: Vec::new(),
        set_sizes: Default::default(),
        regions: Vec::new(),
    };
    roxmltree::Document::parse(&render_svg(&empty).unwrap()).unwrap();
}
