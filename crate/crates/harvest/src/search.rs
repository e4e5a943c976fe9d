use crate::store::{Store, StoredDataset};
use crate::HarvestError;

const MAX_EDIT_DISTANCE: usize = 2;

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty())
}

fn field_matches(field: &str, query: &str, fuzzy: bool) -> bool {
    let field = field.to_lowercase();
    if field.contains(query) {
        return true;
    }
    if !fuzzy {
        return false;
    }
    let field_tokens: Vec<&str> = tokens(&field).collect();
    let mut wanted = tokens(query).peekable();
    wanted.peek().is_some()
        && wanted.all(|q| {
            field_tokens
                .iter()
                .any(|t| t.contains(q) || strsim::levenshtein(t, q) <= MAX_EDIT_DISTANCE)
        })
}

/// Number of metadata fields (title, description, keywords, publisher) that
/// match `query`.
pub fn match_score(dataset: &StoredDataset, query: &str, fuzzy: bool) -> usize {
    let query = query.trim().to_lowercase();
    let r = &dataset.record;
    let keywords = r.keywords.iter().any(|k| field_matches(k, &query, fuzzy));
    [
        field_matches(&r.title, &query, fuzzy),
        field_matches(&r.description, &query, fuzzy),
        keywords,
        field_matches(&r.publisher, &query, fuzzy),
    ]
    .into_iter()
    .filter(|m| *m)
    .count()
}

/// Case-insensitive search over local metadata. With `fuzzy`, every query
/// token may also match a field token within edit distance 2. Results are
/// ranked by matching-field count, then id. An empty query returns every id.
pub fn search_local(store: &Store, query: &str, fuzzy: bool) -> Result<Vec<String>, HarvestError> {
    let all = store.load_all()?;
    if query.trim().is_empty() {
        return Ok(all.into_iter().map(|d| d.record.id).collect());
    }
    let mut hits: Vec<(usize, String)> = all
        .iter()
        .map(|d| (match_score(d, query, fuzzy), d.record.id.clone()))
        .filter(|(score, _)| *score > 0)
        .collect();
    hits.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(hits.into_iter().map(|(_, id)| id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_matching() {
        assert!(field_matches("BBC Sport Ontology", "sport", false));
        assert!(!field_matches("BBC Sport Ontology", "sprot", false));
        assert!(field_matches("BBC Sport Ontology", "sprot", true));
        assert!(field_matches("BBC Sport Ontology", "bbc sprot", true));
        assert!(!field_matches("BBC Sport Ontology", "sprot xyzzyq", true));
        assert!(!field_matches("Friend of a Friend", "sprot", true));
        assert!(!field_matches("anything", "--", true));
    }
}
