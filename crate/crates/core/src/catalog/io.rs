//! Delimited-text formats for catalogs and interactions.
//!
//! Items: `item_id,feature,value`, one row per assignment.
//! Interactions: `user_id,item_id,rating,split`; `split` may be omitted, in
//! which case every row is treated as training data.
//! Files ending in `.tsv` are read and written tab-separated.

use std::collections::BTreeMap;
use std::path::Path;

use super::{Interactions, ItemCatalog, RawInteraction, RawItem, Split};
use crate::error::{Error, Result};

fn delimiter(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => b'\t',
        _ => b',',
    }
}

pub(crate) fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter(path))
        .trim(csv::Trim::All)
        .from_path(path)?)
}

pub(crate) fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new()
        .delimiter(delimiter(path))
        .from_path(path)?)
}

pub(crate) fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("missing column {name:?}"),
        })
}

pub fn read_items(path: impl AsRef<Path>) -> Result<Vec<RawItem>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let (id, feature, value) = (
        column(&headers, "item_id", path)?,
        column(&headers, "feature", path)?,
        column(&headers, "value", path)?,
    );
    let mut items: BTreeMap<String, BTreeMap<String, _>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let set: &mut std::collections::BTreeSet<String> = items
            .entry(row[id].to_string())
            .or_default()
            .entry(row[feature].to_string())
            .or_default();
        set.insert(row[value].to_string());
    }
    Ok(items.into_iter().collect())
}

pub fn write_items(path: impl AsRef<Path>, catalog: &ItemCatalog) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(["item_id", "feature", "value"])?;
    for (id, features) in catalog.to_raw() {
        for (feature, values) in features {
            for value in values {
                w.write_record([id.as_str(), feature.as_str(), value.as_str()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_interactions(path: impl AsRef<Path>) -> Result<Vec<RawInteraction>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let user = column(&headers, "user_id", path)?;
    let item = column(&headers, "item_id", path)?;
    let rating = column(&headers, "rating", path)?;
    let split = headers.iter().position(|h| h == "split");
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let parse_err = |message: String| Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let value: f64 = row[rating]
            .parse()
            .map_err(|_| parse_err(format!("bad rating {:?}", &row[rating])))?;
        let split = match split {
            Some(c) => row[c]
                .parse::<Split>()
                .map_err(|e| parse_err(e.to_string()))?,
            None => Split::Train,
        };
        out.push((row[user].to_string(), row[item].to_string(), value, split));
    }
    Ok(out)
}

pub fn write_interactions(
    path: impl AsRef<Path>,
    interactions: &Interactions,
    catalog: &ItemCatalog,
) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(["user_id", "item_id", "rating", "split"])?;
    for (user, item, rating, split) in interactions.to_raw(catalog) {
        w.write_record([
            user.as_str(),
            item.as_str(),
            rating.to_string().as_str(),
            split.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
