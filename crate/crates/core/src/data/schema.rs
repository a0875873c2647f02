use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mwem::HistogramDomain;

/// One categorical column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub categories: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Column {
    pub fn new(name: impl Into<String>, categories: Vec<String>) -> Result<Self> {
        let name = name.into();
        if categories.is_empty() {
            return Err(Error::Format(format!("column {name} has no categories")));
        }
        let mut lookup = HashMap::with_capacity(categories.len());
        for (i, c) in categories.iter().enumerate() {
            if lookup.insert(c.clone(), i).is_some() {
                return Err(Error::Format(format!("column {name} lists category {c:?} twice")));
            }
        }
        Ok(Column { name, categories, lookup })
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.lookup.get(value).copied()
    }
}

/// Column layout shared by every data holder.
///
/// Text form, one column per line: `name|categorical|cat1,cat2,...` with an
/// optional fourth field `label`. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<Column>,
    label: Option<usize>,
}

impl Schema {
    pub fn new(columns: Vec<Column>, label: Option<usize>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Format("schema has no columns".into()));
        }
        if label.is_some_and(|l| l >= columns.len()) {
            return Err(Error::Format("label column out of range".into()));
        }
        let mut seen = HashMap::new();
        for c in &columns {
            if seen.insert(c.name.as_str(), ()).is_some() {
                return Err(Error::Format(format!("column {} declared twice", c.name)));
            }
        }
        Ok(Schema { columns, label })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        let mut label = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            let at = || format!("schema line {}", lineno + 1);
            if !(3..=4).contains(&fields.len()) {
                return Err(Error::Format(format!("{}: expected name|type|categories[|label]", at())));
            }
            if fields[1] != "categorical" {
                return Err(Error::Format(format!("{}: unsupported column type {:?}", at(), fields[1])));
            }
            match fields.get(3) {
                None | Some(&"") => {}
                Some(&"label") => {
                    if label.replace(columns.len()).is_some() {
                        return Err(Error::Format(format!("{}: second label column", at())));
                    }
                }
                Some(other) => return Err(Error::Format(format!("{}: unknown marker {other:?}", at()))),
            }
            let cats = fields[2].split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
            columns.push(Column::new(fields[0], cats)?);
        }
        Schema::new(columns, label)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Data(format!("cannot read schema {}: {e}", path.display())))?;
        Schema::parse(&text)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn domain(&self) -> Result<HistogramDomain> {
        HistogramDomain::new(
            self.columns.iter().map(|c| c.name.clone()).collect(),
            self.columns.iter().map(|c| c.categories.len()).collect(),
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.columns.iter().enumerate() {
            out.push_str(&format!("{}|categorical|{}", c.name, c.categories.join(",")));
            if self.label == Some(i) {
                out.push_str("|label");
            }
            out.push('\n');
        }
        out
    }
}
