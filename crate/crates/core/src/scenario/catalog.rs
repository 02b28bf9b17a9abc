//! Disaster-type severity catalog.
//!
//! A catalog is CSV with the header `disaster_type,injury_factor,fear,AE,AES`:
//! injury factor, initial fear, availability of utility electricity and
//! availability of emergency services, all in `[0, 1]`.

use indexmap::IndexMap;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::infrastructure::DisasterProfile;
use crate::unit::UnitValue;

/// Averages of EM-DAT records for 2000–2017, plus a severe terrorist attack.
pub const BUNDLED_CATALOG: &str = include_str!("emdat.csv");

const HEADER: [&str; 5] = ["disaster_type", "injury_factor", "fear", "AE", "AES"];

/// Profiles by disaster type, in file order.
pub type Catalog = IndexMap<String, DisasterProfile>;

#[derive(Deserialize)]
struct Row {
    disaster_type: String,
    injury_factor: f64,
    fear: f64,
    #[serde(rename = "AE")]
    ae: f64,
    #[serde(rename = "AES")]
    aes: f64,
}

pub fn load_disaster_catalog(text: &str) -> Result<Catalog> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::data(format!("catalog header: {e}")))?;
    if header.iter().ne(HEADER) {
        return Err(Error::data(format!(
            "catalog header must be `{}`, found `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut catalog = Catalog::new();
    for (k, row) in reader.deserialize::<Row>().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| Error::data(format!("catalog line {line}: {e}")))?;
        let unit = |name: &str, x: f64| {
            UnitValue::new(x)
                .map_err(|_| Error::data(format!("catalog line {line}: {name} = {x} is outside [0, 1]")))
        };
        let profile = DisasterProfile {
            injury_factor: unit("injury_factor", row.injury_factor)?,
            initial_fear: unit("fear", row.fear)?,
            availability_electricity: unit("AE", row.ae)?,
            availability_emergency: unit("AES", row.aes)?,
            disaster_type: row.disaster_type.clone(),
        };
        if catalog.insert(row.disaster_type.clone(), profile).is_some() {
            return Err(Error::data(format!("catalog line {line}: duplicate type `{}`", row.disaster_type)));
        }
    }
    Ok(catalog)
}

pub fn bundled_catalog() -> Catalog {
    load_disaster_catalog(BUNDLED_CATALOG).expect("bundled catalog is valid")
}
