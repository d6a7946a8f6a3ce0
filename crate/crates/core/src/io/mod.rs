//! Dataset ingestion, model persistence, and closed-form export.

mod csv_load;
mod export;
mod model_file;

pub use csv_load::{load_csv, load_csv_features, CsvOptions, LoadedCsv};
pub use export::export_closed_form;
pub use model_file::{
    deserialize_model, serialize_model, ModelFile, Provenance, StoredModel, FORMAT_VERSION,
};
