use std::env;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use rdc_core::sweep::CurveSweep;

use crate::args::Format;
use crate::commands::Failure;

pub const OUTPUT_DIR_VAR: &str = "RDC_OUTPUT_DIR";

pub fn render(sweep: &CurveSweep, format: Format) -> String {
    match format {
        Format::Csv => sweep.to_csv(),
        Format::Json => sweep.to_json(),
    }
}

fn output_dir() -> Option<PathBuf> {
    env::var_os(OUTPUT_DIR_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Relative paths land in `$RDC_OUTPUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match output_dir() {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// `out/curve.csv` + `_lb` -> `out/curve_lb.csv`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name: OsString = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::invalid(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Writes to `--output`, else to `$RDC_OUTPUT_DIR/<stem>.<ext>`, else stdout.
pub fn emit(sweep: &CurveSweep, format: Format, output: Option<&Path>, stem: &str) -> Result<(), Failure> {
    let text = render(sweep, format);
    let target = match output {
        Some(p) => Some(resolve(p)),
        None => output_dir().map(|d| d.join(format!("{stem}.{}", format.extension()))),
    };
    match target {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
