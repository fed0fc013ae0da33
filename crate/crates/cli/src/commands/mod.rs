pub mod control;
pub mod emg;
pub mod report;
pub mod simulate;
pub mod sysid;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(CliError::io(path))
}
