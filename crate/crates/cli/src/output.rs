//! CSV and JSON writers that record a digest of every file they produce.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use flate2::{Compression, GzBuilder};
use serde::Serialize;
use sha2::{Digest, Sha256};
use sqrtwiener::ARTIFACT_VERSION;

use crate::manifest::{OutputFile, RunManifest};
use crate::{CliError, CliResult};

/// Ensemble CSVs with more data rows than this are gzip-compressed unless
/// compression is disabled.
pub const COMPRESS_ROWS: usize = 1_000_000;

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

type FileSink = HashingWriter<BufWriter<File>>;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory of one command.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn create(dir: &Path, command: &str) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn open(&self, name: &str) -> CliResult<FileSink> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
        })
    }

    fn record(&mut self, name: String, sink: FileSink) -> CliResult<String> {
        let path = self.dir.join(&name);
        let HashingWriter { mut inner, hasher } = sink;
        inner.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(OutputFile {
            name: name.clone(),
            sha256: hex(&hasher.finalize()),
        });
        Ok(name)
    }

    /// Writes a CSV with a `#` line naming the manifest, the column header,
    /// and the rows produced by `body`. Returns the file name, which gains
    /// `.gz` when `rows` exceeds [`COMPRESS_ROWS`] and `compress` is set.
    pub fn csv<F>(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: usize,
        compress: bool,
        body: F,
    ) -> CliResult<String>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let gz = compress && rows > COMPRESS_ROWS;
        let name = if gz {
            format!("{name}.gz")
        } else {
            name.to_string()
        };
        let path = self.dir.join(&name);
        let io_err = |e| CliError::io(&path, e);
        let sink = self.open(&name)?;
        let write_text = |w: &mut dyn Write| -> io::Result<()> {
            writeln!(
                w,
                "# {ARTIFACT_VERSION} manifest={}",
                RunManifest::file_name(&self.command)
            )?;
            writeln!(w, "{}", columns.join(","))?;
            body(w)
        };
        let sink = if gz {
            let enc = GzBuilder::new().mtime(0).write(sink, Compression::fast());
            let mut text = BufWriter::with_capacity(1 << 16, enc);
            write_text(&mut text).map_err(io_err)?;
            let enc = text.into_inner().map_err(|e| io_err(e.into_error()))?;
            enc.finish().map_err(io_err)?
        } else {
            let mut text = BufWriter::with_capacity(1 << 16, sink);
            write_text(&mut text).map_err(io_err)?;
            text.into_inner().map_err(|e| io_err(e.into_error()))?
        };
        self.record(name, sink)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<String> {
        let mut sink = self.open(name)?;
        let path = self.dir.join(name);
        serde_json::to_writer_pretty(&mut sink, value)
            .map_err(|e| CliError::io(&path, e.into()))?;
        sink.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
        self.record(name.to_string(), sink)
    }

    /// Stores the file list in `manifest` and writes it.
    pub fn finish(mut self, manifest: &mut RunManifest) -> CliResult<PathBuf> {
        manifest.files = std::mem::take(&mut self.files);
        manifest.finish();
        let name = RunManifest::file_name(&self.command);
        self.json(&name, manifest)?;
        Ok(self.dir.join(name))
    }
}
