//! A process-wide logger writing to stderr and to the current run's
//! `logs.txt`.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use log::{LevelFilter, Log, Metadata, Record};

struct RunLogger {
    file: Mutex<Option<File>>,
}

static LOGGER: RunLogger = RunLogger { file: Mutex::new(None) };

impl Log for RunLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= log::max_level()
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let line = format!(
            "{} {:<5} {}\n",
            chrono::Local::now().format("%H:%M:%S%.3f"),
            record.level(),
            record.args()
        );
        eprint!("{line}");
        if let Some(f) = self.file.lock().unwrap_or_else(|e| e.into_inner()).as_mut() {
            let _ = f.write_all(line.as_bytes());
        }
    }

    fn flush(&self) {
        if let Some(f) = self.file.lock().unwrap_or_else(|e| e.into_inner()).as_mut() {
            let _ = f.flush();
        }
    }
}

/// Installs the logger (once per process) and sets the level.
pub fn init(level: LevelFilter) {
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(level);
}

/// Starts mirroring log lines into `path`, replacing any previous file.
pub fn attach(path: &Path) -> std::io::Result<()> {
    let f = File::create(path)?;
    *LOGGER.file.lock().unwrap_or_else(|e| e.into_inner()) = Some(f);
    Ok(())
}

pub fn detach() {
    LOGGER.flush();
    *LOGGER.file.lock().unwrap_or_else(|e| e.into_inner()) = None;
}
