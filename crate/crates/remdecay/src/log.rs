//! Line-delimited JSON progress records on stderr.

use std::io::Write;
use std::sync::Mutex;

/// Sink for log records. `Log::quiet()` drops everything.
pub struct Log {
    sink: Option<Mutex<Box<dyn Write + Send>>>,
}

impl Log {
    pub fn stderr() -> Self {
        Self {
            sink: Some(Mutex::new(Box::new(std::io::stderr()))),
        }
    }

    pub fn quiet() -> Self {
        Self { sink: None }
    }

    pub fn to_writer(w: impl Write + Send + 'static) -> Self {
        Self {
            sink: Some(Mutex::new(Box::new(w))),
        }
    }

    pub fn emit(&self, record: serde_json::Value) {
        if let Some(sink) = &self.sink {
            let mut w = sink.lock().unwrap_or_else(|p| p.into_inner());
            // a broken log pipe must not abort the run
            let _ = writeln!(w, "{record}");
        }
    }
}
