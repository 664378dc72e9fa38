//! JSON-line progress and log records on standard error.

use std::io::Write;

use serde_json::{json, Value};

/// One `{"stage": .., ...fields}` line.
pub fn event(stage: &str, fields: Value) {
    let mut obj = json!({ "stage": stage });
    if let (Some(o), Value::Object(f)) = (obj.as_object_mut(), fields) {
        o.extend(f);
    }
    let _ = writeln!(std::io::stderr().lock(), "{obj}");
}

struct JsonLogger;

impl log::Log for JsonLogger {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }

    fn log(&self, r: &log::Record) {
        if self.enabled(r.metadata()) {
            let line =
                json!({"level": r.level().as_str().to_lowercase(), "msg": r.args().to_string()});
            let _ = writeln!(std::io::stderr().lock(), "{line}");
        }
    }

    fn flush(&self) {}
}

static LOGGER: JsonLogger = JsonLogger;

pub fn init() {
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
}
