use std::sync::Mutex;

use crate::audit::{AuditEvent, LogArchive};

/// Receives audit events from evaluators. Implementations must accept calls
/// from many threads and serialize them.
pub trait AuditSink: Send + Sync {
    fn record(&self, event: AuditEvent);
}

impl AuditSink for Mutex<Vec<AuditEvent>> {
    fn record(&self, event: AuditEvent) {
        self.lock().expect("audit sink poisoned").push(event);
    }
}

impl AuditSink for Mutex<LogArchive> {
    fn record(&self, event: AuditEvent) {
        self.lock()
            .expect("audit sink poisoned")
            .append(event)
            .expect("evaluators only emit well-formed events");
    }
}
