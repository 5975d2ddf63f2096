use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::session::Session;
use crate::ApiError;

pub type SessionHandle = Arc<tokio::sync::Mutex<Session>>;

struct Slot {
    session: SessionHandle,
    last_used: Instant,
}

/// In-memory sessions keyed by token. Each session sits behind its own async
/// lock so requests to one session are serialized while others proceed.
pub struct SessionStore {
    slots: Mutex<HashMap<String, Slot>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self { slots: Mutex::new(HashMap::new()), ttl }
    }

    fn slots(&self) -> std::sync::MutexGuard<'_, HashMap<String, Slot>> {
        self.slots.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn insert(&self, session: Session) -> SessionHandle {
        let id = session.id().to_string();
        let handle = Arc::new(tokio::sync::Mutex::new(session));
        let mut slots = self.slots();
        purge(&mut slots, self.ttl);
        slots.insert(id, Slot { session: handle.clone(), last_used: Instant::now() });
        handle
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ApiError> {
        let mut slots = self.slots();
        purge(&mut slots, self.ttl);
        let slot = slots.get_mut(id).ok_or_else(|| ApiError::UnknownSession(id.into()))?;
        slot.last_used = Instant::now();
        Ok(slot.session.clone())
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn purge_expired(&self) -> usize {
        purge(&mut self.slots(), self.ttl)
    }

    pub fn len(&self) -> usize {
        self.slots().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn purge(slots: &mut HashMap<String, Slot>, ttl: Duration) -> usize {
    let before = slots.len();
    slots.retain(|_, s| s.last_used.elapsed() <= ttl);
    before - slots.len()
}
