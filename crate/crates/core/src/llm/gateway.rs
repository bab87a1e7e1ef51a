use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};

use super::{Backend, ChatRequest, LlmError, ProfileKind, ResponseCache};

/// One `complete` call as seen by the gateway.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub key: String,
    pub kind: ProfileKind,
    pub attempt_tag: u32,
    /// Answered from the disk cache or by joining an identical in-flight call.
    pub cached: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    /// Calls that reached the backend.
    pub backend_calls: u64,
    /// Backend calls that left the process.
    pub network_calls: u64,
    pub cache_hits: u64,
    pub explore_calls: u64,
    pub infer_calls: u64,
    pub failures: u64,
}

#[derive(Default)]
struct Slot {
    result: Mutex<Option<Result<String, LlmError>>>,
    ready: Condvar,
}

pub struct Gateway {
    backend: Arc<dyn Backend>,
    cache: Option<ResponseCache>,
    in_flight: Mutex<HashMap<String, Arc<Slot>>>,
    log: Mutex<(Vec<CallRecord>, GatewayStats)>,
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>, cache: Option<ResponseCache>) -> Self {
        Self {
            backend,
            cache,
            in_flight: Mutex::new(HashMap::new()),
            log: Mutex::new((Vec::new(), GatewayStats::default())),
        }
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn stats(&self) -> GatewayStats {
        self.log.lock().expect("log lock").1
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.log.lock().expect("log lock").0.clone()
    }

    /// Requests seen so far, cached ones included.
    pub fn request_count(&self) -> u64 {
        self.log.lock().expect("log lock").0.len() as u64
    }

    /// Whether callers may fan requests out over threads without changing
    /// results.
    pub fn parallel_safe(&self) -> bool {
        self.backend.order_independent()
    }

    fn record(&self, request: &ChatRequest, key: String, cached: bool, ok: bool) {
        let mut guard = self.log.lock().expect("log lock");
        let (records, stats) = &mut *guard;
        if cached {
            stats.cache_hits += 1;
        } else {
            stats.backend_calls += 1;
            if self.backend.is_network() {
                stats.network_calls += 1;
            }
            match request.profile.kind {
                ProfileKind::Explore => stats.explore_calls += 1,
                ProfileKind::Infer => stats.infer_calls += 1,
            }
            if !ok {
                stats.failures += 1;
            }
        }
        records.push(CallRecord {
            key,
            kind: request.profile.kind,
            attempt_tag: request.attempt_tag,
            cached,
            ok,
        });
    }

    /// Returns the assistant text for `request`, from cache when possible.
    /// Concurrent identical requests share one backend call.
    pub fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let key = request.cache_key();
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&key)? {
                self.record(request, key, true, true);
                return Ok(entry.response_text);
            }
        }

        let (slot, leader) = {
            let mut in_flight = self.in_flight.lock().expect("in-flight lock");
            match in_flight.get(&key) {
                Some(slot) => (slot.clone(), false),
                None => {
                    let slot = Arc::new(Slot::default());
                    in_flight.insert(key.clone(), slot.clone());
                    (slot, true)
                }
            }
        };

        if !leader {
            let mut result = slot.result.lock().expect("slot lock");
            while result.is_none() {
                result = slot.ready.wait(result).expect("slot lock");
            }
            let result = result.clone().expect("filled");
            self.record(request, key, true, result.is_ok());
            return result;
        }

        let mut result = self.backend.complete(request);
        if let (Ok(text), Some(cache)) = (&result, &self.cache) {
            if let Err(e) = cache.put(&key, text) {
                result = Err(e);
            }
        }
        self.record(request, key.clone(), false, result.is_ok());
        {
            let mut guard = slot.result.lock().expect("slot lock");
            *guard = Some(result.clone());
            slot.ready.notify_all();
        }
        self.in_flight.lock().expect("in-flight lock").remove(&key);
        result
    }

    /// Sends `request` to the backend `repeats` times, bypassing the cache,
    /// and reports whether every answer was identical. Used to flag
    /// backends that are nondeterministic under greedy decoding.
    pub fn probe_determinism(&self, request: &ChatRequest, repeats: usize) -> Result<bool, LlmError> {
        let mut first: Option<String> = None;
        for _ in 0..repeats.max(2) {
            let text = self.backend.complete(request)?;
            self.record(request, request.cache_key(), false, true);
            match &first {
                None => first = Some(text),
                Some(f) if *f != text => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }
}
