use std::collections::HashSet;
use std::thread::{self, JoinHandle};

use crossbeam_channel::{bounded, Sender, TrySendError};

use super::{ApplyReport, Configurator};
use crate::event::Event;

/// Caller-side handle of a configurator running on its own thread.
pub struct ConfiguratorHandle {
    tx: Option<Sender<String>>,
    ids: HashSet<String>,
    failed_template: String,
    join: Option<JoinHandle<Configurator>>,
}

/// Moves `configurator` onto a worker thread. Status events go to `status`;
/// `on_report` sees every report before its status event is sent.
pub fn spawn_worker(
    mut configurator: Configurator,
    status: Sender<Event>,
    mut on_report: impl FnMut(&ApplyReport) + Send + 'static,
) -> ConfiguratorHandle {
    let (tx, rx) = bounded::<String>(configurator.engine_config().queue_capacity);
    let ids = configurator.conf().ids().map(String::from).collect();
    let failed_template = configurator.engine_config().failed_template.clone();
    let join = thread::Builder::new()
        .name("configurator".into())
        .spawn(move || {
            for id in rx {
                let Ok(report) = configurator.apply(&id) else { continue };
                on_report(&report);
                if status.send(configurator.status_event(&report)).is_err() {
                    break;
                }
            }
            configurator
        })
        .expect("spawn configurator thread");
    ConfiguratorHandle {
        tx: Some(tx),
        ids,
        failed_template,
        join: Some(join),
    }
}

impl ConfiguratorHandle {
    /// Never blocks. Returns an immediate `failed` status if the queue is full.
    pub fn on_event(&self, e: &Event) -> Option<Event> {
        if !self.ids.contains(e.name()) {
            return None;
        }
        let tx = self.tx.as_ref()?;
        match tx.try_send(e.name().to_string()) {
            Ok(()) => None,
            Err(TrySendError::Full(_)) | Err(TrySendError::Disconnected(_)) => {
                let name = self.failed_template.replace("{id}", e.name());
                Event::new(name, super::SOURCE)
                    .ok()
                    .map(|ev| ev.with_payload("queue full".into()))
            }
        }
    }

    /// Closes the inbound queue and waits for the worker to drain it.
    pub fn shutdown(mut self) -> Option<Configurator> {
        self.tx.take();
        self.join.take()?.join().ok()
    }
}

impl Drop for ConfiguratorHandle {
    fn drop(&mut self) {
        self.tx.take();
    }
}
