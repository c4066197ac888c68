//! Wire protocol for `serve`, independent of the transport.
//!
//! Client to server: `{"type":"input","frame":{...}}` and `{"type":"reset"}`.
//! Server to client: `scene` once on connect, then a `render` message per
//! input frame followed by one `event` message per event. A malformed message
//! gets an `error` reply, after which the server closes the connection.

use std::sync::Arc;

use foldray::scene::SceneObject;
use foldray::session::{EventRecord, InputFrame, RenderState, SessionError};
use foldray::{Config, Scene, Session};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Input { frame: InputFrame },
    Reset,
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn tagged<T: Serialize>(kind: &'static str, body: &T) -> String {
    serde_json::to_string(&Tagged { kind, body }).expect("messages serialize")
}

#[derive(Serialize)]
struct SceneBody<'a> {
    objects: &'a [SceneObject],
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    message: &'a str,
}

pub fn scene_message(scene: &Scene) -> String {
    tagged(
        "scene",
        &SceneBody {
            objects: scene.objects(),
        },
    )
}

pub fn render_message(render: &RenderState) -> String {
    tagged("render", render)
}

/// The event-log line with `"type":"event",` spliced in after the opening
/// brace, so removing that prefix restores the line byte for byte.
pub fn event_message(event: &EventRecord) -> String {
    let line = event.to_json_line();
    format!("{{\"type\":\"event\",{}", &line[1..])
}

pub fn error_message(message: &str) -> String {
    tagged("error", &ErrorBody { message })
}

/// Inverse of [`event_message`].
pub fn strip_event_framing(message: &str) -> Option<String> {
    message
        .strip_prefix("{\"type\":\"event\",")
        .map(|rest| format!("{{{rest}"))
}

/// One client's session.
pub struct Connection {
    scene: Arc<Scene>,
    config: Config,
    session: Session,
}

impl Connection {
    pub fn new(scene: Arc<Scene>, config: Config) -> Result<Self, SessionError> {
        let session = Session::new(scene.clone(), config)?;
        Ok(Self {
            scene,
            config,
            session,
        })
    }

    pub fn greeting(&self) -> String {
        scene_message(&self.scene)
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// Replies to one client message. `Err` carries an error message to send
    /// before closing.
    pub fn handle(&mut self, text: &str) -> Result<Vec<String>, String> {
        let msg: ClientMessage = serde_json::from_str(text)
            .map_err(|e| error_message(&format!("malformed message: {e}")))?;
        match msg {
            ClientMessage::Input { frame } => {
                let (render, events) = self
                    .session
                    .step(&frame)
                    .map_err(|e| error_message(&e.to_string()))?;
                let mut out = vec![render_message(&render)];
                out.extend(events.iter().map(event_message));
                Ok(out)
            }
            ClientMessage::Reset => {
                self.session = Session::new(self.scene.clone(), self.config)
                    .expect("config was validated at connect");
                Ok(Vec::new())
            }
        }
    }
}
