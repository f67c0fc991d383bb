//! WebAssembly bindings for a single-page demo: a local playground session,
//! the signal colour ramp, and the exact information carried by a 1D linear
//! interface.

use limit_core::info::{cond_mutual_info_direct, tabularize_with, Grids};
use limit_core::playground::{
    default_learner, hue_for_value as hue, pretrain, Playground, PlaygroundAlgo, SessionMode,
};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// A playground that runs entirely in the page.
#[wasm_bindgen]
pub struct Demo {
    playground: Playground,
    session: Option<u64>,
}

#[wasm_bindgen]
impl Demo {
    /// Builds the LIMIT interface and pretrains it for `interactions`
    /// simulated interactions.
    #[wasm_bindgen(constructor)]
    pub fn new(interactions: usize, seed: u64) -> Result<Demo, JsError> {
        let learner = pretrain(default_learner(seed).map_err(js_err)?, interactions, seed).map_err(js_err)?;
        Ok(Demo {
            playground: Playground::new(learner).map_err(js_err)?,
            session: None,
        })
    }

    /// Starts a frozen session with `algo` ("limit" or "naive") and returns
    /// the first trial as JSON.
    pub fn start(&mut self, algo: &str, seed: u64) -> Result<String, JsError> {
        let algo = match algo {
            "limit" => PlaygroundAlgo::Limit,
            "naive" => PlaygroundAlgo::Naive,
            other => return Err(JsError::new(&format!("unknown algorithm {other:?}"))),
        };
        let (id, trial) = self
            .playground
            .start_session(SessionMode::PretrainedFrozen, algo, Some(seed))
            .map_err(js_err)?;
        self.session = Some(id);
        serde_json::to_string(&trial).map_err(js_err)
    }

    /// Submits a guess for the pending trial and returns the outcome as JSON.
    pub fn guess(&self, x: f64, y: f64) -> Result<String, JsError> {
        let id = self.session.ok_or_else(|| JsError::new("no session started"))?;
        let out = self.playground.submit_guess(id, &[x, y], None).map_err(js_err)?;
        serde_json::to_string(&out).map_err(js_err)
    }
}

/// Hue in degrees for a signal value in `[-1, 1]`.
#[wasm_bindgen]
pub fn hue_for_value(v: f64) -> f64 {
    hue(v)
}

/// `I(a; theta)` in nats for the 1D interface `x = clamp(gain theta / 10)`
/// read by a human who moves by `x`, with `theta` on 21 points of
/// `[-10, 10]` and signals and actions on 11 cells of `[-1, 1]`.
#[wasm_bindgen]
pub fn linear_interface_information(gain: f64) -> Result<f64, JsError> {
    let grids = Grids {
        states: vec![vec![0.0]],
        thetas: Grids::linspace(-10.0, 10.0, 21),
        signals: Grids::linspace(-1.0, 1.0, 11),
        actions: Grids::linspace(-1.0, 1.0, 11),
    };
    let table = tabularize_with(
        &grids,
        |_, t| Ok(vec![(gain * t[0] / 10.0).clamp(-1.0, 1.0)]),
        |_, x| Ok(x.to_vec()),
    )
    .map_err(js_err)?;
    cond_mutual_info_direct(&table).map_err(js_err)
}
