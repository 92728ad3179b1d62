use crate::control::{smoothed_entropy, strength, top_k_select_at, StrengthFunction};
use crate::corpus::{dialogue_context, EOS_ID};
use crate::error::{Error, Result};
use crate::models::{AttributeModel, LanguageModel, PrefixState};
use crate::scalar::Scalar;

use super::config::{DecodeConfig, DecodeMode};
use super::scoring::{argmax_by_token, score_eco, score_static};
use super::trace::{AttributeStep, DecodeTrace, StepTrace, Termination};

/// An attribute classifier registered under its attribute name.
#[derive(Clone, Copy)]
pub struct Controller<'a, T: Scalar> {
    pub attribute: &'a str,
    pub model: &'a dyn AttributeModel<T>,
}

impl<'a, T: Scalar> Controller<'a, T> {
    pub fn new(attribute: &'a str, model: &'a dyn AttributeModel<T>) -> Self {
        Self { attribute, model }
    }
}

struct Active<'a, T: Scalar> {
    attribute: String,
    class: String,
    class_idx: usize,
    model: &'a dyn AttributeModel<T>,
}

/// A validated decoding setup: one LM, the classifiers for the configured
/// targets, and the scoring parameters.
pub struct Decoder<'a, T: Scalar> {
    lm: &'a dyn LanguageModel<T>,
    active: Vec<Active<'a, T>>,
    config: DecodeConfig<T>,
    strength_fn: StrengthFunction,
}

/// Decoding state for one dialogue: LM context and one classifier prefix
/// state per target.
pub struct Session<T> {
    history: Vec<Vec<u32>>,
    context: Vec<u32>,
    prefix: Vec<u32>,
    states: Vec<PrefixState<T>>,
    step: usize,
}

impl<T> Session<T> {
    pub fn prefix(&self) -> &[u32] {
        &self.prefix
    }

    pub fn history(&self) -> &[Vec<u32>] {
        &self.history
    }
}

impl<'a, T: Scalar> Decoder<'a, T> {
    pub fn new(
        lm: &'a dyn LanguageModel<T>,
        controllers: &[Controller<'a, T>],
        config: DecodeConfig<T>,
    ) -> Result<Self> {
        config.validate()?;
        let vocab_size = lm.vocab_size();
        if config.k > vocab_size {
            return Err(Error::invalid(format!(
                "k = {} exceeds the vocabulary size {vocab_size}",
                config.k
            )));
        }
        let mut active = Vec::new();
        if config.mode != DecodeMode::Uncontrolled {
            for target in &config.targets {
                let ctl = controllers
                    .iter()
                    .find(|c| c.attribute == target.attribute)
                    .ok_or_else(|| Error::UnknownAttribute(target.attribute.clone()))?;
                let class_idx = ctl
                    .model
                    .class_index(&target.class)
                    .ok_or_else(|| Error::UnknownClass(target.class.clone()))?;
                active.push(Active {
                    attribute: target.attribute.clone(),
                    class: target.class.clone(),
                    class_idx,
                    model: ctl.model,
                });
            }
        }
        Ok(Self {
            lm,
            active,
            strength_fn: StrengthFunction::new(config.strength, vocab_size),
            config,
        })
    }

    pub fn config(&self) -> &DecodeConfig<T> {
        &self.config
    }

    pub fn begin(&self, history: &[Vec<u32>], prefix: &[u32]) -> Session<T> {
        Session {
            history: history.to_vec(),
            context: dialogue_context(history, prefix),
            prefix: prefix.to_vec(),
            states: self
                .active
                .iter()
                .map(|a| a.model.begin_prefix(history, prefix))
                .collect(),
            step: 0,
        }
    }

    /// Scores the candidates for the next token without advancing.
    pub fn score_next(&self, session: &Session<T>) -> Result<StepTrace<T>> {
        let cfg = &self.config;
        let dist = self.lm.next_distribution(&session.context);
        let topk = top_k_select_at(&dist, cfg.k, session.step)?;
        let top_k_len = topk.len();
        let mut tokens: Vec<u32> = Vec::with_capacity(top_k_len + 1);
        let mut lm_probs: Vec<T> = Vec::with_capacity(top_k_len + 1);
        for &(t, p) in topk.entries() {
            tokens.push(t);
            lm_probs.push(p);
        }
        if !topk.contains(EOS_ID) {
            tokens.push(EOS_ID);
            lm_probs.push(dist[EOS_ID as usize]);
        }

        let mut attributes: Vec<AttributeStep<T>> = self
            .active
            .iter()
            .zip(&session.states)
            .map(|(a, state)| AttributeStep {
                attribute: a.attribute.clone(),
                class: a.class.clone(),
                entropy: None,
                alpha: T::one(),
                probs: tokens
                    .iter()
                    .map(|&t| a.model.extended_posterior(state, t, a.class_idx))
                    .collect(),
            })
            .collect();

        let mut lm_entropy = None;
        let mut alpha_lm = T::one();
        let scores = match cfg.mode {
            DecodeMode::Uncontrolled => score_static(&lm_probs, &[], T::zero())?,
            DecodeMode::Static => {
                let attrs: Vec<&[T]> = attributes.iter().map(|a| a.probs.as_slice()).collect();
                score_static(&lm_probs, &attrs, cfg.lambda)?
            }
            DecodeMode::Eco => {
                let e = smoothed_entropy(&lm_probs[..top_k_len], cfg.tau_lm, cfg.smoothing)?;
                lm_entropy = Some(e);
                alpha_lm = self.alpha(e)?;
                for a in attributes.iter_mut() {
                    let e = smoothed_entropy(&a.probs[..top_k_len], cfg.tau_c, cfg.smoothing)?;
                    a.entropy = Some(e);
                    a.alpha = self.alpha(e)?;
                }
                let attrs: Vec<(&[T], T)> = attributes
                    .iter()
                    .map(|a| (a.probs.as_slice(), a.alpha))
                    .collect();
                score_eco(&lm_probs, alpha_lm, &attrs, cfg.lambda)?
            }
        };
        let chosen = argmax_by_token(&scores, &tokens);
        Ok(StepTrace {
            step: session.step,
            lm_entropy,
            alpha_lm,
            attributes,
            tokens,
            lm_probs,
            top_k_len,
            scores,
            chosen,
        })
    }

    fn alpha(&self, e: T) -> Result<T> {
        match self.config.fixed_alpha {
            Some(a) => Ok(a),
            None => strength(e, self.strength_fn),
        }
    }

    /// Appends `token` to the response prefix.
    pub fn advance(&self, session: &mut Session<T>, token: u32) {
        for (a, state) in self.active.iter().zip(session.states.iter_mut()) {
            a.model.extend_in_place(state, token);
        }
        session.context.push(token);
        session.prefix.push(token);
        session.step += 1;
    }

    /// One greedy step: scores, picks, and advances.
    pub fn step(&self, session: &mut Session<T>) -> Result<StepTrace<T>> {
        let trace = self.score_next(session)?;
        self.advance(session, trace.chosen_token());
        Ok(trace)
    }

    /// Greedy decoding until `</s>` or `max_len` tokens.
    pub fn decode(&self, history: &[Vec<u32>]) -> Result<DecodeTrace<T>> {
        let mut session = self.begin(history, &[]);
        let mut steps = Vec::new();
        let termination = loop {
            let s = self.step(&mut session)?;
            let token = s.chosen_token();
            steps.push(s);
            if token == EOS_ID {
                break Termination::Eos;
            }
            if steps.len() >= self.config.max_len {
                break Termination::MaxLen;
            }
        };
        Ok(DecodeTrace {
            mode: self.config.mode,
            lambda: self.config.lambda,
            tau_lm: self.config.tau_lm,
            tau_c: self.config.tau_c,
            smoothing: self.config.smoothing,
            response: session.prefix,
            steps,
            termination,
        })
    }
}

/// One scored step from `prefix`.
pub fn decode_step<T: Scalar>(
    lm: &dyn LanguageModel<T>,
    controllers: &[Controller<'_, T>],
    history: &[Vec<u32>],
    prefix: &[u32],
    config: &DecodeConfig<T>,
) -> Result<StepTrace<T>> {
    let decoder = Decoder::new(lm, controllers, config.clone())?;
    decoder.score_next(&decoder.begin(history, prefix))
}

pub fn decode<T: Scalar>(
    lm: &dyn LanguageModel<T>,
    controllers: &[Controller<'_, T>],
    history: &[Vec<u32>],
    config: &DecodeConfig<T>,
) -> Result<DecodeTrace<T>> {
    Decoder::new(lm, controllers, config.clone())?.decode(history)
}

/// Greedy argmax over the full LM distribution, with no candidate set and
/// no classifiers. Reference point for the controlled modes.
pub fn greedy_lm_decode<T: Scalar>(
    lm: &dyn LanguageModel<T>,
    history: &[Vec<u32>],
    max_len: usize,
) -> Vec<u32> {
    let mut context = dialogue_context(history, &[]);
    let start = context.len();
    while context.len() - start < max_len {
        let t = lm.next_distribution(&context).argmax() as u32;
        context.push(t);
        if t == EOS_ID {
            break;
        }
    }
    context.split_off(start)
}
