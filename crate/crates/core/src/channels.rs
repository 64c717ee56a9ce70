//! Observation- and control-channel configurations and their update operators.
//!
//! Ages count plant event occurrences since a queued item was enqueued. The
//! aging operators ([`ObsChannelConfig::aged`], [`CtrlChannelConfig::aged`])
//! are total and may produce ages above the delay bound; callers check
//! [`ObsChannelConfig::num`] on the aged value before committing a plant
//! event.
//!
//! Loss indices are 1-based: index `1` is the head of the queue.

use thiserror::Error;

use crate::automaton::{Alphabet, ControlAction, EventId, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("channel is empty")]
    Empty,
    #[error("loss index {index} out of range for a queue of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("consecutive loss budget of {budget} exhausted")]
    LossBudgetExceeded { budget: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Delay and loss bounds, counted in plant event occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DelayBounds {
    /// Maximum observation delay.
    pub obs_delay: u32,
    /// Maximum control delay.
    pub ctrl_delay: u32,
    /// Maximum consecutive observation losses.
    pub obs_loss: u32,
    /// Maximum consecutive control losses.
    pub ctrl_loss: u32,
}

impl DelayBounds {
    pub fn new(obs_delay: u32, ctrl_delay: u32, obs_loss: u32, ctrl_loss: u32) -> Self {
        DelayBounds {
            obs_delay,
            ctrl_delay,
            obs_loss,
            ctrl_loss,
        }
    }

    /// `N = N_c + N_o`.
    pub fn total_delay(&self) -> u32 {
        self.ctrl_delay + self.obs_delay
    }

    /// True when only control delays are present.
    pub fn control_delay_only(&self) -> bool {
        self.obs_delay == 0 && self.obs_loss == 0 && self.ctrl_loss == 0
    }

    /// `No,Nc,Nlo,Nlc`.
    pub fn render(&self) -> String {
        format!(
            "{},{},{},{}",
            self.obs_delay, self.ctrl_delay, self.obs_loss, self.ctrl_loss
        )
    }
}

impl std::str::FromStr for DelayBounds {
    type Err = String;

    /// Parses `No,Nc,Nlo,Nlc`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected No,Nc,Nlo,Nlc, got {s:?}"));
        }
        let mut v = [0u32; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| format!("bound {p:?} is not a non-negative integer"))?;
        }
        Ok(DelayBounds::new(v[0], v[1], v[2], v[3]))
    }
}

/// `θ_o = (x, n)`: observable events waiting for delivery with their ages,
/// plus the count of consecutive observation losses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ObsChannelConfig {
    pub queue: Vec<(EventId, u32)>,
    pub losses: u32,
}

impl ObsChannelConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn head(&self) -> Option<EventId> {
        self.queue.first().map(|(e, _)| *e)
    }

    /// `NUM(x)`: age of the head, 0 when empty.
    pub fn num(&self) -> u32 {
        self.queue.first().map_or(0, |(_, a)| *a)
    }

    /// `NUM(x⁺)` without building `x⁺`.
    pub fn aged_num(&self) -> u32 {
        self.queue.first().map_or(0, |(_, a)| a + 1)
    }

    /// `x⁺`: every age incremented.
    pub fn aged(&self) -> Self {
        ObsChannelConfig {
            queue: self.queue.iter().map(|(e, a)| (*e, a + 1)).collect(),
            losses: self.losses,
        }
    }

    /// `IN^obs(θ_o, σ)`: age the queue, then enqueue `σ` when it is observable.
    pub fn push_event(&self, e: EventId, alphabet: &Alphabet) -> Self {
        let mut next = self.aged();
        if alphabet.is_observable(e) {
            next.queue.push((e, 0));
        }
        next
    }

    /// `OUT^obs(θ_o)`: deliver the head and reset the loss counter.
    pub fn pop(&self) -> Result<(EventId, Self), ChannelError> {
        let (head, _) = *self.queue.first().ok_or(ChannelError::Empty)?;
        Ok((
            head,
            ObsChannelConfig {
                queue: self.queue[1..].to_vec(),
                losses: 0,
            },
        ))
    }

    /// `LOSS^obs(θ_o, i)` under a consecutive-loss budget.
    pub fn lose(&self, index: usize, budget: u32) -> Result<Self, ChannelError> {
        if self.queue.is_empty() {
            return Err(ChannelError::Empty);
        }
        if index == 0 || index > self.queue.len() {
            return Err(ChannelError::IndexOutOfRange {
                index,
                len: self.queue.len(),
            });
        }
        if self.losses + 1 > budget {
            return Err(ChannelError::LossBudgetExceeded { budget });
        }
        let mut queue = self.queue.clone();
        queue.remove(index - 1);
        Ok(ObsChannelConfig {
            queue,
            losses: self.losses + 1,
        })
    }

    /// `([(a,0),(b,1)], n=0)`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let items: Vec<String> = self
            .queue
            .iter()
            .map(|(e, a)| format!("({},{})", alphabet.name(*e), a))
            .collect();
        format!("([{}], n={})", items.join(","), self.losses)
    }

    /// Checks the configuration against the bounds.
    pub fn within(&self, b: &DelayBounds) -> bool {
        self.queue.len() as u32 <= b.obs_delay + 1
            && self.queue.iter().all(|(_, a)| *a <= b.obs_delay)
            && self.queue.windows(2).all(|w| w[0].1 >= w[1].1)
            && self.losses <= b.obs_loss
    }
}

/// `θ_c = (φ, y, m)`: the action in use, actions in flight with their ages,
/// and the count of consecutive control losses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtrlChannelConfig {
    pub active: ControlAction,
    pub queue: Vec<(ControlAction, u32)>,
    pub losses: u32,
}

impl CtrlChannelConfig {
    /// Empty channel with `active` in use.
    pub fn new(active: ControlAction) -> Self {
        CtrlChannelConfig {
            active,
            queue: Vec::new(),
            losses: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn head(&self) -> Option<ControlAction> {
        self.queue.first().map(|(p, _)| *p)
    }

    /// `NUM(y)`.
    pub fn num(&self) -> u32 {
        self.queue.first().map_or(0, |(_, a)| *a)
    }

    /// `NUM(y⁺)`.
    pub fn aged_num(&self) -> u32 {
        self.queue.first().map_or(0, |(_, a)| a + 1)
    }

    /// `PLUS(θ_c)`: every queued age incremented.
    pub fn aged(&self) -> Self {
        CtrlChannelConfig {
            active: self.active,
            queue: self.queue.iter().map(|(p, a)| (*p, a + 1)).collect(),
            losses: self.losses,
        }
    }

    /// `IN^ctr(θ_c, π)`, checking admissibility.
    pub fn issue(&self, action: ControlAction, alphabet: &Alphabet) -> Result<Self, ChannelError> {
        ControlAction::new(action.enabled(), alphabet)?;
        Ok(self.issue_unchecked(action))
    }

    pub(crate) fn issue_unchecked(&self, action: ControlAction) -> Self {
        let mut queue = self.queue.clone();
        queue.push((action, 0));
        CtrlChannelConfig {
            active: self.active,
            queue,
            losses: self.losses,
        }
    }

    /// `OUT^ctr(θ_c)`: the head takes effect and the loss counter resets.
    pub fn execute(&self) -> Result<Self, ChannelError> {
        let (head, _) = *self.queue.first().ok_or(ChannelError::Empty)?;
        Ok(CtrlChannelConfig {
            active: head,
            queue: self.queue[1..].to_vec(),
            losses: 0,
        })
    }

    /// `LOSS^ctr(θ_c, i)` under a consecutive-loss budget.
    pub fn lose(&self, index: usize, budget: u32) -> Result<Self, ChannelError> {
        if self.queue.is_empty() {
            return Err(ChannelError::Empty);
        }
        if index == 0 || index > self.queue.len() {
            return Err(ChannelError::IndexOutOfRange {
                index,
                len: self.queue.len(),
            });
        }
        if self.losses + 1 > budget {
            return Err(ChannelError::LossBudgetExceeded { budget });
        }
        let mut queue = self.queue.clone();
        queue.remove(index - 1);
        Ok(CtrlChannelConfig {
            active: self.active,
            queue,
            losses: self.losses + 1,
        })
    }

    /// `(π{a,b}, [(π{c},1)], m=0)`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let items: Vec<String> = self
            .queue
            .iter()
            .map(|(p, a)| format!("({},{})", alphabet.render_action(*p), a))
            .collect();
        format!(
            "({}, [{}], m={})",
            alphabet.render_action(self.active),
            items.join(","),
            self.losses
        )
    }

    pub fn within(&self, b: &DelayBounds) -> bool {
        self.queue.len() as u32 <= b.total_delay() + 1
            && self.queue.iter().all(|(_, a)| *a <= b.ctrl_delay)
            && self.queue.windows(2).all(|w| w[0].1 >= w[1].1)
            && self.losses <= b.ctrl_loss
    }
}
