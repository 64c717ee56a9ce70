//! Parser for the canonical text grammar of control actions and augmented
//! states:
//!
//! ```text
//! action    := "π{" [name ("," name)*] "}"
//! obs       := "([" [("(" name "," int ")") ("," ...)*] "], n=" int ")"
//! ctrl      := "(" action ", [" [("(" action "," int ")") ("," ...)*] "], m=" int ")"
//! augmented := "(" state ", " obs ", " ctrl ")"
//! ```
//!
//! Whitespace between tokens is ignored. Rendering lives next to each type.

use thiserror::Error;

use crate::automaton::{Alphabet, Automaton, ControlAction, EventSet};
use crate::channels::{CtrlChannelConfig, ObsChannelConfig};
use crate::estimator::AugmentedState;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset} in {input:?}")]
pub struct GrammarError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

const DELIMS: &[char] = &['(', ')', '[', ']', '{', '}', ',', '=', '"'];

struct Parser<'a> {
    input: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            input,
            chars: input.char_indices().collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, GrammarError> {
        Err(GrammarError {
            input: self.input.to_string(),
            offset: self.chars.get(self.pos).map_or(self.input.len(), |(o, _)| *o),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn expect(&mut self, c: char) -> Result<(), GrammarError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Result<String, GrammarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos].1;
            if c.is_whitespace() || DELIMS.contains(&c) {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(self.chars[start..self.pos].iter().map(|(_, c)| *c).collect())
    }

    fn int(&mut self) -> Result<u32, GrammarError> {
        self.skip_ws();
        let save = self.pos;
        let s = self.name()?;
        match s.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = save;
                self.err("expected a non-negative integer")
            }
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), GrammarError> {
        self.skip_ws();
        let save = self.pos;
        if self.name()? != k {
            self.pos = save;
            return self.err(format!("expected {k:?}"));
        }
        self.expect('=')
    }

    fn end(&mut self) -> Result<(), GrammarError> {
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(())
    }

    fn action(&mut self, a: &Alphabet) -> Result<ControlAction, GrammarError> {
        self.expect('π')?;
        self.expect('{')?;
        let mut set = EventSet::EMPTY;
        if !self.eat('}') {
            loop {
                let n = self.name()?;
                match a.event(&n) {
                    Some(e) => set = set.with(e),
                    None => return self.err(format!("unknown event {n:?}")),
                }
                if self.eat('}') {
                    break;
                }
                self.expect(',')?;
            }
        }
        match ControlAction::new(set, a) {
            Ok(p) => Ok(p),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, GrammarError>) -> Result<Vec<T>, GrammarError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn obs(&mut self, a: &Alphabet) -> Result<ObsChannelConfig, GrammarError> {
        self.expect('(')?;
        let queue = self.list(|p| {
            p.expect('(')?;
            let n = p.name()?;
            let e = match a.event(&n) {
                Some(e) if a.is_observable(e) => e,
                Some(_) => return p.err(format!("event {n:?} is not observable")),
                None => return p.err(format!("unknown event {n:?}")),
            };
            p.expect(',')?;
            let age = p.int()?;
            p.expect(')')?;
            Ok((e, age))
        })?;
        self.expect(',')?;
        self.keyword("n")?;
        let losses = self.int()?;
        self.expect(')')?;
        Ok(ObsChannelConfig { queue, losses })
    }

    fn ctrl(&mut self, a: &Alphabet) -> Result<CtrlChannelConfig, GrammarError> {
        self.expect('(')?;
        let active = self.action(a)?;
        self.expect(',')?;
        let queue = self.list(|p| {
            p.expect('(')?;
            let pi = p.action(a)?;
            p.expect(',')?;
            let age = p.int()?;
            p.expect(')')?;
            Ok((pi, age))
        })?;
        self.expect(',')?;
        self.keyword("m")?;
        let losses = self.int()?;
        self.expect(')')?;
        Ok(CtrlChannelConfig { active, queue, losses })
    }
}

/// Parses `π{a,b}`.
pub fn parse_action(s: &str, alphabet: &Alphabet) -> Result<ControlAction, GrammarError> {
    let mut p = Parser::new(s);
    let a = p.action(alphabet)?;
    p.end()?;
    Ok(a)
}

pub fn parse_obs_config(s: &str, alphabet: &Alphabet) -> Result<ObsChannelConfig, GrammarError> {
    let mut p = Parser::new(s);
    let c = p.obs(alphabet)?;
    p.end()?;
    Ok(c)
}

pub fn parse_ctrl_config(s: &str, alphabet: &Alphabet) -> Result<CtrlChannelConfig, GrammarError> {
    let mut p = Parser::new(s);
    let c = p.ctrl(alphabet)?;
    p.end()?;
    Ok(c)
}

/// Parses `(q, θ_o, θ_c)` against the states and alphabet of `plant`.
pub fn parse_augmented(s: &str, plant: &Automaton) -> Result<AugmentedState, GrammarError> {
    let mut p = Parser::new(s);
    p.expect('(')?;
    let name = p.name()?;
    let Some(q) = plant.state(&name) else {
        return p.err(format!("unknown state {name:?}"));
    };
    p.expect(',')?;
    let obs = p.obs(plant.alphabet())?;
    p.expect(',')?;
    let ctrl = p.ctrl(plant.alphabet())?;
    p.expect(')')?;
    p.end()?;
    Ok(AugmentedState { plant: q, obs, ctrl })
}
