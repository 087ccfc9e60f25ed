//! Recent-action buffer, oscillation detection, and the non-turn fallback.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::world::Action;

/// One recorded step: the action and whether it produced displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub action: Action,
    pub moved: bool,
}

/// Ring buffer of the agent's most recent actions, strictly chronological.
#[derive(Clone, Debug)]
pub struct ActionHistory {
    entries: VecDeque<HistoryEntry>,
    capacity: usize,
}

impl ActionHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append an action, evicting the oldest entry beyond capacity.
    pub fn push(&mut self, action: Action, moved: bool) {
        self.entries.push_back(HistoryEntry { action, moved });
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
    }

    /// Actions oldest to newest, as serialized into advisor requests.
    pub fn actions(&self) -> Vec<Action> {
        self.entries.iter().map(|e| e.action).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &HistoryEntry> {
        self.entries.iter()
    }

    /// True when the recent window looks like a decision loop.
    ///
    /// Two patterns count: the last `2k` actions are turns of strictly
    /// alternating direction, or the last four actions are two
    /// forward-then-turn pairs whose turns cancel while neither forward move
    /// made progress. Consistent same-direction rotation (the initialization
    /// spin) is not oscillation, and nothing is flagged before `2k` actions
    /// are buffered.
    pub fn detect_oscillation(&self, k: usize) -> bool {
        let window = 2 * k;
        if self.len() < window || window == 0 {
            return false;
        }
        let recent: Vec<&HistoryEntry> = self.entries.iter().rev().take(window).collect();
        let alternating_turns = recent.iter().all(|e| e.action.is_turn())
            && recent.windows(2).all(|w| w[0].action != w[1].action);
        if alternating_turns {
            return true;
        }
        if self.len() >= 4 {
            let last4: Vec<&HistoryEntry> = self.entries.iter().rev().take(4).collect();
            let (d, c, b, a) = (last4[0], last4[1], last4[2], last4[3]);
            // a b c d, oldest first: forward (no progress), turn, forward
            // (no progress), opposite turn
            let stuck_pairs = a.action == Action::MoveForward
                && !a.moved
                && c.action == Action::MoveForward
                && !c.moved
                && b.action.is_turn()
                && d.action.is_turn()
                && b.action != d.action;
            if stuck_pairs {
                return true;
            }
        }
        false
    }

    /// The most recent `MoveForward` in the buffer; `MoveForward` when none
    /// exists. Never a turn or stop.
    pub fn fallback_action(&self) -> Action {
        self.entries
            .iter()
            .rev()
            .map(|e| e.action)
            .find(|a| matches!(a, Action::MoveForward))
            .unwrap_or(Action::MoveForward)
    }
}
