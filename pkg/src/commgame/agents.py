"""Questioner and answerer policies over discrete token vocabularies.

Both agents are single-cell recurrent policies. The questioner knows the
task, listens to incoming answer tokens (plus optionally overheard rival
tokens), emits question tokens, and finally predicts the two requested
attribute values. The answerer knows the instance, listens to question
tokens, and emits answer tokens; in the memoryless variant its state is
rebuilt from the instance embedding at the start of every round.

Cross-team inputs (overheard tokens, rival task/instance) are always part
of the computation structure; when inactive they are fed as zero vectors,
which makes zero-masked and structurally-absent inputs exactly equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import EmbedSrc, EpisodeTrace, ParamStore

N_ATTRIBUTES = 3


@dataclass(frozen=True)
class AgentConfig:
    vocab_q: int = 3
    vocab_a: int = 4
    hidden_dim: int = 100
    attr_embed_dim: int = 20
    instance_embed_dim: int = 60
    task_embed_dim: int = 20
    token_embed_dim: int = 20
    memoryless_abot: bool = True
    overhearing_enabled: bool = False
    task_sharing_enabled: bool = False

    def __post_init__(self):
        if self.instance_embed_dim != N_ATTRIBUTES * self.attr_embed_dim:
            raise ValueError("instance_embed_dim must equal 3 * attr_embed_dim")
        if self.vocab_q < 2 or self.vocab_a < 2:
            raise ValueError("vocabulary sizes must be >= 2")


@dataclass
class AgentState:
    """Recurrent state plus the (re)initialisation inputs for memoryless resets."""

    h: np.ndarray
    c: np.ndarray
    init_parts: list = field(default_factory=list)


def _slot(table: str, slot, width: int) -> EmbedSrc:
    """Incoming-token slot: (idx, mask) tuple, bare idx array, or None (zeros)."""
    if slot is None:
        return EmbedSrc(None, width=width)
    if isinstance(slot, tuple):
        idx, mask = slot
        return EmbedSrc(table, np.asarray(idx), mask)
    return EmbedSrc(table, np.asarray(slot))


class QBot:
    """Task-driven questioner: speak / listen / predict."""

    def __init__(self, cfg: AgentConfig, n_tasks: int, n_values: int):
        self.cfg = cfg
        self.n_tasks = n_tasks
        self.n_values = n_values
        H = cfg.hidden_dim
        d_tok = cfg.token_embed_dim
        s = self.store = ParamStore()
        s.add("task_embed", (n_tasks, cfg.task_embed_dim))
        s.add("other_task_embed", (n_tasks, cfg.task_embed_dim))
        s.add("ans_embed", (cfg.vocab_a, d_tok))
        s.add("other_q_embed", (cfg.vocab_q, d_tok))
        s.add("other_a_embed", (cfg.vocab_a, d_tok))
        s.add("init_h", (2 * cfg.task_embed_dim, H))
        s.add("init_c", (2 * cfg.task_embed_dim, H))
        s.add("lstm_W", (d_tok + H, 4 * H))
        s.add("lstm_b", (4 * H,))
        s.add("speak_W", (H, cfg.vocab_q))
        s.add("speak_b", (cfg.vocab_q,))
        s.add("pred1_W", (H, n_values))
        s.add("pred1_b", (n_values,))
        s.add("pred2_W", (H, n_values))
        s.add("pred2_b", (n_values,))

    def begin(self, trace: EpisodeTrace, task_idx: np.ndarray,
              other_task=None) -> AgentState:
        """Initial state from the task embedding (plus shared rival task or zeros)."""
        parts = [
            _slot("task_embed", np.asarray(task_idx), self.cfg.task_embed_dim),
            _slot("other_task_embed", other_task, self.cfg.task_embed_dim),
        ]
        h, c = trace.init_state(parts, "init_h", "init_c")
        return AgentState(h, c, parts)

    def _listen(self, trace, state, table, slot):
        src = _slot(table, slot, self.cfg.token_embed_dim)
        state.h, state.c = trace.step("lstm_W", "lstm_b", src, state.h, state.c)

    def listen_round(self, trace, state: AgentState, own_answer,
                     other_q=None, other_a=None):
        """Consume the previous round's tokens: own partner's answer, then the
        overheard rival question and answer (zeros when masked)."""
        self._listen(trace, state, "ans_embed", own_answer)
        self._listen(trace, state, "other_q_embed", other_q)
        self._listen(trace, state, "other_a_embed", other_a)

    def speak(self, trace, state: AgentState, rng, mode, forced=None):
        idx, logp = trace.choose("speak_W", "speak_b", state.h, rng, mode, forced)
        return idx, logp

    def predict(self, trace, state: AgentState, rng, mode, forced=(None, None)):
        """Two independent value guesses from the final state."""
        w1, lp1 = trace.choose("pred1_W", "pred1_b", state.h, rng, mode, forced[0])
        w2, lp2 = trace.choose("pred2_W", "pred2_b", state.h, rng, mode, forced[1])
        return (w1, w2), lp1 + lp2


class ABot:
    """Instance-driven answerer: speak / listen, optionally memoryless."""

    def __init__(self, cfg: AgentConfig, n_values: int):
        self.cfg = cfg
        self.n_values = n_values
        H = cfg.hidden_dim
        d_tok = cfg.token_embed_dim
        s = self.store = ParamStore()
        for a in range(N_ATTRIBUTES):
            s.add(f"attr{a}_embed", (n_values, cfg.attr_embed_dim))
        for a in range(N_ATTRIBUTES):
            s.add(f"other_attr{a}_embed", (n_values, cfg.attr_embed_dim))
        s.add("q_embed", (cfg.vocab_q, d_tok))
        s.add("other_q_embed", (cfg.vocab_q, d_tok))
        s.add("other_a_embed", (cfg.vocab_a, d_tok))
        s.add("init_h", (2 * cfg.instance_embed_dim, H))
        s.add("init_c", (2 * cfg.instance_embed_dim, H))
        s.add("lstm_W", (d_tok + H, 4 * H))
        s.add("lstm_b", (4 * H,))
        s.add("speak_W", (H, cfg.vocab_a))
        s.add("speak_b", (cfg.vocab_a,))

    def _instance_parts(self, inst_values: np.ndarray, other_instance) -> list:
        """Instance embedding = per-attribute rows concatenated in attribute
        order; rival instance appended under task sharing, zeros otherwise."""
        inst_values = np.asarray(inst_values)
        parts = [EmbedSrc(f"attr{a}_embed", inst_values[:, a])
                 for a in range(N_ATTRIBUTES)]
        if other_instance is None:
            parts.append(EmbedSrc(None, width=self.cfg.instance_embed_dim))
        else:
            vals, mask = other_instance if isinstance(other_instance, tuple) \
                else (other_instance, None)
            vals = np.asarray(vals)
            parts.extend(EmbedSrc(f"other_attr{a}_embed", vals[:, a], mask)
                         for a in range(N_ATTRIBUTES))
        return parts

    def begin(self, trace: EpisodeTrace, inst_values: np.ndarray,
              other_instance=None) -> AgentState:
        parts = self._instance_parts(inst_values, other_instance)
        h, c = trace.init_state(parts, "init_h", "init_c")
        return AgentState(h, c, parts)

    def _listen(self, trace, state, table, slot):
        src = _slot(table, slot, self.cfg.token_embed_dim)
        state.h, state.c = trace.step("lstm_W", "lstm_b", src, state.h, state.c)

    def listen_round(self, trace, state: AgentState, own_question,
                     other_q=None, other_a=None):
        """One round of listening. Memoryless: state is rebuilt from the cached
        instance inputs first, so answers depend only on (instance, q_t) and
        whatever rival tokens are fed this round. other_a is the rival's
        previous-round answer; in round 1 none exists and the slot is zeros,
        keeping the step structure identical across rounds."""
        if self.cfg.memoryless_abot:
            state.h, state.c = trace.init_state(state.init_parts, "init_h", "init_c")
        self._listen(trace, state, "q_embed", own_question)
        self._listen(trace, state, "other_q_embed", other_q)
        self._listen(trace, state, "other_a_embed", other_a)

    def speak(self, trace, state: AgentState, rng, mode, forced=None):
        idx, logp = trace.choose("speak_W", "speak_b", state.h, rng, mode, forced)
        return idx, logp
