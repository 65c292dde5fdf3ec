"""Minimal differentiable core for batched recurrent token policies.

Everything is double precision numpy. The episode forward pass records a
linear tape of primitive steps (state init / reset, one recurrent step per
consumed token, one head readout per stochastic choice); REINFORCE gradients
are obtained by a single hand-derived reverse sweep over that tape and are
verified against central finite differences (finite_diff_check).

Gate layout of the fused recurrent weights is [input, forget, output,
candidate] so the three sigmoid gates occupy one contiguous slab.
"""

from __future__ import annotations

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def _tune_allocator():
    """Keep freed numpy buffers in the heap instead of returning them to the
    OS; the training loop reallocates megabyte-sized activations every step
    and the default glibc mmap behaviour costs more than the arithmetic."""
    try:
        import ctypes
        libc = ctypes.CDLL("libc.so.6", use_errno=True)
        libc.mallopt(-4, 0)    # M_MMAP_MAX = 0
        libc.mallopt(-1, -1)   # M_TRIM_THRESHOLD: never trim
    except Exception:
        pass


_tune_allocator()


class ParamStore:
    """Named parameter tensors, each paired with a same-shape gradient buffer."""

    def __init__(self):
        self.values: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, shape) -> np.ndarray:
        if name in self.values:
            raise ValueError(f"duplicate parameter {name!r}")
        self.values[name] = np.zeros(shape, dtype=np.float64)
        self.grads[name] = np.zeros(shape, dtype=np.float64)
        return self.values[name]

    def names(self):
        return list(self.values)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def grad(self, name: str) -> np.ndarray:
        return self.grads[name]

    @property
    def size(self) -> int:
        return sum(v.size for v in self.values.values())

    def init_uniform(self, rng: np.random.Generator, scale: float = 0.1):
        """Fill every parameter with U[-scale, scale] draws, in insertion order."""
        for v in self.values.values():
            v[...] = rng.uniform(-scale, scale, size=v.shape)

    def zero_grads(self):
        for g in self.grads.values():
            g[...] = 0.0

    def copy(self) -> "ParamStore":
        other = ParamStore()
        for name, v in self.values.items():
            other.add(name, v.shape)
            other.values[name][...] = v
            other.grads[name][...] = self.grads[name]
        return other

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.values.values())


# ---------------------------------------------------------------------------
# activations / heads

def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-stable softmax; works on (K,) or (N, K)."""
    z = logits - np.max(logits, axis=-1, keepdims=True)
    np.exp(z, out=z)
    z /= np.sum(z, axis=-1, keepdims=True)
    return z


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of a (N, K) probability matrix."""
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = 1.0  # guard against cumsum rounding below 1
    u = rng.random(probs.shape[0])
    return np.argmax(u[:, None] < cum, axis=1)


class SampleRecord:
    """Trace record for one categorical choice: index + grad-of-log-prob hook."""

    __slots__ = ("index", "probs", "mode")

    def __init__(self, index: int, probs: np.ndarray, mode: str):
        self.index = index
        self.probs = probs
        self.mode = mode

    def grad_log_prob(self) -> np.ndarray:
        """d log pi(index) / d logits = onehot(index) - probs."""
        g = -self.probs.copy()
        g[self.index] += 1.0
        return g


def sample_categorical(logits: np.ndarray, rng: np.random.Generator | None,
                       mode: str = "train") -> tuple[int, SampleRecord]:
    """Draw (train) or argmax (greedy, lowest-index tie-break) over one logit row.

    Greedy consumes no randomness. Raises on non-finite logits.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(logits).all():
        raise ValueError("non-finite logits")
    probs = softmax(logits)
    if mode == "greedy":
        index = int(np.argmax(logits))
    elif mode == "train":
        index = int(sample_rows(probs[None, :], rng)[0])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return index, SampleRecord(index, probs, mode)


# ---------------------------------------------------------------------------
# recurrent cell (fused-gate LSTM)

def lstm_forward(W: np.ndarray, b: np.ndarray, xh: np.ndarray, c_prev: np.ndarray):
    """One recurrent step over a batch.

    W: (D+H, 4H) fused gate weights in [i f o g] block order, b: (4H,),
    xh: (N, D+H) concatenated [input, previous hidden], c_prev: (N, H).
    Returns (h, c, gates, tanh_c) with gates the post-activation (i, f, o, g)
    tuple. Gate buffers are contiguous copies of the fused product: the
    transcendentals vectorize far better than on strided column views.
    """
    H = c_prev.shape[1]
    n = xh.shape[0]
    z = xh @ W
    z += b
    gates = []
    for k in range(3):  # sigmoid gates
        buf = np.empty((n, H))
        np.negative(z[:, k * H:(k + 1) * H], out=buf)
        np.exp(buf, out=buf)
        buf += 1.0
        np.reciprocal(buf, out=buf)
        gates.append(buf)
    g = np.tanh(z[:, 3 * H:])
    i, f, o = gates
    c = f * c_prev
    tmp = i * g
    c += tmp
    tanh_c = np.tanh(c)
    np.multiply(o, tanh_c, out=tmp)
    return tmp, c, (i, f, o, g), tanh_c


def lstm_backward(W: np.ndarray, xh: np.ndarray, c_prev: np.ndarray,
                  gates: np.ndarray, tanh_c: np.ndarray,
                  dh: np.ndarray, dc: np.ndarray,
                  dW: np.ndarray, db: np.ndarray):
    """Reverse of lstm_forward. Accumulates into dW/db, returns (dxh, dc_prev).

    Elementwise chains run on contiguous scratch buffers and land in the
    fused (N, 4H) dz with one strided write per gate; this is the hot path."""
    H = c_prev.shape[1]
    n = c_prev.shape[0]
    i, f, o, g = gates
    # dct = dc + dh * o * (1 - tanh_c^2)
    tmp = tanh_c * tanh_c
    np.subtract(1.0, tmp, out=tmp)
    dct = dh * o
    dct *= tmp
    dct += dc
    dz = np.empty((n, 4 * H))
    t = np.empty((n, H))
    np.multiply(dct, g, out=t)       # d(pre-i) = dct * g * i * (1 - i)
    t *= i
    np.subtract(1.0, i, out=tmp)
    t *= tmp
    dz[:, :H] = t
    np.multiply(dct, c_prev, out=t)  # d(pre-f) = dct * c_prev * f * (1 - f)
    t *= f
    np.subtract(1.0, f, out=tmp)
    t *= tmp
    dz[:, H:2 * H] = t
    np.multiply(dh, tanh_c, out=t)   # d(pre-o) = dh * tanh_c * o * (1 - o)
    t *= o
    np.subtract(1.0, o, out=tmp)
    t *= tmp
    dz[:, 2 * H:3 * H] = t
    np.multiply(dct, i, out=t)       # d(pre-g) = dct * i * (1 - g^2)
    np.multiply(g, g, out=tmp)
    np.subtract(1.0, tmp, out=tmp)
    t *= tmp
    dz[:, 3 * H:] = t
    dc_prev = dct
    dc_prev *= f
    dW += xh.T @ dz
    db += dz.sum(axis=0)
    dxh = dz @ W.T
    return dxh, dc_prev


def recurrent_step(W: np.ndarray, b: np.ndarray, x: np.ndarray,
                   state: tuple[np.ndarray, np.ndarray]):
    """Stateless convenience wrapper: (h', c') for input x (N, D) or (D,)."""
    h, c = state
    single = x.ndim == 1
    if single:
        x, h, c = x[None, :], h[None, :], c[None, :]
    xh = np.hstack([x, h])
    h2, c2, _, _ = lstm_forward(W, b, xh, c)
    if single:
        return h2[0], c2[0]
    return h2, c2


# ---------------------------------------------------------------------------
# episode tape

class EmbedSrc:
    """One embedding-gather input slot: rows of `table` at `idx`, optionally
    zeroed per-episode by `mask` (True = active). table None means all zeros."""

    __slots__ = ("table", "idx", "mask", "width")

    def __init__(self, table: str | None, idx=None, mask=None, width: int = 0):
        self.table = table
        self.idx = idx
        self.mask = mask
        self.width = width

    def gather(self, store: ParamStore, n: int) -> np.ndarray:
        if self.table is None:
            return np.zeros((n, self.width), dtype=np.float64)
        x = store[self.table][self.idx]
        if self.mask is not None:
            x = np.where(self.mask[:, None], x, 0.0)
        return x

    def scatter(self, store: ParamStore, dx: np.ndarray):
        if self.table is None:
            return
        if self.mask is not None:
            np.add.at(store.grads[self.table], self.idx[self.mask], dx[self.mask])
        else:
            np.add.at(store.grads[self.table], self.idx, dx)


class _InitRecord:
    """State (re)initialisation h0 = E @ Wh, c0 = E @ Wc from concatenated
    embedding parts. Cuts the backward chain: nothing before it gets gradient."""

    __slots__ = ("parts", "w_h", "w_c", "E")

    def __init__(self, parts, w_h, w_c, E):
        self.parts = parts
        self.w_h = w_h
        self.w_c = w_c
        self.E = E


class _StepRecord:
    __slots__ = ("w", "b", "src", "xh", "c_prev", "gates", "tanh_c")

    def __init__(self, w, b, src, xh, c_prev, gates, tanh_c):
        self.w = w
        self.b = b
        self.src = src
        self.xh = xh
        self.c_prev = c_prev
        self.gates = gates
        self.tanh_c = tanh_c


class _ChoiceRecord:
    __slots__ = ("w", "b", "h", "probs", "idx")

    def __init__(self, w, b, h, probs, idx):
        self.w = w
        self.b = b
        self.h = h
        self.probs = probs
        self.idx = idx


class EpisodeTrace:
    """Ordered, replayable record of one batched episode for one agent.

    Holds every stochastic-choice record plus the cached activations needed
    to backpropagate reward * grad(log pi) through the whole dialog.
    """

    def __init__(self, store: ParamStore, batch_size: int, mode: str = "train"):
        self.store = store
        self.n = batch_size
        self.mode = mode
        self.records: list = []

    # -- forward-pass hooks -------------------------------------------------

    def init_state(self, parts: list[EmbedSrc], w_h: str, w_c: str):
        """Fresh (h0, c0) from the concatenation of embedding parts."""
        E = np.hstack([p.gather(self.store, self.n) for p in parts])
        h0 = E @ self.store[w_h]
        c0 = E @ self.store[w_c]
        self.records.append(_InitRecord(parts, w_h, w_c, E))
        return h0, c0

    def step(self, w: str, b: str, src: EmbedSrc, h, c):
        """Consume one token event: a recurrent step on its embedding."""
        x = src.gather(self.store, self.n)
        xh = np.hstack([x, h])
        h2, c2, gates, tanh_c = lstm_forward(self.store[w], self.store[b], xh, c)
        self.records.append(_StepRecord(w, b, src, xh, c, gates, tanh_c))
        return h2, c2

    def choose(self, w: str, b: str, h, rng, mode: str, forced=None):
        """Head readout + categorical choice. Returns (idx (N,), logp (N,))."""
        logits = h @ self.store[w] + self.store[b]
        probs = softmax(logits)
        if forced is not None:
            idx = np.asarray(forced)
        elif mode == "greedy":
            idx = np.argmax(logits, axis=1)
        else:
            idx = sample_rows(probs, rng)
        logp = np.log(probs[np.arange(self.n), idx])
        self.records.append(_ChoiceRecord(w, b, h, probs, idx))
        return idx, logp

    # -- reverse sweep ------------------------------------------------------

    def backward(self, coeff: np.ndarray):
        """Accumulate coeff[n] * grad(sum of log pi of recorded choices)."""
        store = self.store
        dh = dc = None
        for rec in reversed(self.records):
            if isinstance(rec, _ChoiceRecord):
                dlogits = -rec.probs * coeff[:, None]
                dlogits[np.arange(self.n), rec.idx] += coeff
                store.grads[rec.w] += rec.h.T @ dlogits
                store.grads[rec.b] += dlogits.sum(axis=0)
                contrib = dlogits @ store[rec.w].T
                dh = contrib if dh is None else dh + contrib
            elif isinstance(rec, _StepRecord):
                if dh is None:
                    dh = np.zeros_like(rec.c_prev)
                if dc is None:
                    dc = np.zeros_like(rec.c_prev)
                dxh, dc = lstm_backward(
                    store[rec.w], rec.xh, rec.c_prev, rec.gates, rec.tanh_c,
                    dh, dc, store.grads[rec.w], store.grads[rec.b])
                d = rec.xh.shape[1] - rec.c_prev.shape[1]
                rec.src.scatter(store, dxh[:, :d])
                dh = dxh[:, d:]
            else:  # _InitRecord: drain state gradient, cut the chain
                if dh is not None:
                    store.grads[rec.w_h] += rec.E.T @ dh
                    store.grads[rec.w_c] += rec.E.T @ dc if dc is not None else 0.0
                    dE = dh @ store[rec.w_h].T
                    if dc is not None:
                        dE += dc @ store[rec.w_c].T
                    col = 0
                    for p in rec.parts:
                        width = p.width if p.table is None else store[p.table].shape[1]
                        p.scatter(store, dE[:, col:col + width])
                        col += width
                dh = dc = None


def accumulate_reinforce(trace: EpisodeTrace, reward):
    """Add reward * grad(log pi(choice)) for every recorded choice.

    reward: scalar or per-episode (N,) array; parameters untouched, gradient
    accumulators incremented (calling twice doubles the increment).
    """
    if trace.mode != "train":
        raise ValueError("REINFORCE needs a training-mode trace, got %r" % trace.mode)
    coeff = np.broadcast_to(np.asarray(reward, dtype=np.float64), (trace.n,))
    trace.backward(coeff)


# ---------------------------------------------------------------------------
# optimizer

class AdamState:
    """First/second moments per parameter plus the shared step counter."""

    def __init__(self, store: ParamStore):
        self.m = {k: np.zeros_like(v) for k, v in store.values.items()}
        self.v = {k: np.zeros_like(v) for k, v in store.values.items()}
        self.t = 0


def optimizer_step(store: ParamStore, state: AdamState, lr: float,
                   clip: tuple[float, float] = (-5.0, 5.0),
                   beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
                   eps: float = ADAM_EPS):
    """Clipped-gradient Adam step in the ASCENT direction; zeroes accumulators.

    Raw accumulated gradients are clipped elementwise to [clip_lo, clip_hi]
    before the moment updates; bias correction uses the incremented counter.
    """
    state.t += 1
    b1t = 1.0 - beta1 ** state.t
    b2t = 1.0 - beta2 ** state.t
    for name, p in store.values.items():
        g = np.clip(store.grads[name], clip[0], clip[1])
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p += lr * (m / b1t) / (np.sqrt(v / b2t) + eps)
        store.grads[name][...] = 0.0


# ---------------------------------------------------------------------------
# gradient verification

def finite_diff_check(store: ParamStore, value_fn, eps: float = 1e-5) -> float:
    """Max relative error between store.grads and central differences of value_fn.

    value_fn() must evaluate the scalar objective from the store's current
    values (same structure, same forced choices). store.grads must already
    hold the analytic gradient of that objective. Relative error per element
    is |a - n| / max(|a|, |n|, 1e-8).
    """
    worst = 0.0
    for name, p in store.values.items():
        analytic = store.grads[name]
        flat_p = p.reshape(-1)
        flat_a = analytic.reshape(-1)
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + eps
            up = value_fn()
            flat_p[k] = orig - eps
            down = value_fn()
            flat_p[k] = orig
            numeric = (up - down) / (2.0 * eps)
            err = abs(flat_a[k] - numeric) / max(abs(flat_a[k]), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
