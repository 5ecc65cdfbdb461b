"""Skip-gram-with-negative-sampling embeddings over walk corpora.

The training loop is compiled with numba. Deterministic single-worker mode
(the default) reproduces bit-identical models for a fixed seed; the
parallel mode trains lock-free over sentence chunks and is documented as
nondeterministic.

`pair_gradients` is a plain-numpy reference of the per-pair objective used
by the finite-difference gradient checks; the compiled kernel implements
the same math.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .errors import (
    EmptyCorpus,
    InvalidDimension,
    ParseError,
    UnknownToken,
    ZeroVector,
)


@dataclass
class Vocabulary:
    tokens: list[str]  # index -> token, ordered by (-count, token)
    index: dict[str, int]
    counts: np.ndarray  # int64, aligned with tokens

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index


def build_vocab(corpus: list[list[str]]) -> Vocabulary:
    freq: dict[str, int] = {}
    for sentence in corpus:
        for tok in sentence:
            freq[tok] = freq.get(tok, 0) + 1
    if not freq:
        raise EmptyCorpus("corpus contains no tokens")
    tokens = sorted(freq, key=lambda t: (-freq[t], t))
    return Vocabulary(
        tokens=tokens,
        index={t: i for i, t in enumerate(tokens)},
        counts=np.array([freq[t] for t in tokens], dtype=np.int64),
    )


@dataclass
class TrainHyperparams:
    window: int = 5
    epochs: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    noise_exponent: float = 0.75
    subsample: float = 0.0  # word2vec frequent-token threshold; 0 disables

    def __post_init__(self):
        if min(self.window, self.negatives) < 1 or self.epochs < 0:
            raise ValueError("window and negatives must be positive")
        if self.learning_rate <= 0 or self.min_learning_rate < 0.0001:
            raise ValueError("learning rate must be positive with floor >= 0.0001")


VALID_DIMENSIONS = (50, 100, 200, 500, 1000, 2000)


@dataclass
class EmbeddingModel:
    vocab: Vocabulary
    W_in: np.ndarray  # the embedding exposed downstream
    W_out: np.ndarray
    dim: int
    hyperparams: TrainHyperparams
    seed: int
    epoch_losses: list[float] = field(default_factory=list)

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(" ".join(self.vocab.tokens).encode("utf-8"))
        h.update(np.ascontiguousarray(self.W_in).tobytes())
        return h.hexdigest()[:16]


def init_matrices(vocab_size: int, dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Standard word2vec init: inputs uniform in [-0.5/d, 0.5/d], outputs zero."""
    rng = np.random.default_rng(seed)
    w_in = (rng.random((vocab_size, dim)) - 0.5) / dim
    w_out = np.zeros((vocab_size, dim))
    return w_in, w_out


def pair_gradients(v_w: np.ndarray, u_c: np.ndarray, u_neg: np.ndarray):
    """Loss and analytic gradients of one (target, context) pair.

    loss = -log s(u_c.v) - sum_n log s(-u_n.v)
    """
    def sigmoid(x):
        return 1.0 / (1.0 + np.exp(-x))

    s_pos = sigmoid(u_c @ v_w)
    s_neg = sigmoid(u_neg @ v_w)
    loss = -np.log(max(s_pos, 1e-12)) - np.sum(np.log(np.maximum(1.0 - s_neg, 1e-12)))
    grad_v = (s_pos - 1.0) * u_c + s_neg @ u_neg
    grad_uc = (s_pos - 1.0) * v_w
    grad_uneg = np.outer(s_neg, v_w)
    return loss, grad_v, grad_uc, grad_uneg


def _keep_probabilities(counts: np.ndarray, threshold: float) -> np.ndarray:
    """Per-token keep probabilities for frequent-token subsampling.

    word2vec formula: keep = sqrt(t/f) + t/f where f is the token's corpus
    frequency fraction. threshold <= 0 keeps everything.
    """
    if threshold <= 0.0:
        return np.ones(counts.shape[0])
    freq = counts.astype(np.float64) / counts.sum()
    ratio = threshold / np.maximum(freq, 1e-12)
    return np.minimum(np.sqrt(ratio) + ratio, 1.0)


def _noise_table(counts: np.ndarray, exponent: float, size: int = 1 << 17) -> np.ndarray:
    weights = counts.astype(np.float64) ** exponent
    cum = np.cumsum(weights)
    cum /= cum[-1]
    positions = (np.arange(size) + 0.5) / size
    return np.searchsorted(cum, positions).astype(np.int64)


@njit(cache=True)
def _train_pair(W_in, W_out, center, context, n_negatives, neg_table, lr, grad_v):
    dim = W_in.shape[1]
    v = W_in[center]
    grad_v[:] = 0.0
    loss = 0.0
    # positive context
    dot = 0.0
    for k in range(dim):
        dot += W_out[context, k] * v[k]
    s = 1.0 / (1.0 + np.exp(-dot))
    g = s - 1.0
    loss -= np.log(max(s, 1e-12))
    for k in range(dim):
        grad_v[k] += g * W_out[context, k]
        W_out[context, k] -= lr * g * v[k]
    # sampled noise tokens; the true context is excluded by redraw
    for _ in range(n_negatives):
        neg = context
        for _try in range(16):
            neg = neg_table[np.random.randint(neg_table.shape[0])]
            if neg != context:
                break
        if neg == context:
            continue
        dot = 0.0
        for k in range(dim):
            dot += W_out[neg, k] * v[k]
        s = 1.0 / (1.0 + np.exp(-dot))
        loss -= np.log(max(1.0 - s, 1e-12))
        for k in range(dim):
            grad_v[k] += s * W_out[neg, k]
            W_out[neg, k] -= lr * s * v[k]
    for k in range(dim):
        W_in[center, k] -= lr * grad_v[k]
    return loss


@njit(cache=True)
def _train_epochs_serial(tokens, offsets, W_in, W_out, neg_table, keep_prob,
                         window, n_negatives, lr0, lr_min, epochs, seed):
    total = tokens.shape[0] * epochs
    processed = 0
    epoch_losses = np.zeros(epochs)
    grad_v = np.zeros(W_in.shape[1])
    sent = np.empty(tokens.shape[0], dtype=np.int64)
    for epoch in range(epochs):
        # identical pair/negative draws every epoch: the epoch loss then
        # tracks pure optimization progress instead of sampling noise
        np.random.seed(seed)
        loss_sum = 0.0
        pairs = 0
        for s in range(offsets.shape[0] - 1):
            start = offsets[s]
            end = offsets[s + 1]
            # frequent-token subsampling drops tokens from the sentence,
            # shrinking effective window distances (word2vec semantics)
            n = 0
            for pos in range(start, end):
                if keep_prob[tokens[pos]] >= 1.0 or np.random.random() < keep_prob[tokens[pos]]:
                    sent[n] = tokens[pos]
                    n += 1
            for pos in range(n):
                lr = lr0 * (1.0 - processed / total)
                if lr < lr_min:
                    lr = lr_min
                processed += 1
                b = 1 + np.random.randint(window)
                for off in range(-b, b + 1):
                    cpos = pos + off
                    if off == 0 or cpos < 0 or cpos >= n:
                        continue
                    loss_sum += _train_pair(W_in, W_out, sent[pos], sent[cpos],
                                            n_negatives, neg_table, lr, grad_v)
                    pairs += 1
            processed += (end - start) - n  # dropped tokens still advance lr decay
        epoch_losses[epoch] = loss_sum / max(pairs, 1)
    return epoch_losses


@njit(cache=True, parallel=True)
def _train_epochs_parallel(tokens, offsets, W_in, W_out, neg_table, keep_prob,
                           window, n_negatives, lr0, lr_min, epochs):
    n_sentences = offsets.shape[0] - 1
    total = tokens.shape[0] * epochs
    epoch_losses = np.zeros(epochs)
    for epoch in range(epochs):
        loss_sum = 0.0
        pairs = 0
        for s in prange(n_sentences):
            grad_v = np.zeros(W_in.shape[1])
            start = offsets[s]
            end = offsets[s + 1]
            sent = np.empty(end - start, dtype=np.int64)
            n = 0
            for pos in range(start, end):
                if keep_prob[tokens[pos]] >= 1.0 or np.random.random() < keep_prob[tokens[pos]]:
                    sent[n] = tokens[pos]
                    n += 1
            for pos in range(n):
                done = epoch * tokens.shape[0] + start + pos
                lr = lr0 * (1.0 - done / total)
                if lr < lr_min:
                    lr = lr_min
                b = 1 + np.random.randint(window)
                for off in range(-b, b + 1):
                    cpos = pos + off
                    if off == 0 or cpos < 0 or cpos >= n:
                        continue
                    loss_sum += _train_pair(W_in, W_out, sent[pos], sent[cpos],
                                            n_negatives, neg_table, lr, grad_v)
                    pairs += 1
        epoch_losses[epoch] = loss_sum / max(pairs, 1)
    return epoch_losses


def encode_corpus(corpus: list[list[str]], vocab: Vocabulary):
    offsets = np.zeros(len(corpus) + 1, dtype=np.int64)
    flat = []
    for i, sentence in enumerate(corpus):
        flat.extend(vocab.index[t] for t in sentence)
        offsets[i + 1] = len(flat)
    return np.array(flat, dtype=np.int64), offsets


def train_skipgram(corpus: list[list[str]], vocab: Vocabulary, dim: int,
                   hyperparams: TrainHyperparams | None = None, seed: int = 0,
                   deterministic: bool = True) -> EmbeddingModel:
    if not isinstance(dim, int) or dim < 1:
        raise InvalidDimension(f"bad embedding dimension: {dim!r}")
    hp = hyperparams or TrainHyperparams()
    w_in, w_out = init_matrices(len(vocab), dim, seed)
    model = EmbeddingModel(vocab, w_in, w_out, dim, hp, seed)
    if hp.epochs == 0:
        return model
    tokens, offsets = encode_corpus(corpus, vocab)
    if tokens.size == 0:
        raise EmptyCorpus("corpus contains no tokens")
    table = _noise_table(vocab.counts, hp.noise_exponent)
    keep_prob = _keep_probabilities(vocab.counts, hp.subsample)
    if deterministic:
        losses = _train_epochs_serial(tokens, offsets, w_in, w_out, table,
                                      keep_prob, hp.window, hp.negatives,
                                      hp.learning_rate, hp.min_learning_rate,
                                      hp.epochs, seed)
    else:
        losses = _train_epochs_parallel(tokens, offsets, w_in, w_out, table,
                                        keep_prob, hp.window, hp.negatives,
                                        hp.learning_rate, hp.min_learning_rate,
                                        hp.epochs)
    model.epoch_losses = [float(x) for x in losses]
    return model


def vector(model: EmbeddingModel, token: str) -> np.ndarray:
    if token not in model.vocab.index:
        raise UnknownToken(f"token not in vocabulary: {token}")
    return model.W_in[model.vocab.index[token]]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


# --- word2vec text format ---

def save_model(model: EmbeddingModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, token in enumerate(model.vocab.tokens):
            comps = " ".join(f"{x:.6f}" for x in model.W_in[i])
            fh.write(f"{token} {comps}\n")


def load_model(path) -> EmbeddingModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("bad or missing word2vec header", line=1)
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError("non-integer header fields", line=1) from None
        tokens = []
        vectors = np.zeros((n, dim))
        count = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if count >= n:
                raise ParseError("more vectors than header declares", line=lineno)
            if len(parts) != dim + 1:
                raise ParseError(
                    f"expected {dim} components, got {len(parts) - 1}", line=lineno)
            tokens.append(parts[0])
            vectors[count] = [float(x) for x in parts[1:]]
            count += 1
        if count != n:
            raise ParseError(f"header declares {n} vectors, found {count}")
    vocab = Vocabulary(tokens=tokens, index={t: i for i, t in enumerate(tokens)},
                       counts=np.zeros(n, dtype=np.int64))
    return EmbeddingModel(vocab, vectors, np.zeros_like(vectors), dim,
                          TrainHyperparams(), seed=0)
