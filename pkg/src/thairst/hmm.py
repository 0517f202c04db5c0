"""Generic discrete first-order hidden Markov model.

Shared by the phrase-identification and EDU-segmentation stages: supervised
count estimation, Baum-Welch refinement, forward likelihood, and Viterbi
decoding. Probability arithmetic runs in log space with -inf for zero.

The state alphabet carries a distinguished initial and terminal state as
sequence anchors. Transition rows are stochastic over the real states; the
final transition of a training path into the terminal state is an anchor
only and carries no probability mass, so likelihoods are conditioned on the
observed sequence length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DecodeError, ModelError

START_STATE = "<start>"
END_STATE = "<end>"

_ROW_TOL = 1e-9


@dataclass(frozen=True)
class HmmModel:
    """A trained HMM: state/symbol alphabets plus transition and emission matrices.

    ``states`` lists the initial anchor first and the terminal anchor last.
    ``trans`` is |states| x |states|; ``emit`` is |states| x |symbols| with
    all-zero rows for the two anchors.
    """

    states: tuple[str, ...]
    symbols: tuple[str, ...]
    trans: np.ndarray
    emit: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "trans", np.asarray(self.trans, dtype=float))
        object.__setattr__(self, "emit", np.asarray(self.emit, dtype=float))
        self.validate()

    # -- structure helpers -------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def real_states(self) -> tuple[str, ...]:
        return self.states[1:-1]

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise DataError(f"unknown state: {name!r}") from None

    def symbol_indices(self, obs) -> np.ndarray:
        lookup = {s: i for i, s in enumerate(self.symbols)}
        idx = []
        for pos, sym in enumerate(obs):
            if sym not in lookup:
                raise DataError(f"unknown symbol at position {pos}: {sym!r}")
            idx.append(lookup[sym])
        return np.array(idx, dtype=int)

    def validate(self) -> None:
        n, m = len(self.states), len(self.symbols)
        if n < 3:
            raise ModelError("model needs at least one real state plus anchors")
        if self.trans.shape != (n, n):
            raise ModelError(f"transition matrix must be {n}x{n}")
        if self.emit.shape != (n, m):
            raise ModelError(f"emission matrix must be {n}x{m}")
        if np.any(self.trans < 0) or np.any(self.emit < 0):
            raise ModelError("probabilities must be nonnegative")
        row_sums = self.trans.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > _ROW_TOL):
            bad = int(np.argmax(np.abs(row_sums - 1.0)))
            raise ModelError(
                f"transition row for state {self.states[bad]!r} sums to "
                f"{row_sums[bad]:.12g}, expected 1"
            )
        if np.any(self.trans[:, 0] > 0):
            raise ModelError("no transitions may enter the initial state")
        if np.any(self.trans[:-1, -1] > 0):
            raise ModelError("terminal state is an anchor and receives no mass")
        emit_sums = self.emit.sum(axis=1)
        if abs(emit_sums[0]) > _ROW_TOL or abs(emit_sums[-1]) > _ROW_TOL:
            raise ModelError("anchor states must not emit")
        inner = emit_sums[1:-1]
        if np.any(np.abs(inner - 1.0) > _ROW_TOL):
            bad = 1 + int(np.argmax(np.abs(inner - 1.0)))
            raise ModelError(
                f"emission row for state {self.states[bad]!r} sums to "
                f"{emit_sums[bad]:.12g}, expected 1"
            )

    # -- log-space views ---------------------------------------------------

    def _log_parts(self):
        with np.errstate(divide="ignore"):
            log_start = np.log(self.trans[0, 1:-1])
            log_trans = np.log(self.trans[1:-1, 1:-1])
            log_emit = np.log(self.emit[1:-1, :])
        return log_start, log_trans, log_emit


@dataclass(frozen=True)
class TrainingReport:
    """Baum-Welch run summary."""

    iterations: int
    log_likelihoods: tuple[float, ...]
    final_max_delta: float
    final_accuracy: float | None = None
    stop_reason: str = ""


def estimate_supervised(labeled) -> HmmModel:
    """Maximum-likelihood model from (state path, symbol sequence) pairs.

    Transition and emission probabilities are relative frequencies; the
    implicit final transition of each path into the terminal anchor is
    discarded, and zero-count rows fall back to uniform distributions.
    """
    labeled = list(labeled)
    if not labeled:
        raise DataError("empty training set")
    state_order: dict[str, None] = {}
    symbol_order: dict[str, None] = {}
    for path, obs in labeled:
        path, obs = list(path), list(obs)
        if len(path) != len(obs):
            raise DataError("state path and symbol sequence lengths differ")
        if not path:
            raise DataError("empty training sequence")
        for s in path:
            if s in (START_STATE, END_STATE):
                raise DataError("anchor states may not appear in training paths")
            state_order.setdefault(s, None)
        for o in obs:
            symbol_order.setdefault(o, None)
    real = tuple(state_order)
    symbols = tuple(symbol_order)
    k = len(real)
    sidx = {s: i for i, s in enumerate(real)}
    oidx = {o: i for i, o in enumerate(symbols)}

    start_counts = np.zeros(k)
    trans_counts = np.zeros((k, k))
    emit_counts = np.zeros((k, len(symbols)))
    for path, obs in labeled:
        prev = None
        for s, o in zip(path, obs):
            i = sidx[s]
            emit_counts[i, oidx[o]] += 1
            if prev is None:
                start_counts[i] += 1
            else:
                trans_counts[prev, i] += 1
            prev = i

    def normalize(counts: np.ndarray) -> np.ndarray:
        counts = counts.astype(float)
        if counts.ndim == 1:
            total = counts.sum()
            return counts / total if total > 0 else np.full_like(counts, 1.0 / len(counts))
        out = np.empty_like(counts)
        for r in range(counts.shape[0]):
            total = counts[r].sum()
            out[r] = counts[r] / total if total > 0 else 1.0 / counts.shape[1]
        return out

    return _assemble(real, symbols, normalize(start_counts), normalize(trans_counts), normalize(emit_counts))


def _assemble(real, symbols, start, trans, emit) -> HmmModel:
    k = len(real)
    n = k + 2
    T = np.zeros((n, n))
    E = np.zeros((n, len(symbols)))
    T[0, 1:-1] = start
    T[1:-1, 1:-1] = trans
    T[-1, -1] = 1.0
    E[1:-1, :] = emit
    return HmmModel(
        states=(START_STATE, *real, END_STATE), symbols=tuple(symbols), trans=T, emit=E
    )


def forward_log_likelihood(model: HmmModel, obs) -> float:
    """Log probability of the symbol sequence, summed over all state paths."""
    idx = model.symbol_indices(obs)
    if len(idx) == 0:
        return 0.0
    log_start, log_trans, log_emit = model._log_parts()
    alpha = log_start + log_emit[:, idx[0]]
    for t in range(1, len(idx)):
        alpha = _logsumexp_cols(alpha[:, None] + log_trans) + log_emit[:, idx[t]]
    return float(_logsumexp(alpha))


def forward_likelihood(model: HmmModel, obs) -> float:
    """Linear-space forward probability (computed in log space)."""
    return float(np.exp(forward_log_likelihood(model, obs)))


def viterbi(model: HmmModel, obs) -> tuple[tuple[str, ...], float]:
    """Most probable state path and its log probability.

    Ties break toward the lowest state index so decoding is deterministic.
    """
    idx = model.symbol_indices(obs)
    if len(idx) == 0:
        raise DataError("cannot decode an empty observation sequence")
    log_start, log_trans, log_emit = model._log_parts()
    k = log_start.shape[0]

    def check_alive(t: int) -> None:
        if np.all(np.isneginf(log_emit[:, idx[t]])):
            raise DecodeError(f"no state can emit symbol {obs[t]!r} at position {t}")

    check_alive(0)
    delta = log_start + log_emit[:, idx[0]]
    if np.all(np.isneginf(delta)):
        raise DecodeError(f"no path can start with symbol {obs[0]!r} at position 0")
    back = np.zeros((len(idx), k), dtype=int)
    for t in range(1, len(idx)):
        check_alive(t)
        scores = delta[:, None] + log_trans
        best_prev = np.argmax(scores, axis=0)
        delta = scores[best_prev, np.arange(k)] + log_emit[:, idx[t]]
        back[t] = best_prev
        if np.all(np.isneginf(delta)):
            raise DecodeError(
                f"no surviving path at position {t} (symbol {obs[t]!r})"
            )
    last = int(np.argmax(delta))
    logp = float(delta[last])
    path = [last]
    for t in range(len(idx) - 1, 0, -1):
        last = int(back[t, last])
        path.append(last)
    path.reverse()
    names = tuple(model.real_states[i] for i in path)
    return names, logp


def baum_welch(
    model: HmmModel,
    observations,
    *,
    epsilon: float = 0.02,
    target_accuracy: float = 0.98,
    eval_set=None,
    max_iter: int = 100,
) -> tuple[HmmModel, TrainingReport]:
    """Expectation-maximization re-estimation with the stopping rules:

    stop when the largest transition-probability change falls to ``epsilon``
    or below, when Viterbi accuracy on ``eval_set`` (labeled (path, obs)
    pairs) reaches ``target_accuracy``, or after ``max_iter`` iterations.
    """
    observations = [list(o) for o in observations]
    if not observations:
        raise DataError("Baum-Welch needs at least one observation sequence")
    obs_idx = [model.symbol_indices(o) for o in observations]

    real = model.real_states
    k = len(real)
    start = model.trans[0, 1:-1].copy()
    trans = model.trans[1:-1, 1:-1].copy()
    emit = model.emit[1:-1, :].copy()

    trace: list[float] = []
    max_delta = float("inf")
    accuracy: float | None = None
    reason = "max-iter"
    iterations = 0

    for it in range(1, max_iter + 1):
        iterations = it
        start_acc = np.zeros(k)
        trans_acc = np.zeros((k, k))
        emit_acc = np.zeros((k, emit.shape[1]))
        loglik = 0.0
        for seq in obs_idx:
            ll, gamma, xi = _forward_backward(start, trans, emit, seq)
            loglik += ll
            start_acc += gamma[0]
            if xi is not None:
                trans_acc += xi
            for t, o in enumerate(seq):
                emit_acc[:, o] += gamma[t]
        trace.append(loglik)

        new_start = start_acc / start_acc.sum()
        new_trans = np.empty_like(trans)
        for r in range(k):
            total = trans_acc[r].sum()
            if total <= 0.0:
                # No outgoing responsibility: occupied only sentence-finally
                # (keep the prior row) or never occupied at all (degenerate).
                if emit_acc[r].sum() > 0.0:
                    new_trans[r] = trans[r]
                else:
                    raise ModelError(
                        f"degenerate model at iteration {it}: state "
                        f"{real[r]!r} received no responsibility"
                    )
            else:
                new_trans[r] = trans_acc[r] / total
        new_emit = np.empty_like(emit)
        for r in range(k):
            total = emit_acc[r].sum()
            if total <= 0.0:
                raise ModelError(
                    f"degenerate model at iteration {it}: state {real[r]!r} "
                    "emitted nothing"
                )
            new_emit[r] = emit_acc[r] / total

        max_delta = max(
            float(np.max(np.abs(new_trans - trans))),
            float(np.max(np.abs(new_start - start))),
        )
        start, trans, emit = new_start, new_trans, new_emit

        if eval_set is not None:
            current = _assemble(real, model.symbols, start, trans, emit)
            accuracy = _labeled_accuracy(current, eval_set)
            if accuracy >= target_accuracy:
                reason = "accuracy"
                break
        if max_delta <= epsilon:
            reason = "epsilon"
            break

    final = _assemble(real, model.symbols, start, trans, emit)
    report = TrainingReport(
        iterations=iterations,
        log_likelihoods=tuple(trace),
        final_max_delta=max_delta,
        final_accuracy=accuracy,
        stop_reason=reason,
    )
    return final, report


def _labeled_accuracy(model: HmmModel, eval_set) -> float:
    correct = 0
    total = 0
    for path, obs in eval_set:
        decoded, _ = viterbi(model, obs)
        correct += sum(1 for a, b in zip(decoded, path) if a == b)
        total += len(path)
    return correct / total if total else 0.0


def _forward_backward(start, trans, emit, seq):
    """Scaled forward-backward for one sequence.

    Returns (log-likelihood, gamma[T,k], xi-sum[k,k] or None for length-1).
    """
    T = len(seq)
    k = len(start)
    alpha = np.zeros((T, k))
    scale = np.zeros(T)
    alpha[0] = start * emit[:, seq[0]]
    scale[0] = alpha[0].sum()
    if scale[0] <= 0.0:
        raise ModelError("observation sequence has zero probability under the model")
    alpha[0] /= scale[0]
    for t in range(1, T):
        alpha[t] = (alpha[t - 1] @ trans) * emit[:, seq[t]]
        scale[t] = alpha[t].sum()
        if scale[t] <= 0.0:
            raise ModelError(
                "observation sequence has zero probability under the model"
            )
        alpha[t] /= scale[t]
    beta = np.zeros((T, k))
    beta[-1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = (trans @ (emit[:, seq[t + 1]] * beta[t + 1])) / scale[t + 1]
    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    xi = None
    if T > 1:
        xi = np.zeros((k, k))
        for t in range(T - 1):
            m = (
                alpha[t][:, None]
                * trans
                * (emit[:, seq[t + 1]] * beta[t + 1])[None, :]
            ) / scale[t + 1]
            xi += m
    return float(np.sum(np.log(scale))), gamma, xi


def _logsumexp(a: np.ndarray) -> float:
    m = np.max(a)
    if np.isneginf(m):
        return float("-inf")
    return float(m + np.log(np.sum(np.exp(a - m))))


def _logsumexp_cols(mat: np.ndarray) -> np.ndarray:
    m = np.max(mat, axis=0)
    out = np.full(mat.shape[1], float("-inf"))
    finite = ~np.isneginf(m)
    if np.any(finite):
        sub = mat[:, finite] - m[finite][None, :]
        out[finite] = m[finite] + np.log(np.sum(np.exp(sub), axis=0))
    return out
