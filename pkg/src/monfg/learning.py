"""Independent learners with vectorial one-shot Q estimates over repeated play.

Each agent keeps a Q table of expected payoff-vector estimates per (private
signal, own action), updated with a constant learning rate after every
episode. Greedy play computes the mixed strategy maximizing the scalarised
value of the current estimates and samples from it; exploration picks a
uniformly random action. With correlation signals, the first
``follow_episodes`` episodes are played by following the recommendations
exactly, after which exploration restarts and decays.

Trials are independent, each seeded with ``base_seed + trial_index``, and the
whole pipeline is deterministic: identical configs give bit-identical metrics
regardless of worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import _kernels
from .core import (
    MONFG,
    CorrelatedStrategy,
    MixedStrategy,
    ThresholdUtility,
    UtilitySpec,
    utility_eval,
)
from .errors import ConfigInvalid, OptimizationFailed, ShapeMismatch
from .optim import MixtureObjective, OptConfig, maximize_over_simplex

WINDOW = 100
FINAL_WINDOW = 1000
CONVERGENCE_MASS = 0.9
MULTI_ENUMERATE_CAP = 27

# Lighter profile than the library default: the per-episode problems are tiny
# and are re-solved up to twice per episode for ten thousand episodes.
EXPERIMENT_OPT = OptConfig(num_starts=6, max_iters=150, step_init=0.2, eps_opt=1e-7, seed=0)


class SignalMode(str, Enum):
    NONE = "none"
    SINGLE = "single"
    MULTI = "multi"


@dataclass
class AgentState:
    """Q estimates per (signal, action), exploration rate, and, for the
    multi-signal case, the agent's own recommendation marginals."""

    q: np.ndarray  # (num_signals, num_actions, num_objectives)
    epsilon: float
    own_marginals: np.ndarray | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    game: MONFG
    utilities: tuple[UtilitySpec, ...]
    signal_mode: SignalMode
    correlated_strategy: CorrelatedStrategy | None = None
    trials: int = 100
    episodes: int = 10_000
    follow_episodes: int = 500
    alpha: float = 0.05
    epsilon_initial: float = 0.1
    epsilon_decay: float = 0.999
    base_seed: int = 0
    opt: OptConfig = EXPERIMENT_OPT

    def __post_init__(self) -> None:
        mode = SignalMode(self.signal_mode)
        object.__setattr__(self, "signal_mode", mode)
        object.__setattr__(self, "utilities", tuple(self.utilities))
        if len(self.utilities) != self.game.num_players:
            raise ConfigInvalid(
                f"{len(self.utilities)} utilities for {self.game.num_players} players"
            )
        if self.trials < 1 or self.episodes < 1:
            raise ConfigInvalid("trials and episodes must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigInvalid("alpha must lie in (0, 1]")
        if not 0.0 <= self.epsilon_initial <= 1.0:
            raise ConfigInvalid("epsilon_initial must lie in [0, 1]")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ConfigInvalid("epsilon_decay must lie in (0, 1]")
        if mode is SignalMode.NONE:
            if self.correlated_strategy is not None:
                raise ConfigInvalid("correlated_strategy requires a signal mode")
            if self.follow_episodes != 0:
                raise ConfigInvalid("follow_episodes must be 0 without signals")
        else:
            if self.correlated_strategy is None:
                raise ConfigInvalid(f"signal mode {mode.value} needs a correlated_strategy")
            if self.correlated_strategy.action_counts != self.game.action_counts:
                raise ConfigInvalid("correlated_strategy shape does not match the game")
            if not 0 <= self.follow_episodes < self.episodes:
                raise ConfigInvalid("follow_episodes must satisfy 0 <= follow < episodes")


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------


def q_update(q_entry: np.ndarray, payoff: np.ndarray, alpha: float) -> np.ndarray:
    """One-shot vectorial Q step: move the estimate a fraction alpha to the payoff."""
    q = np.asarray(q_entry, dtype=np.float64)
    p = np.asarray(payoff, dtype=np.float64)
    if q.shape != p.shape:
        raise ShapeMismatch(f"q entry shape {q.shape} vs payoff shape {p.shape}")
    return q + alpha * (p - q)


def select_action(strategy: MixedStrategy, epsilon: float, rng: np.random.Generator) -> int:
    """Sample from the strategy with probability 1 - epsilon, else uniformly."""
    k = strategy.num_actions
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(k))
    return _sample_probs(strategy.probs, rng)


def _sample_probs(probs: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(idx, probs.shape[0] - 1)


def optimal_mixed_strategy(
    agent: AgentState,
    utility: UtilitySpec,
    mode: SignalMode,
    current_signal: int,
    opt: OptConfig | None = None,
) -> MixedStrategy:
    """Mixed strategy maximizing the scalarised value of the agent's estimates.

    Modes none/single maximize u(pi @ Q[s]) on the simplex for the current (or
    null) signal. The multi-signal mode maximizes the utility of the
    marginal-weighted expectation jointly over one simplex per positive-
    marginal signal and returns the block for ``current_signal``.
    """
    opt = opt or OptConfig()
    mode = SignalMode(mode)
    k = agent.q.shape[1]
    if mode is not SignalMode.MULTI:
        s = 0 if mode is SignalMode.NONE else current_signal
        point, _ = maximize_over_simplex(
            MixtureObjective(agent.q[s], utility), None, k, opt
        )
        return MixedStrategy(point)
    if agent.own_marginals is None:
        raise OptimizationFailed("multi-signal optimization needs own_marginals")
    if agent.own_marginals[current_signal] <= 0.0:
        raise OptimizationFailed("current signal has zero marginal probability")
    if isinstance(utility, ThresholdUtility):
        pis = _threshold_product_enumeration(agent.q, agent.own_marginals, utility)
    else:
        code, w, e, guard = _kernels.pack_utility(utility, agent.q.shape[2])
        starts = _product_starts(opt, agent.q.shape[0], k)
        pis, _ = _kernels.product_simplex_ascent(
            agent.q, agent.own_marginals, code, w, e, guard, starts,
            opt.step_init, opt.max_iters, opt.eps_opt, MULTI_ENUMERATE_CAP,
        )
    return MixedStrategy(pis[current_signal])


def _product_starts(opt: OptConfig, num_signals: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(opt.seed)
    return rng.dirichlet(np.ones(k), size=(opt.num_starts, num_signals))


def _threshold_product_enumeration(q, marginals, utility) -> np.ndarray:
    """Pure-assignment search for the non-differentiable threshold variant."""
    import itertools

    S, k, d = q.shape
    active = [s for s in range(S) if marginals[s] > 0.0]
    if k ** len(active) > MULTI_ENUMERATE_CAP:
        raise OptimizationFailed(
            "threshold utilities support only enumerable multi-signal problems"
        )
    best_val = -np.inf
    best = np.full((S, k), 1.0 / k)
    for assign in itertools.product(range(k), repeat=len(active)):
        vec = np.zeros(d)
        for s, a in zip(active, assign):
            vec += marginals[s] * q[s, a]
        val = utility_eval(utility, vec)
        if val >= best_val:
            best_val = val
            best = np.full((S, k), 1.0 / k)
            for s, a in zip(active, assign):
                best[s] = 0.0
                best[s, a] = 1.0
    return best


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


@dataclass
class TrialTrace:
    """Per-episode record of one trial."""

    actions: np.ndarray      # (episodes, players) int16
    signals: np.ndarray      # (episodes, players) int16; -1 without signals
    payoffs: np.ndarray      # (episodes, players, objectives)
    scalarised: np.ndarray   # (episodes, players)
    epsilons: np.ndarray     # (episodes,)
    final_agents: list[AgentState]


def _greedy_probs(agent: AgentState, packed, starts, mode: SignalMode, signal: int,
                  opt: OptConfig, multi_starts) -> np.ndarray:
    """Fast path of optimal_mixed_strategy with pre-generated starts."""
    code, w, e, guard = packed
    if mode is not SignalMode.MULTI:
        s = 0 if mode is SignalMode.NONE else signal
        probs, _ = _kernels.mixture_ascent(
            agent.q[s], code, w, e, guard, starts,
            opt.step_init, opt.max_iters, opt.eps_opt,
        )
        return probs
    pis, _ = _kernels.product_simplex_ascent(
        agent.q, agent.own_marginals, code, w, e, guard, multi_starts,
        opt.step_init, opt.max_iters, opt.eps_opt, MULTI_ENUMERATE_CAP,
    )
    return pis[signal]


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialTrace:
    """One seeded trial of cfg.episodes episodes.

    Episode order per agent: receive the private signal (signal modes draw a
    joint recommendation and deliver each agent only its own component), pick
    an action (forced to the recommendation during the follow phase, epsilon-
    greedy afterwards), observe the own payoff vector of the realized joint
    action, and update Q at the (signal, action) pair that actually occurred.
    Epsilon decays multiplicatively at the end of each post-follow episode.
    """
    game = cfg.game
    mode = cfg.signal_mode
    n = game.num_players
    d = game.num_objectives
    counts = game.action_counts
    episodes = cfg.episodes
    rng = np.random.default_rng(cfg.base_seed + trial_index)

    payoff_flat = game.payoffs.reshape(-1, n, d)
    scal_flat = np.empty((payoff_flat.shape[0], n))
    for j in range(payoff_flat.shape[0]):
        for i in range(n):
            scal_flat[j, i] = utility_eval(cfg.utilities[i], payoff_flat[j, i])
    strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * counts[i + 1]

    with_signals = mode is not SignalMode.NONE
    if with_signals:
        flat_sigma = cfg.correlated_strategy.probs.reshape(-1)
        support = np.nonzero(flat_sigma > 0.0)[0]
        sigma_cum = np.cumsum(flat_sigma[support])
        rec_table = np.asarray(
            np.unravel_index(support, counts)
        ).T.astype(np.int16)

    agents = []
    packed = []
    starts = []
    multi_starts = []
    for i in range(n):
        num_signals = 1 if mode is SignalMode.NONE else counts[i]
        marg = (
            cfg.correlated_strategy.marginal(i) if mode is SignalMode.MULTI else None
        )
        agents.append(
            AgentState(
                q=np.zeros((num_signals, counts[i], d)),
                epsilon=0.0 if with_signals else cfg.epsilon_initial,
                own_marginals=marg,
            )
        )
        packed.append(_kernels.pack_utility(cfg.utilities[i], d))
        opt_rng = np.random.default_rng(cfg.opt.seed)
        starts.append(opt_rng.dirichlet(np.ones(counts[i]), size=cfg.opt.num_starts))
        multi_starts.append(
            _product_starts(cfg.opt, num_signals, counts[i]) if mode is SignalMode.MULTI else None
        )

    actions = np.empty((episodes, n), dtype=np.int16)
    signals = np.full((episodes, n), -1, dtype=np.int16)
    payoffs = np.empty((episodes, n, d))
    scalarised = np.empty((episodes, n))
    epsilons = np.empty(episodes)
    follow = cfg.follow_episodes if with_signals else 0

    for e in range(episodes):
        if with_signals:
            pick = int(np.searchsorted(sigma_cum, rng.random(), side="right"))
            rec = rec_table[min(pick, rec_table.shape[0] - 1)]
            signals[e] = rec
        if e == follow:
            for agent in agents:
                agent.epsilon = cfg.epsilon_initial
        in_follow = with_signals and e < follow
        epsilons[e] = 0.0 if in_follow else agents[0].epsilon

        flat = 0
        for i, agent in enumerate(agents):
            if in_follow:
                a = int(rec[i])
            else:
                eps = agent.epsilon
                if eps > 0.0 and rng.random() < eps:
                    a = int(rng.integers(counts[i]))
                else:
                    probs = _greedy_probs(
                        agent, packed[i], starts[i], mode,
                        int(rec[i]) if with_signals else 0, cfg.opt, multi_starts[i],
                    )
                    a = _sample_probs(probs, rng)
            actions[e, i] = a
            flat += strides[i] * a

        for i, agent in enumerate(agents):
            p = payoff_flat[flat, i]
            payoffs[e, i] = p
            scalarised[e, i] = scal_flat[flat, i]
            s = int(signals[e, i]) if with_signals else 0
            agent.q[s, actions[e, i]] = q_update(agent.q[s, actions[e, i]], p, cfg.alpha)

        if not in_follow:
            for agent in agents:
                agent.epsilon *= cfg.epsilon_decay

    return TrialTrace(
        actions=actions,
        signals=signals,
        payoffs=payoffs,
        scalarised=scalarised,
        epsilons=epsilons,
        final_agents=agents,
    )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass
class TrialStats:
    scalarised: np.ndarray                 # (episodes, players)
    window_freqs: list[np.ndarray]         # per agent (episodes, actions)
    joint_last: np.ndarray                 # flattened joint distribution
    final_strategy: list[np.ndarray]       # per agent, last-window frequencies
    final_payoff_mean: np.ndarray          # (players,)
    converged: bool
    modal_cell: tuple[int, ...]
    follow_rate_final: float               # nan without signals


def window_frequencies(actions: np.ndarray, num_actions: int, window: int = WINDOW) -> np.ndarray:
    """Trailing action frequencies over a window (truncated at the start)."""
    episodes = actions.shape[0]
    onehot = np.zeros((episodes, num_actions))
    onehot[np.arange(episodes), actions] = 1.0
    csum = np.vstack([np.zeros((1, num_actions)), np.cumsum(onehot, axis=0)])
    lo = np.maximum(np.arange(episodes) + 1 - window, 0)
    spans = (np.arange(episodes) + 1 - lo).astype(np.float64)
    return (csum[np.arange(episodes) + 1] - csum[lo]) / spans[:, None]


def trial_stats(cfg: ExperimentConfig, trace: TrialTrace) -> TrialStats:
    game = cfg.game
    n = game.num_players
    counts = game.action_counts
    episodes = trace.actions.shape[0]
    last = min(FINAL_WINDOW, episodes)
    strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * counts[i + 1]

    freqs = [
        window_frequencies(trace.actions[:, i].astype(np.int64), counts[i])
        for i in range(n)
    ]
    flat = (trace.actions[-last:].astype(np.int64) * strides).sum(axis=1)
    joint_last = np.bincount(flat, minlength=int(np.prod(counts))) / float(last)
    modal = int(np.argmax(joint_last))
    converged = bool(joint_last[modal] >= CONVERGENCE_MASS)
    if cfg.signal_mode is SignalMode.NONE:
        follow_rate = float("nan")
    else:
        followed = np.all(trace.actions[-last:] == trace.signals[-last:], axis=1)
        follow_rate = float(np.mean(followed))
    return TrialStats(
        scalarised=trace.scalarised,
        window_freqs=freqs,
        joint_last=joint_last,
        final_strategy=[f[-1].copy() for f in freqs],
        final_payoff_mean=trace.scalarised[-last:].mean(axis=0),
        converged=converged,
        modal_cell=tuple(int(x) for x in np.unravel_index(modal, counts)),
        follow_rate_final=follow_rate,
    )


@dataclass
class ExperimentMetrics:
    """Cross-trial aggregates plus the per-trial summaries tests rely on."""

    config: ExperimentConfig
    payoff_mean: np.ndarray                  # (episodes, players)
    payoff_std: np.ndarray                   # (episodes, players)
    action_probs_mean: list[np.ndarray]      # per agent (episodes, actions)
    action_probs_std: list[np.ndarray]
    joint_last: np.ndarray                   # joint-shape distribution
    final_payoff_means: np.ndarray           # (players,) mean over trials
    per_trial_converged: np.ndarray          # (trials,) bool
    per_trial_modal_cells: list[tuple[int, ...]]
    per_trial_final_payoff_means: np.ndarray  # (trials, players)
    per_trial_final_strategies: list[np.ndarray]  # per agent (trials, actions)
    per_trial_follow_rates: np.ndarray       # (trials,), nan without signals

    @property
    def convergence_fraction(self) -> float:
        return float(np.mean(self.per_trial_converged))


def _trial_stats_job(args: tuple[ExperimentConfig, int]) -> TrialStats:
    cfg, index = args
    return trial_stats(cfg, run_trial(cfg, index))


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentMetrics:
    """Run all trials (optionally in parallel processes) and aggregate.

    Aggregation always reduces in trial-index order, so results do not depend
    on the worker count.
    """
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_trial_stats_job, jobs, chunksize=1))
    else:
        stats = [_trial_stats_job(j) for j in jobs]

    n = cfg.game.num_players
    counts = cfg.game.action_counts
    episodes = cfg.episodes
    trials = cfg.trials

    scal_sum = np.zeros((episodes, n))
    scal_sq = np.zeros((episodes, n))
    freq_sum = [np.zeros((episodes, counts[i])) for i in range(n)]
    freq_sq = [np.zeros((episodes, counts[i])) for i in range(n)]
    joint_sum = np.zeros(int(np.prod(counts)))
    for st in stats:
        scal_sum += st.scalarised
        scal_sq += st.scalarised**2
        joint_sum += st.joint_last
        for i in range(n):
            freq_sum[i] += st.window_freqs[i]
            freq_sq[i] += st.window_freqs[i] ** 2

    def finish(total, total_sq):
        mean = total / trials
        var = np.maximum(total_sq / trials - mean**2, 0.0)
        return mean, np.sqrt(var)

    payoff_mean, payoff_std = finish(scal_sum, scal_sq)
    probs_mean, probs_std = [], []
    for i in range(n):
        m, s = finish(freq_sum[i], freq_sq[i])
        probs_mean.append(m)
        probs_std.append(s)

    return ExperimentMetrics(
        config=cfg,
        payoff_mean=payoff_mean,
        payoff_std=payoff_std,
        action_probs_mean=probs_mean,
        action_probs_std=probs_std,
        joint_last=(joint_sum / trials).reshape(counts),
        final_payoff_means=np.mean([st.final_payoff_mean for st in stats], axis=0),
        per_trial_converged=np.array([st.converged for st in stats], dtype=bool),
        per_trial_modal_cells=[st.modal_cell for st in stats],
        per_trial_final_payoff_means=np.array([st.final_payoff_mean for st in stats]),
        per_trial_final_strategies=[
            np.array([st.final_strategy[i] for st in stats]) for i in range(n)
        ],
        per_trial_follow_rates=np.array([st.follow_rate_final for st in stats]),
    )


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_metrics(metrics: ExperimentMetrics, outdir: str | Path) -> None:
    """Write payoffs.csv, actions_agent<i>.csv, joint_last1000.csv, summary.json."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = metrics.config
    game = cfg.game
    n = game.num_players
    episodes = cfg.episodes

    with open(out / "payoffs.csv", "w", newline="") as fh:
        fh.write("episode,agent,mean,std\n")
        for e in range(episodes):
            for i in range(n):
                fh.write(
                    f"{e + 1},{i + 1},{_fmt(metrics.payoff_mean[e, i])},"
                    f"{_fmt(metrics.payoff_std[e, i])}\n"
                )

    for i in range(n):
        labels = game.action_labels[i]
        header = "episode," + ",".join(
            f"p_{lab}_mean,p_{lab}_std" for lab in labels
        )
        with open(out / f"actions_agent{i + 1}.csv", "w", newline="") as fh:
            fh.write(header + "\n")
            for e in range(episodes):
                cells = []
                for a in range(len(labels)):
                    cells.append(_fmt(metrics.action_probs_mean[i][e, a]))
                    cells.append(_fmt(metrics.action_probs_std[i][e, a]))
                fh.write(f"{e + 1}," + ",".join(cells) + "\n")

    with open(out / "joint_last1000.csv", "w", newline="") as fh:
        fh.write("joint_action,frequency\n")
        flat = metrics.joint_last.reshape(-1)
        for j, cell in enumerate(np.ndindex(*game.action_counts)):
            fh.write(f"{game.joint_label(cell)},{_fmt(flat[j])}\n")

    summary = {
        "config": {
            "signal_mode": cfg.signal_mode.value,
            "trials": cfg.trials,
            "episodes": cfg.episodes,
            "follow_episodes": cfg.follow_episodes,
            "alpha": cfg.alpha,
            "epsilon_initial": cfg.epsilon_initial,
            "epsilon_decay": cfg.epsilon_decay,
            "base_seed": cfg.base_seed,
            "optimizer": {
                "num_starts": cfg.opt.num_starts,
                "max_iters": cfg.opt.max_iters,
                "step_init": cfg.opt.step_init,
                "eps_opt": cfg.opt.eps_opt,
                "seed": cfg.opt.seed,
            },
        },
        "metadata": {
            "q_initialization": "zeros",
            "q_updates_on_exploration": True,
            "greedy_play": "samples from the optimal mixed strategy",
            "epsilon_decay_applied": "end of each episode, multiplicative",
            "convergence_label": f"last-{FINAL_WINDOW} modal joint action mass >= {CONVERGENCE_MASS}",
        },
        "trial_seeds": [cfg.base_seed + t for t in range(cfg.trials)],
        "final_mean_scalarised_payoffs": [float(x) for x in metrics.final_payoff_means],
        "convergence_fraction": metrics.convergence_fraction,
        "per_trial_converged": [bool(b) for b in metrics.per_trial_converged],
        "per_trial_final_payoff_means": metrics.per_trial_final_payoff_means.tolist(),
        "follow_rate_final_mean": (
            None
            if cfg.signal_mode is SignalMode.NONE
            else float(np.mean(metrics.per_trial_follow_rates))
        ),
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
