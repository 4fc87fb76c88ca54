"""Rank correlations and top-n overlap statistics between ranking snapshots.

Kendall's tau and Goodman-Kruskal's gamma are computed from concordant /
discordant pair counts obtained by merge-sort inversion counting
(O(M log M)); Spearman's rho uses the single-sum formula. The O(M^2)
score-function form of a rank correlation is kept as a reference
implementation used to validate the closed forms, not as a production
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from wealthdyn.engine import WealthSnapshot
from wealthdyn.errors import DataError, StatisticsError

_BRUTE_FORCE_CUTOFF = 64


@dataclass(frozen=True)
class RankingSnapshot:
    """Identities ordered by rank at one time (rank 1 = wealthiest).

    ``ids`` lists identities in rank order, ``ranks`` the corresponding
    integer ranks, and ``tied`` flags entries sharing an ex-aequo rank.
    Without tie flags the ranks must be a permutation of 1..M.
    """

    time_label: int
    ids: np.ndarray
    ranks: np.ndarray
    tied: np.ndarray

    @classmethod
    def from_ordered_ids(cls, time_label: int, ids) -> "RankingSnapshot":
        """Tie-free snapshot from identities already in rank order."""
        ids = np.asarray(ids)
        m = ids.size
        return cls(time_label, ids, np.arange(1, m + 1), np.zeros(m, dtype=bool))

    @property
    def size(self) -> int:
        return int(self.ids.size)

    @property
    def has_ties(self) -> bool:
        return bool(self.tied.any())

    def validate(self) -> None:
        if not (self.ids.size == self.ranks.size == self.tied.size):
            raise DataError("misaligned ranking snapshot arrays")
        if np.unique(self.ids).size != self.ids.size:
            raise DataError(f"duplicate identities in snapshot {self.time_label}")
        if np.any(self.ranks < 1):
            raise DataError("ranks must be positive integers")
        if not self.has_ties:
            expected = np.arange(1, self.size + 1)
            if not np.array_equal(np.sort(self.ranks), expected):
                raise DataError(
                    f"snapshot {self.time_label}: untied ranks must be a "
                    f"permutation of 1..{self.size}"
                )

    def top_ids(self, n: int) -> np.ndarray:
        """Identities holding ranks 1..n."""
        if n < 1 or n > self.size:
            raise DataError(f"top-n size {n} exceeds snapshot size {self.size}")
        top = self.ids[self.ranks <= n]
        if top.size != n:
            raise DataError(f"tied ranks straddle the top-{n} boundary")
        return top


@dataclass(frozen=True)
class RankPairSample:
    """Two rank vectors aligned by identity."""

    ranks_x: np.ndarray
    ranks_y: np.ndarray
    allow_ties: bool = False

    def __post_init__(self) -> None:
        if self.ranks_x.size != self.ranks_y.size:
            raise DataError("rank vectors differ in length")

    @property
    def size(self) -> int:
        return int(self.ranks_x.size)

    @classmethod
    def from_snapshots(cls, a: RankingSnapshot, b: RankingSnapshot) -> "RankPairSample":
        """Align two snapshots over the same identity set."""
        ia = np.argsort(a.ids, kind="stable")
        ib = np.argsort(b.ids, kind="stable")
        if not np.array_equal(a.ids[ia], b.ids[ib]):
            raise DataError("snapshots cover different identity sets")
        return cls(
            np.asarray(a.ranks)[ia],
            np.asarray(b.ranks)[ib],
            allow_ties=a.has_ties or b.has_ties,
        )


def _merge_count(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Sorted copy of ``a`` and the number of strict inversions (i<j, a_i>a_j)."""
    n = a.size
    if n <= _BRUTE_FORCE_CUTOFF:
        if n < 2:
            return a.copy(), 0
        greater = a[:, None] > a[None, :]
        return np.sort(a, kind="stable"), int(np.triu(greater, 1).sum())
    mid = n // 2
    left, c_left = _merge_count(a[:mid])
    right, c_right = _merge_count(a[mid:])
    # For each right-half value, count strictly greater left-half values.
    cross = int(np.sum(left.size - np.searchsorted(left, right, side="right")))
    merged = np.concatenate((left, right))
    merged.sort(kind="stable")
    return merged, c_left + c_right + cross


def count_inversions(a) -> int:
    """Strict inversions of a sequence, by merge-sort counting."""
    return _merge_count(np.asarray(a))[1]


def _tied_pair_count(sorted_vals: np.ndarray) -> int:
    """Number of pairs with equal values, given a sorted array."""
    if sorted_vals.size == 0:
        return 0
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0)
    run_lengths = np.diff(np.concatenate(([0], boundaries + 1, [sorted_vals.size])))
    return int(np.sum(run_lengths * (run_lengths - 1) // 2))


def _tied_pair_count_2d(xs: np.ndarray, ys: np.ndarray) -> int:
    """Pairs tied in both coordinates, given arrays lexsorted by (x, y)."""
    if xs.size == 0:
        return 0
    change = (np.diff(xs) != 0) | (np.diff(ys) != 0)
    boundaries = np.flatnonzero(change)
    run_lengths = np.diff(np.concatenate(([0], boundaries + 1, [xs.size])))
    return int(np.sum(run_lengths * (run_lengths - 1) // 2))


@dataclass(frozen=True)
class ConcordanceCounts:
    concordant: int
    discordant: int
    tied_x: int
    tied_y: int
    tied_both: int
    total: int


def concordance_counts(x, y) -> ConcordanceCounts:
    """Concordant/discordant/tied pair counts for two aligned vectors."""
    x = np.asarray(x)
    y = np.asarray(y)
    m = x.size
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    # After the lexsort, strict inversions of y are exactly the discordant
    # pairs: x-tied groups are y-ascending and y-ties are not strict.
    discordant = count_inversions(ys)
    total = m * (m - 1) // 2
    tied_x = _tied_pair_count(xs)
    tied_y = _tied_pair_count(np.sort(y, kind="stable"))
    tied_both = _tied_pair_count_2d(xs, ys)
    concordant = total - tied_x - tied_y + tied_both - discordant
    return ConcordanceCounts(concordant, discordant, tied_x, tied_y, tied_both, total)


def _require_untied(sample: RankPairSample, counts: ConcordanceCounts, name: str) -> None:
    if sample.allow_ties or counts.tied_x or counts.tied_y:
        raise StatisticsError(f"{name} requires tie-free rankings")


def kendall_tau(sample: RankPairSample) -> float:
    """Kendall's tau = 2(N_c - N_d) / (M(M-1)), tie-free samples only."""
    if sample.size < 2:
        raise StatisticsError("kendall_tau requires at least 2 entries")
    counts = concordance_counts(sample.ranks_x, sample.ranks_y)
    _require_untied(sample, counts, "kendall_tau")
    return (counts.concordant - counts.discordant) / counts.total


def spearman_rho(sample: RankPairSample) -> float:
    """Spearman's rho = 1 - 6 sum d_i^2 / (M(M^2-1)), tie-free samples only."""
    m = sample.size
    if m < 2:
        raise StatisticsError("spearman_rho requires at least 2 entries")
    x = sample.ranks_x
    y = sample.ranks_y
    if sample.allow_ties or _has_duplicates(x) or _has_duplicates(y):
        raise StatisticsError("spearman_rho requires tie-free rankings")
    d = x.astype(np.int64) - y.astype(np.int64)
    return 1.0 - 6.0 * int(np.dot(d, d)) / (m * (m * m - 1))


def _has_duplicates(a: np.ndarray) -> bool:
    return np.unique(a).size != a.size


def goodman_kruskal_gamma(sample: RankPairSample) -> float:
    """Goodman-Kruskal's gamma = (N_c - N_d) / (N_c + N_d).

    Pairs tied in either coordinate contribute to neither count; if all
    pairs are tied the coefficient is undefined and an error is raised.
    """
    if sample.size < 2:
        raise StatisticsError("goodman_kruskal_gamma requires at least 2 entries")
    counts = concordance_counts(sample.ranks_x, sample.ranks_y)
    denom = counts.concordant + counts.discordant
    if denom == 0:
        raise StatisticsError("gamma undefined: all pairs tied in x or y")
    return (counts.concordant - counts.discordant) / denom


def score_correlation(sample: RankPairSample, score: Callable[[np.ndarray], np.ndarray]) -> float:
    """Rank correlation for an odd monotone score function f.

    Gamma_f = sum f(r_i-r_j) f(s_i-s_j) / sqrt(sum f^2(r_i-r_j)) /
    sqrt(sum f^2(s_i-s_j)) over all ordered pairs. O(M^2) reference
    implementation kept as a validation surface (f = sign gives tau,
    f = identity gives rho).
    """
    if sample.size < 2:
        raise StatisticsError("score_correlation requires at least 2 entries")
    x = sample.ranks_x.astype(float)
    y = sample.ranks_y.astype(float)
    if sample.allow_ties or _has_duplicates(x) or _has_duplicates(y):
        raise StatisticsError("score_correlation requires tie-free rankings")
    fx = score(x[:, None] - x[None, :])
    fy = score(y[:, None] - y[None, :])
    den = np.sqrt(float(np.sum(fx * fx))) * np.sqrt(float(np.sum(fy * fy)))
    if den == 0.0:
        raise StatisticsError("score_correlation: zero denominator")
    return float(np.sum(fx * fy)) / den


def overlap_ratio(list_a: RankingSnapshot, list_b: RankingSnapshot, n: int) -> float:
    """Fraction of identities common to the two top-n sets."""
    top_a = list_a.top_ids(n)
    top_b = list_b.top_ids(n)
    return np.intersect1d(top_a, top_b, assume_unique=True).size / n


def _mean_overlaps_from_tops(tops: list[np.ndarray], n: int) -> dict[int, float]:
    k_count = len(tops)
    series: dict[int, float] = {0: 1.0}
    for lag in range(1, k_count):
        acc = 0
        for j in range(k_count - lag):
            acc += np.intersect1d(tops[j], tops[j + lag], assume_unique=True).size
        series[lag] = acc / n / (k_count - lag)
    return series


def mean_overlap_series(snapshots: Sequence[RankingSnapshot], n: int) -> dict[int, float]:
    """Mean top-n overlap versus lag over a uniformly spaced snapshot sequence.

    Returns {k: mean over j of overlap(j, j+k)} for 1 <= k <= K-1, plus
    {0: 1.0}. Assumes (does not verify) time-homogeneity of the sequence.
    """
    if len(snapshots) < 2:
        raise StatisticsError("mean_overlap_series requires at least 2 snapshots")
    tops = [np.sort(s.top_ids(n)) for s in snapshots]
    return _mean_overlaps_from_tops(tops, n)


def ranks_from_wealth(snapshot: WealthSnapshot) -> RankingSnapshot:
    """Rank agents by descending wealth; ties break by agent id ascending."""
    w = snapshot.wealth
    if not np.all(np.isfinite(w)):
        raise DataError("wealth entries must be finite")
    order = np.lexsort((np.arange(w.size), -w))
    return RankingSnapshot.from_ordered_ids(snapshot.time_index, order)


@dataclass(frozen=True)
class CorrelationSeries:
    """Rank-correlation and overlap statistics versus time lag.

    Lags are in evolution steps; the two rescaled abscissas are
    x_tau_rho = k*alpha*sigma^2 and x_overlap = k*sigma^2*(alpha-1).
    """

    lags: np.ndarray
    x_tau_rho: np.ndarray
    x_overlap: np.ndarray
    tau: np.ndarray
    rho: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray


def _aligned_rank_vector(snapshot: RankingSnapshot) -> np.ndarray:
    """Rank vector indexed by sorted identity, for repeated pairings."""
    return snapshot.ranks[np.argsort(snapshot.ids, kind="stable")]


def _origin_subset(n_origins: int, max_origins: int | None) -> np.ndarray:
    if max_origins is None or n_origins <= max_origins:
        return np.arange(n_origins)
    return np.unique(np.linspace(0, n_origins - 1, max_origins).astype(int))


def correlation_series(
    rankings: Sequence[RankingSnapshot],
    top_n: int,
    cadence_steps: int,
    alpha: float,
    sigma: float,
    lags: Sequence[int] | None = None,
    max_origins: int | None = None,
) -> CorrelationSeries:
    """Mean tau, rho, gamma and top-n overlap versus lag for a snapshot stream.

    ``rankings`` must be uniformly spaced (``cadence_steps`` evolution
    steps apart) and tie-free. Lags are given in snapshot units (default:
    all of 0..K-1); each lag's coefficients are averaged over the
    available origins, optionally subsampled to ``max_origins`` evenly
    spaced ones. Overlap is always averaged over all origins.
    """
    k_count = len(rankings)
    if k_count < 2:
        raise StatisticsError("correlation_series requires at least 2 snapshots")
    if lags is None:
        lag_list = list(range(k_count))
    else:
        lag_list = sorted(set(int(v) for v in lags))
        if lag_list and (lag_list[0] < 0 or lag_list[-1] >= k_count):
            raise StatisticsError(f"lags must lie in [0, {k_count - 1}]")
    vectors = [_aligned_rank_vector(s) for s in rankings]
    tops = [np.sort(s.top_ids(top_n)) for s in rankings]
    m = vectors[0].size
    pair_total = m * (m - 1) // 2
    tau = np.empty(len(lag_list))
    rho = np.empty(len(lag_list))
    gamma = np.empty(len(lag_list))
    omega = np.empty(len(lag_list))
    for i, lag in enumerate(lag_list):
        if lag == 0:
            tau[i] = rho[i] = gamma[i] = omega[i] = 1.0
            continue
        origins = _origin_subset(k_count - lag, max_origins)
        t_acc = r_acc = g_acc = 0.0
        for j in origins:
            x, y = vectors[j], vectors[j + lag]
            counts = concordance_counts(x, y)
            if counts.tied_x or counts.tied_y:
                raise StatisticsError("correlation_series requires tie-free rankings")
            t_acc += (counts.concordant - counts.discordant) / pair_total
            g_acc += (counts.concordant - counts.discordant) / (
                counts.concordant + counts.discordant
            )
            d = x.astype(np.int64) - y.astype(np.int64)
            r_acc += 1.0 - 6.0 * int(np.dot(d, d)) / (m * (m * m - 1))
        tau[i] = t_acc / origins.size
        gamma[i] = g_acc / origins.size
        rho[i] = r_acc / origins.size
        o_acc = 0
        for j in range(k_count - lag):
            o_acc += np.intersect1d(tops[j], tops[j + lag], assume_unique=True).size
        omega[i] = o_acc / top_n / (k_count - lag)
    lag_steps = np.asarray(lag_list, dtype=float) * cadence_steps
    return CorrelationSeries(
        lags=lag_steps,
        x_tau_rho=lag_steps * alpha * sigma * sigma,
        x_overlap=lag_steps * sigma * sigma * (alpha - 1.0),
        tau=tau,
        rho=rho,
        gamma=gamma,
        omega=omega,
    )
