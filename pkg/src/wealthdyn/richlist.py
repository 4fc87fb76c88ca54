"""Ingestion and standardization of annual top-n rich lists.

Annual lists name different people each year, so before rank correlations
can be computed the lists are completed over the full person set (everyone
appearing at least once). Two completion schemes are supported:

* random-unique: absent people get a seeded random permutation of the
  ranks n+1..M, giving tie-free rankings suitable for tau and rho;
* ex-aequo: absent people all share the tied rank n+1, suitable for
  gamma, which ignores tied pairs and therefore minimizes the bias from
  the artificial completion.

Person identities are normalized name strings (trimmed, case-folded,
whitespace-collapsed), optionally routed through an alias map; entity
resolution beyond that (family fortunes, renamings) is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from wealthdyn.errors import DataError
from wealthdyn.rankstats import (
    RankingSnapshot,
    RankPairSample,
    goodman_kruskal_gamma,
    kendall_tau,
    mean_overlap_series,
    overlap_ratio,
    spearman_rho,
)


@dataclass(frozen=True)
class RichListRecord:
    year: int
    rank: int
    person_id: str


class CompletionMode(Enum):
    RANDOM_UNIQUE = "random-unique"
    EX_AEQUO = "ex-aequo"


@dataclass(frozen=True)
class FullSet:
    """Everyone present in at least one annual list."""

    persons: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.persons)


@dataclass(frozen=True)
class StandardizedPanel:
    """Per-year rankings over the full person set, plus the raw lists."""

    years: tuple[int, ...]
    snapshots: dict[int, RankingSnapshot]
    mode: CompletionMode
    seed: int | None
    raw_lists: dict[int, tuple[str, ...]]
    full_set: FullSet


def normalize_person_id(name: str) -> str:
    """Trim, case-fold and collapse internal whitespace."""
    return " ".join(name.split()).casefold()


def ingest(
    records: Iterable[RichListRecord],
    aliases: Mapping[str, str] | None = None,
) -> dict[int, tuple[str, ...]]:
    """Group records into validated annual lists (ids ordered by rank).

    Within each year the ranks must be exactly 1..n with no duplicates or
    gaps, and no person may appear twice.
    """
    alias_map = {}
    if aliases:
        alias_map = {normalize_person_id(k): normalize_person_id(v) for k, v in aliases.items()}
    by_year: dict[int, dict[int, str]] = {}
    for rec in records:
        if rec.rank < 1:
            raise DataError(f"year {rec.year}: rank must be positive, got {rec.rank}")
        person = normalize_person_id(rec.person_id)
        person = alias_map.get(person, person)
        if not person:
            raise DataError(f"year {rec.year} rank {rec.rank}: empty person id")
        year_map = by_year.setdefault(rec.year, {})
        if rec.rank in year_map:
            raise DataError(f"year {rec.year}: duplicate rank {rec.rank}")
        year_map[rec.rank] = person
    if not by_year:
        raise DataError("no rich-list records")
    lists: dict[int, tuple[str, ...]] = {}
    for year in sorted(by_year):
        year_map = by_year[year]
        n = len(year_map)
        missing = sorted(set(range(1, n + 1)) - set(year_map))
        if missing:
            raise DataError(f"year {year}: rank gaps at {missing}")
        ordered = tuple(year_map[r] for r in range(1, n + 1))
        if len(set(ordered)) != n:
            dupes = sorted({p for p in ordered if ordered.count(p) > 1})
            raise DataError(f"year {year}: duplicate person(s) {dupes}")
        lists[year] = ordered
    return lists


def build_full_set(lists: Mapping[int, Sequence[str]]) -> FullSet:
    """Union of all persons appearing in any annual list."""
    if not lists:
        raise DataError("cannot build a full set from no lists")
    persons: set[str] = set()
    for ids in lists.values():
        persons.update(ids)
    return FullSet(tuple(sorted(persons)))


def standardize(
    lists: Mapping[int, Sequence[str]],
    full_set: FullSet,
    mode: CompletionMode,
    seed: int | None = None,
) -> StandardizedPanel:
    """Complete every annual list over the full set.

    Present people keep their ranks 1..n. Absent people get ranks n+1..M
    as a seeded random permutation (random-unique; seeded per year, so a
    panel is reproducible given its seed) or all share the tied rank n+1
    (ex-aequo).
    """
    if mode is CompletionMode.RANDOM_UNIQUE and seed is None:
        raise DataError("random-unique completion requires a seed")
    all_persons = set(full_set.persons)
    years = tuple(sorted(lists))
    snapshots: dict[int, RankingSnapshot] = {}
    raw: dict[int, tuple[str, ...]] = {}
    for year in years:
        present = tuple(lists[year])
        extra = sorted(set(present) - all_persons)
        if extra:
            raise DataError(f"year {year}: persons outside the full set: {extra}")
        n = len(present)
        absent = sorted(all_persons - set(present))
        m = n + len(absent)
        ids = np.array(list(present) + absent)
        ranks = np.empty(m, dtype=int)
        tied = np.zeros(m, dtype=bool)
        ranks[:n] = np.arange(1, n + 1)
        if mode is CompletionMode.RANDOM_UNIQUE:
            rng = np.random.default_rng([seed, year])
            ranks[n:] = rng.permutation(np.arange(n + 1, m + 1))
        else:
            ranks[n:] = n + 1
            tied[n:] = len(absent) > 1
        order = np.argsort(ranks, kind="stable")
        snapshot = RankingSnapshot(year, ids[order], ranks[order], tied[order])
        snapshot.validate()
        snapshots[year] = snapshot
        raw[year] = present
    return StandardizedPanel(years, snapshots, mode, seed, raw, full_set)


@dataclass(frozen=True)
class PanelCorrelations:
    """Rank correlations of every year against a base year."""

    base_year: int
    years: tuple[int, ...]
    coefficients: dict[str, dict[int, float]]
    overlap: dict[int, float]
    mean_overlap: dict[int, float]
    top_n: int


def panel_correlations(panel: StandardizedPanel, base_year: int) -> PanelCorrelations:
    """Coefficients per target year for one standardized panel.

    Random-unique panels yield tau and rho; ex-aequo panels yield gamma
    (tied pairs contribute to neither concordance count). Top-n overlaps
    are computed on the raw, uncompleted lists: per target year against
    the base year, and as the lag-averaged mean series.
    """
    if base_year not in panel.years:
        raise DataError(f"base year {base_year} not in panel years {panel.years}")
    base = panel.snapshots[base_year]
    top_n = min(len(panel.raw_lists[y]) for y in panel.years)
    if panel.mode is CompletionMode.RANDOM_UNIQUE:
        coefficients: dict[str, dict[int, float]] = {"tau": {}, "rho": {}}
    else:
        coefficients = {"gamma": {}}
    overlap: dict[int, float] = {}
    raw_snapshots = []
    base_raw = RankingSnapshot.from_ordered_ids(base_year, panel.raw_lists[base_year])
    for year in panel.years:
        sample = RankPairSample.from_snapshots(base, panel.snapshots[year])
        if panel.mode is CompletionMode.RANDOM_UNIQUE:
            coefficients["tau"][year] = kendall_tau(sample)
            coefficients["rho"][year] = spearman_rho(sample)
        else:
            coefficients["gamma"][year] = goodman_kruskal_gamma(sample)
        raw_snap = RankingSnapshot.from_ordered_ids(year, panel.raw_lists[year])
        raw_snapshots.append(raw_snap)
        overlap[year] = overlap_ratio(base_raw, raw_snap, top_n)
    deltas = np.diff(np.asarray(panel.years))
    if raw_snapshots and deltas.size and not np.all(deltas == deltas[0]):
        raise DataError("mean overlap series requires uniformly spaced years")
    mean_overlap = mean_overlap_series(raw_snapshots, top_n) if len(raw_snapshots) > 1 else {0: 1.0}
    return PanelCorrelations(
        base_year, panel.years, coefficients, overlap, mean_overlap, top_n
    )


@dataclass(frozen=True)
class RichListReport:
    """Combined tau/rho/gamma/overlap report for one rich-list data set."""

    base_year: int
    years: tuple[int, ...]
    tau: dict[int, float]
    rho: dict[int, float]
    tau_sd: dict[int, float]
    rho_sd: dict[int, float]
    gamma: dict[int, float]
    overlap: dict[int, float]
    mean_overlap: dict[int, float]
    top_n: int
    completions: int


def richlist_report(
    lists: Mapping[int, Sequence[str]],
    base_year: int,
    seed: int,
    completions: int = 1,
) -> RichListReport:
    """Run both completion schemes and merge their coefficients.

    tau and rho can optionally be averaged over ``completions`` random
    completion seeds; the per-year sample standard deviation across
    completions is reported alongside (zeros for a single completion).
    """
    if completions < 1:
        raise DataError("completions must be positive")
    full = build_full_set(lists)
    tau_samples: dict[int, list[float]] = {}
    rho_samples: dict[int, list[float]] = {}
    first: PanelCorrelations | None = None
    for i in range(completions):
        panel = standardize(lists, full, CompletionMode.RANDOM_UNIQUE, seed=seed + i)
        corr = panel_correlations(panel, base_year)
        if first is None:
            first = corr
        for year in corr.years:
            tau_samples.setdefault(year, []).append(corr.coefficients["tau"][year])
            rho_samples.setdefault(year, []).append(corr.coefficients["rho"][year])
    ex_aequo = panel_correlations(
        standardize(lists, full, CompletionMode.EX_AEQUO), base_year
    )
    years = first.years

    def _mean(samples: dict[int, list[float]]) -> dict[int, float]:
        return {y: float(np.mean(v)) for y, v in samples.items()}

    def _sd(samples: dict[int, list[float]]) -> dict[int, float]:
        return {
            y: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for y, v in samples.items()
        }

    return RichListReport(
        base_year=base_year,
        years=years,
        tau=_mean(tau_samples),
        rho=_mean(rho_samples),
        tau_sd=_sd(tau_samples),
        rho_sd=_sd(rho_samples),
        gamma=dict(ex_aequo.coefficients["gamma"]),
        overlap=dict(first.overlap),
        mean_overlap=dict(first.mean_overlap),
        top_n=first.top_n,
        completions=completions,
    )
