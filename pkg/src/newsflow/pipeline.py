"""End-to-end report: classification, networks, influencers, dynamics.

Every stage reads and writes plain files under the output directory, so
stages can run one at a time; a stage whose inputs are missing runs its
upstream stages first.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import types
import typing
from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _kernels, ci, graph, granger, ingest, timeseries
from .ingest import CATEGORIES, Category, TweetRecord

logger = logging.getLogger(__name__)

# right and right_leaning outlets are reported as one group
REPORT_GROUPS: dict[str, tuple[Category, ...]] = {
    "fake": (Category.FAKE,),
    "extremely_biased": (Category.EXTREMELY_BIASED,),
    "right_right_leaning": (Category.RIGHT, Category.RIGHT_LEANING),
    "center": (Category.CENTER,),
    "left_leaning": (Category.LEFT_LEANING,),
    "left": (Category.LEFT,),
}
SUPPORTER_LABELS = ("pro_clinton", "pro_trump", "none")
SUPPORTER_GROUPS = ("pro_clinton", "pro_trump")


class ValidationError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException | str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


# -- configuration -------------------------------------------------------------

@dataclass
class PipelineConfig:
    records: str | None = None
    catalog: str | None = None
    clients: str | None = None  # None: bundled official-client list
    redirects: str | None = None
    outages: str | None = None
    supporters: str | None = None
    output_dir: str = "newsflow-out"
    ci_ell: int = 2
    ci_stop_fraction: float = 0.01
    top_n: int = 100
    bin_width: int = timeseries.DEFAULT_BIN
    day_start_hour: float = 4.0
    tz_offset_hours: float = -5.0
    stl_period: int = 96
    stl_seasonal: int = 95
    stl_inner: int = 2
    stl_outer: int = 1
    granger_lag: int = 37
    granger_criterion: str | None = None  # AIC, BIC or HQC replaces the fixed lag
    granger_max_lag: int = 48
    p0: float = 1e-7
    r0: float = 0.5
    het_samples: int = 1000
    het_sample_size: int = 200_000
    seed: int = 0

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> PipelineConfig:
        hints = typing.get_type_hints(cls)
        kwargs = {}
        for key, raw in values.items():
            if key not in hints:
                raise ValidationError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, hints[key], raw)
        return cls(**kwargs)

    def updated(self, values: Mapping[str, object]) -> PipelineConfig:
        merged = dataclasses.asdict(self)
        merged.update(values)
        return PipelineConfig.from_mapping(merged)

    def to_lines(self) -> list[str]:
        return [f"{k} = {'' if v is None else v}" for k, v in dataclasses.asdict(self).items()]

    def validate(self, need: Iterable[str] = ("records", "catalog")) -> None:
        for key in need:
            if getattr(self, key) is None:
                raise ValidationError(f"{key} path is required")
        for key in ("records", "catalog", "clients", "redirects", "outages", "supporters"):
            path = getattr(self, key)
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"{key} file not found: {path}")
        if self.ci_ell < 1:
            raise ValidationError("ci_ell must be >= 1")
        if not 0 < self.ci_stop_fraction < 1:
            raise ValidationError("ci_stop_fraction must lie in (0, 1)")
        if self.top_n < 1:
            raise ValidationError("top_n must be >= 1")
        if self.bin_width <= 0 or timeseries.DAY % self.bin_width:
            raise ValidationError("bin_width must be a positive divisor of one day")
        if self.stl_period < 2 or self.stl_inner < 1 or self.stl_outer < 1:
            raise ValidationError("invalid STL parameters")
        if self.granger_lag < 1 or self.granger_max_lag < 1:
            raise ValidationError("Granger lags must be >= 1")
        if self.granger_criterion is not None and self.granger_criterion.upper() not in granger.CRITERIA:
            raise ValidationError(f"granger_criterion must be one of {granger.CRITERIA}")
        if not 0 < self.p0 < 1:
            raise ValidationError("p0 must lie in (0, 1)")
        if not -1 <= self.r0 <= 1:
            raise ValidationError("r0 must lie in [-1, 1]")
        if self.het_samples < 1 or self.het_sample_size < 1:
            raise ValidationError("heterogeneity sample counts must be >= 1")


def _coerce(key: str, hint, raw):
    if isinstance(hint, types.UnionType) or typing.get_origin(hint) is typing.Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
            return None
        hint = args[0]
    if raw is None:
        raise ValidationError(f"{key} may not be empty")
    try:
        if hint is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        if hint is float:
            return float(raw)
        return str(raw).strip()
    except (TypeError, ValueError):
        raise ValidationError(f"{key}: cannot read {raw!r} as {hint.__name__}") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def load_supporters(path: str | Path) -> dict[int, str]:
    labels: dict[int, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"user_id", "label"} <= set(reader.fieldnames):
            raise ValidationError(f"{path}: expected header user_id,label")
        for row in reader:
            try:
                uid = int(row["user_id"])
            except ValueError:
                raise ValidationError(f"{path}: bad user id {row['user_id']!r}") from None
            label = row["label"].strip()
            if label not in SUPPORTER_LABELS:
                raise ValidationError(f"{path}: unknown label {label!r}")
            if labels.get(uid, label) != label:
                raise ValidationError(f"{path}: user {uid} has two labels")
            labels[uid] = label
    return labels


# -- retweet delays --------------------------------------------------------------

DELAY_EDGES = (0, 60, 300, 900, 1800, 3600, 7200, 14_400, 28_800, 57_600, 86_400, 172_800, 604_800)


@dataclass(frozen=True)
class DelayStats:
    n: int
    q1: float
    median: float
    q3: float
    edges: tuple[float, ...]
    counts: tuple[int, ...]  # last bin is open-ended


def retweet_delay_stats(records: Iterable[TweetRecord], edges: Iterable[float] = DELAY_EDGES) -> DelayStats:
    """Quartiles and histogram of retweet delays in seconds.

    Retweets without an original timestamp, or with a negative delay, are
    skipped.
    """
    delays = np.array([
        r.timestamp - r.retweeted_timestamp for r in records
        if r.retweeted_author_id is not None and r.retweeted_timestamp is not None
        and r.timestamp >= r.retweeted_timestamp
    ], dtype=np.float64)
    if delays.size == 0:
        raise ValueError("no retweet with a known original timestamp")
    edges = tuple(float(e) for e in edges)
    idx = np.searchsorted(np.asarray(edges), delays, side="right") - 1
    counts = np.bincount(idx, minlength=len(edges))
    q1, med, q3 = np.quantile(delays, [0.25, 0.5, 0.75])
    return DelayStats(int(delays.size), float(q1), float(med), float(q3), edges, tuple(int(c) for c in counts))


def fraction_within(records: Iterable[TweetRecord], seconds: float) -> float:
    d = [r.timestamp - r.retweeted_timestamp for r in records
         if r.retweeted_author_id is not None and r.retweeted_timestamp is not None
         and r.timestamp >= r.retweeted_timestamp]
    return sum(x <= seconds for x in d) / len(d) if d else math.nan


# -- stages -------------------------------------------------------------------------

STAGES = ("classify", "tally", "graph", "rank", "series", "correlate", "granger", "delays")


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.completed: list[str] = []
        self._records: list[TweetRecord] | None = None
        self._catalog = None

    # helpers
    def path(self, *parts: str) -> Path:
        p = self.out.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def catalog(self) -> ingest.MediaCatalog:
        if self._catalog is None:
            self._catalog = ingest.load_catalog(self.config.catalog)
        return self._catalog

    def registry(self) -> ingest.ClientRegistry:
        if self.config.clients is None:
            return ingest.default_client_registry()
        return ingest.load_client_registry(self.config.clients)

    def records(self) -> list[TweetRecord]:
        if self._records is None:
            path = self.out / "classified.jsonl"
            if not path.is_file():
                self.run_stage("classify")
            else:
                self._records = ingest.read_records(path).records
        return self._records

    def run_stage(self, name: str) -> None:
        fn: Callable[[], None] = getattr(self, f"stage_{name}")
        logger.info("running stage %s", name)
        try:
            fn()
        except StageError:
            raise
        except (ValidationError, KeyboardInterrupt):
            raise
        except Exception as exc:  # noqa: BLE001 - reported with the stage name
            raise StageError(name, exc) from exc
        if name not in self.completed:
            self.completed.append(name)

    # stages
    def stage_classify(self) -> None:
        parsed = ingest.read_records(self.config.records)
        redirects = (ingest.load_redirect_map(self.config.redirects)
                     if self.config.redirects else ingest.RedirectMap({}))
        unresolved: Counter = Counter()
        resolved = []
        for rec in parsed.records:
            hosts = []
            for url in rec.raw_urls:
                h = ingest.resolve_hostname(url, redirects)
                if isinstance(h, ingest.Unresolved):
                    unresolved[(h.url, h.reason)] += 1
                else:
                    hosts.append(h)
            resolved.append(dataclasses.replace(rec, hostnames=tuple(hosts)))
        ingest.write_records(resolved, self.path("classified.jsonl"))
        with open(self.path("unresolved_urls.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["url", "reason", "count"])
            for (url, reason), n in sorted(unresolved.items()):
                w.writerow([url, reason, n])
        with open(self.path("parse_errors.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["line", "message"])
            w.writerows(parsed.errors)
        self._records = resolved

    def stage_tally(self) -> None:
        tally = ingest.tally_categories(self.records(), self.catalog(), self.registry())
        ingest.write_tally(tally, self.path("tally.csv"))

    def graphs(self) -> dict[str, graph.DiffusionGraph]:
        out = {}
        for group in REPORT_GROUPS:
            p = self.out / "graphs" / f"{group}.edges.csv"
            if not p.is_file():
                self.run_stage("graph")
            out[group] = graph.read_edge_list(p)
        return out

    def stage_graph(self) -> None:
        recs, cat = self.records(), self.catalog()
        rows = []
        for k, (group, cats) in enumerate(REPORT_GROUPS.items()):
            g = graph.build_retweet_graph(recs, cats, cat)
            graph.write_edge_list(g, self.path("graphs", f"{group}.edges.csv"))
            if g.n_edges:
                stats = graph.degree_stats(
                    g, self.config.het_samples, self.config.het_sample_size, self.config.seed + k
                )
                rows.append(graph.stats_row(group, stats))
            else:
                rows.append([group, g.n_nodes, 0] + [""] * (len(graph.STATS_COLUMNS) - 3))
        with open(self.path("graph_stats.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(graph.STATS_COLUMNS)
            w.writerows(rows)

    def rankings(self) -> dict[str, list[int]]:
        out = {}
        for group in REPORT_GROUPS:
            p = self.out / "rankings" / f"{group}.csv"
            if not p.is_file():
                self.run_stage("rank")
            out[group] = ci.read_ranking(p)[: self.config.top_n]
        return out

    def stage_rank(self) -> None:
        params = ci.CiParams(ell=self.config.ci_ell, stop_fraction=self.config.ci_stop_fraction,
                             extend_to=self.config.top_n)
        tops = {}
        for group, g in self.graphs().items():
            ranking = ci.rank_influencers(g, params)
            top = ci.CiRanking(ranking.entries[: self.config.top_n], ranking.gc_trajectory,
                               ranking.params, ranking.n_nodes)
            ci.write_ranking(top, self.path("rankings", f"{group}.csv"))
            meta = ci.ranking_metadata(ranking)
            meta["top_n"] = self.config.top_n
            self.path("rankings", f"{group}.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            tops[group] = set(top.user_ids)
        with open(self.path("influencer_overlap.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["group"] + list(REPORT_GROUPS))
            for a in REPORT_GROUPS:
                w.writerow([a] + [len(tops[a] & tops[b]) for b in REPORT_GROUPS])

    def _series_labels(self) -> list[str]:
        return (list(REPORT_GROUPS) + [f"influencers_{g}" for g in REPORT_GROUPS]
                + list(SUPPORTER_GROUPS) + ["supporters_total"])

    def stage_series(self) -> None:
        if self.config.supporters is None:
            raise ValidationError("supporters path is required for the series stage")
        recs, cat, reg = self.records(), self.catalog(), self.registry()
        supporters = load_supporters(self.config.supporters)
        outages = timeseries.read_outages(self.config.outages) if self.config.outages else []
        tops = {g: set(ids) for g, ids in self.rankings().items()}
        c = self.config
        if not recs:
            raise timeseries.SeriesError("no records")
        ts = np.array([r.timestamp for r in recs])
        d0 = int(timeseries.day_index(ts.min(), c.day_start_hour, c.tz_offset_hours))
        d1 = int(timeseries.day_index(ts.max(), c.day_start_hour, c.tz_offset_hours)) + 1
        t0 = timeseries.day_boundary(d0, c.day_start_hour, c.tz_offset_hours)
        t1 = timeseries.day_boundary(d1, c.day_start_hour, c.tz_offset_hours)

        group_of = {}
        for group, cats in REPORT_GROUPS.items():
            for x in cats:
                group_of[x] = group

        def groups(rec):
            return {group_of[x] for x in ingest.classify_record(rec, cat)}

        selectors: dict[str, Callable[[TweetRecord], bool]] = {}
        for group in REPORT_GROUPS:
            selectors[group] = lambda r, g=group: g in groups(r)
            selectors[f"influencers_{group}"] = lambda r, g=group: r.author_id in tops[g] and g in groups(r)
        for label in SUPPORTER_GROUPS:
            # automated clients are excluded from supporter activity
            selectors[label] = lambda r, s=label: (supporters.get(r.author_id) == s
                                                   and ingest.is_official_client(r.client_name, reg))
        selectors["supporters_total"] = lambda r: (supporters.get(r.author_id) in SUPPORTER_GROUPS
                                                   and ingest.is_official_client(r.client_name, reg))

        stl_params = timeseries.StlParams(period=c.stl_period, seasonal=c.stl_seasonal,
                                          inner_iter=c.stl_inner, outer_iter=c.stl_outer)
        remainders = {}
        bins = None
        adf_rows = []
        notes: list[str] = []
        for label in self._series_labels():
            raw = timeseries.bin_activity(recs, selectors[label], t0, t1, c.bin_width, label, outages)
            kept = timeseries.remove_incomplete_days(raw, c.day_start_hour, c.tz_offset_hours)
            meta = {
                "label": label, "bin_width": c.bin_width, "t0": t0,
                "day_start_hour": c.day_start_hour, "tz_offset_hours": c.tz_offset_hours,
                "days_removed": (len(raw) - len(kept)) // (timeseries.DAY // c.bin_width),
            }
            timeseries.write_series(kept, self.path("series", f"{label}.csv"), meta)
            dec = timeseries.stl_decompose(kept.counts.astype(np.float64), stl_params)
            notes = dec.notes
            remainders[label] = dec.remainder
            bins = kept.bin_starts
            if np.ptp(dec.remainder) > 0:
                res = timeseries.adf_test(dec.remainder)
                adf_rows.append([label, repr(res.statistic), repr(res.p_value), res.lags, res.nobs])
            else:
                adf_rows.append([label, "", "", "", ""])
        with open(self.path("remainders.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            labels = list(remainders)
            w.writerow(["bin_start_utc"] + labels)
            for i, b in enumerate(bins.tolist()):
                w.writerow([repr(b)] + [repr(float(remainders[k][i])) for k in labels])
        with open(self.path("adf.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["series", "statistic", "p_value", "lags", "nobs"])
            w.writerows(adf_rows)
        resolved, _ = stl_params.resolved()
        self.path("stl.json").write_text(json.dumps({
            "params": dataclasses.asdict(resolved), "notes": notes, "robust": resolved.outer_iter > 1,
        }, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def remainders(self) -> dict[str, np.ndarray]:
        p = self.out / "remainders.csv"
        if not p.is_file():
            self.run_stage("series")
        with open(p, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(x) for x in row[1:]] for row in reader], dtype=np.float64)
        return {label: data[:, k] for k, label in enumerate(header[1:])}

    def stage_correlate(self) -> None:
        rem = self.remainders()
        labels = list(REPORT_GROUPS) + list(SUPPORTER_GROUPS) + ["supporters_total"]
        matrix = timeseries.cross_correlation({k: rem[k] for k in labels})
        # the summed supporter series overlaps both supporter groups, so it
        # stays in the matrix but out of the threshold graph
        sub = timeseries.cross_correlation({k: rem[k] for k in labels[:-1]})
        g = timeseries.threshold_graph(sub, self.config.r0)
        timeseries.write_matrix(matrix, self.path("correlation.csv"))
        timeseries.write_graph_dot(g, self.path("correlation.dot"))
        timeseries.write_graph_edges(g, self.path("correlation_edges.csv"))
        with open(self.path("correlation_components.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["component", "series"])
            for k, comp in enumerate(g.components()):
                w.writerows([[k, s] for s in comp])

    def stage_granger(self) -> None:
        rem = self.remainders()
        c = self.config
        pairs = []
        for group in REPORT_GROUPS:
            inf = f"influencers_{group}"
            for sup in SUPPORTER_GROUPS:
                pairs.append((inf, sup))
                pairs.append((sup, inf))
        T = len(next(iter(rem.values())))
        lag_rows = []
        selection_ok = c.granger_max_lag < T / 4
        results = []
        for cause, effect in pairs:
            lag = c.granger_lag
            if selection_ok:
                lags = {crit: granger.select_lag(rem[effect], rem[cause], crit, c.granger_max_lag)
                        for crit in granger.CRITERIA}
                lag_rows.append([cause, effect] + [lags[k] for k in granger.CRITERIA])
                if c.granger_criterion:
                    lag = lags[c.granger_criterion.upper()]
            elif c.granger_criterion:
                raise granger.DegenerateRegressionError(
                    f"granger_max_lag={c.granger_max_lag} needs more than {4 * c.granger_max_lag} bins, have {T}")
            results.append(granger.granger_test(rem[effect], rem[cause], lag, effect=effect, cause=cause))
        granger.write_results(results, self.path("granger.csv"))
        with open(self.path("lag_selection.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cause", "effect"] + list(granger.CRITERIA))
            w.writerows(lag_rows)
        p = {(r.cause, r.effect): r.p_value for r in results}
        with open(self.path("granger_a.csv"), "w", newline="", encoding="utf-8") as fh:
            # influencers -> supporters
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["supporters"] + list(REPORT_GROUPS))
            for sup in SUPPORTER_GROUPS:
                w.writerow([sup] + [repr(p[(f"influencers_{g}", sup)]) for g in REPORT_GROUPS])
        with open(self.path("granger_b.csv"), "w", newline="", encoding="utf-8") as fh:
            # supporters -> influencers
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["influencers"] + list(SUPPORTER_GROUPS))
            for g in REPORT_GROUPS:
                w.writerow([g] + [repr(p[(sup, f"influencers_{g}")]) for sup in SUPPORTER_GROUPS])
        granger.write_causality_dot(granger.causality_graph(results, c.p0), self.path("causality.dot"))

    def stage_delays(self) -> None:
        recs = self.records()
        stats = retweet_delay_stats(recs)
        lag_seconds = self.config.granger_lag * self.config.bin_width
        with open(self.path("retweet_delays.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lo_seconds", "hi_seconds", "count"])
            hi = list(stats.edges[1:]) + [""]
            for lo, h, n in zip(stats.edges, hi, stats.counts):
                w.writerow([repr(lo), "" if h == "" else repr(h), n])
        with open(self.path("retweet_delay_quartiles.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "q1_seconds", "median_seconds", "q3_seconds", "within_granger_lag"])
            w.writerow([stats.n, repr(stats.q1), repr(stats.median), repr(stats.q3),
                        repr(fraction_within(recs, lag_seconds))])

    # manifest
    def write_manifest(self, failed: str | None = None, error: str | None = None) -> Path:
        entries = []
        for p in sorted(self.out.rglob("*")):
            if p.is_file() and p.name != "MANIFEST":
                digest = hashlib.sha256(p.read_bytes()).hexdigest()
                entries.append(f"{digest}  {p.relative_to(self.out).as_posix()}")
        status = "complete" if failed is None else "incomplete"
        head = [f"# status: {status}", f"# stages: {','.join(self.completed)}"]
        if failed is not None:
            head.append(f"# failed_stage: {failed}")
            head.append(f"# error: {error}")
        path = self.out / "MANIFEST"
        path.write_text("\n".join(head + entries) + "\n", encoding="utf-8")
        return path


def _run_metadata(config: PipelineConfig) -> dict:
    cfg = dataclasses.asdict(config)
    cfg.pop("output_dir")
    return {"config": cfg, "backend": _kernels.BACKEND, "tie_break": ci.TIE_BREAK}


def run_stages(config: PipelineConfig, stages: Iterable[str], need=("records", "catalog")) -> Pipeline:
    """Validate ``config`` and run ``stages`` in order; always writes a MANIFEST."""
    config.validate(need)
    pipe = Pipeline(config)
    pipe.out.mkdir(parents=True, exist_ok=True)
    try:
        for stage in stages:
            pipe.run_stage(stage)
    except StageError as exc:
        pipe.write_manifest(exc.stage, str(exc.cause))
        raise
    except ValidationError as exc:
        pipe.write_manifest("validation", str(exc))
        raise
    pipe.write_manifest()
    return pipe


def run_pipeline(config: PipelineConfig) -> Pipeline:
    """Full report: every stage from fresh inputs."""
    config.validate(("records", "catalog", "supporters"))
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.json").write_text(json.dumps(_run_metadata(config), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
    for stale in ("classified.jsonl", "remainders.csv"):
        (out / stale).unlink(missing_ok=True)
    for sub in ("graphs", "rankings"):
        for p in (out / sub).glob("*"):
            p.unlink()
    return run_stages(config, STAGES, ("records", "catalog", "supporters"))
