"""Synthetic tweet corpus with planted activity clusters and causal links.

Ground truth planted by :func:`generate`:

* two latent activity factors; fake, extremely_biased, right and
  right_leaning outlets follow the first, center, left_leaning and left the
  second, so media activity splits into two correlated clusters;
* pro-Trump supporter activity leads the first factor by one bin, and the
  second factor leads pro-Clinton supporter activity by one bin;
* every category has a small set of heavily retweeted influencer accounts,
  and a few active regular users are retweeted in turn;
* retweet delays are log-normal with median 1 h 57 min.

The output directory receives ``records.jsonl``, ``catalog.csv``,
``clients.txt``, ``redirects.csv``, ``outages.csv``, ``supporters.csv`` and
``truth.json``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .ingest import CATEGORIES, Category, TweetRecord, default_catalog, default_client_registry, write_records
from .timeseries import DAY, day_boundary

CLUSTER_1 = (Category.FAKE, Category.EXTREMELY_BIASED, Category.RIGHT, Category.RIGHT_LEANING)
CLUSTER_2 = (Category.CENTER, Category.LEFT_LEANING, Category.LEFT)

DELAY_MEDIAN = 7020.0  # 1 h 57 min
# quartiles at 20 min and 9 h 11 min give sigma = ln(33060 / 1200) / (2 * 0.6745)
DELAY_SIGMA = 2.457

NON_OFFICIAL_CLIENTS = ("Sprinklr", "dlvr.it", "IFTTT", "Hootsuite", "SocialFlow")
OFFICIAL_CLIENTS = ("Twitter for iPhone", "Twitter Web Client", "Twitter for Android", "TweetDeck")

# 2016-06-01, the first local day starts at 04:00 UTC-5
_START_DAY = 16_953


@dataclass(frozen=True)
class FixtureSpec:
    n_records: int = 5000
    n_days: int = 6
    seed: int = 0
    influencers_per_category: int = 25
    n_regular_users: int = 1500
    n_amplifiers: int = 40
    n_pro_clinton: int = 300
    n_pro_trump: int = 250
    factor_loading: float = 1.0
    coupling: float = 0.8  # lagged effect of the driving process
    supporter_share: float = 0.35
    outage_day: int | None = 2
    bin_width: int = 900


def _ar1(rng, n: int, phi: float, drive: np.ndarray | None = None, coupling: float = 0.0) -> np.ndarray:
    """Unit-variance AR(1), optionally pushed by the previous value of ``drive``."""
    eps = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = eps[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + eps[t]
        if drive is not None:
            x[t] += coupling * drive[t - 1]
    return (x - x.mean()) / x.std()


def _zipf_weights(n: int, s: float = 1.1) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def generate(out_dir: str | Path, spec: FixtureSpec = FixtureSpec()) -> dict:
    """Write a fixture bundle to ``out_dir`` and return its ground truth."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    catalog = default_catalog()
    per_day = DAY // spec.bin_width
    n_bins = spec.n_days * per_day
    t0 = day_boundary(_START_DAY)

    # latent processes
    trump = _ar1(rng, n_bins, 0.6)
    f1 = _ar1(rng, n_bins, 0.5, trump, spec.coupling)
    f2 = _ar1(rng, n_bins, 0.6)
    clinton = _ar1(rng, n_bins, 0.5, f2, spec.coupling)
    phase = 2 * np.pi * (np.arange(n_bins) % per_day) / per_day
    circadian = 1.0 + 0.6 * np.sin(phase - 2.0)

    base = {
        Category.FAKE: 1.0, Category.EXTREMELY_BIASED: 0.9, Category.RIGHT: 0.7,
        Category.RIGHT_LEANING: 0.35, Category.CENTER: 1.2, Category.LEFT_LEANING: 0.8,
        Category.LEFT: 0.5,
    }
    streams: list[tuple[str, np.ndarray]] = []
    lam = spec.factor_loading
    for cat in CATEGORIES:
        factor = f1 if cat in CLUSTER_1 else f2
        streams.append((cat.value, base[cat] * circadian * np.exp(lam * factor)))
    media_total = sum(s.sum() for _, s in streams)
    sup = spec.supporter_share / (1 - spec.supporter_share) * media_total
    c_rate = circadian * np.exp(lam * clinton)
    t_rate = circadian * np.exp(lam * trump)
    streams.append(("pro_clinton", 0.6 * sup * c_rate / c_rate.sum()))
    streams.append(("pro_trump", 0.4 * sup * t_rate / t_rate.sum()))

    rates = np.vstack([s for _, s in streams])
    outages: list[tuple[float, float]] = []
    if spec.outage_day is not None and 0 <= spec.outage_day < spec.n_days:
        # one hour missing at 13:00 local time
        lo = t0 + spec.outage_day * DAY + 9 * 3600
        outages.append((lo, lo + 3600))
        b = int((lo - t0) // spec.bin_width)
        rates[:, b:b + 4] = 0.0
    cells = rng.multinomial(spec.n_records - 2, (rates / rates.sum()).ravel()).reshape(rates.shape)

    # users
    next_id = 1000
    influencers: dict[Category, np.ndarray] = {}
    for cat in CATEGORIES:
        influencers[cat] = np.arange(next_id, next_id + spec.influencers_per_category)
        next_id += spec.influencers_per_category
    regular = np.arange(next_id, next_id + spec.n_regular_users)
    next_id += spec.n_regular_users
    pro_clinton = np.arange(next_id, next_id + spec.n_pro_clinton)
    next_id += spec.n_pro_clinton
    pro_trump = np.arange(next_id, next_id + spec.n_pro_trump)
    all_users = np.arange(1000, next_id + spec.n_pro_trump)

    clients = {}
    for u in all_users.tolist():
        if rng.random() < 0.12:
            clients[u] = NON_OFFICIAL_CLIENTS[rng.integers(len(NON_OFFICIAL_CLIENTS))]
        else:
            clients[u] = OFFICIAL_CLIENTS[rng.integers(len(OFFICIAL_CLIENTS))]

    hosts = {cat: sorted(catalog.hostnames(cat)) for cat in CATEGORIES}
    inf_w = _zipf_weights(spec.influencers_per_category)
    act_w = {k: _zipf_weights(len(v), 0.8) for k, v in
             (("regular", regular), ("pro_clinton", pro_clinton), ("pro_trump", pro_trump))}

    redirects: dict[str, str] = {}
    n_short = 0

    def url_for(cat: Category) -> str:
        nonlocal n_short
        host = hosts[cat][rng.integers(len(hosts[cat]))]
        path = f"/story/{rng.integers(1_000_000)}"
        www = "www." if rng.random() < 0.3 else ""
        final = f"https://{www}{host}{path}"
        if rng.random() < 0.15:
            n_short += 1
            short = f"http://bit.ly/n{n_short}"
            if rng.random() < 0.3:
                mid = f"http://ow.ly/n{n_short}"
                redirects[short] = mid
                redirects[mid] = final
            else:
                redirects[short] = final
            return short
        return final

    def urls_for(cat: Category) -> tuple[str, ...]:
        urls = [url_for(cat)]
        r = rng.random()
        if r < 0.04:
            urls.append(url_for(CATEGORIES[rng.integers(len(CATEGORIES))]))
        elif r < 0.06:
            urls.append(f"https://blog{rng.integers(50)}.example.org/p")
        return tuple(urls)

    records: list[TweetRecord] = []
    tweet_id = 10**15
    for s, (name, _) in enumerate(streams):
        if name == "pro_clinton":
            authors, cats = pro_clinton, CLUSTER_2
        elif name == "pro_trump":
            authors, cats = pro_trump, CLUSTER_1
        else:
            authors, cats = regular, (Category(name),)
        aw = act_w["regular" if authors is regular else name]
        for b in np.flatnonzero(cells[s]).tolist():
            for _ in range(int(cells[s, b])):
                tweet_id += 1 + int(rng.integers(1000))
                t = float(t0 + b * spec.bin_width + rng.integers(spec.bin_width))
                cat = cats[rng.integers(len(cats))]
                if authors is regular and rng.random() < 0.3:
                    # original post by one of the category's influencers
                    author = int(influencers[cat][rng.choice(len(inf_w), p=inf_w)])
                    records.append(TweetRecord(tweet_id, author, None, t, clients[author], urls_for(cat)))
                    continue
                author = int(authors[rng.choice(len(aw), p=aw)])
                if rng.random() < 0.2:
                    # amplifiers: active regular users who get retweeted in turn
                    source = int(regular[rng.integers(spec.n_amplifiers)])
                else:
                    source = int(influencers[cat][rng.choice(len(inf_w), p=inf_w)])
                if rng.random() < 0.003:
                    source = author  # self-retweet, dropped at graph build
                delay = float(np.round(DELAY_MEDIAN * np.exp(DELAY_SIGMA * rng.standard_normal())))
                records.append(TweetRecord(
                    tweet_id, author, source, t, clients[author], urls_for(cat), (), t - delay,
                ))

    # a few unresolvable links: a redirect cycle and an unmapped shortener
    redirects["http://bit.ly/loopA"] = "http://bit.ly/loopB"
    redirects["http://bit.ly/loopB"] = "http://bit.ly/loopA"
    for k, url in enumerate(("http://bit.ly/loopA", "http://goo.gl/unknown")):
        tweet_id += 1
        author = int(regular[k])
        records.append(TweetRecord(tweet_id, author, None, float(t0 + 600 * (k + 1)), clients[author], (url,)))
    records.sort(key=lambda r: (r.timestamp, r.tweet_id))

    write_records(records, out / "records.jsonl")
    with open(out / "catalog.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hostname", "category", "provenance"])
        for host in sorted(catalog.entries):
            w.writerow([host, catalog.entries[host].value, catalog.provenance.get(host, "")])
    (out / "clients.txt").write_text("\n".join(sorted(default_client_registry().official_names)) + "\n", encoding="utf-8")
    with open(out / "redirects.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from_url", "to_url"])
        w.writerows(sorted(redirects.items()))
    with open(out / "outages.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start_utc", "end_utc"])
        w.writerows([[repr(lo), repr(hi)] for lo, hi in outages])
    with open(out / "supporters.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "label"])
        for label, ids in (("pro_clinton", pro_clinton), ("pro_trump", pro_trump)):
            w.writerows([[u, label] for u in ids.tolist()])

    truth = {
        "spec": asdict(spec),
        "t0": t0,
        "t1": t0 + spec.n_days * DAY,
        "n_records": len(records),
        "clusters": [[c.value for c in CLUSTER_1], [c.value for c in CLUSTER_2]],
        "granger_edges": [["pro_trump", "cluster_1_influencers"], ["cluster_2_influencers", "pro_clinton"]],
        "influencers": {cat.value: influencers[cat].tolist() for cat in CATEGORIES},
        "outages": outages,
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return truth
