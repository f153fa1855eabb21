"""Record parsing, URL resolution, media classification and category tallies.

Record files are JSON Lines, one object per line::

    {"tweet_id": 101, "author_id": 7, "retweeted_author_id": 3,
     "timestamp_utc": 1464771600, "client_name": "Twitter for iPhone",
     "urls": ["http://bit.ly/abc"], "retweeted_timestamp_utc": 1464770000}

``retweeted_author_id`` is ``null`` for original posts. Two optional keys are
understood: ``retweeted_timestamp_utc`` (time of the original post, used for
retweet delays) and ``hostnames`` (already-resolved hostnames, written by
``newsflow classify``).
"""

from __future__ import annotations

import csv
import enum
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple
from urllib.parse import urlsplit

logger = logging.getLogger(__name__)

MAX_REDIRECT_DEPTH = 10
_UINT64_MAX = 2**64 - 1


class IngestError(Exception):
    """Fatal ingestion failure (unreadable stream, invalid catalog...)."""


class Category(str, enum.Enum):
    FAKE = "fake"
    EXTREMELY_BIASED = "extremely_biased"
    RIGHT = "right"
    RIGHT_LEANING = "right_leaning"
    CENTER = "center"
    LEFT_LEANING = "left_leaning"
    LEFT = "left"

    def __str__(self) -> str:
        return self.value


CATEGORIES: tuple[Category, ...] = tuple(Category)


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: int
    author_id: int
    retweeted_author_id: int | None
    timestamp: float
    client_name: str
    raw_urls: tuple[str, ...] = ()
    hostnames: tuple[str, ...] = ()
    retweeted_timestamp: float | None = None

    @property
    def is_retweet(self) -> bool:
        return self.retweeted_author_id is not None

    def to_json(self) -> str:
        obj = {
            "tweet_id": self.tweet_id,
            "author_id": self.author_id,
            "retweeted_author_id": self.retweeted_author_id,
            "timestamp_utc": self.timestamp,
            "client_name": self.client_name,
            "urls": list(self.raw_urls),
        }
        if self.retweeted_timestamp is not None:
            obj["retweeted_timestamp_utc"] = self.retweeted_timestamp
        if self.hostnames:
            obj["hostnames"] = list(self.hostnames)
        return json.dumps(obj, sort_keys=True)


class LineError(NamedTuple):
    line_no: int
    message: str


@dataclass
class ParseResult:
    records: list[TweetRecord] = field(default_factory=list)
    errors: list[LineError] = field(default_factory=list)

    def __iter__(self) -> Iterator[TweetRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _int_field(obj: Mapping, key: str, *, nullable: bool = False) -> int | None:
    value = obj.get(key)
    if value is None:
        if nullable:
            return None
        raise ValueError(f"missing {key!r}")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key!r} must be an integer")
    if not 0 <= value <= _UINT64_MAX:
        raise ValueError(f"{key!r} out of 64-bit range")
    return value


def _time_field(obj: Mapping, key: str, *, nullable: bool = False) -> float | None:
    value = obj.get(key)
    if value is None:
        if nullable:
            return None
        raise ValueError(f"missing {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key!r} must be a number")
    return value


def _str_list(obj: Mapping, key: str) -> tuple[str, ...]:
    value = obj.get(key, [])
    if not isinstance(value, list) or not all(isinstance(u, str) for u in value):
        raise ValueError(f"{key!r} must be a list of strings")
    return tuple(value)


def record_from_obj(obj: Mapping) -> TweetRecord:
    if not isinstance(obj, dict):
        raise ValueError("record must be a JSON object")
    client = obj.get("client_name")
    if not isinstance(client, str):
        raise ValueError("'client_name' must be a string")
    urls = _str_list(obj, "urls")
    hostnames = _str_list(obj, "hostnames")
    if len(hostnames) > len(urls):
        raise ValueError("more hostnames than urls")
    return TweetRecord(
        tweet_id=_int_field(obj, "tweet_id"),
        author_id=_int_field(obj, "author_id"),
        retweeted_author_id=_int_field(obj, "retweeted_author_id", nullable=True),
        timestamp=_time_field(obj, "timestamp_utc"),
        client_name=client,
        raw_urls=urls,
        hostnames=hostnames,
        retweeted_timestamp=_time_field(obj, "retweeted_timestamp_utc", nullable=True),
    )


def parse_tweet_stream(lines: Iterable[str]) -> ParseResult:
    """Parse JSON-Lines records.

    Malformed lines and duplicate ``tweet_id`` values are skipped and
    reported with their 1-based line number; blank lines are ignored. An
    unreadable stream raises :class:`IngestError`.
    """
    result = ParseResult()
    seen: set[int] = set()
    try:
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                rec = record_from_obj(json.loads(line))
            except (ValueError, TypeError) as exc:
                result.errors.append(LineError(line_no, str(exc)))
                continue
            if rec.tweet_id in seen:
                result.errors.append(LineError(line_no, f"duplicate tweet_id {rec.tweet_id}"))
                continue
            seen.add(rec.tweet_id)
            result.records.append(rec)
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"unreadable record stream: {exc}") from exc
    if result.errors:
        logger.warning("skipped %d malformed record lines", len(result.errors))
    return result


def read_records(path: str | Path) -> ParseResult:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_tweet_stream(fh)
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def write_records(records: Iterable[TweetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


# -- URL resolution ----------------------------------------------------------

DEFAULT_SHORTENERS = frozenset(
    {
        "bit.ly", "dlvr.it", "ift.tt", "ow.ly", "goo.gl", "tinyurl.com", "buff.ly",
        "t.co", "fb.me", "trib.al", "cnn.it", "nyti.ms", "hill.cm", "politi.co",
    }
)


def normalize_hostname(host: str) -> str:
    """Lower-case and strip exactly one leading ``www.`` label."""
    host = host.strip().lower().rstrip(".")
    if host.startswith("www."):
        host = host[4:]
    return host


def _split(url: str):
    url = url.strip()
    if "://" not in url:
        url = "http://" + url
    return urlsplit(url)


def url_key(url: str) -> str:
    """Scheme-less lookup key: normalized host plus path and query."""
    parts = _split(url)
    key = normalize_hostname(parts.hostname or "") + parts.path
    if parts.query:
        key += "?" + parts.query
    return key


def hostname_of(url: str) -> str:
    try:
        return normalize_hostname(_split(url).hostname or "")
    except ValueError:
        return ""


@dataclass(frozen=True)
class RedirectMap:
    mapping: Mapping[str, str] = field(default_factory=dict)
    shorteners: frozenset[str] = DEFAULT_SHORTENERS

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], shorteners=DEFAULT_SHORTENERS) -> RedirectMap:
        return cls({url_key(a): b for a, b in pairs}, frozenset(shorteners))

    def __len__(self) -> int:
        return len(self.mapping)


def load_redirect_map(path: str | Path) -> RedirectMap:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"from_url", "to_url"} <= set(reader.fieldnames):
            raise IngestError(f"{path}: expected header from_url,to_url")
        return RedirectMap.from_pairs((row["from_url"], row["to_url"]) for row in reader)


class Unresolved(NamedTuple):
    url: str
    reason: str  # "cycle", "depth", "unmapped_shortener" or "invalid"

    @property
    def cycle(self) -> bool:
        return self.reason == "cycle"


def resolve_hostname(url: str, redirects: RedirectMap) -> str | Unresolved:
    """Follow ``redirects`` from ``url`` and return the final hostname."""
    try:
        key = url_key(url)
    except ValueError:
        return Unresolved(url, "invalid")
    seen = {key}
    current = url
    hops = 0
    while (target := redirects.mapping.get(key)) is not None:
        if hops == MAX_REDIRECT_DEPTH:
            return Unresolved(url, "depth")
        try:
            key = url_key(target)
        except ValueError:
            return Unresolved(url, "invalid")
        if key in seen:
            return Unresolved(url, "cycle")
        seen.add(key)
        current = target
        hops += 1
    host = hostname_of(current)
    if not host:
        return Unresolved(url, "invalid")
    if host in redirects.shorteners:
        return Unresolved(url, "unmapped_shortener")
    return host


def resolve_record(record: TweetRecord, redirects: RedirectMap) -> TweetRecord:
    hosts = []
    for url in record.raw_urls:
        res = resolve_hostname(url, redirects)
        if isinstance(res, str):
            hosts.append(res)
    return replace(record, hostnames=tuple(hosts))


def resolve_records(records: Iterable[TweetRecord], redirects: RedirectMap) -> list[TweetRecord]:
    return [resolve_record(r, redirects) for r in records]


# -- catalog and clients -----------------------------------------------------

@dataclass(frozen=True)
class MediaCatalog:
    entries: Mapping[str, Category]
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for host in self.entries:
            if host != normalize_hostname(host) or "/" in host:
                raise IngestError(f"catalog hostname not normalized: {host!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, str]]) -> MediaCatalog:
        entries: dict[str, Category] = {}
        prov: dict[str, str] = {}
        for host, cat, note in rows:
            host = normalize_hostname(host)
            try:
                category = Category(cat.strip())
            except ValueError:
                raise IngestError(f"unknown category {cat!r} for {host}") from None
            if entries.get(host, category) != category:
                raise IngestError(f"{host} listed under {entries[host]} and {category}")
            entries[host] = category
            prov[host] = note
        return cls(entries, prov)

    def hostnames(self, category: Category) -> list[str]:
        return sorted(h for h, c in self.entries.items() if c == category)

    def __len__(self) -> int:
        return len(self.entries)


def load_catalog(path: str | Path) -> MediaCatalog:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"hostname", "category"} <= set(reader.fieldnames):
            raise IngestError(f"{path}: expected header hostname,category,provenance")
        return MediaCatalog.from_rows(
            (r["hostname"], r["category"], r.get("provenance") or "") for r in reader
        )


def default_catalog() -> MediaCatalog:
    """Catalog of the hostnames listed in the source study's tables."""
    with resources.files("newsflow.data").joinpath("catalog.csv").open(encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return MediaCatalog.from_rows((r["hostname"], r["category"], r["provenance"]) for r in reader)


def classify_hostname(hostname: str, catalog: MediaCatalog) -> Category | None:
    return catalog.entries.get(hostname)


def classify_record(record: TweetRecord, catalog: MediaCatalog) -> list[Category]:
    """One category per classified hostname occurrence (repeats included)."""
    return [c for c in (catalog.entries.get(h) for h in record.hostnames) if c is not None]


@dataclass(frozen=True)
class ClientRegistry:
    official_names: frozenset[str]

    def __contains__(self, name: str) -> bool:
        return name in self.official_names


def load_client_registry(path: str | Path) -> ClientRegistry:
    with open(path, encoding="utf-8") as fh:
        return ClientRegistry(frozenset(line.rstrip("\r\n") for line in fh if line.strip()))


def default_client_registry() -> ClientRegistry:
    text = resources.files("newsflow.data").joinpath("official_clients.txt").read_text(encoding="utf-8")
    return ClientRegistry(frozenset(line for line in text.splitlines() if line.strip()))


def is_official_client(client_name: str, registry: ClientRegistry) -> bool:
    return client_name in registry.official_names


# -- tallies -----------------------------------------------------------------

@dataclass(frozen=True)
class CategoryStats:
    n_tweets: int
    n_users: int
    n_tweets_official: int
    n_tweets_nonofficial: int
    n_users_nonofficial: int
    p_t: float | None
    p_u: float | None
    tweets_per_user: float | None
    p_t_nonofficial: float | None
    p_u_nonofficial: float | None
    tweets_per_user_nonofficial: float | None


@dataclass(frozen=True)
class CategoryTally:
    stats: Mapping[Category, CategoryStats]
    total_tweets: int
    total_users: int

    def __getitem__(self, category: Category | str) -> CategoryStats:
        return self.stats[Category(category)]


def _ratio(a: int, b: int) -> float | None:
    return a / b if b else None


def tally_categories(
    records: Iterable[TweetRecord], catalog: MediaCatalog, registry: ClientRegistry
) -> CategoryTally:
    """Per-category tweet/user volumes, split by official client.

    A tweet is counted once per classified hostname occurrence; a user is
    counted once per category.
    """
    n_t: dict[Category, int] = defaultdict(int)
    n_t_off: dict[Category, int] = defaultdict(int)
    users: dict[Category, set[int]] = defaultdict(set)
    users_no: dict[Category, set[int]] = defaultdict(set)
    all_users: set[int] = set()
    for rec in records:
        cats = classify_record(rec, catalog)
        if not cats:
            continue
        official = is_official_client(rec.client_name, registry)
        all_users.add(rec.author_id)
        for cat in cats:
            n_t[cat] += 1
            users[cat].add(rec.author_id)
            if official:
                n_t_off[cat] += 1
            else:
                users_no[cat].add(rec.author_id)
    total_t = sum(n_t.values())
    total_u = len(all_users)
    stats = {}
    for cat in CATEGORIES:
        nt, nu = n_t[cat], len(users[cat])
        nt_no = nt - n_t_off[cat]
        nu_no = len(users_no[cat])
        stats[cat] = CategoryStats(
            n_tweets=nt,
            n_users=nu,
            n_tweets_official=n_t_off[cat],
            n_tweets_nonofficial=nt_no,
            n_users_nonofficial=nu_no,
            p_t=_ratio(nt, total_t),
            p_u=_ratio(nu, total_u),
            tweets_per_user=_ratio(nt, nu),
            p_t_nonofficial=_ratio(nt_no, nt),
            p_u_nonofficial=_ratio(nu_no, nu),
            tweets_per_user_nonofficial=_ratio(nt_no, nu_no),
        )
    return CategoryTally(stats, total_t, total_u)


TALLY_COLUMNS = [
    "category", "N_t", "p_t", "N_u", "p_u", "N_t/N_u",
    "p_t_nonofficial", "p_u_nonofficial", "N_t_nonofficial/N_u_nonofficial",
]


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_tally(tally: CategoryTally, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TALLY_COLUMNS)
        for cat in CATEGORIES:
            s = tally.stats[cat]
            w.writerow([
                cat.value, s.n_tweets, _fmt(s.p_t), s.n_users, _fmt(s.p_u),
                _fmt(s.tweets_per_user), _fmt(s.p_t_nonofficial),
                _fmt(s.p_u_nonofficial), _fmt(s.tweets_per_user_nonofficial),
            ])
