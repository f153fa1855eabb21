"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import hashlib
import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from newsflow import ci, cli, fixture, granger, graph, ingest, timeseries  # noqa: E402
from newsflow.ci import CiParams  # noqa: E402
from newsflow.graph import DiffusionGraph  # noqa: E402
from newsflow.ingest import Category, TweetRecord  # noqa: E402

import oracles  # noqa: E402
import synth  # noqa: E402


def _report(capsys, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


# 1 ---------------------------------------------------------------------------------

def test_01_ci_oracle_equivalence(capsys):
    start = time.perf_counter()
    mismatches, checked = [], 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 201))
        deg = float(rng.uniform(2, 8))
        ids, edges = oracles.random_digraph(rng, n, deg)
        g = DiffusionGraph.from_edges(edges, ids)
        for ell in (1, 2, 3):
            got = [(e.user_id, e.ci_value) for e in ci.rank_influencers(g, CiParams(ell=ell)).entries]
            checked += 1
            if got != oracles.naive_ci_ranking(ids, edges, ell):
                mismatches.append((seed, ell))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    _report(capsys, 1, "CI oracle equivalence", ok,
            f"{checked - len(mismatches)}/{checked} rankings identical, {elapsed:.1f} s (limit 60 s)")


# 2 ---------------------------------------------------------------------------------

HAND = [(1, 2), (1, 3), (2, 4), (3, 5), (4, 6), (4, 7), (4, 8), (5, 9)]


def test_02_ci_hand_value(capsys):
    g = DiffusionGraph.from_edges(HAND)
    value = ci.ci_out(g, 1, 2)
    ball = oracles.ci_by_ball(HAND, 1, 2)
    low = [u for u in g.node_ids.tolist() if len(g.successors(u)) <= 1]
    low_zero = all(ci.ci_out(g, u, 2) == 0 for u in low)
    ok = value == 2 and ball == 2 and low_zero
    _report(capsys, 2, "CI hand value", ok,
            f"ci_out={value}, ball oracle={ball}, {len(low)} nodes with k_out<=1 all zero={low_zero}")


# 3 ---------------------------------------------------------------------------------

def test_03_stl_recomposition(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    n = 96 * 7
    t = np.arange(n)
    series = [
        50 + 10 * np.sin(2 * np.pi * t / 96),
        rng.poisson(20 + 10 * np.sin(2 * np.pi * t / 96)).astype(float),
        np.cumsum(rng.standard_normal(n)) + 5 * np.cos(2 * np.pi * t / 96),
        1e6 * (1 + 0.3 * np.sin(2 * np.pi * t / 96)) + rng.standard_normal(n) * 1e4,
        np.r_[np.zeros(n - 1), 1.0],
    ] + [synth.two_factor_counts(s, n_days=7)["c0_0"] for s in range(5)]
    worst = 0.0
    for x in series:
        for params in (timeseries.StlParams(), timeseries.StlParams(outer_iter=3)):
            d = timeseries.stl_decompose(x, params)
            worst = max(worst, float(np.max(np.abs(x - (d.trend + d.seasonal + d.remainder))) / np.max(np.abs(x))))
    sine = series[0]
    d = timeseries.stl_decompose(sine)
    rms_ratio = math.sqrt(np.mean(d.remainder ** 2)) / math.sqrt(np.mean(sine ** 2))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and rms_ratio < 0.01 and elapsed < 10
    _report(capsys, 3, "STL recomposition", ok,
            f"max relative error {worst:.2e} over {2 * len(series)} decompositions, "
            f"sinusoid remainder RMS {100 * rms_ratio:.4f}% of signal, {elapsed:.1f} s (limit 10 s)")


# 4 ---------------------------------------------------------------------------------

def test_04_adf_calibration(capsys):
    noise_rejects = walk_keeps = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        e = rng.standard_normal(1000)
        noise_rejects += timeseries.adf_test(e).p_value < 0.01
        walk_keeps += timeseries.adf_test(np.cumsum(rng.standard_normal(1000))).p_value >= 0.10
    ok = noise_rejects >= 95 and walk_keeps >= 90
    _report(capsys, 4, "ADF calibration", ok,
            f"white noise rejected at 1% in {noise_rejects}/100 (need 95), "
            f"random walk not rejected at 10% in {walk_keeps}/100 (need 90)")


# 5 ---------------------------------------------------------------------------------

def test_05_granger_direction(capsys):
    good = 0
    order_violations = pairs = 0
    for seed in range(50):
        x, y = synth.directional_pair(seed, 5000, 0.8)
        fwd = granger.granger_test(x, y, 1)
        rev = granger.granger_test(y, x, 1)
        good += fwd.p_value < 1e-7 and rev.p_value > 1e-3
        for a, b in ((x, y), (y, x)):
            crit = granger.information_criteria(a, b, 12)
            lags = {c: int(np.argmin(v)) + 1 for c, v in crit.items()}
            pairs += 1
            order_violations += not lags["BIC"] <= lags["HQC"] <= lags["AIC"]
    ok = good >= 48 and order_violations == 0  # 95% of 50 rounds up to 48
    _report(capsys, 5, "Granger direction recovery", ok,
            f"{good}/50 seeds with forward p<1e-7 and reverse p>1e-3 (need 48), "
            f"BIC<=HQC<=AIC on {pairs - order_violations}/{pairs} pairs")


# 6 ---------------------------------------------------------------------------------

def test_06_correlation_clustering(capsys):
    two = 0
    for seed in range(50):
        rem = synth.remainders(synth.two_factor_counts(seed))
        g = timeseries.threshold_graph(timeseries.cross_correlation(rem), 0.5)
        two += len(g.components()) == 2
    ok = two >= 48
    _report(capsys, 6, "Correlation clustering", ok, f"{two}/50 seeds give exactly two components (need 48)")


# 7 ---------------------------------------------------------------------------------

def test_07_tally_conservation(tmp_path, capsys):
    fixture.generate(tmp_path)
    redirects = ingest.load_redirect_map(tmp_path / "redirects.csv")
    recs = [ingest.resolve_record(r, redirects) for r in ingest.read_records(tmp_path / "records.jsonl").records]
    cat = ingest.load_catalog(tmp_path / "catalog.csv")
    reg = ingest.load_client_registry(tmp_path / "clients.txt")
    tally = ingest.tally_categories(recs, cat, reg)
    expect = oracles.brute_tally(recs, dict(cat.entries), set(reg.official_names))
    bad = []
    for c in ingest.CATEGORIES:
        s = tally[c]
        nt, nu, off, nu_no = expect.get(c, (0, 0, 0, 0))
        if (s.n_tweets, s.n_users, s.n_tweets_official, s.n_users_nonofficial) != (nt, nu, off, nu_no):
            bad.append(c.value)
        if s.n_tweets_official + s.n_tweets_nonofficial != s.n_tweets:
            bad.append(c.value + " partition")
    ok = not bad and tally.total_tweets > 0
    _report(capsys, 7, "Tally conservation", ok,
            f"{len(ingest.CATEGORIES) - len(bad)}/{len(ingest.CATEGORIES)} categories match brute force "
            f"on {len(recs)} fixture records; official + non-official = total in all")


# 8 ---------------------------------------------------------------------------------

def _rt(tid, user, source):
    return TweetRecord(tid, user, source, float(tid), "Twitter for iPhone", ("http://infowars.com/a",),
                       ("infowars.com",))


def test_08_graph_rules(capsys):
    cat = ingest.default_catalog()
    build = lambda recs: graph.build_retweet_graph(recs, Category.FAKE, cat)  # noqa: E731
    checks = {
        "duplicate collapses": build([_rt(1, 2, 1), _rt(2, 2, 1), _rt(3, 2, 1)]).edges() == [(1, 2)],
        "self-retweet dropped": build([_rt(1, 5, 5)]).n_edges == 0,
        "self-retweet with others": build([_rt(1, 5, 5), _rt(2, 6, 5)]).edges() == [(5, 6)],
        "reverse kept": build([_rt(1, 2, 1), _rt(2, 1, 2)]).edges() == [(1, 2), (2, 1)],
    }
    # every small multigraph over three users, including loops and repeats
    sums_ok, n_graphs = True, 0
    pairs = [(a, b) for a in range(3) for b in range(3)]
    for k in range(4):
        for combo in itertools.product(pairs, repeat=k):
            g = build([_rt(i + 1, b, a) for i, (a, b) in enumerate(combo)])
            expect = {(a, b) for a, b in combo if a != b}
            n_graphs += 1
            sums_ok &= g.k_out.sum() == g.k_in.sum() == g.n_edges == len(expect)
    rng = np.random.default_rng(8)
    for _ in range(50):
        ids, edges = oracles.random_digraph(rng, int(rng.integers(2, 300)), float(rng.uniform(0.5, 8)))
        g = DiffusionGraph.from_edges(edges + edges[: len(edges) // 3], ids)
        n_graphs += 1
        sums_ok &= g.k_out.sum() == g.k_in.sum() == g.n_edges == len(set(edges))
    ok = all(checks.values()) and sums_ok
    failed = [k for k, v in checks.items() if not v]
    _report(capsys, 8, "Graph-rule conformance", ok,
            f"unit fixtures {'all pass' if not failed else 'failed: ' + ', '.join(failed)}; "
            f"sum k_out = sum k_in = |E| on {n_graphs} graphs: {sums_ok}")


# 9 ---------------------------------------------------------------------------------

def _csv_hashes(out):
    return {p.relative_to(out).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out.rglob("*.csv"))}


def test_09_end_to_end_determinism(tmp_path, capsys):
    fx = tmp_path / "fx"
    fixture.generate(fx)
    hashes = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        argv = ["report", "--records", str(fx / "records.jsonl"), "--catalog", str(fx / "catalog.csv"),
                "--redirects", str(fx / "redirects.csv"), "--outages", str(fx / "outages.csv"),
                "--supporters", str(fx / "supporters.csv"), "--clients", str(fx / "clients.txt"),
                "--seed", "11", "--output-dir", str(out)]
        code = cli.main(argv)
        hashes.append((code, _csv_hashes(out)))
    (c0, h0), (c1, h1) = hashes
    ok = c0 == c1 == 0 and h0 == h1 and len(h0) > 20
    differing = sorted(k for k in h0.keys() | h1.keys() if h0.get(k) != h1.get(k))
    _report(capsys, 9, "End-to-end determinism", ok,
            f"{len(h0)} CSVs per run, {len(differing)} differ (exit codes {c0}, {c1})")


# 10 --------------------------------------------------------------------------------

def test_10_heterogeneity_estimator(capsys):
    rng = np.random.default_rng(10)
    n = 3000
    edges = set()
    for v in range(n):
        k = min(int(rng.pareto(1.3) * 2), n - 1)
        for u in rng.choice(n, size=k, replace=False).tolist():
            if u != v:
                edges.add((v, u))
    g = DiffusionGraph.from_edges(edges, range(n))
    s = graph.degree_stats(g, n_samples=100, sample_size=5000, seed=1)
    mean_k = g.n_edges / g.n_nodes
    ref, ref_se = oracles.resampled_heterogeneity(g.k_out, mean_k, 1000, 5000, seed=12345)
    z = abs(s.het_out - ref) / s.het_out_se
    ok = z <= 3
    _report(capsys, 10, "Heterogeneity estimator", ok,
            f"subsampled {s.het_out:.4f} +- {s.het_out_se:.4f} vs 10x resample {ref:.4f} +- {ref_se:.4f}, "
            f"|diff| = {z:.2f} SE (limit 3)")


if __name__ == "__main__":
    import inspect
    import tempfile

    failures = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_")):
        try:
            if "tmp_path" in inspect.signature(fn).parameters:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d), None)
            else:
                fn(None)
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
