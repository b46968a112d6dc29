"""Release acceptance suite: one test per criterion, one verdict line each.

Each test prints ``[criterion N] PASS/FAIL - detail`` (visible with
``pytest -s``, or in captured output when a criterion fails) and then
asserts the same condition, so the suite both reports and gates.

Criteria 1-3 pin frozen worked examples.  Criterion 4 re-runs the four
oracle-equivalence suites from the unit tests at a thousand randomized
trials each.  Criterion 5 checks the documented invariants.  Criteria 6-8
share one synthetic two-domain world built per session: two 40-phrase
topic vocabularies on disjoint word pools, a 400-phrase shared vocabulary
that includes both topic vocabularies at low weight, 150 labeled train and
test documents per domain, and a 2,000-document unlabeled corpus indexed
as the searchable "web".  Models are trained on domain A only, so domain B
measures how each feature set transfers.  Criterion 9 audits query cost.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from test_evaluation import items_for, oracle_partition
from test_features import mk_cand, oracle_mdlp
from test_hitindex import oracle_hits, random_corpus, random_phrase

from keymine.assoc import SynonymQuestion, choose_synonym, score2
from keymine.evaluation import (
    SynthConfig,
    agreement,
    author_key_set,
    author_key_union,
    build_curve,
    build_phrase_vocab,
    familiarity,
    overlap_report,
    paired_ttest,
    pseudoword_vocabulary,
    search_eval,
    synth_corpus,
    zipf_weights,
)
from keymine.features import (
    Discretizer,
    build_query_vectors,
    discretize_fit,
    rank_normalize,
)
from keymine.hitindex import (
    AndQuery,
    CachedHitProvider,
    FixedCountProvider,
    NearQuery,
    build_index,
    hits,
    matching_docs,
    phrase,
)
from keymine.hitindex import IndexHitProvider
from keymine.model import (
    ExtractorConfig,
    extract_onepass,
    extract_twopass,
    nb_posterior,
    nb_train,
    train_pipeline,
)
from keymine.textprep import Document, default_stoplist, normalize_raw_phrase, tokenize


def verdict(num: int, ok: bool, detail: str) -> None:
    line = f"[criterion {num}] {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


# ---------------------------------------------------------------------------
# Frozen worked example: proximity scores for four alternatives against the
# problem word "levied", using recorded hit counts over a 350M-page corpus.

LEVIED_COUNTS = {
    "PHRASEci:imposed": 1_198_495,
    "PHRASEci:believed": 2_537_348,
    "PHRASEci:requested": 4_774_446,
    "PHRASEci:correlated": 244_353,
    "NEAR10(PHRASEci:levied,PHRASEci:imposed)": 3_593,
    "NEAR10(PHRASEci:levied,PHRASEci:believed)": 84,
    "NEAR10(PHRASEci:levied,PHRASEci:requested)": 293,
    "NEAR10(PHRASEci:levied,PHRASEci:correlated)": 6,
}
LEVIED_EXPECTED = {
    "imposed": 0.0029979,
    "believed": 0.0000331,
    "requested": 0.0000614,
    "correlated": 0.0000246,
}


def test_criterion_1_synonym_worked_example():
    t0 = time.perf_counter()
    provider = FixedCountProvider(LEVIED_COUNTS, total=350_000_000)
    got = {c: score2("levied", c, provider).value for c in LEVIED_EXPECTED}
    question = SynonymQuestion("levied", tuple(LEVIED_EXPECTED))
    choice = choose_synonym(question, provider)
    elapsed = time.perf_counter() - t0
    scores_ok = all(
        got[c] is not None and abs(got[c] - want) <= 1e-7
        for c, want in LEVIED_EXPECTED.items()
    )
    ok = scores_ok and choice == "imposed" and elapsed < 1.0
    verdict(
        1,
        ok,
        f"recorded-count example: scores within 1e-7 ({scores_ok}), "
        f"choice={choice!r}, {elapsed:.3f}s (< 1s)",
    )


def test_criterion_2_rank_normalization_golden():
    got = rank_normalize([0.8, 0.1, 0.3, 0.1])
    ok = got == [1.0, 0.0, 0.5, 0.0]
    verdict(2, ok, f"(0.8, 0.1, 0.3, 0.1) -> {tuple(got)} (want (1.0, 0.0, 0.5, 0.0))")


def test_criterion_3_phrase_normalization_equivalence():
    a = normalize_raw_phrase("Distributed Computation")
    b = normalize_raw_phrase("distributed computing")
    ok = bool(a) and a == b
    verdict(3, ok, f"'Distributed Computation' -> {a!r}, 'distributed computing' -> {b!r}")


# ---------------------------------------------------------------------------
# Criterion 4: the four oracle suites at a thousand randomized trials each.


def _direct_posterior(model, ivec):
    raw_key = model.prior_key
    raw_not = model.prior_not
    for name, interval in zip(model.feature_names, ivec):
        raw_key *= model.cond_key[name][interval]
        raw_not *= model.cond_not[name][interval]
    return raw_key / (raw_key + raw_not)


def _random_nb_model(rng, disc, max_rows=30):
    arity = [d.n_intervals for d in disc.values()]
    n = int(rng.integers(4, max_rows + 1))
    rows = [
        tuple(int(rng.integers(0, a)) for a in arity) for _ in range(n)
    ]
    labels = [bool(x) for x in rng.random(n) < 0.5]
    labels[0], labels[1] = True, False  # guarantee both classes
    return nb_train(rows, labels, disc, "baseline")


def test_criterion_4_oracle_equivalence_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    mismatches = []

    # 4a. hits() against a brute-force full-text scan, corpora <= 50 docs.
    for _ in range(1000):
        docs = random_corpus(rng)
        index = build_index(docs)
        queries = (
            random_phrase(rng),
            AndQuery(random_phrase(rng), random_phrase(rng)),
            NearQuery(random_phrase(rng), random_phrase(rng), window=int(rng.integers(0, 13))),
        )
        for q in queries:
            if hits(index, q) != oracle_hits(docs, q):
                mismatches.append(f"hits {q.canonical()}")

    # 4b. nb_posterior against the direct frequency-ratio formula.
    disc = {"tfidf": Discretizer((0.5,)), "distance": Discretizer((0.3, 0.7))}
    for _ in range(1000):
        model = _random_nb_model(rng, disc)
        for ivec in ((0, 0), (1, 2), (0, 1), (1, 0)):
            want = _direct_posterior(model, ivec)
            got = nb_posterior(model, ivec)
            if not math.isclose(got, want, rel_tol=1e-12, abs_tol=0.0):
                mismatches.append(f"posterior {got} vs {want}")

    # 4c. discretize_fit against the exhaustive recursive search, <= 30 points.
    for trial in range(1000):
        n = int(rng.integers(2, 31))
        if trial % 2 == 0:
            values = [float(v) for v in rng.integers(0, 6, n)]
        else:
            values = [round(float(v), 3) for v in rng.normal(0, 1, n)]
        labels = [bool(b) for b in rng.random(n) < 0.5]
        got = list(discretize_fit(values, labels).cuts)
        want = sorted(oracle_mdlp(sorted(zip(values, labels))))
        if got != want:
            mismatches.append(f"mdl {got} vs {want}")

    # 4d. overlap_report against plain set algebra.
    pool = [f"w{i}" for i in range(8)]
    names = ("m1", "m2", "m3")
    for _ in range(1000):
        n_docs = int(rng.integers(1, 4))
        methods = {name: [] for name in names}
        keys = []
        for _ in range(n_docs):
            for name in names:
                picked = rng.choice(8, int(rng.integers(0, 5)), replace=False)
                methods[name].append(items_for(*(pool[j] for j in picked)))
            keys.append(
                frozenset(
                    normalize_raw_phrase(pool[j])
                    for j in rng.choice(8, int(rng.integers(0, 4)), replace=False)
                )
            )
        report = overlap_report(methods, keys)
        for matched_only, buckets in ((True, report.matched), (False, report.all_phrases)):
            for name in names:
                shared_all = unique = total = 0
                per_other: Counter = Counter()
                for i in range(n_docs):
                    sets = {m: {it.stem_key for it in methods[m][i]} for m in names}
                    if matched_only:
                        sets = {m: s & keys[i] for m, s in sets.items()}
                    own = sets[name]
                    others = {m: sets[m] for m in names if m != name}
                    sa, po, uq = oracle_partition(own, others)
                    shared_all += sa
                    unique += uq
                    total += len(own)
                    per_other.update(po)
                bucket = buckets[name]
                fields_ok = (
                    math.isclose(bucket.shared_all, shared_all / n_docs, abs_tol=1e-12)
                    and math.isclose(bucket.unique, unique / n_docs, abs_tol=1e-12)
                    and math.isclose(bucket.total, total / n_docs, abs_tol=1e-12)
                    and all(
                        math.isclose(v, per_other[o] / n_docs, abs_tol=1e-12)
                        for o, v in bucket.shared_one.items()
                    )
                )
                if not fields_ok:
                    mismatches.append(f"overlap {name} matched={matched_only}")

    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 60.0
    detail = (
        f"hits/posterior/discretize/overlap suites at 1000 trials each, "
        f"{len(mismatches)} mismatches, {elapsed:.1f}s (< 60s)"
    )
    if mismatches:
        detail += f"; first: {mismatches[0]}"
    verdict(4, ok, detail)


# ---------------------------------------------------------------------------
# Synthetic two-domain world shared by criteria 5-8.

WORLD_SEED = 22
N_TRAIN = 150
N_TEST = 150
N_WEB_PER_DOMAIN = 1000
OUTPUT_M = 7

# World geometry.  The shared vocabulary is 400 phrases: 320 neutral ones
# plus both 40-phrase topic vocabularies at LEAK mass each, so an occasional
# off-topic document mentions a topic phrase.  Word pools are small enough
# that multi-word phrases share words, giving their single-word fragments a
# higher document frequency than the full phrase.  Unlabeled test documents
# also carry two document-specific unigrams apiece (novel vocabulary the web
# has never seen), interleaved at random positions.
G0_PHRASES = 320
DOMAIN_PHRASES = 40
G0_WORDS = 180
DOMAIN_WORDS = 28
LEAK = 0.10
G0_ZIPF = 0.8
DOMAIN_ZIPF = 1.3
DOMAIN_MIX = 0.12
KEY_COPIES = 3
SLOTS_PER_DOC = 30
SPECIFICS_PER_DOC = 2
SPECIFIC_COPIES = 2


def _scaled(weights, mass):
    a = np.asarray(weights, dtype=float)
    return tuple(a / a.sum() * mass)


def _doc_slots(doc):
    slots, current = [], []
    for token in doc.tokens:
        if token.boundary_before and current:
            slots.append(" ".join(current))
            current = []
        current.append(token.surface)
    if current:
        slots.append(" ".join(current))
    return slots


def _insert_doc_specifics(docs, words, per_doc, rng, copies):
    """Give each document ``per_doc`` unigrams nothing else ever uses."""
    out = []
    taken = 0
    for doc in docs:
        own = words[taken : taken + per_doc]
        taken += per_doc
        slots = _doc_slots(doc)
        for word in own:
            for _ in range(copies):
                slots.insert(int(rng.integers(len(slots) + 1)), word)
        text = " . ".join(slots)
        out.append(Document(doc.id, tokenize(text), list(doc.author_keyphrases)))
    return out, words[taken:]


@pytest.fixture(scope="session")
def world(tmp_path_factory):
    t0 = time.perf_counter()
    rng = np.random.default_rng(WORLD_SEED)
    stops = default_stoplist()
    n_words = G0_WORDS + 2 * DOMAIN_WORDS
    words = pseudoword_vocabulary(n_words, rng, stops=stops)
    g0 = build_phrase_vocab(words[:G0_WORDS], G0_PHRASES, rng)
    c_vocab = build_phrase_vocab(words[G0_WORDS : G0_WORDS + DOMAIN_WORDS], DOMAIN_PHRASES, rng)
    p_vocab = build_phrase_vocab(words[G0_WORDS + DOMAIN_WORDS :], DOMAIN_PHRASES, rng)

    w_c = zipf_weights(DOMAIN_PHRASES, DOMAIN_ZIPF)
    w_p = zipf_weights(DOMAIN_PHRASES, DOMAIN_ZIPF)
    general = tuple(g0) + tuple(c_vocab) + tuple(p_vocab)
    general_weights = (
        _scaled(zipf_weights(G0_PHRASES, G0_ZIPF), 1.0 - 2 * LEAK)
        + _scaled(w_c, LEAK)
        + _scaled(w_p, LEAK)
    )

    def corpus_cfg(n_docs, sub_seed):
        return SynthConfig(
            general=general,
            domain_a=tuple(c_vocab),
            domain_b=tuple(p_vocab),
            general_weights=general_weights,
            domain_a_weights=tuple(w_c),
            domain_b_weights=tuple(w_p),
            docs_per_domain=n_docs,
            seed=sub_seed,
            domain_mix=DOMAIN_MIX,
            keyphrase_copies=KEY_COPIES,
            phrases_per_doc=SLOTS_PER_DOC,
        )

    web = synth_corpus(corpus_cfg(N_WEB_PER_DOMAIN, WORLD_SEED + 1), id_prefix="w")
    train = synth_corpus(corpus_cfg(N_TRAIN, WORLD_SEED + 2), id_prefix="t")
    test = synth_corpus(corpus_cfg(N_TEST, WORLD_SEED + 3), id_prefix="u")

    used = {normalize_raw_phrase(w) for w in words}
    pool = [
        w
        for w in pseudoword_vocabulary(
            SPECIFICS_PER_DOC * 2 * N_TEST + n_words, rng, stops=stops
        )
        if normalize_raw_phrase(w) not in used
    ]
    test_a, pool = _insert_doc_specifics(
        test.domain_a, pool, SPECIFICS_PER_DOC, rng, SPECIFIC_COPIES
    )
    test_b, _ = _insert_doc_specifics(
        test.domain_b, pool, SPECIFICS_PER_DOC, rng, SPECIFIC_COPIES
    )

    web_index = build_index(web.all_docs)
    cache_file = tmp_path_factory.mktemp("acceptance") / "hits.cache"
    provider = CachedHitProvider(IndexHitProvider(web_index), cache_file)

    cfgs = {
        name: ExtractorConfig(feature_set=name, output_count=OUTPUT_M)
        for name in ("baseline", "keyphrase", "query")
    }
    base1, _ = train_pipeline(train.domain_a, cfgs["baseline"])
    key1, _ = train_pipeline(train.domain_a, cfgs["keyphrase"])
    q1, q2 = train_pipeline(train.domain_a, cfgs["query"], provider=provider)

    def extract_all(docs):
        return {
            "baseline": [extract_onepass(d, base1, cfgs["baseline"]) for d in docs],
            "keyphrase": [extract_onepass(d, key1, cfgs["keyphrase"]) for d in docs],
            "query": [extract_twopass(d, q1, q2, cfgs["query"], provider) for d in docs],
        }

    in_domain = extract_all(test_a)
    cross_domain = extract_all(test_b)
    runtime = time.perf_counter() - t0

    return SimpleNamespace(
        web_index=web_index,
        provider=provider,
        c_vocab=c_vocab,
        p_vocab=p_vocab,
        test_a=test_a,
        test_b=test_b,
        baseline_model=base1,
        in_domain=in_domain,
        cross_domain=cross_domain,
        runtime=runtime,
    )


def _agreement_counts(extractions, docs, m):
    counts = []
    for items, doc in zip(extractions, docs):
        keys = author_key_set(doc.author_keyphrases)
        counts.append(sum(1 for item in items[:m] if item.stem_key in keys))
    return counts


# ---------------------------------------------------------------------------
# Criterion 5: documented invariants, zero violations over randomized inputs.


def _raw_ratio(model, ivec):
    raw_key = model.prior_key
    raw_not = model.prior_not
    for name, interval in zip(model.feature_names, ivec):
        raw_key *= model.cond_key[name][interval]
        raw_not *= model.cond_not[name][interval]
    return raw_key / raw_not


def test_criterion_5_invariant_suite(world):
    rng = np.random.default_rng(7)
    violations = []

    # Proximity hits never exceed conjunction hits, which never exceed the
    # smaller single-phrase count.
    for _ in range(300):
        docs = random_corpus(rng)
        index = build_index(docs)
        p1, p2 = random_phrase(rng), random_phrase(rng)
        near = hits(index, NearQuery(p1, p2))
        both = hits(index, AndQuery(p1, p2))
        if not near <= both <= min(hits(index, p1), hits(index, p2)):
            violations.append("hits chain")

    # Negating every difference mirrors the t-test exactly.
    for _ in range(300):
        n = int(rng.integers(2, 40))
        kind = int(rng.integers(0, 4))
        if kind == 0:
            diffs = [0.0] * n
        elif kind == 1:
            diffs = [float(rng.normal())] * n
        else:
            diffs = [float(x) for x in rng.normal(0.0, 1.0, n)]
        a = paired_ttest(diffs)
        b = paired_ttest([-d for d in diffs])
        if not (
            b.mean == -a.mean
            and b.t == -a.t
            and b.half_width == a.half_width
            and b.significant == a.significant
        ):
            violations.append("t-test symmetry")

    # Matching against the whole test set's author keys can only find more
    # phrases than matching against one document's.
    union = author_key_union(world.test_b)
    for method_items in world.cross_domain.values():
        for items, doc in zip(method_items, world.test_b):
            for m in (1, 3, OUTPUT_M):
                if familiarity(items[:m], union) < agreement(items[:m], doc.author_keyphrases):
                    violations.append("familiarity < agreement")

    # Asking for fewer phrases returns a prefix of asking for more, and the
    # agreement curve never decreases with the output size.
    docs = world.test_a[:15]
    previous = None
    for m in range(1, OUTPUT_M + 1):
        cfg = ExtractorConfig(feature_set="baseline", output_count=m)
        outputs = [extract_onepass(d, world.baseline_model, cfg) for d in docs]
        if previous is not None and any(
            full[: m - 1] != prefix for full, prefix in zip(outputs, previous)
        ):
            violations.append(f"extraction prefix at M={m}")
        previous = outputs
    curve = build_curve(
        world.cross_domain["baseline"],
        [author_key_set(d.author_keyphrases) for d in world.test_b],
        max_m=OUTPUT_M,
    )
    if any(lo > hi for lo, hi in zip(curve.means, curve.means[1:])):
        violations.append("curve not monotone")

    # Posteriors order candidates exactly like the un-normalized class-score
    # ratio, and scaling both priors by one constant changes nothing.
    disc = {"tfidf": Discretizer((0.3, 0.7)), "distance": Discretizer((0.5,))}
    for _ in range(300):
        model = _random_nb_model(rng, disc, max_rows=40)
        ivecs = sorted({
            (int(rng.integers(0, 3)), int(rng.integers(0, 2))) for _ in range(6)
        })
        posts = [nb_posterior(model, iv) for iv in ivecs]
        ratios = [_raw_ratio(model, iv) for iv in ivecs]
        for i in range(len(ivecs)):
            for j in range(i + 1, len(ivecs)):
                gap = posts[i] - posts[j]
                if abs(gap) > 1e-9 and (gap > 0) != (ratios[i] > ratios[j]):
                    violations.append("posterior ordering")
        scaled = replace(model, prior_key=model.prior_key * 7.5, prior_not=model.prior_not * 7.5)
        if any(
            not math.isclose(nb_posterior(scaled, iv), p, rel_tol=1e-9)
            for iv, p in zip(ivecs, posts)
        ):
            violations.append("posterior scaling")

    ok = not violations
    detail = (
        "hits chain, t-test symmetry, familiarity>=agreement, extraction "
        f"prefix, posterior scaling+ordering: {len(violations)} violations"
    )
    if violations:
        detail += f"; first: {violations[0]}"
    verdict(5, ok, detail)


# ---------------------------------------------------------------------------
# Criteria 6-8: directional results on the synthetic world.


def test_criterion_6_synthetic_domain_transfer(world):
    base_in = _agreement_counts(world.in_domain["baseline"], world.test_a, OUTPUT_M)
    key_in = _agreement_counts(world.in_domain["keyphrase"], world.test_a, OUTPUT_M)
    query_in = _agreement_counts(world.in_domain["query"], world.test_a, OUTPUT_M)
    base_x = _agreement_counts(world.cross_domain["baseline"], world.test_b, OUTPUT_M)
    key_x = _agreement_counts(world.cross_domain["keyphrase"], world.test_b, OUTPUT_M)
    query_x = _agreement_counts(world.cross_domain["query"], world.test_b, OUTPUT_M)

    t_key_in = paired_ttest([k - b for k, b in zip(key_in, base_in)])
    t_query_in = paired_ttest([q - b for q, b in zip(query_in, base_in)])
    t_key_x = paired_ttest([k - b for k, b in zip(key_x, base_x)])
    t_query_x = paired_ttest([q - b for q, b in zip(query_x, base_x)])

    ok = (
        t_key_in.mean > 0
        and t_key_in.significant
        and t_query_in.mean > 0
        and t_query_in.significant
        and t_key_x.mean < 0
        and t_key_x.significant
        and t_query_x.mean > 0
        and t_query_x.significant
        and world.runtime < 600.0
    )

    def fmt(entry):
        tag = "sig" if entry.significant else "ns"
        return f"{entry.mean:+.3f} (t={entry.t:+.2f}, {tag})"

    verdict(
        6,
        ok,
        f"in-domain key-base {fmt(t_key_in)}, query-base {fmt(t_query_in)}; "
        f"cross-domain key-base {fmt(t_key_x)} (want <0), "
        f"query-base {fmt(t_query_x)} (want >0); "
        f"world runtime {world.runtime:.1f}s (< 600s)",
    )


def test_criterion_7_generality_bias(world):
    def over_fifty_counts(extractions):
        counts = []
        for items, doc in zip(extractions, world.test_b):
            counts.append(
                sum(
                    int(search_eval(doc, [item.surface], world.web_index, "phrases", 20)[1])
                    for item in items[:3]
                )
            )
        return counts

    base_counts = over_fifty_counts(world.cross_domain["baseline"])
    key_counts = over_fifty_counts(world.cross_domain["keyphrase"])
    rate_base = sum(base_counts) / (3 * len(base_counts))
    rate_key = sum(key_counts) / (3 * len(key_counts))
    entry = paired_ttest([k - b for k, b in zip(key_counts, base_counts)])
    ok = rate_key > rate_base and entry.mean > 0 and entry.significant
    verdict(
        7,
        ok,
        f"cross-domain top-3 over-50 rate: keyphrase {rate_key:.3f} vs "
        f"baseline {rate_base:.3f}; per-doc diff {entry.mean:+.3f} "
        f"(t={entry.t:+.2f}, {'sig' if entry.significant else 'ns'})",
    )


def test_criterion_8_same_domain_cooccurrence(world):
    index = world.web_index
    n_docs = len(index.doc_sizes)
    checked = holds = 0
    for vocab in (world.c_vocab, world.p_vocab):
        doc_sets = [matching_docs(index, phrase(text)) for text in vocab]
        for i in range(len(doc_sets)):
            for j in range(i + 1, len(doc_sets)):
                joint = len(doc_sets[i] & doc_sets[j])
                if joint < 30:
                    continue
                checked += 1
                p_joint = joint / n_docs
                p_each = (len(doc_sets[i]) / n_docs) * (len(doc_sets[j]) / n_docs)
                if p_joint > p_each:
                    holds += 1
    rate = holds / checked if checked else 0.0
    ok = checked >= 100 and rate >= 0.95
    verdict(
        8,
        ok,
        f"same-domain pairs with joint>=30: {holds}/{checked} satisfy "
        f"p(k1&k2) > p(k1)p(k2) ({100 * rate:.1f}%, want >=95%)",
    )


# ---------------------------------------------------------------------------
# Criterion 9: query cost accounting for the co-occurrence features.


def test_criterion_9_query_cost_accounting(tmp_path):
    def candidates(n):
        return [mk_cand("q" + chr(ord("a") + i), first=i) for i in range(n)]

    sizes = (4, 5, 9, 16)
    per_candidate_ok = True
    for n in sizes:
        cands = candidates(n)
        provider = FixedCountProvider({}, total=10_000, default=5)
        build_query_vectors(
            cands,
            cands[:4],
            [0.9 - 0.05 * i for i in range(n)],
            provider,
            [float(n - i) for i in range(n)],
            [0.0] * n,
        )
        if provider.query_count != 10 * n:
            per_candidate_ok = False

    # A write-through cache absorbs repeats: a second identical call is free.
    cands = candidates(max(sizes))
    backend = FixedCountProvider({}, total=10_000, default=5)
    provider = CachedHitProvider(backend, tmp_path / "hits.cache")
    args = (
        cands,
        cands[:4],
        [0.9 - 0.05 * i for i in range(len(cands))],
        provider,
        [float(len(cands) - i) for i in range(len(cands))],
        [0.0] * len(cands),
    )
    build_query_vectors(*args)
    cold = backend.query_count
    build_query_vectors(*args)
    cache_ok = cold == 10 * max(sizes) and backend.query_count == cold
    ok = per_candidate_ok and cache_ok
    verdict(
        9,
        ok,
        f"10 uncached queries per candidate at pool sizes {sizes} "
        f"(per-candidate {per_candidate_ok}); cached rerun adds "
        f"{backend.query_count - cold} queries",
    )
