"""Acceptance gate: ten end-to-end criteria, one verdict line each.

Each test prints (and registers for the terminal summary) a single
``PASS criterion N: ...`` or ``FAIL criterion N: ...`` line, so the run's
outcome can be read at a glance.
"""

from __future__ import annotations

import contextlib
import itertools
import json
import random
import time

import httpx

import conftest
from conftest import live_service, make_node

from factledger import corpus
from factledger.cli import main as cli_main
from factledger.codec import sha256_hex
from factledger.factcheck import records
from factledger.factcheck.consensus import tally_votes
from factledger.factcheck.records import VERDICTS, encode_reveal
from factledger.ledger import verify_chain_bytes

from test_consensus import oracle_tally
from test_ledger import build_chain, fresh_store, random_workload, serial_oracle

CUE_TEXT = ("SHOCKING secret cure doctors hate, you won't believe it, "
            "act now before it is deleted, wake up sheeple")

CURATOR = "curator"
CURATOR_AUTH = {"username": "curator", "credential": "curator-secret"}


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record one acceptance verdict line; failures propagate."""
    info: dict = {}
    try:
        yield info
    except BaseException:
        line = f"FAIL criterion {number:2d}: {title}"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    else:
        detail = f" [{info['detail']}]" if info.get("detail") else ""
        line = f"PASS criterion {number:2d}: {title}{detail}"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)


def api_login(client: httpx.Client, base: str, username: str,
              credential: str) -> dict:
    res = client.post(f"{base}/v1/login", json={"username": username,
                                                "credential": credential})
    assert res.status_code == 200, res.text
    return {"Authorization": f"Bearer {res.json()['token']}"}


# --- 1: full pipeline at scale ---------------------------------------------------------


def test_c01_pipeline_300_posts_labeled_under_120s(tmp_path):
    with criterion(1, "300 posts ingested, voted and labeled on-chain "
                      "in under 120 s") as info:
        corpus_path = tmp_path / "posts.jsonl"
        corpus.write_jsonl(corpus.generate(300, seed=2026), str(corpus_path))
        with live_service(tmp_path) as (node, base):
            started = time.monotonic()
            assert cli_main(["ingest", "--corpus", str(corpus_path),
                             "--api", base, "--quiet"]) == 0
            assert cli_main(["simulate-voters", "--corpus", str(corpus_path),
                             "--api", base, "--voters", "3", "--seed", "99",
                             "--quiet"]) == 0
            elapsed = time.monotonic() - started

            dash = node.queries.dashboard()
            assert dash["total_news"] == 300
            assert dash["total_on_chain"] == 300
            assert dash["ai_evaluated"] == 300
            assert dash["awaiting_evaluation"] == 0
            assert sum(dash["verdicts"].values()) == 300

            listing = node.queries.list_news()
            assert len(listing) == 300
            assert all(n["score"] is not None for n in listing)
            assert all(n["status"] == "labeled" for n in listing)

            store = node.network.primary.ledger
            consensus_rows = store.state_items(records.CONSENSUS_PREFIX)
            assert len(consensus_rows) == 300
            assert node.verify_chain().ok
        assert elapsed < 120.0
        info["detail"] = f"{elapsed:.1f}s wall clock"


# --- 2: tamper detection ---------------------------------------------------------------


def test_c02_tamper_detection_200_of_200(tmp_path):
    with criterion(2, "200/200 single-byte mutations of a 50-block chain "
                      "detected at or before the mutated height") as info:
        store = fresh_store()
        build_chain(store, 50)
        originals = [store.get_block(h).to_bytes() for h in range(51)]
        assert verify_chain_bytes(originals).ok

        rng = random.Random(0xACCE)
        detected = 0
        for _ in range(200):
            target = rng.randint(1, 50)
            blob = bytearray(originals[target])
            blob[rng.randrange(len(blob))] ^= 1 << rng.randrange(8)
            mutated = list(originals)
            mutated[target] = bytes(blob)
            report = verify_chain_bytes(mutated)
            assert not report.ok
            assert report.first_bad_height is not None
            assert report.first_bad_height <= target
            detected += 1
        assert detected == 200
        info["detail"] = "200/200 detected"


# --- 3: replay determinism ---------------------------------------------------------------


def drive_platform(node, rounds: int = 6) -> None:
    """A small mixed workload: checkers, assets, full vote cycles."""
    for cid in ("alice", "bob", "carol"):
        node.create_checker(CURATOR, cid, cid.title(), f"{cid}-pw")
    for i in range(rounds):
        res = node.register_news("ingestor",
                                 f"{CUE_TEXT} (case {i})".encode("utf-8"))
        news_id = res.response["news_id"]
        for cid in ("alice", "bob", "carol"):
            verdict = VERDICTS[(i + len(cid)) % 3]
            node.cast_vote(cid, news_id, verdict, f"{cid} view on case {i}")


def test_c03_replay_determinism(tmp_path):
    with criterion(3, "restart from the block log reproduces the snapshot "
                      "digest and every block hash exactly") as info:
        node = make_node(tmp_path)
        drive_platform(node)
        store = node.network.primary.ledger
        want_digest = store.snapshot_digest()
        want_hashes = [store.get_block(h).block_hash
                       for h in range(store.height + 1)]
        node.stop()

        replayed = make_node(tmp_path)
        try:
            store2 = replayed.network.primary.ledger
            assert store2.height == len(want_hashes) - 1
            assert store2.snapshot_digest() == want_digest
            got_hashes = [store2.get_block(h).block_hash
                          for h in range(store2.height + 1)]
            assert got_hashes == want_hashes
        finally:
            replayed.stop()
        info["detail"] = f"{len(want_hashes)} block hashes equal"


# --- 4: tally oracle equivalence -------------------------------------------------------


def test_c04_tally_matches_oracle_exhaustively():
    with criterion(4, "tally equals the brute-force oracle on every vote "
                      "multiset (n<=5, both modes); power-of-two rescales "
                      "never move the verdict") as info:
        simple = weighted = 0
        for n in range(1, 6):
            for combo in itertools.product(VERDICTS, repeat=n):
                got = tally_votes(list(combo), mode="simple_majority")
                assert got == oracle_tally(combo, [1.0] * n)
                simple += 1
        for n in range(1, 6):
            for combo in itertools.product(VERDICTS, repeat=n):
                for weights in itertools.product((0.1, 0.5, 0.9), repeat=n):
                    winner, totals = tally_votes(
                        list(combo), list(weights),
                        mode="credibility_weighted")
                    assert (winner, totals) == oracle_tally(combo, weights)
                    weighted += 1
                    # scaling by powers of two is exact in binary floating
                    # point, so every comparison must be preserved
                    for factor in (0.25, 0.5, 2.0, 4.0):
                        rescaled, _ = tally_votes(
                            list(combo), [w * factor for w in weights],
                            mode="credibility_weighted")
                        assert rescaled == winner, (combo, weights, factor)
        info["detail"] = f"{simple} simple + {weighted} weighted cases"


# --- 5: MVCC equivalence ----------------------------------------------------------------


def test_c05_mvcc_matches_serial_oracle_1000_workloads():
    with criterion(5, "1000 random workloads produce validity flags "
                      "identical to the serial re-execution oracle") as info:
        rng = random.Random(50_2026)
        txs_checked = 0
        for _ in range(1000):
            store, batches = random_workload(rng)
            validity, live = serial_oracle(batches)
            for block in list(store.iter_blocks())[1:]:
                for tx in block.tx_list:
                    assert tx.validity == validity[tx.tx_id]
                    txs_checked += 1
            assert {k: v for k, v, _ in store.state_items("")} == live
        info["detail"] = f"{txs_checked} transactions compared"


# --- 6: sealed-vote secrecy ------------------------------------------------------------


def test_c06_sealed_vote_secrecy(tmp_path):
    with criterion(6, "no verdict plaintext on-chain or in API responses "
                      "before labeling; every commitment opens to its "
                      "reveal") as info:
        secret_a = "rationale-sentinel-aardvark"
        secret_b = "rationale-sentinel-bandicoot"
        with live_service(tmp_path) as (node, base), httpx.Client() as client:
            cur = api_login(client, base, **CURATOR_AUTH)
            for cid in ("alice", "bob", "carol"):
                assert client.post(f"{base}/v1/fact-checkers", headers=cur,
                                   json={"checker_id": cid,
                                         "display_name": cid.title(),
                                         "credential": f"{cid}-pw"},
                                   ).status_code == 201
            res = client.post(f"{base}/v1/news", headers=cur,
                              json={"content": CUE_TEXT})
            news_id = res.json()["news_id"]

            alice = api_login(client, base, "alice", "alice-pw")
            bob = api_login(client, base, "bob", "bob-pw")
            carol = api_login(client, base, "carol", "carol-pw")
            client.post(f"{base}/v1/news/{news_id}/votes", headers=alice,
                        json={"verdict": "False", "rationale": secret_a})
            client.post(f"{base}/v1/news/{news_id}/votes", headers=bob,
                        json={"verdict": "Partial", "rationale": secret_b})

            # sealed phase: scan every committed byte and every public view
            store = node.network.primary.ledger
            chain = b"".join(store.get_block(h).to_bytes()
                             for h in range(store.height + 1))
            forbidden = [b'"True"', b'"False"', b'"Partial"',
                         secret_a.encode(), secret_b.encode()]
            for needle in forbidden:
                assert needle not in chain, needle

            # every public view of the still-unlabeled asset; the dashboard
            # is excluded deliberately: its aggregate counters enumerate the
            # three possible labels as static keys, which says nothing about
            # any sealed vote
            views = [
                client.get(f"{base}/v1/news", headers=cur),
                client.get(f"{base}/v1/news/suspicious", headers=cur),
                client.get(f"{base}/v1/check-news/{news_id}", headers=cur),
                client.get(f"{base}/v1/news/{news_id}/votes", headers=cur),
                client.get(f"{base}/v1/notifications", headers=carol),
            ]
            for res in views:
                assert res.status_code == 200
                for needle in ('"True"', '"False"', '"Partial"',
                               secret_a, secret_b):
                    assert needle not in res.text, (str(res.url), needle)

            # quorum: reveals open and must match their commitments
            final = client.post(f"{base}/v1/news/{news_id}/votes",
                                headers=carol,
                                json={"verdict": "False", "rationale": "c"})
            assert final.json()["finalized"] is True
            votes = client.get(f"{base}/v1/news/{news_id}/votes",
                               headers=cur).json()["votes"]
            assert len(votes) == 3
            for vote in votes:
                assert vote["revealed"] is True
                reveal = encode_reveal(vote["verdict"], vote["rationale"],
                                       bytes.fromhex(vote["salt_hex"]))
                assert sha256_hex(reveal) == vote["commitment"]
            assert {v["checker_id"]: v["rationale"] for v in votes} == {
                "alice": secret_a, "bob": secret_b, "carol": "c"}
        info["detail"] = "3 commitments opened, 0 leaks"


# --- 7: token conservation --------------------------------------------------------------


def test_c07_token_conservation_exact(tmp_path):
    with criterion(7, "token supply conserved: sum of balances equals "
                      "reward x aligned votes exactly") as info:
        node = make_node(tmp_path)
        try:
            rng = random.Random(777)
            roster = [f"voter{i}" for i in range(6)]
            for cid in roster:
                node.create_checker(CURATOR, cid, cid.title(), f"{cid}-pw")
            for i in range(12):
                res = node.register_news(
                    "ingestor", f"workload asset {i} (c7)".encode("utf-8"))
                news_id = res.response["news_id"]
                for cid in rng.sample(roster, 3):
                    node.cast_vote(cid, news_id, rng.choice(VERDICTS),
                                   f"{cid} on {i}")

            store = node.network.primary.ledger
            aligned = 0
            labeled = 0
            for _key, value, _v in store.state_items(records.CONSENSUS_PREFIX):
                result = json.loads(value.decode("utf-8"))
                labeled += 1
                aligned += sum(1 for p in result["participants"]
                               if p["aligned"])
            assert labeled == 12
            balances = sum(c["token_balance"]
                           for c in node.queries.list_checkers())
            reward = node.cfg.reward_per_aligned_vote
            assert balances == reward * aligned
            assert node.queries.reward_total() == balances
            info["detail"] = (f"{labeled} labels, {aligned} aligned votes, "
                              f"{balances} tokens")
        finally:
            node.stop()


# --- 8: suspicion threshold -------------------------------------------------------------


def test_c08_suspicion_threshold_is_strict(tmp_path):
    with criterion(8, "scores {0.69, 0.70, 0.71} with threshold 0.7: only "
                      "the 0.71 asset is listed suspicious") as info:
        lexicon_path = tmp_path / "trio.txt"
        lexicon_path.write_text("low\t0.69\tmagnetberry\n"
                                "mid\t0.70\tcopperfern\n"
                                "high\t0.71\tzincmallow\n",
                                encoding="utf-8")
        node = make_node(tmp_path, lexicon_path=str(lexicon_path))
        try:
            ids = {}
            for word, tag in (("magnetberry", 0.69), ("copperfern", 0.70),
                              ("zincmallow", 0.71)):
                res = node.register_news(
                    "ingestor", f"a report about {word} farming".encode())
                ids[tag] = res.response["news_id"]
                assert res.response["score"]["score"] == tag
            suspicious = node.queries.list_suspicious()
            assert [n["news_id"] for n in suspicious] == [ids[0.71]]
        finally:
            node.stop()
        info["detail"] = "0.69 out, 0.70 out, 0.71 in"


# --- 9: replica convergence --------------------------------------------------------------


def test_c09_replicas_converge_after_every_block(tmp_path):
    with criterion(9, "all 3 org snapshots hash-equal after every "
                      "committed block") as info:
        node = make_node(tmp_path)
        try:
            checks: list[bool] = []

            def after_commit(_block):
                digests = node.network.snapshot_digests()
                checks.append(len(set(digests)) == 1)

            node.network.on_commit = after_commit
            drive_platform(node, rounds=8)
            assert len(checks) >= 35
            assert all(checks)
            assert len(node.cfg.orgs) == 3
            info["detail"] = f"{len(checks)} blocks, 3 orgs each"
        finally:
            node.stop()


# --- 10: latency reporting ---------------------------------------------------------------


def test_c10_p95_latency_measured_and_reported(tmp_path):
    with criterion(10, "p95 latency over 1000 check-news requests emitted "
                       "in the run report") as info:
        with live_service(tmp_path) as (node, base), httpx.Client() as client:
            cur = api_login(client, base, **CURATOR_AUTH)
            ids = []
            for i in range(10):
                res = client.post(f"{base}/v1/news", headers=cur,
                                  json={"content": f"latency probe {i}"})
                ids.append(res.json()["news_id"])
            for i in range(1000):
                res = client.get(f"{base}/v1/check-news/{ids[i % len(ids)]}",
                                 headers=cur)
                assert res.status_code == 200
            report_dir = node.cfg.data_dir
        # the shutdown hook has run; the report is on disk
        with open(f"{report_dir}/run_report.json", encoding="utf-8") as fh:
            report = json.load(fh)
        stats = report["routes"]["/v1/check-news/{news_id}"]
        assert stats["count"] >= 1000
        assert isinstance(stats["p95_ms"], float)
        assert stats["p95_ms"] > 0.0
        info["detail"] = (f"p95={stats['p95_ms']:.2f}ms over "
                          f"{stats['count']} requests")
