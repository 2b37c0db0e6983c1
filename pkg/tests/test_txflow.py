"""Execute-order-validate pipeline: endorsement, ordering, private data,
replica convergence, and persistence."""

from __future__ import annotations

import threading

import pytest

from factledger.chaincode import OperationRegistry, PdcConfig, pdc_state_key
from factledger.errors import (
    EndorsementMismatch,
    NotAMember,
    PolicyUnsatisfiable,
    TxConflict,
    UnknownCollection,
    UnknownOperation,
)
from factledger.ledger import VALID
from factledger.txflow import EndorsementPolicy, LogicalClock, Network

from conftest import kv_network, kv_registry


def test_policy_unsatisfiable_at_startup():
    with pytest.raises(PolicyUnsatisfiable):
        kv_network(orgs=("a", "b", "c"), required=4)
    with pytest.raises(PolicyUnsatisfiable):
        kv_network(orgs=("a", "b", "c"), required=0)


def test_collection_must_name_known_orgs():
    with pytest.raises(PolicyUnsatisfiable):
        kv_network(collections={"secrets": frozenset({"org1", "ghost"})})


def test_unknown_operation_rejected_at_submit():
    net = kv_network()
    with pytest.raises(UnknownOperation):
        net.submit("no_such_op", {}, "alice")


def test_invoke_commits_and_reads_back():
    net = kv_network()
    response, outcome = net.invoke("put", {"key": "greet", "value": b"hi"}, "alice")
    assert response == {"ok": True}
    assert outcome.is_valid and outcome.height == 1
    response, _ = net.invoke("get", {"key": "greet"}, "bob")
    assert response == {"value": "hi"}


def test_empty_queue_cuts_no_block():
    net = kv_network()
    assert net.order_and_commit() is None
    assert net.primary.ledger.height == 0


def test_batching_respects_max_block_txs():
    net = kv_network(max_block_txs=3)
    handles = [net.submit("put", {"key": f"k{i}", "value": b"v"}, "alice")
               for i in range(7)]
    blocks = []
    while (block := net.order_and_commit()) is not None:
        blocks.append(block)
    assert [len(b.tx_list) for b in blocks] == [3, 3, 1]
    assert all(h.outcome(timeout=1).is_valid for h in handles)


def test_endorsement_mismatch_on_nondeterministic_op():
    registry = kv_registry()
    counter = {"n": 0}

    def op_flaky(stub, args):
        counter["n"] += 1
        stub.put_state("flaky", str(counter["n"]).encode())
        return {"n": counter["n"]}

    registry.register("flaky", op_flaky)
    net = Network(("org1", "org2", "org3"), registry,
                  PdcConfig({}), EndorsementPolicy(2, 3), clock=LogicalClock())
    net.bootstrap()
    with pytest.raises(EndorsementMismatch):
        net.submit("flaky", {}, "alice")
    # Nothing ordered, nothing committed.
    assert net.order_and_commit() is None


def test_single_endorser_policy_skips_cross_checks():
    net = kv_network(orgs=("solo",), required=1,
                     collections={"secrets": frozenset({"solo"})})
    _, outcome = net.invoke("put", {"key": "k", "value": b"v"}, "alice")
    assert outcome.is_valid


def test_replicas_stay_hash_identical():
    net = kv_network()
    for i in range(12):
        net.invoke("bump", {"key": f"counter{i % 3}"}, "alice")
    digests = net.snapshot_digests()
    assert len(set(digests)) == 1
    heights = {org.ledger.height for org in net.orgs}
    assert heights == {net.primary.ledger.height}
    for h in range(net.primary.ledger.height + 1):
        hashes = {org.ledger.get_block(h).block_hash for org in net.orgs}
        assert len(hashes) == 1


def test_mvcc_conflict_surfaces_as_tx_conflict():
    net = kv_network()
    net.invoke("put", {"key": "n", "value": b"0"}, "alice")
    # Two submissions simulated against the same committed state, committed
    # in one block: the second must be invalidated and raise on invoke-wait.
    h1 = net.submit("bump", {"key": "n"}, "alice")
    h2 = net.submit("bump", {"key": "n"}, "bob")
    net.order_and_commit()
    assert h1.outcome(timeout=1).is_valid
    out2 = h2.outcome(timeout=1)
    assert not out2.is_valid and out2.reason == "mvcc_conflict"
    # invoke() turns the same situation into an exception: the queued
    # submission wins the block, the invoke call loses and raises.
    pending = net.submit("bump", {"key": "n"}, "dave")
    with pytest.raises(TxConflict):
        net.invoke("bump", {"key": "n"}, "erin")
    assert pending.outcome(timeout=1).is_valid


def test_background_orderer_commits(tmp_path):
    net = kv_network(block_log_path=str(tmp_path / "blocks.log"))
    net.start_ordering()
    try:
        handles = [net.submit("put", {"key": f"k{i}", "value": b"v"}, "alice")
                   for i in range(5)]
        for h in handles:
            assert h.outcome(timeout=5).is_valid
    finally:
        net.close()
    assert net.primary.ledger.state_get("k4") is not None


def test_concurrent_submitters_all_commit():
    net = kv_network()
    net.start_ordering()
    errors = []

    def worker(name):
        try:
            for i in range(10):
                net.invoke("put", {"key": f"{name}/{i}", "value": b"v"}, name,
                           timeout=10)
        except Exception as exc:  # pragma: no cover - failure path
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(f"w{i}",)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    net.close()
    assert not errors
    assert len(net.primary.ledger.state_items("w")) == 40
    assert len(set(net.snapshot_digests())) == 1


# --- private data ---------------------------------------------------------------


def test_private_value_never_in_chain_bytes():
    net = kv_network()
    secret = b"the-secret-plaintext"
    response, _ = net.invoke("private_put", {
        "collection": "secrets", "key": "s1", "members": ""},
        "alice", transient={"value": secret})
    digest = response["digest"]
    chain = b"".join(block.to_bytes()
                     for block in net.primary.ledger.iter_blocks())
    assert secret not in chain
    assert digest.encode("ascii") in chain
    # Only member orgs (org1, org2) hold the plaintext.
    assert net.orgs[0].private.get("secrets", "s1") == secret
    assert net.orgs[1].private.get("secrets", "s1") == secret
    assert net.orgs[2].private.get("secrets", "s1") is None


def test_pdc_get_digest_only_for_non_members():
    net = kv_network()
    net.invoke("private_put", {"collection": "secrets", "key": "s2",
                               "members": ""}, "alice",
               transient={"value": b"classified"})
    # org1 endorses alone under required=1? No: required=2 uses org1+org2,
    # both members, so reads return plaintext.
    response, _ = net.invoke("private_get",
                             {"collection": "secrets", "key": "s2"}, "alice")
    assert response == {"present": True,
                        "digest": response["digest"],
                        "plaintext": "classified"}

    # A network where the endorser set includes a non-member would fail
    # endorsement (plaintext vs digest-only); a member-only endorser works.
    solo = kv_network(orgs=("m1", "m2", "outsider"), required=1,
                      collections={"secrets": frozenset({"m1", "m2"})})
    solo.invoke("private_put", {"collection": "secrets", "key": "s3",
                                "members": ""}, "alice",
                transient={"value": b"x"})
    # Forge the outsider's view directly via a stub simulation.
    from factledger.chaincode import simulate
    result = simulate(solo.registry, solo.orgs[2].ledger, "outsider",
                      solo.orgs[2].private.view(), solo.pdc_config,
                      "private_get", {"collection": "secrets", "key": "s3"},
                      "alice", "t" * 64, 999, {})
    assert result.response["present"] is True
    assert result.response["plaintext"] is None      # digest only


def test_pdc_membership_enforced():
    net = kv_network()
    with pytest.raises(NotAMember):
        net.submit("private_put", {"collection": "secrets", "key": "s",
                                   "members": "org3"}, "alice",
                   transient={"value": b"v"})
    with pytest.raises(UnknownCollection):
        net.submit("private_put", {"collection": "nope", "key": "s",
                                   "members": ""}, "alice",
                   transient={"value": b"v"})


def test_pdc_write_by_non_member_endorser_rejected():
    net = kv_network(orgs=("m1", "m2", "outsider"), required=3,
                     collections={"secrets": frozenset({"m1", "m2"})})
    with pytest.raises(NotAMember):
        net.submit("private_put", {"collection": "secrets", "key": "s",
                                   "members": ""}, "alice",
                   transient={"value": b"v"})


def test_private_store_persists(tmp_path):
    net = kv_network(private_dir=str(tmp_path),
                     block_log_path=str(tmp_path / "blocks.log"))
    net.invoke("private_put", {"collection": "secrets", "key": "s",
                               "members": ""}, "alice",
               transient={"value": b"keep-me"})
    net.close()

    net2 = kv_network(private_dir=str(tmp_path),
                      block_log_path=str(tmp_path / "blocks.log"))
    assert net2.orgs[0].private.get("secrets", "s") == b"keep-me"
    assert net2.primary.ledger.height == net.primary.ledger.height


def test_private_store_survives_unclean_exit(tmp_path):
    # No close(): the process is presumed killed right after the commit.
    # Private data exists nowhere but the sidecar (the chain carries only
    # its hash), so it must hit disk at commit time, not at shutdown.
    net = kv_network(private_dir=str(tmp_path),
                     block_log_path=str(tmp_path / "blocks.log"))
    net.invoke("private_put", {"collection": "secrets", "key": "s",
                               "members": ""}, "alice",
               transient={"value": b"keep-me"})

    net2 = kv_network(private_dir=str(tmp_path),
                      block_log_path=str(tmp_path / "blocks.log"))
    assert net2.orgs[0].private.get("secrets", "s") == b"keep-me"


def test_network_without_private_writes_creates_no_sidecars(tmp_path):
    # A process that never wrote private data (a failed startup, a replay
    # tool) must not create or clobber sidecar files on close.
    net = kv_network(private_dir=str(tmp_path),
                     block_log_path=str(tmp_path / "blocks.log"))
    net.invoke("put", {"key": "k", "value": b"v"}, "alice")
    net.close()
    assert not [p for p in tmp_path.iterdir()
                if p.name.startswith("private_")]


def test_reserved_prefix_blocked_for_app_writes():
    net = kv_network()
    with pytest.raises(ValueError):
        net.submit("put", {"key": pdc_state_key("secrets", "s"),
                           "value": b"spoof"}, "alice")


def test_replay_restores_nonce_counter(tmp_path):
    path = str(tmp_path / "blocks.log")
    net = kv_network(block_log_path=path)
    net.invoke("put", {"key": "a", "value": b"1"}, "alice")
    net.invoke("put", {"key": "b", "value": b"2"}, "alice")
    first_ids = {tx.tx_id for block in net.primary.ledger.iter_blocks()
                 for tx in block.tx_list}
    net.close()

    net2 = kv_network(block_log_path=path)
    net2.invoke("put", {"key": "a", "value": b"1"}, "alice")  # same args
    new_ids = {tx.tx_id for block in net2.primary.ledger.iter_blocks()
               for tx in block.tx_list}
    # The nonce keeps rising across restarts, so the repeated call gets a
    # fresh tx id instead of colliding with the logged one.
    assert len(new_ids) == len(first_ids) + 1
