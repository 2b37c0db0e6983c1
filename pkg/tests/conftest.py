"""Shared fixtures and tiny helpers for the suite."""

from __future__ import annotations

import contextlib
import socket
import threading
import time

import httpx
import pytest

from factledger.chaincode import OperationRegistry, PdcConfig
from factledger.config import NodeConfig
from factledger.ledger import LedgerStore
from factledger.node import FactledgerNode
from factledger.txflow import EndorsementPolicy, LogicalClock, Network


def make_config(tmp_path, **overrides) -> NodeConfig:
    base = dict(
        data_dir=str(tmp_path / "data"),
        deterministic_time=True,
        rng_seed=1234,
        request_log=False,
    )
    base.update(overrides)
    return NodeConfig(**base).check()


def make_node(tmp_path, *, background: bool = False, **overrides) -> FactledgerNode:
    node = FactledgerNode(make_config(tmp_path, **overrides))
    node.start(background_ordering=background)
    return node


def kv_registry() -> OperationRegistry:
    """Minimal chaincode for pipeline tests: raw key-value operations."""
    registry = OperationRegistry()

    def op_put(stub, args):
        stub.put_state(args["key"], args["value"])
        return {"ok": True}

    def op_get(stub, args):
        value = stub.get_state(args["key"])
        return {"value": None if value is None else value.decode("utf-8")}

    def op_bump(stub, args):
        raw = stub.get_state(args["key"])
        count = int(raw.decode("utf-8")) if raw else 0
        stub.put_state(args["key"], str(count + 1).encode("utf-8"))
        return {"count": count + 1}

    def op_delete(stub, args):
        stub.delete_state(args["key"])
        return {"ok": True}

    def op_private_put(stub, args):
        # The plaintext rides in the transient map, never in envelope args.
        value = stub.transient["value"]
        members = args.get("members")
        digest = stub.pdc_put(args["collection"], args["key"], value,
                              member_orgs=list(members.split(","))
                              if isinstance(members, str) and members else None)
        return {"digest": digest}

    def op_private_get(stub, args):
        found = stub.pdc_get(args["collection"], args["key"])
        if found is None:
            return {"present": False}
        return {"present": True, "digest": found.digest,
                "plaintext": found.value.decode("utf-8")
                if found.value is not None else None}

    registry.register("put", op_put)
    registry.register("get", op_get)
    registry.register("bump", op_bump)
    registry.register("delete", op_delete)
    registry.register("private_put", op_private_put)
    registry.register("private_get", op_private_get)
    return registry


def kv_network(*, orgs=("org1", "org2", "org3"), required=2,
               collections=None, **kwargs) -> Network:
    network = Network(
        orgs,
        kv_registry(),
        PdcConfig(collections or {"secrets": frozenset(orgs[:2])}),
        EndorsementPolicy(required, len(orgs)),
        clock=LogicalClock(),
        **kwargs,
    )
    network.bootstrap()
    return network


@pytest.fixture
def node(tmp_path):
    n = make_node(tmp_path)
    yield n
    n.stop()


# One line per acceptance criterion, printed after the run so the verdicts
# survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@contextlib.contextmanager
def live_service(tmp_path, **overrides):
    """Run the full stack (node + HTTP server) on a private port.

    Yields ``(node, base_url)``; tears everything down on exit.
    """
    import uvicorn

    from factledger.service import create_app

    node = make_node(tmp_path, background=True, **overrides)
    app = create_app(node)
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(
        app, host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 15.0
        while True:
            try:
                httpx.get(f"{base}/v1/health", timeout=1.0).raise_for_status()
                break
            except Exception:
                if time.monotonic() > deadline:
                    raise RuntimeError("service did not come up")
                time.sleep(0.05)
        yield node, base
    finally:
        server.should_exit = True
        thread.join(timeout=10.0)
        node.stop()
