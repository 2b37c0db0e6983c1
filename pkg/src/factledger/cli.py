"""Command-line entry points.

Subcommands:

- ``run``              start a node and serve the REST API
- ``ingest``           register a JSONL corpus through a running API
- ``simulate-voters``  drive seeded fact-checker accounts until every asset
                       is labeled
- ``verify``           offline integrity check of a block log
- ``make-corpus``      generate a synthetic JSONL corpus

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 runtime
error (unreachable API, corrupt inputs, simulation stall, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Optional

import httpx

from . import __version__, corpus
from .config import load_config
from .errors import FactledgerError
from .factcheck.records import VERDICTS, compute_news_id
from .ledger import BlockLog

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factledger",
        description="Fact-checking platform on a permissioned ledger")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="start a node and serve the REST API")
    run.add_argument("--config", help="path to a key=value config file")
    run.add_argument("--host", help="bind address (overrides config)")
    run.add_argument("--port", type=int, help="port (overrides config)")
    run.add_argument("--data-dir", help="data directory (overrides config)")

    ingest = sub.add_parser("ingest", help="register a JSONL corpus via the API")
    ingest.add_argument("--corpus", required=True, help="JSONL corpus path")
    ingest.add_argument("--api", default="http://127.0.0.1:8370",
                        help="base URL of a running service")
    ingest.add_argument("--username", default="curator")
    ingest.add_argument("--credential", default="curator-secret")
    ingest.add_argument("--map-out",
                        help="write external_id -> news_id JSON map here")
    ingest.add_argument("--quiet", action="store_true",
                        help="suppress per-entry lines")

    sim = sub.add_parser("simulate-voters",
                         help="run seeded voter accounts until all news is labeled")
    sim.add_argument("--corpus", required=True,
                     help="JSONL corpus with ground-truth labels")
    sim.add_argument("--api", default="http://127.0.0.1:8370")
    sim.add_argument("--voters", type=int, default=3)
    sim.add_argument("--accuracy", type=float, default=0.8,
                     help="probability a voter matches the ground truth")
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--curator-id", default="curator")
    sim.add_argument("--curator-credential", default="curator-secret")
    sim.add_argument("--max-rounds", type=int, default=50)
    sim.add_argument("--quiet", action="store_true")

    verify = sub.add_parser("verify", help="offline block-log integrity check")
    verify.add_argument("--data-dir", required=True,
                        help="node data directory containing blocks.log")

    make = sub.add_parser("make-corpus", help="generate a synthetic corpus")
    make.add_argument("--n", type=int, default=300)
    make.add_argument("--seed", type=int, default=7)
    make.add_argument("--out", required=True)

    return parser


# --- run ------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    import uvicorn

    from .node import FactledgerNode
    from .service import create_app

    cfg = load_config(args.config)
    overrides = {}
    if args.host:
        overrides["host"] = args.host
    if args.port:
        overrides["port"] = args.port
    if args.data_dir:
        overrides["data_dir"] = args.data_dir
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides).check()

    node = FactledgerNode(cfg)
    node.start(background_ordering=True)
    app = create_app(node)
    print(f"factledger starting on http://{cfg.host}:{cfg.port} "
          f"(data: {cfg.data_dir or 'in-memory'})", flush=True)
    server = uvicorn.Server(uvicorn.Config(
        app, host=cfg.host, port=cfg.port, log_level="warning"))
    try:
        server.run()
    except SystemExit:
        # uvicorn exits the interpreter when startup fails (e.g. the port
        # is taken); turn that into an ordinary error return so the message
        # below is printed and embedders get a code instead of an exception.
        pass
    finally:
        node.stop()
    if not server.started:
        print(f"error: could not start server on {cfg.host}:{cfg.port} "
              "(is the port already in use?)", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


# --- ingest -----------------------------------------------------------------------


def _login(client: httpx.Client, api: str, username: str, credential: str) -> dict:
    resp = client.post(f"{api}/v1/login",
                       json={"username": username, "credential": credential})
    if resp.status_code != 200:
        raise FactledgerError(
            f"login failed for {username!r}: {resp.status_code} {resp.text}")
    data = resp.json()
    return {"Authorization": f"Bearer {data['token']}"}


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        entries = corpus.read_jsonl(args.corpus)
    except (OSError, FactledgerError) as exc:
        print(f"error: cannot read corpus: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    registered = duplicates = failed = 0
    mapping: dict[str, str] = {}
    try:
        with httpx.Client(timeout=60.0) as client:
            headers = _login(client, args.api, args.username, args.credential)
            for entry in entries:
                resp = client.post(f"{args.api}/v1/news", headers=headers, json={
                    "content": entry.content,
                    "content_format": "text",
                    "created_at": entry.created_at,
                    "author": entry.author,
                    "platform": entry.platform,
                })
                if resp.status_code in (200, 201):
                    body = resp.json()
                    mapping[entry.external_id] = body["news_id"]
                    if body.get("duplicate"):
                        duplicates += 1
                        state = "duplicate"
                    else:
                        registered += 1
                        state = "registered"
                    if not args.quiet:
                        print(f"{state} {entry.external_id} -> {body['news_id'][:16]}")
                else:
                    failed += 1
                    print(f"failed {entry.external_id}: "
                          f"{resp.status_code} {resp.text}", file=sys.stderr)
    except (httpx.HTTPError, FactledgerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.map_out:
        with open(args.map_out, "w", encoding="utf-8") as fh:
            json.dump(mapping, fh, indent=1, sort_keys=True)
    print(f"ingest complete: {registered} registered, {duplicates} duplicates, "
          f"{failed} failed out of {len(entries)}")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


# --- simulate-voters ------------------------------------------------------------------


def cmd_simulate_voters(args: argparse.Namespace) -> int:
    try:
        entries = corpus.read_jsonl(args.corpus)
    except (OSError, FactledgerError) as exc:
        print(f"error: cannot read corpus: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    truth_by_news = {
        compute_news_id(e.content.encode("utf-8"), "text"): e.truth
        for e in entries if e.truth in VERDICTS
    }
    rng = random.Random(args.seed)
    voters = [f"voter-{i + 1}" for i in range(args.voters)]

    def pick_verdict(news_id: str) -> str:
        truth = truth_by_news.get(news_id)
        if truth is None:
            return rng.choice(VERDICTS)
        if rng.random() < args.accuracy:
            return truth
        return rng.choice([v for v in VERDICTS if v != truth])

    votes_cast = 0
    finalized = 0
    try:
        with httpx.Client(timeout=60.0) as client:
            curator = _login(client, args.api, args.curator_id,
                             args.curator_credential)
            tokens = {}
            for name in voters:
                resp = client.post(f"{args.api}/v1/fact-checkers",
                                   headers=curator, json={
                                       "checker_id": name,
                                       "display_name": f"Simulated voter {name}",
                                       "credential": f"{name}-secret",
                                   })
                if resp.status_code not in (201, 409):
                    print(f"error: cannot create {name}: "
                          f"{resp.status_code} {resp.text}", file=sys.stderr)
                    return EXIT_RUNTIME
                tokens[name] = _login(client, args.api, name, f"{name}-secret")

            for round_no in range(1, args.max_rounds + 1):
                progress = 0
                for name in voters:
                    resp = client.get(f"{args.api}/v1/notifications",
                                      headers=tokens[name])
                    resp.raise_for_status()
                    for note in resp.json()["notifications"]:
                        news_id = note["news_id"]
                        verdict = pick_verdict(news_id)
                        vote = client.post(
                            f"{args.api}/v1/news/{news_id}/votes",
                            headers=tokens[name],
                            json={"verdict": verdict,
                                  "rationale": f"{name} assessed this as "
                                               f"{verdict.lower()} in round {round_no}"})
                        if vote.status_code == 201:
                            votes_cast += 1
                            progress += 1
                            if vote.json().get("finalized"):
                                finalized += 1
                        elif vote.status_code == 409:
                            # Raced with a finalization; skip.
                            progress += 1
                        else:
                            print(f"error: vote by {name} failed: "
                                  f"{vote.status_code} {vote.text}",
                                  file=sys.stderr)
                            return EXIT_RUNTIME
                dash = client.get(f"{args.api}/v1/dashboard", headers=curator)
                dash.raise_for_status()
                summary = dash.json()
                if not args.quiet:
                    print(f"round {round_no}: votes={votes_cast} "
                          f"awaiting={summary['awaiting_evaluation']}")
                if summary["awaiting_evaluation"] == 0:
                    _print_summary(client, args.api, curator, votes_cast,
                                   finalized)
                    return EXIT_OK
                if progress == 0:
                    print("error: simulation stalled (quorum unreachable "
                          "with the configured voters?)", file=sys.stderr)
                    return EXIT_RUNTIME
        print("error: assets still awaiting evaluation after "
              f"{args.max_rounds} rounds", file=sys.stderr)
        return EXIT_RUNTIME
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _print_summary(client: httpx.Client, api: str, headers: dict,
                   votes_cast: int, finalized: int) -> None:
    dash = client.get(f"{api}/v1/dashboard", headers=headers).json()
    checkers = client.get(f"{api}/v1/fact-checkers", headers=headers).json()
    print(f"simulation complete: {votes_cast} votes cast, "
          f"{finalized} finalizations triggered")
    print(f"dashboard: total_news={dash['total_news']} "
          f"total_on_chain={dash['total_on_chain']} "
          f"awaiting_evaluation={dash['awaiting_evaluation']}")
    print(f"verdicts: {json.dumps(dash['verdicts'], sort_keys=True)}")
    print(f"tokens minted: {dash['tokens_minted']}")
    for checker in checkers["checkers"]:
        if checker["role"] != "checker":
            continue
        print(f"  {checker['checker_id']}: balance={checker['token_balance']} "
              f"credibility={checker['credibility']:.4f}")


# --- verify --------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    path = os.path.join(args.data_dir, "blocks.log")
    if not os.path.exists(path):
        print(f"error: no block log at {path}", file=sys.stderr)
        return EXIT_RUNTIME
    report = BlockLog.verify_file(path)
    if report.ok:
        print(f"ok: {report.blocks_checked} blocks verified")
        return EXIT_OK
    print(f"FAILED at height {report.first_bad_height}: {report.reason} "
          f"({report.blocks_checked} blocks checked)")
    return EXIT_VERIFY_FAILED


# --- make-corpus ------------------------------------------------------------------------


def cmd_make_corpus(args: argparse.Namespace) -> int:
    if args.n < 1:
        print("error: --n must be positive", file=sys.stderr)
        return EXIT_USAGE
    entries = corpus.generate(args.n, seed=args.seed)
    corpus.write_jsonl(entries, args.out)
    counts: dict[str, int] = {}
    for entry in entries:
        counts[entry.truth] = counts.get(entry.truth, 0) + 1
    print(f"wrote {len(entries)} entries to {args.out} "
          f"({json.dumps(counts, sort_keys=True)})")
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "ingest": cmd_ingest,
    "simulate-voters": cmd_simulate_voters,
    "verify": cmd_verify,
    "make-corpus": cmd_make_corpus,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; normalize (0 for --help/--version)
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except FactledgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
