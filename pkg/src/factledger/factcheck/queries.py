"""Read-only views over committed state.

Locations (which block holds a record) are never stored inside records;
they are derived from the committed key versions at query time, because a
transaction cannot know its own block height while it is being simulated.
"""

from __future__ import annotations

import json
from typing import Callable, Optional

from ..errors import NotFound, UnknownChecker
from ..ledger import LedgerStore
from ..scoring import is_suspicious
from . import records
from .records import (
    ConsensusPolicy,
    FactChecker,
    NewsAsset,
    VoteRecord,
    checker_key,
    consensus_key,
    news_key,
    vote_key,
)


class FactcheckQueries:
    def __init__(self, store: Callable[[], LedgerStore],
                 policy: ConsensusPolicy, suspicion_threshold: float) -> None:
        self._store = store
        self.policy = policy
        self.suspicion_threshold = suspicion_threshold

    # --- news ------------------------------------------------------------------

    def check_news(self, news_id: str) -> dict:
        """Public view of one asset, including its on-chain locations."""
        store = self._store()
        found = store.state_get(news_key(news_id))
        if found is None:
            raise NotFound(f"no such news asset: {news_id}", news_id=news_id)
        value, version = found
        asset = NewsAsset.from_bytes(value)
        view = self._asset_view(asset)
        view["register_block"] = self._tx_height(store, asset.register_tx)
        if asset.status == records.STATUS_LABELED:
            consensus = store.state_get(consensus_key(news_id))
            if consensus is not None:
                view["label_block"] = consensus[1][0]
                view["consensus"] = json.loads(consensus[0].decode("utf-8"))
        view["last_update_block"] = version[0]
        return view

    def list_news(self) -> list[dict]:
        store = self._store()
        assets = [NewsAsset.from_bytes(value)
                  for _k, value, _v in store.state_items(records.NEWS_PREFIX)]
        assets.sort(key=lambda a: a.seq, reverse=True)
        return [self._asset_view(a) for a in assets]

    def list_suspicious(self) -> list[dict]:
        """Unlabeled assets whose score strictly exceeds the threshold."""
        out = []
        for view in self.list_news():
            if view["status"] != records.STATUS_UNDER_ANALYSIS:
                continue
            score = view.get("score")
            if score is None:
                continue
            if is_suspicious(score["score"], self.suspicion_threshold):
                out.append(view)
        return out

    def _asset_view(self, asset: NewsAsset) -> dict:
        view = {
            "news_id": asset.news_id,
            "content_format": asset.content_format,
            "content_b64": asset.content_b64,
            "created_at": asset.created_at,
            "author": asset.author,
            "platform": asset.platform,
            "excerpt": asset.excerpt,
            "seq": asset.seq,
            "status": asset.status,
            "score": asset.score,
            "vote_count": asset.vote_count,
            "register_tx": asset.register_tx,
        }
        if asset.status == records.STATUS_LABELED:
            view["verdict"] = asset.verdict
            view["finalize_tx"] = asset.finalize_tx
        return view

    # --- voting ----------------------------------------------------------------

    def votes_for(self, news_id: str) -> list[dict]:
        """Vote records; sealed ones expose the commitment only."""
        store = self._store()
        out = []
        for _key, value, version in store.state_items(vote_key(news_id, "")):
            record = VoteRecord.from_bytes(value)
            item = {
                "news_id": record.news_id,
                "checker_id": record.checker_id,
                "commitment": record.commitment,
                "revealed": record.revealed,
                "cast_tx": record.cast_tx,
                "cast_block": self._tx_height(store, record.cast_tx),
            }
            if record.revealed:
                item["verdict"] = record.verdict
                item["rationale"] = record.rationale
                item["salt_hex"] = record.salt_hex
            out.append(item)
        return out

    def notifications(self, checker_id: str) -> list[dict]:
        """Pending work for a checker: unlabeled news they have not voted on.

        Derived on the fly from committed state, so it is idempotent and
        needs no notification storage.
        """
        store = self._store()
        found = store.state_get(checker_key(checker_id))
        if found is None:
            raise UnknownChecker(f"no such fact-checker: {checker_id}",
                                 checker_id=checker_id)
        checker = FactChecker.from_bytes(found[0])
        if not checker.active:
            return []
        pending = []
        for _k, value, _v in store.state_items(records.NEWS_PREFIX):
            asset = NewsAsset.from_bytes(value)
            if asset.status != records.STATUS_UNDER_ANALYSIS:
                continue
            if store.state_get(vote_key(asset.news_id, checker_id)) is not None:
                continue
            pending.append(asset)
        pending.sort(key=lambda a: a.seq)
        return [
            {"news_id": a.news_id, "excerpt": a.excerpt,
             "score": (a.score or {}).get("score"),
             "vote_count": a.vote_count, "seq": a.seq}
            for a in pending
        ]

    def classification_order(self, news_id: str) -> list[dict]:
        """Checkers still expected to evaluate ``news_id``."""
        store = self._store()
        if store.state_get(news_key(news_id)) is None:
            raise NotFound(f"no such news asset: {news_id}", news_id=news_id)
        out = []
        for _k, value, _v in store.state_items(records.CHECKER_PREFIX):
            checker = FactChecker.from_bytes(value)
            if not checker.active or checker.role != records.ROLE_CHECKER:
                continue
            if store.state_get(vote_key(news_id, checker.checker_id)) is not None:
                continue
            out.append({"news_id": news_id, "checker_id": checker.checker_id})
        return out

    # --- people ----------------------------------------------------------------

    def get_checker(self, checker_id: str) -> dict:
        store = self._store()
        found = store.state_get(checker_key(checker_id))
        if found is None:
            raise UnknownChecker(f"no such fact-checker: {checker_id}",
                                 checker_id=checker_id)
        return FactChecker.from_bytes(found[0]).public_view()

    def load_checker(self, checker_id: str) -> FactChecker:
        store = self._store()
        found = store.state_get(checker_key(checker_id))
        if found is None:
            raise UnknownChecker(f"no such fact-checker: {checker_id}",
                                 checker_id=checker_id)
        return FactChecker.from_bytes(found[0])

    def list_checkers(self) -> list[dict]:
        store = self._store()
        return [FactChecker.from_bytes(value).public_view()
                for _k, value, _v in store.state_items(records.CHECKER_PREFIX)]

    # --- aggregates --------------------------------------------------------------

    def reward_total(self) -> int:
        store = self._store()
        found = store.state_get(records.REWARD_TOTAL_KEY)
        if found is None:
            return 0
        return int(json.loads(found[0].decode("utf-8"))["total"])

    def dashboard(self) -> dict:
        """Platform counters.

        - ``total_news``: assets registered
        - ``total_on_chain``: assets whose final label is recorded on chain
        - ``ai_evaluated``: assets that carry a propensity score
        - ``awaiting_evaluation``: assets still under analysis
        """
        store = self._store()
        total = labeled = scored = suspicious = 0
        verdicts = {v: 0 for v in records.VERDICTS}
        for _k, value, _v in store.state_items(records.NEWS_PREFIX):
            asset = NewsAsset.from_bytes(value)
            total += 1
            if asset.score is not None:
                scored += 1
            if asset.status == records.STATUS_LABELED:
                labeled += 1
                if asset.verdict in verdicts:
                    verdicts[asset.verdict] += 1
            elif asset.score is not None and is_suspicious(
                    asset.score["score"], self.suspicion_threshold):
                suspicious += 1
        return {
            "total_news": total,
            "total_on_chain": labeled,
            "ai_evaluated": scored,
            "awaiting_evaluation": total - labeled,
            "suspicious_open": suspicious,
            "verdicts": verdicts,
            "tokens_minted": self.reward_total(),
            "chain_height": store.height,
        }

    # --- helpers ---------------------------------------------------------------

    @staticmethod
    def _tx_height(store: LedgerStore, tx_id: Optional[str]) -> Optional[int]:
        if not tx_id:
            return None
        try:
            _tx, height, _idx = store.get_transaction(tx_id)
        except NotFound:
            return None
        return height
