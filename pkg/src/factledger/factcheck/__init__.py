"""Fact-checking domain: records, consensus, chaincode operations, queries."""

from .records import (  # noqa: F401
    CHECKER_PREFIX,
    CONSENSUS_PREFIX,
    NEWS_PREFIX,
    REWARD_TOTAL_KEY,
    VERDICTS,
    VOTE_PREFIX,
    VOTES_COLLECTION,
    ConsensusPolicy,
    FactChecker,
    NewsAsset,
    VoteRecord,
    compute_news_id,
    decode_reveal,
    encode_reveal,
)
from .consensus import tally_votes, update_credibility  # noqa: F401
from .contract import FactcheckContract  # noqa: F401
from .queries import FactcheckQueries  # noqa: F401
