"""Error taxonomy for the platform.

Every error carries a stable machine-readable ``code`` so the REST layer can
map it to an HTTP status and clients can branch without parsing messages.
"""

from __future__ import annotations

from typing import Any


class FactledgerError(Exception):
    """Base class; ``code`` is stable, ``details`` is free-form context."""

    code = "INTERNAL"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details


# --- encoding / storage ----------------------------------------------------

class CodecError(FactledgerError):
    code = "CODEC"


class LedgerError(FactledgerError):
    code = "LEDGER"


class ChainNotInitialized(LedgerError):
    code = "CHAIN_NOT_INITIALIZED"


class ChainAlreadyInitialized(LedgerError):
    code = "CHAIN_ALREADY_INITIALIZED"


class EmptyBlock(LedgerError):
    code = "EMPTY_BLOCK"


class CorruptLog(LedgerError):
    code = "CORRUPT_LOG"


# --- transaction flow -------------------------------------------------------

class UnknownOperation(FactledgerError):
    code = "UNKNOWN_OPERATION"


class EndorsementMismatch(FactledgerError):
    code = "ENDORSEMENT_MISMATCH"


class PolicyUnsatisfiable(FactledgerError):
    code = "POLICY_UNSATISFIABLE"


class UnknownCollection(FactledgerError):
    code = "UNKNOWN_COLLECTION"


class NotAMember(FactledgerError):
    code = "NOT_A_MEMBER"


class TxConflict(FactledgerError):
    """Transaction committed as invalid (stale reads or duplicate id)."""

    code = "TX_CONFLICT"


class ReplicaDivergence(FactledgerError):
    code = "REPLICA_DIVERGENCE"


# --- domain -----------------------------------------------------------------

class NotFound(FactledgerError):
    code = "NOT_FOUND"


class EmptyContent(FactledgerError):
    code = "EMPTY_CONTENT"


class UnknownChecker(FactledgerError):
    code = "UNKNOWN_CHECKER"


class CheckerExists(FactledgerError):
    code = "CHECKER_EXISTS"


class InactiveChecker(FactledgerError):
    code = "INACTIVE_CHECKER"


class NotAuthorized(FactledgerError):
    code = "NOT_AUTHORIZED"


class AlreadyVoted(FactledgerError):
    code = "ALREADY_VOTED"


class NewsAlreadyLabeled(FactledgerError):
    code = "NEWS_ALREADY_LABELED"


class UnknownVerdict(FactledgerError):
    code = "UNKNOWN_VERDICT"


class CommitmentMismatch(FactledgerError):
    code = "COMMITMENT_MISMATCH"


class QuorumNotReached(FactledgerError):
    code = "QUORUM_NOT_REACHED"


class EmptyVotes(FactledgerError):
    code = "EMPTY_VOTES"


class ConfigError(FactledgerError):
    code = "CONFIG"


class BadRequest(FactledgerError):
    code = "BAD_REQUEST"


class AuthFailed(FactledgerError):
    code = "AUTH_FAILED"
