"""factledger: a self-contained fact-checking platform on a permissioned ledger.

The package is organized bottom-up:

- ``codec``     canonical byte encoding shared by hashing and storage
- ``ledger``    hash-chained block store with an MVCC world state
- ``chaincode`` operation registry and the simulation stub
- ``txflow``    execute-order-validate pipeline across simulated peer orgs
- ``scoring``   deterministic falsehood-propensity scorer
- ``factcheck`` domain records, consensus, chaincode operations, queries
- ``service``   authenticated REST facade
- ``cli``       run / ingest / simulate-voters / verify entry points
"""

__version__ = "0.1.0"
