"""Gender-bias measurement over domain word embeddings.

Pipeline: ingest tabular corpora per domain, train or load word
embeddings, then score them with WEAT and TGBI and compare domains.
"""

__version__ = "0.1.0"
