"""Corpus ingestion: tokenization, vocabulary, L2-normalized TF-IDF features.

The pipeline is fully deterministic: terms get indices in lexicographic
order and IDF is the unsmoothed ln(n/df), so the same corpus file always
produces bit-identical artifacts.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AllTermsFiltered, EmptyAfterVectorize
from .sparse import CSRMatrix, SparseVector

# lowercased unicode-alphanumeric runs; underscores split tokens
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Split text into lowercased alphanumeric runs, order preserved.

    No stop-word removal and no stemming; duplicates are kept.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Document:
    id: str
    text: str
    labels: dict[str, int] = field(default_factory=dict)
    stratum_weight: float = 1.0

    def __post_init__(self):
        if self.stratum_weight <= 0:
            raise ValueError(f"stratum_weight must be positive (doc {self.id!r})")


@dataclass
class Vocabulary:
    """Term -> column map with per-term document frequency and IDF."""

    terms: list[str]                 # lexicographically sorted
    index: dict[str, int]
    df: np.ndarray
    idf: np.ndarray
    n_docs: int

    @property
    def size(self) -> int:
        return len(self.terms)


def build_vocabulary(docs: list[Document], min_df: int = 3) -> Vocabulary:
    """Retain terms appearing in at least `min_df` distinct documents.

    IDF(term) = ln(n_docs / df(term)); column indices follow lexicographic
    term order so rebuilds are reproducible.
    """
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df_counter: Counter[str] = Counter()
    for doc in docs:
        df_counter.update(set(tokenize(doc.text)))
    terms = sorted(t for t, c in df_counter.items() if c >= min_df)
    if not terms:
        raise AllTermsFiltered(f"no term reaches document frequency {min_df}")
    n = len(docs)
    df = np.array([df_counter[t] for t in terms], dtype=np.int64)
    idf = np.log(n / df)
    return Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)},
                      df=df, idf=idf, n_docs=n)


def _vectorize_tokens(tokens: list[str], vocab: Vocabulary) -> SparseVector:
    counts = Counter(tokens)
    pairs = sorted((vocab.index[t], c) for t, c in counts.items() if t in vocab.index)
    if not pairs:
        return SparseVector(np.empty(0, np.int64), np.empty(0, np.float64))
    idx = np.array([p[0] for p in pairs], dtype=np.int64)
    tf = np.array([p[1] for p in pairs], dtype=np.float64)
    weights = tf * vocab.idf[idx]
    keep = weights != 0.0  # idf 0 terms carry no signal
    idx, weights = idx[keep], weights[keep]
    norm = np.sqrt(np.sum(weights * weights))
    if norm > 0:
        weights = weights / norm
    return SparseVector(idx, weights)


@dataclass
class CorpusMatrix:
    """TF-IDF rows for one corpus plus the id <-> row bookkeeping."""

    matrix: CSRMatrix
    vocabulary: Vocabulary
    doc_ids: list[str]
    row_of: dict[str, int]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def row(self, doc_id: str) -> SparseVector:
        return self.matrix.row(self.row_of[doc_id])

    def validate(self, atol: float = 1e-9) -> None:
        """Check the norm invariant: every nonzero row has unit L2 norm."""
        sq = np.zeros(self.n_docs)
        np.add.at(sq, np.repeat(np.arange(self.n_docs), self.matrix.row_nnz()),
                  self.matrix.data ** 2)
        nonzero = sq > 0
        if not np.allclose(np.sqrt(sq[nonzero]), 1.0, atol=atol):
            raise ValueError("row norm invariant violated")


def vectorize(docs: list[Document], vocab: Vocabulary) -> CorpusMatrix:
    """TF * IDF weighting followed by row L2-normalization.

    Out-of-vocabulary terms are dropped; documents with no retained term
    become zero rows (kept, not removed).
    """
    ids = [d.id for d in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids")
    rows = [_vectorize_tokens(tokenize(d.text), vocab) for d in docs]
    matrix = CSRMatrix.from_rows(rows, vocab.size)
    return CorpusMatrix(matrix=matrix, vocabulary=vocab, doc_ids=ids,
                        row_of={doc_id: i for i, doc_id in enumerate(ids)})


def synthetic_positive(query: str, vocab: Vocabulary) -> SparseVector:
    """Vectorize a user query exactly like a document, as a positive seed."""
    if not query.strip():
        raise ValueError("query must be nonempty")
    vec = _vectorize_tokens(tokenize(query), vocab)
    if vec.nnz == 0:
        raise EmptyAfterVectorize("query shares no terms with the vocabulary")
    return vec


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def load_corpus(path: str | Path) -> list[Document]:
    """Read a corpus file: one JSON object per line, UTF-8.

    Fields: id (string), text (string), labels (map topic -> 0/1, optional),
    stratum_weight (positive number, optional, default 1.0).
    """
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            docs.append(Document(
                id=str(rec["id"]),
                text=rec["text"],
                labels={str(k): int(v) for k, v in rec.get("labels", {}).items()},
                stratum_weight=float(rec.get("stratum_weight", 1.0)),
            ))
    return docs


def save_corpus(docs: list[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            rec: dict = {"id": d.id, "text": d.text}
            if d.labels:
                rec["labels"] = d.labels
            if d.stratum_weight != 1.0:
                rec["stratum_weight"] = d.stratum_weight
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    """Tab-separated export: term, index, df, idf."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, term in enumerate(vocab.terms):
            fh.write(f"{term}\t{i}\t{int(vocab.df[i])}\t{float(vocab.idf[i])!r}\n")


def save_matrix(cm: CorpusMatrix, out_dir: str | Path) -> None:
    """Write features as flat .npy arrays plus id list and vocabulary.

    .npy is used instead of .npz because its bytes are deterministic
    (no zip timestamps), which the reproducibility checks rely on.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "features_indptr.npy", cm.matrix.indptr)
    np.save(out / "features_indices.npy", cm.matrix.indices)
    np.save(out / "features_data.npy", cm.matrix.data)
    (out / "doc_ids.txt").write_text("".join(i + "\n" for i in cm.doc_ids), encoding="utf-8")
    write_vocabulary(cm.vocabulary, out / "vocabulary.tsv")


def load_matrix(out_dir: str | Path) -> CorpusMatrix:
    out = Path(out_dir)
    indptr = np.load(out / "features_indptr.npy")
    indices = np.load(out / "features_indices.npy")
    data = np.load(out / "features_data.npy")
    doc_ids = (out / "doc_ids.txt").read_text(encoding="utf-8").splitlines()
    terms, dfs, idfs = [], [], []
    n_docs = len(doc_ids)
    with open(out / "vocabulary.tsv", encoding="utf-8") as fh:
        for line in fh:
            term, _idx, df, idf = line.rstrip("\n").split("\t")
            terms.append(term)
            dfs.append(int(df))
            idfs.append(float(idf))
    vocab = Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)},
                       df=np.array(dfs, dtype=np.int64), idf=np.array(idfs), n_docs=n_docs)
    matrix = CSRMatrix(indptr, indices, data, vocab.size)
    return CorpusMatrix(matrix=matrix, vocabulary=vocab, doc_ids=doc_ids,
                        row_of={d: i for i, d in enumerate(doc_ids)})


def labels_for_topic(docs: list[Document], topic: str) -> dict[str, int]:
    """Ground-truth map id -> 0/1 for one topic; missing labels count as 0."""
    return {d.id: int(d.labels.get(topic, 0)) for d in docs}


def stratum_weights(docs: list[Document]) -> dict[str, float]:
    return {d.id: d.stratum_weight for d in docs}


def topics_in(docs: list[Document]) -> list[str]:
    seen: set[str] = set()
    for d in docs:
        seen.update(d.labels)
    return sorted(seen)
