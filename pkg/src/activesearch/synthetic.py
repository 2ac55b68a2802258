"""Synthetic multi-modal benchmark corpus.

The relevant class is split across several "modes" of strongly unequal
size, each with a core vocabulary (relevant docs only) and a theme
vocabulary shared with a shell of non-relevant look-alikes. What makes the
benchmark hard for a greedy reviewer is score flatness: every document,
background included, draws part of its tokens from a tiny rare "minigroup"
vocabulary, so an undiscovered mode carries about the same unknown-term
mass as ordinary background and does not float to the top of the ranking
by novelty alone. Modes still cluster tightly (core + theme tokens
dominate the TF-IDF direction), which is exactly the structure the
cluster arms exploit.

Every relevant document of mode k contains the anchor term ``m{k}core0``,
so each mode stays separable from the background at any document-frequency
cutoff up to the mode size.
"""

from __future__ import annotations

import numpy as np

from .corpus import Document

TOPIC = "relevant"

_COMMON_TERMS = 300       # Zipf-weighted shared background vocabulary
_CORE_TERMS = 6           # per mode, relevant docs only
_THEME_TERMS = 10         # per mode, shared by relevant docs and the shell
_MINIGROUP_DOCS = 6       # docs per rare minigroup
_MINIGROUP_TERMS = 5
_SHELL_FACTOR = 2         # shell (look-alike non-relevant) size per mode
_DOC_LEN_MEAN = 40

# token share per document kind: (core, theme, rare, common)
_RELEVANT_MIX = (0.30, 0.30, 0.10, 0.30)
_SHELL_MIX = (0.0, 0.40, 0.20, 0.40)
_BACKGROUND_MIX = (0.0, 0.0, 0.55, 0.45)


def mode_of_id(doc_id: str) -> int | None:
    """Mode index encoded in a generated id, None off the relevant modes."""
    if doc_id.startswith("m") and "-" in doc_id:
        return int(doc_id.split("-", 1)[0][1:])
    return None


def _mode_sizes(n_relevant: int, modes: int) -> list[int]:
    # one dominant head mode (just over half the relevant mass) and a
    # declining but fat tail, all sizes unequal; largest remainder rule
    tail = np.arange(modes, 1, -1, dtype=np.float64)
    weights = np.concatenate(([tail.sum() + 1.0], tail))
    weights /= weights.sum()
    raw = weights * n_relevant
    sizes = np.floor(raw).astype(int)
    remainder = n_relevant - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    for i in range(remainder):
        sizes[order[i]] += 1
    return sizes.tolist()


class _TokenFactory:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.common = [f"bg{i:03d}" for i in range(_COMMON_TERMS)]
        weights = 1.0 / np.arange(1, _COMMON_TERMS + 1)
        self.common_weights = weights / weights.sum()
        self._minigroup = 0
        self._minigroup_left = 0

    def common_tokens(self, count: int) -> list[str]:
        picks = self.rng.choice(_COMMON_TERMS, size=count, p=self.common_weights)
        return [self.common[j] for j in picks]

    def next_minigroup(self) -> list[str]:
        """Rare vocabulary shared by the next _MINIGROUP_DOCS documents."""
        if self._minigroup_left == 0:
            self._minigroup += 1
            self._minigroup_left = _MINIGROUP_DOCS
        self._minigroup_left -= 1
        g = self._minigroup
        return [f"r{g:05d}x{j}" for j in range(_MINIGROUP_TERMS)]

    def draw(self, vocab: list[str], count: int) -> list[str]:
        if count <= 0 or not vocab:
            return []
        picks = self.rng.choice(len(vocab), size=count)
        return [vocab[j] for j in picks]

    def compose(self, length: int, mix, core, theme, rare) -> str:
        n_core = int(round(length * mix[0]))
        n_theme = int(round(length * mix[1]))
        n_rare = int(round(length * mix[2]))
        n_common = max(0, length - n_core - n_theme - n_rare)
        tokens = []
        if n_core:
            tokens.append(core[0])  # anchor term in every relevant doc
            tokens += self.draw(core, n_core - 1)
        tokens += self.draw(theme, n_theme)
        tokens += self.draw(rare, n_rare)
        tokens += self.common_tokens(n_common)
        perm = self.rng.permutation(len(tokens))
        return " ".join(tokens[p] for p in perm)

    def length(self) -> int:
        return max(16, int(self.rng.poisson(_DOC_LEN_MEAN)))


def generate_synthetic(modes: int, n: int, prevalence: float,
                       seed: int) -> tuple[list[Document], dict[str, int]]:
    """Generate a labeled corpus of n documents with floor(n * prevalence)
    relevant ones split unevenly across `modes` hidden modes.

    Returns (documents, truth) where truth maps id -> 0/1 for the topic
    "relevant". Bit-identical output for a fixed argument tuple.
    """
    if modes < 2:
        raise ValueError("need at least two modes")
    if not (0.0 < prevalence < 0.2):
        raise ValueError("prevalence must lie in (0, 0.2)")
    n_relevant = int(np.floor(n * prevalence))
    if n_relevant < 3 * modes:
        raise ValueError(
            f"floor(n * prevalence) = {n_relevant} is too small to give every "
            f"one of the {modes} modes at least 3 documents")
    rng = np.random.default_rng(seed)
    factory = _TokenFactory(rng)

    docs: list[Document] = []
    truth: dict[str, int] = {}
    sizes = _mode_sizes(n_relevant, modes)
    n_shell = 0
    for mode, size in enumerate(sizes):
        core = [f"m{mode}core{j}" for j in range(_CORE_TERMS)]
        theme = [f"m{mode}theme{j}" for j in range(_THEME_TERMS)]
        for i in range(size):
            text = factory.compose(factory.length(), _RELEVANT_MIX,
                                   core, theme, factory.next_minigroup())
            doc_id = f"m{mode}-{i:05d}"
            docs.append(Document(id=doc_id, text=text, labels={TOPIC: 1}))
            truth[doc_id] = 1
        # shell always fits: prevalence < 0.2 keeps relevant + shell under 60%
        for i in range(_SHELL_FACTOR * size):
            text = factory.compose(factory.length(), _SHELL_MIX,
                                   core, theme, factory.next_minigroup())
            doc_id = f"s{mode}-{i:05d}"
            docs.append(Document(id=doc_id, text=text, labels={TOPIC: 0}))
            truth[doc_id] = 0
            n_shell += 1
    for i in range(n - n_relevant - n_shell):
        text = factory.compose(factory.length(), _BACKGROUND_MIX,
                               [], [], factory.next_minigroup())
        doc_id = f"zz-{i:06d}"
        docs.append(Document(id=doc_id, text=text, labels={TOPIC: 0}))
        truth[doc_id] = 0
    docs.sort(key=lambda d: d.id)
    return docs, truth
