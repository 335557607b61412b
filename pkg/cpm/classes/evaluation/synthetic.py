#!/usr/bin/env python3
"""Seeded synthetic corpora with planted structure.

    complementarity   clustered keys, noisy cluster labels and a head that is sharp on half
                      the rows; the alpha = 0.5 hybrid beats both of its components
    clusters          clustered keys where a 5-neighbor vote beats the single nearest neighbor
    duplicates        reaction families with exact duplicates, shared-pair variants,
                      shared-product variants and publication siblings
    absent            exact absent counts per role (870 of 1000 catalyst rows)

Molecules are unique chains over C, N and O, so every reaction string is distinct
unless a duplicate is planted on purpose."""
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..ingest.bank import EmbeddingBank, write_embedding_bank
from ..ingest.heads import HeadProbabilities, write_head_probabilities
from ..ingest.reactions import write_reactions
from ..model.records import ReactionRecord
from ..model.roles import Role, ROLES, Split
from ..model.vocabulary import RoleVocabulary, write_vocabularies
from ..util.errors import UsageError

ATOMS = "CNO"
MOLECULE_WIDTH = 10
CORPORA = ("complementarity", "clusters", "duplicates", "absent")


@dataclass
class SyntheticCorpus:
    records: List[ReactionRecord]
    vocabs: Dict[Role, RoleVocabulary]
    bank: Optional[EmbeddingBank] = None
    heads: Optional[HeadProbabilities] = None

    def split(self, split: Split) -> List[ReactionRecord]:
        return [record for record in self.records if record.split == split]


def molecule(i: int) -> str:
    """The i-th chain: base-3 digits of i over C/N/O, fixed width."""
    if not 0 <= i < len(ATOMS) ** MOLECULE_WIDTH:
        raise UsageError("Molecule index {} is out of range.".format(i))
    digits = []
    for _ in range(MOLECULE_WIDTH):
        i, digit = divmod(i, len(ATOMS))
        digits.append(ATOMS[digit])
    return "".join(reversed(digits))


def role_labels(role: Role, count: int) -> Tuple[str, ...]:
    return tuple("{}_{:02d}".format(role.value, i) for i in range(count))


def _vocabs(count: int) -> Dict[Role, RoleVocabulary]:
    return {role: RoleVocabulary(role, role_labels(role, count)) for role in ROLES}


def _record(i: int, split: Split, labels: Dict[Role, Optional[str]], proxy: Optional[str] = None,
            prefix: str = "rxn") -> ReactionRecord:
    return ReactionRecord("{}{:05d}".format(prefix, i), (molecule(2 * i),), (molecule(2 * i + 1),),
                          labels.get(Role.catalyst), labels.get(Role.solvent), labels.get(Role.reagent),
                          split, proxy)


def _clustered(rng, clusters: int, dim: int, noise: float, n: int, prototypes: np.ndarray):
    assignment = rng.integers(0, clusters, size=n)
    return assignment, prototypes[assignment] + noise * rng.standard_normal((n, dim))


def _noisy_labels(rng, cluster_labels: np.ndarray, assignment: np.ndarray, fidelity: float,
                  count: int) -> np.ndarray:
    """Present class per row: the cluster's label with probability fidelity, else uniform."""
    keep = rng.random(len(assignment)) < fidelity
    return np.where(keep, cluster_labels[assignment], rng.integers(1, count + 1, size=len(assignment)))


def _head_rows(rng, truth: np.ndarray, count: int, informed: float) -> np.ndarray:
    """Informed rows put 0.95 on the true class; the rest put 0.3 on a wrong class and 0.1 on the truth."""
    size = count + 1
    probs = np.empty((len(truth), size))
    for i, label in enumerate(truth):
        if rng.random() < informed:
            row = np.full(size, 0.05 / (size - 1))
            row[label] = 0.95
        else:
            wrong = rng.choice([c for c in range(1, size) if c != label])
            row = np.full(size, 0.6 / (size - 2))
            row[wrong] = 0.3
            row[label] = 0.1
        probs[i] = row / row.sum()
    return probs


def complementarity_corpus(seed: int = 7, train: int = 2000, test: int = 1000, clusters: int = 20, dim: int = 32,
                           labels: int = 10, fidelity: float = 0.7, noise: float = 0.3,
                           informed: float = 0.5) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    n = train + test
    prototypes = rng.standard_normal((clusters, dim))
    delta_prototypes = rng.standard_normal((clusters, dim))
    assignment, z_rxn = _clustered(rng, clusters, dim, noise, n, prototypes)
    z_delta = delta_prototypes[assignment] + noise * rng.standard_normal((n, dim))

    truth = {}
    for role in ROLES:
        cluster_labels = rng.integers(1, labels + 1, size=clusters)
        truth[role] = _noisy_labels(rng, cluster_labels, assignment, fidelity, labels)
    vocabs = _vocabs(labels)
    records = [_record(i, Split.train if i < train else Split.test,
                       {role: vocabs[role].label_for(int(truth[role][i])) for role in ROLES})
               for i in range(n)]
    ids = [record.id for record in records]
    heads = HeadProbabilities({role: (ids, _head_rows(rng, truth[role], labels, informed)) for role in ROLES})
    logging.info("Complementarity corpus: {} train, {} test, {} clusters.".format(train, test, clusters))
    return SyntheticCorpus(records, vocabs, EmbeddingBank(ids, z_rxn, z_delta), heads)


def cluster_corpus(seed: int = 11, train: int = 3000, test: int = 0, clusters: int = 20, dim: int = 32,
                   labels: int = 10, fidelity: float = 0.6, noise: float = 0.3) -> SyntheticCorpus:
    """One noisy label per neighbor makes the single nearest neighbor a poor voter."""
    rng = np.random.default_rng(seed)
    n = train + test
    prototypes = rng.standard_normal((clusters, dim))
    assignment, z_rxn = _clustered(rng, clusters, dim, noise, n, prototypes)
    vocabs = _vocabs(labels)
    truth = {role: _noisy_labels(rng, rng.integers(1, labels + 1, size=clusters), assignment, fidelity, labels)
             for role in ROLES}
    records = [_record(i, Split.train if i < train else Split.test,
                       {role: vocabs[role].label_for(int(truth[role][i])) for role in ROLES})
               for i in range(n)]
    return SyntheticCorpus(records, vocabs, EmbeddingBank([record.id for record in records], z_rxn))


class _Molecules:
    def __init__(self):
        self.next = 0

    def __call__(self) -> str:
        self.next += 1
        return molecule(self.next - 1)


def duplicate_corpus(seed: int = 13, families: int = 20, dim: int = 16, noise: float = 0.01,
                     copies: int = 2) -> SyntheticCorpus:
    """Per family f, all labelled family_f and keyed near one random center:

        base                 [A, B] >> [P], proxy pub_f       (train, plus a test copy)
        exact duplicates     [A, B] >> [P]                    x copies
        pair variants        [A, X] >> [P]                    x copies
        product variants     [Y, Z] >> [P]                    x copies
        publication siblings [U, V] >> [Q], proxy pub_f       x copies

    Querying the test copy with five neighbors gives P@5 of 1, 1, 0.8, 0.4 and 0
    along the exclusion ladder when copies = 2."""
    rng = np.random.default_rng(seed)
    fresh = _Molecules()
    vocabs = {role: RoleVocabulary(role, tuple("family_{:03d}".format(f) for f in range(families))) for role in ROLES}
    records, vectors = [], []

    def add(name, reactants, products, split, proxy, label, center):
        records.append(ReactionRecord(name, tuple(reactants), tuple(products), label, label, label, split, proxy))
        vectors.append(center + noise * rng.standard_normal(dim))

    for f in range(families):
        center = rng.standard_normal(dim)
        label = "family_{:03d}".format(f)
        proxy = "pub_{:03d}".format(f)
        a, b, p = fresh(), fresh(), fresh()
        add("f{:03d}_base".format(f), [a, b], [p], Split.train, proxy, label, center)
        for j in range(copies):
            add("f{:03d}_dup{}".format(f, j), [a, b], [p], Split.train, None, label, center)
            add("f{:03d}_pair{}".format(f, j), [a, fresh()], [p], Split.train, None, label, center)
            add("f{:03d}_product{}".format(f, j), [fresh(), fresh()], [p], Split.train, None, label, center)
            add("f{:03d}_sibling{}".format(f, j), [fresh(), fresh()], [fresh()], Split.train, proxy, label, center)
        add("f{:03d}_query".format(f), [a, b], [p], Split.test, proxy, label, center)
    bank = EmbeddingBank([record.id for record in records], np.array(vectors))
    return SyntheticCorpus(records, vocabs, bank)


def _spread(total: int, parts: int) -> List[int]:
    q, r = divmod(total, parts)
    return [q + 1] * r + [q] * (parts - r)


def _exact_classes(rng, counts: List[int]) -> np.ndarray:
    """Class c appears exactly counts[c] times, in random order."""
    classes = np.repeat(np.arange(len(counts)), counts)
    rng.shuffle(classes)
    return classes


ABSENT_COUNTS = {
    # class 0 first: the absent count, then per-label counts
    Role.catalyst: [870] + _spread(130, 5),
    Role.solvent: [90, 156] + _spread(754, 9),
    Role.reagent: [300] + _spread(700, 10),
}


def absent_corpus(seed: int = 17, rows: int = 1000) -> SyntheticCorpus:
    """Train and test each hold exactly ABSENT_COUNTS of every class (per 1000 rows)."""
    if rows != 1000:
        raise UsageError("The absent corpus is defined for 1000 rows per split.")
    rng = np.random.default_rng(seed)
    vocabs = {role: RoleVocabulary(role, role_labels(role, len(counts) - 1)) for role, counts in ABSENT_COUNTS.items()}
    records = []
    for offset, split in ((0, Split.train), (rows, Split.test)):
        classes = {role: _exact_classes(rng, counts) for role, counts in ABSENT_COUNTS.items()}
        records += [_record(offset + i, split, {role: vocabs[role].label_for(int(classes[role][i])) for role in ROLES})
                    for i in range(rows)]
    z_rxn = rng.standard_normal((len(records), 8))
    return SyntheticCorpus(records, vocabs, EmbeddingBank([record.id for record in records], z_rxn))


def planted_gap(rng, rows: int = 10000, base: float = 0.7, gain: float = 0.03,
                loss: float = 0.02) -> Tuple[np.ndarray, np.ndarray]:
    """Paired 0/1 correctness vectors whose mean difference is exactly gain - loss.

    Exactly round(rows * gain) rows flip from wrong to right and round(rows * loss)
    from right to wrong, at random positions."""
    a = np.zeros(rows, dtype=np.int8)
    a[:int(round(rows * base))] = 1
    rng.shuffle(a)
    wrong, right = np.flatnonzero(a == 0), np.flatnonzero(a == 1)
    up = rng.choice(wrong, int(round(rows * gain)), replace=False)
    down = rng.choice(right, int(round(rows * loss)), replace=False)
    b = a.copy()
    b[up] = 1
    b[down] = 0
    return a, b


GENERATORS = {"complementarity": complementarity_corpus, "clusters": cluster_corpus,
              "duplicates": duplicate_corpus, "absent": absent_corpus}


def generate(name: str, seed: Optional[int] = None) -> SyntheticCorpus:
    if name not in GENERATORS:
        raise UsageError("Unknown synthetic corpus '{}'; expected one of {}.".format(name, ", ".join(CORPORA)))
    return GENERATORS[name]() if seed is None else GENERATORS[name](seed=seed)


def corpus_paths(out_dir: str) -> Dict[str, str]:
    paths = {"reactions": os.path.join(out_dir, "reactions.tsv"),
             "bank": os.path.join(out_dir, "bank.bin"),
             "vocab": os.path.join(out_dir, "vocab")}
    paths.update({"heads_{}".format(role.value): os.path.join(out_dir, "heads_{}.bin".format(role.value))
                  for role in ROLES})
    return paths


def write_corpus(corpus: SyntheticCorpus, out_dir: str) -> List[str]:
    """Writes reactions.tsv, vocab/<role>.txt, bank.bin and heads_<role>.bin; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = corpus_paths(out_dir)
    written = [paths["reactions"], paths["vocab"]]
    write_reactions(corpus.records, paths["reactions"])
    write_vocabularies(corpus.vocabs, paths["vocab"])
    if corpus.bank is not None:
        write_embedding_bank(corpus.bank, paths["bank"])
        written.append(paths["bank"])
    if corpus.heads is not None:
        ids = [record.id for record in corpus.records]
        for role in corpus.heads.roles:
            path = paths["heads_{}".format(role.value)]
            write_head_probabilities(path, role, ids, corpus.heads.matrix(role, ids))
            written.append(path)
    logging.info("Wrote synthetic corpus of {} reactions to '{}'.".format(len(corpus.records), out_dir))
    return written
