#!/usr/bin/env python3
"""Command-line flags.  Every retrieval, bootstrap and audit flag overrides the matching config.ini key."""
import argparse

from ..evaluation.synthetic import CORPORA
from ..util.configuration import Section, Subsection
from ..util.errors import UsageError

COMMANDS = ("ingest", "build-index", "recommend", "evaluate", "select", "audit", "synthesize", "encode", "serve")

# flag destination -> (section, key) it overrides
CONFIG_FLAGS = {
    "key": (Section.retrieval, Subsection.key),
    "k": (Section.retrieval, Subsection.k),
    "temp": (Section.retrieval, Subsection.temperature),
    "alpha": (Section.retrieval, Subsection.alpha),
    "seed": (Section.bootstrap, Subsection.seed),
    "resamples": (Section.bootstrap, Subsection.resamples),
    "exclusion": (Section.audit, Subsection.exclusion),
    "audit_k": (Section.audit, Subsection.audit_k),
    "role": (Section.audit, Subsection.role),
    "threads": (Section.index, Subsection.threads),
    "grid_keys": (Section.selection, Subsection.grid_keys),
    "grid_k": (Section.selection, Subsection.grid_k),
    "grid_t": (Section.selection, Subsection.grid_t),
    "metric": (Section.selection, Subsection.target_metric),
    "validation_fraction": (Section.selection, Subsection.validation_fraction),
    "nbits": (Section.fingerprint, Subsection.nbits),
    "host": (Section.service, Subsection.host),
    "port": (Section.service, Subsection.port),
    "max_k": (Section.service, Subsection.max_k),
}


class ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of printing usage and exiting."""

    def error(self, message):
        raise UsageError("{}: {}".format(self.prog, message))


def _common(parser):
    parser.add_argument("--config", action="append", default=[],
                        help="Path to an INI config file; repeat to layer files, later files win.")
    parser.add_argument("--out", required=True, help="Output directory; nothing is written outside it.")
    parser.add_argument("--threads", type=int, help="Worker cap for search and bootstrap.")
    parser.add_argument("--no-log-file", dest="no_log_file", action="store_true",
                        help="Log to the console only.")


def _dataset(parser, vocab=True):
    parser.add_argument("--dataset", required=True, help="Reaction TSV.")
    if vocab:
        parser.add_argument("--vocab", help="Directory of <role>.txt vocabularies; derived from the dataset if omitted.")


def _retrieval(parser):
    parser.add_argument("--key", help="Retrieval key: rxn, rxn+delta or drfp.")
    parser.add_argument("--k", type=int, help="Neighbors per query.")
    parser.add_argument("--temp", help="'uniform' or a positive softmax temperature.")
    parser.add_argument("--alpha", type=float, help="Head weight in the hybrid, in [0, 1].")


def _artifacts(parser):
    parser.add_argument("--bank", help="Embedding bank (z_rxn, optionally z_delta).")
    parser.add_argument("--heads", nargs="+", default=[], help="Head-probability files, one per role.")


def _audit(parser):
    parser.add_argument("--exclusion", help="Exclusion rung, or 'all' for the whole ladder.")
    parser.add_argument("--audit-k", dest="audit_k", type=int, help="Neighbors kept per audited query.")
    parser.add_argument("--role", help="Role whose labels decide neighbor relevance.")


def _bootstrap(parser):
    parser.add_argument("--seed", type=int, help="Bootstrap seed.")
    parser.add_argument("--resamples", type=int, help="Bootstrap resamples.")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="condition_precedents",
                            description="Precedent-backed reaction condition recommendation.")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    ingest = commands.add_parser("ingest", help="Validate a dataset and write vocabularies, fingerprints, profile.")
    _common(ingest)
    _dataset(ingest)
    ingest.add_argument("--bank", help="Embedding bank to check against the dataset ids.")
    ingest.add_argument("--nbits", type=int, help="Fingerprint length (power of two).")

    build = commands.add_parser("build-index", help="Index the train split.")
    _common(build)
    _dataset(build)
    _retrieval(build)
    build.add_argument("--bank", help="Embedding bank for rxn and rxn+delta keys.")
    build.add_argument("--fingerprints", help="Fingerprint bank written by ingest, for drfp keys.")
    build.add_argument("--nbits", type=int, help="Fingerprint length (power of two).")

    rec = commands.add_parser("recommend", help="Recommend conditions for reactions by id or SMILES.")
    _common(rec)
    _dataset(rec, vocab=False)
    _retrieval(rec)
    _artifacts(rec)
    rec.add_argument("--index", required=True, help="Index written by build-index.")
    rec.add_argument("--ids", nargs="+", default=[], help="Reaction ids to query.")
    rec.add_argument("--smiles", nargs="+", default=[], help="Reaction SMILES 'A.B>>C' (drfp index only).")
    rec.add_argument("--top", type=int, help="Ranked labels kept per role in the output.")

    evaluate = commands.add_parser("evaluate", help="Matched predictor suite on the test split.")
    _common(evaluate)
    _dataset(evaluate)
    _retrieval(evaluate)
    _artifacts(evaluate)
    _bootstrap(evaluate)
    _audit(evaluate)

    select = commands.add_parser("select", help="Pick (key, k, t) on a hashed hold-out of train, then evaluate.")
    _common(select)
    _dataset(select)
    _artifacts(select)
    _bootstrap(select)
    select.add_argument("--alpha", type=float, help="Head weight in the hybrid, in [0, 1].")
    select.add_argument("--grid-keys", dest="grid_keys", help="Comma-separated key kinds.")
    select.add_argument("--grid-k", dest="grid_k", help="Comma-separated neighbor counts.")
    select.add_argument("--grid-t", dest="grid_t", help="Comma-separated temperatures ('uniform' allowed).")
    select.add_argument("--metric", help="Target metric such as mean_acc@1 or reagent_acc@3.")
    select.add_argument("--validation-fraction", dest="validation_fraction", type=float,
                        help="Share of train hashed into selection-validation.")

    audit = commands.add_parser("audit", help="Overlap ladder and absent/present tables.")
    _common(audit)
    _dataset(audit)
    _retrieval(audit)
    audit.add_argument("--bank", help="Embedding bank for rxn and rxn+delta keys.")
    _audit(audit)

    synth = commands.add_parser("synthesize", help="Write a seeded synthetic corpus.")
    _common(synth)
    synth.add_argument("--corpus", required=True, choices=CORPORA)
    synth.add_argument("--seed", dest="corpus_seed", type=int, help="Corpus seed; each corpus has its own default.")

    encode = commands.add_parser("encode", help="Run the key encoder over atom-level inputs into a bank.")
    _common(encode)
    encode.add_argument("--weights", required=True, help="Encoder weight container.")
    encode.add_argument("--inputs", required=True, help="Encoder input container.")

    serve = commands.add_parser("serve", help="Serve recommendations over HTTP.")
    _common(serve)
    _dataset(serve, vocab=False)
    _retrieval(serve)
    _artifacts(serve)
    serve.add_argument("--index", required=True, help="Index written by build-index.")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--max-k", dest="max_k", type=int, help="Largest k a request may ask for.")
    return parser


def config_overrides(args) -> dict:
    """(section, key) -> value for every config-backed flag that was given."""
    overrides = {}
    for dest, target in CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[target] = value
    return overrides
