#!/usr/bin/env python3
"""Pipeline commands.

main() loads configuration, applies flag overrides, checks inputs, runs one
command and writes its RunManifest into --out.  A failure prints exactly one
line to stderr,
    error code=<exit code> kind=<exception class> message=<JSON string>
and returns 2 (usage), 3 (data) or 4 (internal invariant)."""
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional

from .arguments import build_parser, config_overrides
from .manifest import RunManifest, config_snapshot
from ..evaluation.audit import ExclusionRung, overlap_audit
from ..evaluation.bootstrap import BootstrapConfig
from ..evaluation.evaluator import EvaluationData, evaluate
from ..evaluation.metrics import absent_audit
from ..evaluation.predictors import knn_predictions, prior_predictions, query_keys
from ..evaluation.selection import TargetMetric, grid_from_config, select_retrieval
from ..evaluation.synthetic import generate, write_corpus
from ..fingerprint.drfp import FingerprintBank, FingerprintParams, load_fingerprint_bank, write_fingerprint_bank
from ..index.precedent import build_index
from ..index.store import persist
from ..ingest.bank import EmbeddingBank, load_embedding_bank, write_embedding_bank
from ..ingest.container import atomic_write
from ..ingest.heads import HeadProbabilities, load_head_probabilities
from ..ingest.reactions import by_id, by_split, dataset_profile, load_reactions
from ..ingest.split import deterministic_split
from ..model.records import ReactionRecord, validate_labels
from ..model.retrieval import RetrievalConfig
from ..model.roles import KeyKind, Role, ROLES, Split
from ..model.vocabulary import RoleVocabulary, derive_vocabularies, load_vocabularies, write_vocabularies
from ..recommend.baselines import priors
from ..recommend.queries import Query
from ..reprkernel.encoder import ReactionKeyEncoder, load_encoder_inputs
from ..service.state import ServiceConfig, ServiceState, load_engine
from ..smiles.reaction import split_reaction_smiles
from ..util.configuration import Config, Section, Subsection, configure_logging
from ..util.decorators import static_vars
from ..util.errors import UsageError, exit_code_for

INPUT_FLAGS = ("dataset", "vocab", "bank", "fingerprints", "index", "weights", "inputs")


@static_vars(configured=False)
def _logging(log_to_file: bool):
    if _logging.configured:
        return
    configure_logging(log_to_file)
    _logging.configured = True


def _configure(args):
    Config(*args.config, clear_before_load=True)
    for (section, key), value in config_overrides(args).items():
        Config.set(section, key, value)
    logs_directory = Config.get(Section.logging, Subsection.logs_directory)
    if not os.path.isabs(logs_directory):
        Config.set(Section.logging, Subsection.logs_directory, os.path.join(args.out, logs_directory))
    _logging(not args.no_log_file)


def _validate(args):
    """Parses every configured value the commands read, and checks inputs exist, before any heavy work."""
    RetrievalConfig.from_config()
    BootstrapConfig.from_config()
    FingerprintParams.from_config()
    ExclusionRung.parse(Config.get(Section.audit, Subsection.exclusion))
    Role.parse(Config.get(Section.audit, Subsection.role))
    if Config.get_int(Section.audit, Subsection.audit_k) < 1:
        raise UsageError("audit_k must be at least 1.")
    if _threads() < 1:
        raise UsageError("threads must be at least 1.")
    for flag in INPUT_FLAGS:
        path = getattr(args, flag, None)
        if path and not os.path.exists(path):
            raise FileNotFoundError("--{} '{}' does not exist.".format(flag, path))
    for path in getattr(args, "heads", None) or ():
        if not os.path.exists(path):
            raise FileNotFoundError("--heads '{}' does not exist.".format(path))


def _threads() -> int:
    return Config.get_int(Section.index, Subsection.threads)


def _write(manifest: RunManifest, path: str, text: str) -> str:
    atomic_write(path, text.encode("utf-8"))
    manifest.outputs.append(path)
    return path


def _records(args, manifest: RunManifest) -> List[ReactionRecord]:
    manifest.add_input(args.dataset)
    return load_reactions(args.dataset, Config.get(Section.data, Subsection.schema_version))


def _vocabs(args, records: List[ReactionRecord], manifest: RunManifest) -> Dict[Role, RoleVocabulary]:
    vocab_dir = getattr(args, "vocab", None) or Config.get(Section.data, Subsection.vocab_dir)
    if vocab_dir:
        manifest.add_input(vocab_dir)
        vocabs = load_vocabularies(vocab_dir)
    else:
        vocabs = derive_vocabularies(records)
        logging.info("Derived vocabularies from the dataset: {}.".format(
            ", ".join("{} {}".format(role.value, vocabs[role].size_present) for role in ROLES)))
    for record in records:
        validate_labels(record, vocabs)
    return vocabs


def _bank(path: Optional[str], manifest: RunManifest) -> Optional[EmbeddingBank]:
    if not path:
        return None
    manifest.add_input(path)
    return load_embedding_bank(path)


def _heads(paths, manifest: RunManifest) -> Optional[HeadProbabilities]:
    if not paths:
        return None
    for path in paths:
        manifest.add_input(path)
    return load_head_probabilities(paths)


def _out(args, name: str) -> str:
    return os.path.join(args.out, name)


def cmd_ingest(args, manifest: RunManifest):
    records = _records(args, manifest)
    vocabs = _vocabs(args, records, manifest)
    vocab_dir = _out(args, "vocab")
    write_vocabularies(vocabs, vocab_dir)
    manifest.outputs.append(vocab_dir)

    fingerprints = FingerprintBank.from_records(records, FingerprintParams.from_config())
    write_fingerprint_bank(fingerprints, _out(args, "fingerprints.bin"))
    manifest.outputs.append(_out(args, "fingerprints.bin"))

    profile = dataset_profile(records)
    bank = _bank(args.bank, manifest)
    if bank is not None:
        missing = [record.id for record in records if record.id not in bank]
        profile["bank"] = {"rows": len(bank), "dim": bank.dim, "has_delta": bank.has_delta,
                           "missing_ids": len(missing)}
        if missing:
            logging.warning("{} dataset ids have no bank row (first: '{}').".format(len(missing), missing[0]))
    _write(manifest, _out(args, "profile.json"), json.dumps(profile, sort_keys=True, indent=2) + "\n")


def cmd_build_index(args, manifest: RunManifest):
    records = _records(args, manifest)
    vocabs = _vocabs(args, records, manifest)
    retrieval = RetrievalConfig.from_config()
    if retrieval.key_kind == KeyKind.drfp:
        source = None
        if args.fingerprints:
            manifest.add_input(args.fingerprints)
            source = load_fingerprint_bank(args.fingerprints)
    else:
        if not args.bank:
            raise UsageError("Key '{}' needs --bank.".format(retrieval.key_kind.value))
        source = _bank(args.bank, manifest)
    index = build_index(source, by_split(records, Split.train), retrieval.key_kind, vocabs,
                        FingerprintParams.from_config())
    persist(index, _out(args, "index.bin"))
    manifest.outputs.append(_out(args, "index.bin"))
    manifest.extra["index"] = {"key": index.key_kind.value, "size": len(index), "dim": index.dim}


def _queries(args) -> List[Query]:
    queries = [Query(reaction_id=reaction_id) for reaction_id in args.ids]
    for smiles in args.smiles:
        reactants, products = split_reaction_smiles(smiles)
        queries.append(Query(reactants=reactants, products=products))
    if not queries:
        raise UsageError("recommend needs --ids or --smiles.")
    return queries


def cmd_recommend(args, manifest: RunManifest):
    queries = _queries(args)
    for path in [args.index, args.dataset] + ([args.bank] if args.bank else []) + list(args.heads):
        manifest.add_input(path)
    engine = load_engine(args.index, args.dataset, RetrievalConfig.from_config(), args.bank, args.heads)
    recommendations = engine.recommend_many(queries, threads=_threads())
    lines = [recommendation.to_json(engine.vocabs, args.top) for recommendation in recommendations]
    _write(manifest, _out(args, "recommendations.jsonl"), "".join(line + "\n" for line in lines))
    for line in lines:
        print(line)


def _rungs() -> List[ExclusionRung]:
    return ExclusionRung.parse(Config.get(Section.audit, Subsection.exclusion))


def _write_report(args, manifest: RunManifest, report):
    _write(manifest, _out(args, "report.json"), report.to_json() + "\n")
    _write(manifest, _out(args, "report.txt"), report.to_text())
    manifest.extra["primary_mean@1"] = {name: report.primary(name) for name in report.predictors}


def cmd_evaluate(args, manifest: RunManifest):
    records = _records(args, manifest)
    vocabs = _vocabs(args, records, manifest)
    bank = _bank(args.bank, manifest)
    heads = _heads(args.heads, manifest)
    report = evaluate(records, vocabs, RetrievalConfig.from_config(), bank, heads, FingerprintParams.from_config(),
                      BootstrapConfig.from_config(), _threads(), _rungs(),
                      Config.get_int(Section.audit, Subsection.audit_k),
                      Role.parse(Config.get(Section.audit, Subsection.role)),
                      provenance={"command": "evaluate", "inputs": dict(manifest.inputs)})
    _write_report(args, manifest, report)
    print(report.to_text(), end="")


def cmd_select(args, manifest: RunManifest):
    records = _records(args, manifest)
    vocabs = _vocabs(args, records, manifest)
    bank = _bank(args.bank, manifest)
    heads = _heads(args.heads, manifest)
    metric = TargetMetric.parse(Config.get(Section.selection, Subsection.target_metric))
    grid = grid_from_config()
    selection_train, selection_validation = deterministic_split(
        by_split(records, Split.train), Config.get_float(Section.selection, Subsection.validation_fraction))
    fingerprint = FingerprintParams.from_config()
    result = select_retrieval(grid, selection_train, selection_validation, metric, vocabs, bank, fingerprint,
                              _threads())
    _write(manifest, _out(args, "selection.json"), json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n")
    manifest.extra["winner"] = result.winner.to_dict()

    if not by_split(records, Split.test):
        logging.info("No test split; the selected configuration is not evaluated.")
        return
    report = evaluate(records, vocabs, result.winner, bank, heads, fingerprint, BootstrapConfig.from_config(),
                      _threads(), selection=result,
                      provenance={"command": "select", "inputs": dict(manifest.inputs)})
    _write_report(args, manifest, report)


def cmd_audit(args, manifest: RunManifest):
    records = _records(args, manifest)
    vocabs = _vocabs(args, records, manifest)
    retrieval = RetrievalConfig.from_config()
    bank = None if retrieval.key_kind == KeyKind.drfp else _bank(args.bank, manifest)
    data = EvaluationData(records, vocabs)
    role = Role.parse(Config.get(Section.audit, Subsection.role))
    k = Config.get_int(Section.audit, Subsection.audit_k)

    index = build_index(bank, data.train, retrieval.key_kind, vocabs, FingerprintParams.from_config())
    keys = query_keys(index, data.test, bank)
    overlap = overlap_audit(index, data.test, keys, data.targets[role], by_id(data.train), _rungs(), k, role=role)

    prior = priors(data.train, vocabs)
    knn, _ = knn_predictions(index, index.search_many(keys, retrieval.k, threads=_threads()), retrieval, prior)
    absent = {}
    for predictions in (prior_predictions(prior, len(data.test)), knn):
        absent[predictions.name] = {r.value: absent_audit(r, predictions.probs[r], data.targets[r], data.gold[r])
                                    for r in ROLES}

    document = {"overlap": [row.to_dict() for row in overlap],
                "absent": {name: {r: row.to_dict() for r, row in rows.items()} for name, rows in absent.items()},
                "retrieval": retrieval.to_dict(), "relevance_role": role.value}
    _write(manifest, _out(args, "audit.json"), json.dumps(document, sort_keys=True, indent=2) + "\n")

    lines = ["Overlap audit ({} index, relevance on {})".format(index.key_kind.value, role.value)]
    for row in overlap:
        precision = "n/a" if row.precision is None else "{:.4f}".format(row.precision)
        lines.append("  {:<30} P@{} {}  ({} queries, {} skipped)".format(
            row.rung.value, row.k, precision, row.queries, row.skipped))
    lines.append("Absent audit")
    for name, rows in absent.items():
        for r, row in rows.items():
            lines.append("  {:<6} {:<9} absent {:>6} ({:.1%})  all@1 {:.3f}".format(
                name, r, row.absent, row.absent_share, row.all_at1))
    _write(manifest, _out(args, "audit.txt"), "\n".join(lines) + "\n")


def cmd_synthesize(args, manifest: RunManifest):
    corpus = generate(args.corpus, args.corpus_seed)
    manifest.outputs.extend(write_corpus(corpus, args.out))
    manifest.extra["corpus"] = {"name": args.corpus, "seed": args.corpus_seed, "reactions": len(corpus.records)}


def cmd_encode(args, manifest: RunManifest):
    manifest.add_input(args.weights)
    manifest.add_input(args.inputs)
    encoder = ReactionKeyEncoder.load(args.weights)
    bank = encoder.encode_many(load_encoder_inputs(args.inputs))
    write_embedding_bank(bank, _out(args, "bank.bin"))
    manifest.outputs.append(_out(args, "bank.bin"))


def cmd_serve(args, manifest: RunManifest):
    from webapp.service import serve

    for path in [args.index, args.dataset] + ([args.bank] if args.bank else []) + list(args.heads):
        manifest.add_input(path)
    serve(ServiceState(ServiceConfig.from_config(args.index, args.dataset, args.bank, args.heads)))


COMMANDS = {
    "ingest": cmd_ingest,
    "build-index": cmd_build_index,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
    "select": cmd_select,
    "audit": cmd_audit,
    "synthesize": cmd_synthesize,
    "encode": cmd_encode,
    "serve": cmd_serve,
}


def error_line(error: BaseException) -> str:
    return "error code={} kind={} message={}".format(exit_code_for(error), type(error).__name__,
                                                      json.dumps(str(error)))


def _write_failure(args, argv, manifest: Optional[RunManifest], error: BaseException, start: float):
    """Records the failed run next to whatever it had produced; a manifest that cannot be written is only logged."""
    if manifest is None:
        manifest = RunManifest(args.command, argv)
    manifest.config = config_snapshot()
    manifest.wall_seconds = time.perf_counter() - start
    manifest.error = {"code": exit_code_for(error), "kind": type(error).__name__, "message": str(error)}
    try:
        os.makedirs(args.out, exist_ok=True)
        manifest.write(args.out)
    except OSError as e:
        logging.warning("Could not write the run manifest to '{}': {}".format(args.out, e))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    args = manifest = None
    try:
        args = build_parser().parse_args(argv)
        _configure(args)
        _validate(args)
        os.makedirs(args.out, exist_ok=True)
        manifest = RunManifest(args.command, argv)
        COMMANDS[args.command](args, manifest)
        manifest.config = config_snapshot()
        manifest.wall_seconds = time.perf_counter() - start
        manifest.write(args.out)
        logging.info("{} finished in {:.2f} s.".format(args.command, manifest.wall_seconds))
        return 0
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0
    except Exception as e:
        logging.debug("Command failed.", exc_info=True)
        print(error_line(e), file=sys.stderr)
        if args is not None:
            _write_failure(args, argv, manifest, e, start)
        return exit_code_for(e)
