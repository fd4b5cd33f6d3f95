"""Command-line front end: index, expand, eval, selftest."""
from __future__ import annotations

import json
import sys

import click

from . import __version__
from .config import MLM_SCORER, load_config
from .corpus import (
    _FORMAT_VERSION,
    build_index,
    load_index,
    load_stopwords,
    save_index,
)
from .errors import (
    ConfigError,
    FacetExpandError,
    NoCoherentFacetError,
    UnknownEntityError,
)
from .expansion import SidecarScorer, expand_query, expansions_to_json
from .metrics import SchemaError, evaluate, load_gold, load_predictions
from .selftest import run_all
from .sidecar_client import SidecarClient

EXIT_ERROR = 1
EXIT_IO = 2
EXIT_UNKNOWN_ENTITY = 3
EXIT_NO_FACET = 4
EXIT_SCHEMA = 5


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _fail(code: int, message: str):
    _log(f"error: {message}")
    sys.exit(code)


def _load_run_config(config_path, **flag_overrides):
    overrides = {k: v for k, v in flag_overrides.items() if v is not None}
    if "preference" in overrides:
        pref = overrides["preference"]
        if pref != "median":
            try:
                overrides["preference"] = float(pref)
            except ValueError:
                raise ConfigError("preference must be a number or 'median'")
    if "cutoffs" in overrides:
        overrides["cutoffs"] = [int(c) for c in overrides["cutoffs"].split(",")]
    return load_config(config_path, overrides)


_COMMON = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="TOML config file; flags override it."),
    click.option("--window", type=int, default=None),
    click.option("--min-count", "min_count", type=int, default=None),
    click.option("--metric", type=click.Choice(["cosine", "neg_sq_euclidean"]),
                 default=None),
    click.option("--preference", default=None,
                 help="Affinity-propagation preference, or 'median'."),
    click.option("--damping", type=float, default=None),
    click.option("--max-contexts", "max_contexts", type=int, default=None),
    click.option("--tau", type=float, default=None),
    click.option("--tau-raw", "tau_raw", type=float, default=None),
    click.option("--ridge", type=float, default=None),
    click.option("--softmax-scale", "softmax_scale", type=float, default=None),
    click.option("--top-k", "top_k", type=int, default=None),
    click.option("--expansion-size", "expansion_size", type=int, default=None),
    click.option("--noise-seed", "noise_seed", type=int, default=None),
    click.option("--threads", type=int, default=None),
]


def common_options(fn):
    for option in reversed(_COMMON):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(
    __version__, message=f"%(prog)s %(version)s (index format v{_FORMAT_VERSION})"
)
def main():
    """Expand a seed entity set into one ranked list per shared semantic facet."""


@main.command("index")
@click.argument("corpus_path")
@click.argument("out_path")
@click.option("--stopwords", "stopwords_path", default=None,
              help="Optional stop-word list, one token per line.")
@common_options
def cmd_index(corpus_path, out_path, stopwords_path, config_path, **flags):
    """Build the skip-gram inverted index from a one-document-per-line corpus."""
    try:
        config = _load_run_config(config_path, **flags)
        stop = load_stopwords(stopwords_path) if stopwords_path else frozenset()
        with open(corpus_path, "r", encoding="utf-8") as fh:
            index = build_index(fh, config.index_config(stop), path=corpus_path)
        save_index(index, out_path)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, f"cannot read {exc.filename}")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    except FacetExpandError as exc:
        _fail(EXIT_ERROR, str(exc))
    _log(f"indexed {index.vocab_size} entities, {index.skipgram_count} skip-grams")


@main.command("expand")
@click.argument("index_path")
@click.argument("embeddings_path")
@click.argument("query")
@click.option("--out", "out_path", default=None, help="Write the JSON output here.")
@click.option("--json", "json_stdout", is_flag=True,
              help="Print only the JSON payload on stdout.")
@click.option("--diagnostics", "diagnostics_path", default=None,
              help="Write the fusion correlation report here.")
@click.option("--scorer", type=click.Choice(["corpus", "mlm"]), default=None)
@click.option("--sidecar-cmd", default=None,
              help="Command line that starts the scoring sidecar (stdio).")
@click.option("--sidecar-tcp", default=None, metavar="HOST:PORT",
              help="Connect to a running scoring sidecar over TCP.")
@common_options
def cmd_expand(index_path, embeddings_path, query, out_path, json_stdout,
               diagnostics_path, sidecar_cmd, sidecar_tcp, config_path, **flags):
    """Run the full pipeline for QUERY (comma-separated seeds)."""
    from .embeddings import load_embeddings

    seeds = [s.strip().lower() for s in query.split(",") if s.strip()]
    if not seeds:
        _fail(EXIT_ERROR, "query has no seeds")
    diagnostics = [] if diagnostics_path else None
    client = None
    try:
        config = _load_run_config(config_path, **flags)
        index = load_index(index_path)
        table = load_embeddings(embeddings_path)
        scorer = None
        if config.scorer == MLM_SCORER:
            if sidecar_tcp:
                host, _, port = sidecar_tcp.partition(":")
                client = SidecarClient.from_tcp(host, int(port))
            elif sidecar_cmd:
                client = SidecarClient.from_command(sidecar_cmd.split())
            else:
                _fail(EXIT_ERROR, "mlm scorer needs --sidecar-cmd or --sidecar-tcp")
            scorer = SidecarScorer(client)
        expansions = expand_query(
            seeds, index, table, config, scorer=scorer, diagnostics=diagnostics
        )
    except FileNotFoundError as exc:
        _fail(EXIT_IO, f"cannot read {exc.filename}")
    except UnknownEntityError as exc:
        _fail(EXIT_UNKNOWN_ENTITY, str(exc))
    except NoCoherentFacetError as exc:
        if diagnostics_path:
            _write_json(diagnostics_path, {"fusion": exc.diagnostics})
            _log(f"fusion diagnostics written to {diagnostics_path}")
        else:
            _log("hint: rerun with --diagnostics to dump correlation tables")
        _fail(EXIT_NO_FACET, str(exc))
    except FacetExpandError as exc:
        _fail(EXIT_ERROR, str(exc))
    finally:
        if client is not None:
            client.close()

    payload = expansions_to_json(seeds, expansions)
    payload["config"] = config.as_dict()
    if diagnostics_path:
        _write_json(diagnostics_path, {"fusion": diagnostics})
    if out_path:
        _write_json(out_path, payload)
        _log(f"wrote {out_path}")
    if json_stdout:
        print(json.dumps(payload, sort_keys=True))
    elif not out_path:
        for facet in payload["facets"]:
            print(f"facet {facet['id']} ({facet['skipgram_count']} skip-grams):")
            for entity, weight in facet["entities"]:
                print(f"  {entity}\t{weight:.4f}")


@main.command("eval")
@click.argument("pred_path")
@click.argument("gold_path")
@click.option("--cutoffs", default=None, help="Comma-separated, default 5,10,20.")
@click.option("--out", "out_path", default=None, help="Write the JSON report here.")
@click.option("--json", "json_stdout", is_flag=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def cmd_eval(pred_path, gold_path, cutoffs, out_path, json_stdout, config_path):
    """Score a prediction file against a gold file."""
    try:
        config = _load_run_config(config_path, cutoffs=cutoffs)
        golds = load_gold(gold_path)
        preds = load_predictions(pred_path)
        report = evaluate(golds, preds, config.cutoffs)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, f"cannot read {exc.filename}")
    except SchemaError as exc:
        _fail(EXIT_SCHEMA, str(exc))
    except (ValueError, FacetExpandError) as exc:
        _fail(EXIT_ERROR, str(exc))
    payload = report.as_dict()
    payload["config"] = config.as_dict()
    if out_path:
        _write_json(out_path, payload)
        _log(f"wrote {out_path}")
    if json_stdout:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(report.as_table())


@main.command("selftest")
@click.option("--json", "json_stdout", is_flag=True)
def cmd_selftest(json_stdout):
    """Check the clustering and correlation code against brute-force oracles."""
    report = run_all()
    if json_stdout:
        print(json.dumps(report, sort_keys=True))
    else:
        for name in ("affinity_propagation", "cluster_correlation", "relevance"):
            status = "ok" if report[name]["ok"] else "FAIL"
            print(f"{name}: {status}")
    sys.exit(0 if report["ok"] else EXIT_ERROR)


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
