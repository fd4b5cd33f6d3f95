"""Command-line entry points: `serve` (the long-running loop) and `selfcheck`."""
from __future__ import annotations

import json
import os
import sys

import click

from .protocol import DEFAULT_MAX_TOP_K, PROTOCOL_VERSION

CACHE_ENV = "MLM_SIDECAR_CACHE"


def _load(model_name: str):
    cache = os.environ.get(CACHE_ENV)
    if cache:
        os.environ.setdefault("HF_HOME", cache)
    from .backends import load_backend

    return load_backend(model_name)


@click.group()
@click.version_option(message=f"%(prog)s %(version)s (protocol v{PROTOCOL_VERSION})")
def main():
    """Serve masked-token probability distributions over newline-delimited JSON."""


@main.command("serve")
@click.option("--model", default="bert-base-uncased", show_default=True,
              help="Model name, or 'stub' for the deterministic test backend.")
@click.option("--transport", default="stdio", show_default=True,
              help="'stdio' or 'tcp:PORT'.")
@click.option("--top-k-max", default=DEFAULT_MAX_TOP_K, show_default=True,
              help="Largest top_k a request may ask for.")
def cmd_serve(model, transport, top_k_max):
    """Answer score requests until the peer closes the connection."""
    from .server import serve_stdio, serve_tcp

    backend = _load(model)
    if transport == "stdio":
        serve_stdio(backend, top_k_max)
    elif transport.startswith("tcp:"):
        port = int(transport.split(":", 1)[1])

        def announce(bound_port):
            print(f"listening on 127.0.0.1:{bound_port}", file=sys.stderr)

        serve_tcp(backend, port, top_k_max, ready_callback=announce)
    else:
        raise click.UsageError(f"unknown transport {transport!r}")


@main.command("selfcheck")
@click.option("--model", default="bert-base-uncased", show_default=True)
@click.option("--top-k-max", default=DEFAULT_MAX_TOP_K, show_default=True)
@click.option("--json", "json_stdout", is_flag=True)
def cmd_selfcheck(model, top_k_max, json_stdout):
    """Probe the backend through the full loop and report the invariants."""
    from .selfcheck import run_selfcheck

    report = run_selfcheck(_load(model), top_k_max)
    if json_stdout:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"model: {report['model']}")
        print(f"protocol: v{report['protocol']}, max_top_k {report['max_top_k']}")
        for name, ok in report["checks"].items():
            print(f"  {name}: {'ok' if ok else 'FAIL'}")
    sys.exit(0 if report["ok"] else 1)


if __name__ == "__main__":
    main()
