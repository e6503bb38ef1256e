"""Command-line mirror of the HTTP endpoints.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import errors, plots, wsxml
from .api import App, Response, error_response, read_training_body, render_evaluation, render_selection
from .config import load_config
from .discovery import validate_dataset
from .predictor import evaluate, ingest_csv
from .registry import Registry

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _emit(resp: Response) -> int:
    sys.stdout.buffer.write(resp.body)
    sys.stdout.buffer.flush()
    return EXIT_OK if resp.ok else EXIT_DATA


def _report_dir(args) -> Optional[Path]:
    if getattr(args, "report_dir", None) is None:
        return None
    out = Path(args.report_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands --------------------------------------------------------------


def cmd_publish(app: App, args) -> int:
    wsdl = _read(args.wsdl).decode("utf-8") if args.wsdl else None
    try:
        return _emit(app.publish(_read(args.tmodel), wsdl))
    except errors.QosRegError as exc:
        return _emit(error_response(exc))


def cmd_discover(app: App, args) -> int:
    return _emit(app.handle("POST", "/discover", _read(args.query)))


def cmd_select(app: App, args) -> int:
    out = _report_dir(args)
    if out is None:
        return _emit(app.handle("POST", "/select", _read(args.request)))
    try:
        sel = app.registry.select(wsxml.parse_request(_read(args.request)))
    except errors.QosRegError as exc:
        return _emit(error_response(exc))
    resp = render_selection(sel)
    (out / "selection.xml").write_bytes(resp.body)
    (out / "ranking.csv").write_text(sel.ranking.to_csv(), encoding="utf-8")
    plots.ranking_figure(sel.ranking, out / "ranking.png")
    return _emit(resp)


def cmd_train(app: App, args) -> int:
    try:
        report = app.registry.train(read_training_body(_read(args.csv)))
    except errors.QosRegError as exc:
        return _emit(error_response(exc))
    out = _report_dir(args)
    if out is not None:
        (out / "evaluation.csv").write_text(report.to_csv(), encoding="utf-8")
        plots.parity_figure(report, out / "parity.png")
    if args.table:
        print(report.to_table(), file=sys.stderr)
    return _emit(render_evaluation(report))


def cmd_evaluate(app: App, args) -> int:
    """Score the stored model on every row of a CSV (no split)."""
    model = app.registry.model
    if model is None:
        raise UsageError("no trained model; run `train` first or set `model=` in the config")
    try:
        data = ingest_csv(args.csv)
        missing = [n for n in model.feature_names if n not in data.feature_names]
        if missing:
            raise errors.BadHeader("CSV lacks model features: " + ", ".join(missing))
        cols = [data.feature_names.index(n) for n in model.feature_names]
        data.X, data.feature_names = data.X[:, cols], list(model.feature_names)
        tcols = [data.target_names.index(n) for n in model.target_names if n in data.target_names]
        if len(tcols) != len(model.target_names):
            raise errors.BadHeader("CSV lacks some of the model's target columns")
        data.Y, data.target_names = data.Y[:, tcols], list(model.target_names)
        report = evaluate(model, data)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except errors.QosRegError as exc:
        return _emit(error_response(exc))
    out = _report_dir(args)
    if out is not None:
        (out / "evaluation.csv").write_text(report.to_csv(), encoding="utf-8")
        plots.parity_figure(report, out / "parity.png")
    if args.table:
        print(report.to_table(), file=sys.stderr)
    return _emit(render_evaluation(report))


def cmd_validate(app: App, args) -> int:
    text = _read(args.csv).decode("utf-8")
    reader = csv.DictReader(text.splitlines())
    if not reader.fieldnames or "ws_id" not in reader.fieldnames or "url" not in reader.fieldnames:
        return _emit(error_response(errors.BadHeader("validation CSV needs ws_id and url columns")))
    rows = [(r["ws_id"].strip(), r["url"].strip()) for r in reader]
    cfg = app.registry.config
    report = validate_dataset(
        rows,
        timeout_ms=args.timeout_ms or cfg.fetch_timeout_ms,
        parallelism=args.parallelism or cfg.fetch_parallelism,
    )
    body = report.to_csv()
    out = _report_dir(args)
    if out is not None:
        (out / "validation.csv").write_text(body, encoding="utf-8")
        plots.validation_figure(report, out / "validation.png")
    summary = " ".join(f"{k}={v}" for k, v in report.counts().items())
    print(summary, file=sys.stderr)
    sys.stdout.write(body)
    return EXIT_OK


def cmd_reputation(app: App, args) -> int:
    if args.ws_id:
        return _emit(app.handle("GET", f"/reputation/{args.ws_id}"))
    resp = app.handle("GET", "/reputation")
    out = _report_dir(args)
    if out is not None:
        (out / "reputation.csv").write_bytes(resp.body)
        rows = [(r.ws_id, r.credibility, r.usage_count) for r in app.registry.store.reputations()]
        if rows:
            plots.reputation_figure(rows, out / "reputation.png")
    return _emit(resp)


def cmd_services(app: App, args) -> int:
    return _emit(app.handle("GET", "/services"))


def cmd_usage(app: App, args) -> int:
    return _emit(app.handle("POST", f"/usage/{args.ws_id}"))


def cmd_serve(app: App, args) -> int:
    from .server import RegistryServer

    host, port = app.registry.config.host_port
    server = RegistryServer((host, port), app)
    print(f"listening on {server.url}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qosreg", description="QoS-aware web service registry")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one setting")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("publish", help="publish a tModel document")
    s.add_argument("tmodel", help="tModel XML file, or - for stdin")
    s.add_argument("--wsdl", help="WSDL file to cache instead of fetching the overviewURL")
    s.set_defaults(func=cmd_publish)

    s = sub.add_parser("discover", help="answer a find_tModel query")
    s.add_argument("query")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("select", help="rank services for a find_service request")
    s.add_argument("request")
    s.add_argument("--report-dir", help="also write selection.xml, ranking.csv and ranking.png here")
    s.set_defaults(func=cmd_select)

    for name, func, text in (
        ("train", cmd_train, "fit the QoS model on a feature CSV (80/20 split)"),
        ("evaluate", cmd_evaluate, "score the stored model on a feature CSV"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("csv")
        s.add_argument("--report-dir", help="also write evaluation.csv and parity.png here")
        s.add_argument("--table", action="store_true", help="print a readable table on stderr")
        s.set_defaults(func=func)

    s = sub.add_parser("validate", help="check the WSDL link of every dataset row")
    s.add_argument("csv", help="CSV with ws_id and url columns")
    s.add_argument("--timeout-ms", type=int)
    s.add_argument("--parallelism", type=int)
    s.add_argument("--report-dir", help="also write validation.csv and validation.png here")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("reputation", help="show reputation of one service or all")
    s.add_argument("ws_id", nargs="?")
    s.add_argument("--report-dir", help="also write reputation.csv and reputation.png here")
    s.set_defaults(func=cmd_reputation)

    s = sub.add_parser("services", help="list published services")
    s.set_defaults(func=cmd_services)

    s = sub.add_parser("usage", help="record one confirmed transaction for a service")
    s.add_argument("ws_id")
    s.set_defaults(func=cmd_usage)

    s = sub.add_parser("serve", help="run the HTTP server")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        overrides = {}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            overrides[key.strip()] = value
        config = config.with_overrides(overrides)
        app = App(Registry(config))
        return args.func(app, args)
    except UsageError as exc:
        print(f"qosreg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.QosRegError as exc:
        print(f"qosreg: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        # bad configuration values or unreadable config/journal paths
        print(f"qosreg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
