"""``deamarket`` command line: publish, fetch, search, bench and node plumbing.

Node state (the ledger file) and the registry live inside the store root
unless given explicitly, so one ``--store-root`` is enough for a session.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import load_files, run_bench
from .dea import DeaRecord
from .errors import AuthenticationError, DeaMarketError, IntegrityError, NotFoundError, ParseError, PreconditionError
from .hashing import H, from_hex
from .mam import MamChannel, Mode
from .market import Marketplace, Registry
from .store import STORE_ROOT_ENV, BlobStore, default_root
from .synth import synthetic_record
from .tangle import DEFAULT_DIFFICULTY, Ledger

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_AUTH, EXIT_NOT_FOUND, EXIT_INTEGRITY = range(6)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (IntegrityError, ParseError)):
        return EXIT_INTEGRITY
    if isinstance(exc, AuthenticationError):
        return EXIT_AUTH
    if isinstance(exc, NotFoundError):
        return EXIT_NOT_FOUND
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_USAGE


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--store-root", default=None,
                   help=f"content store directory (default ${STORE_ROOT_ENV} or ./dea-store)")
    p.add_argument("--node-state", default=None, help="ledger file (default <store-root>/ledger.tsv)")
    p.add_argument("--registry", default=None, help="registry file (default <store-root>/registry.jsonl)")
    p.add_argument("--difficulty", type=int, default=DEFAULT_DIFFICULTY)
    p.add_argument("--milestone-interval", type=int, default=5,
                   help="coordinator issues a milestone every N attaches (0 = never)")
    p.add_argument("--seed", type=int, default=None, help="seed for ledger randomness and channels")
    p.add_argument("--clock", type=int, default=None, help="fixed timestamp, for reproducible runs")
    return p


def _mode_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PUBLIC.value)
    p.add_argument("--side-key", default=None, help="shared key for restricted mode")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="deamarket", description="Digital engineering artifact marketplace")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("publish", parents=[common], help="publish a DEA document")
    p.add_argument("file")
    _mode_args(p)
    p.add_argument("--tags", default="", help="comma separated")
    p.add_argument("--description", default=None)
    p.add_argument("--publisher", default="")
    p.add_argument("--raw", action="store_true", help="publish arbitrary bytes, not a DEA document")
    p.add_argument("--channel", default=None, help="channel state file, created if missing")
    p.add_argument("--confirm", action="store_true", help="wait for a milestone to confirm the bundle")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("fetch", parents=[common], help="fetch a published document by address")
    p.add_argument("address")
    _mode_args(p)
    p.add_argument("--root", default=None, help="channel root (required in restricted mode)")
    p.add_argument("--bundle", default=None, help="specific bundle hash (default newest)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--raw", action="store_true", help="do not require a DEA document")

    p = sub.add_parser("search", parents=[common], help="search the registry")
    p.add_argument("--tags", default="")
    p.add_argument("--view", default=None)
    p.add_argument("--alpha", default=None)

    p = sub.add_parser("bench", parents=[common], help="timing benchmark")
    p.add_argument("files", nargs="*")
    p.add_argument("--synthetic", default=None, help="comma separated sizes in bytes, e.g. 2.9e6,4.6e6")
    p.add_argument("--iterations", type=int, default=10)
    _mode_args(p)
    p.add_argument("--fresh-node", action="store_true", help="new ledger per file")
    p.add_argument("--concurrent", action="store_true")
    p.add_argument("--poll-interval-ms", type=float, default=100.0)
    p.add_argument("--out", default=None, help="JSON-lines report file")

    p = sub.add_parser("node", parents=[common], help="manage the simulated ledger")
    p.add_argument("action", choices=["init", "milestone", "stats", "dump"])
    p.add_argument("--force", action="store_true", help="init over an existing node")
    return parser


class _Session:
    def __init__(self, args):
        self.args = args
        self.store_root = Path(args.store_root) if args.store_root else default_root()
        self.node_path = Path(args.node_state) if args.node_state else self.store_root / "ledger.tsv"
        self.registry_path = Path(args.registry) if args.registry else self.store_root / "registry.jsonl"

    def ledger_kwargs(self):
        a = self.args
        kw = {"seed": a.seed, "milestone_interval": a.milestone_interval or None}
        if a.clock is not None:
            kw["clock"] = lambda: a.clock
        return kw

    def new_ledger(self) -> Ledger:
        return Ledger(difficulty=self.args.difficulty, **self.ledger_kwargs())

    def load_ledger(self, create: bool = False) -> Ledger:
        if not self.node_path.exists():
            if create:
                return self.new_ledger()
            raise CliError(EXIT_IO, f"node not initialized at {self.node_path} (run 'deamarket node init')")
        return Ledger.load(self.node_path, **self.ledger_kwargs())

    def save_ledger(self, ledger: Ledger) -> None:
        self.node_path.parent.mkdir(parents=True, exist_ok=True)
        ledger.save(self.node_path)

    def market(self, ledger) -> Marketplace:
        self.registry_path.parent.mkdir(parents=True, exist_ok=True)
        return Marketplace(ledger, BlobStore(self.store_root), Registry(self.registry_path))


def _side_key(args, parser):
    mode = Mode(args.mode)
    if mode is Mode.RESTRICTED and not args.side_key:
        parser.error(f"{args.command}: restricted mode requires --side-key")
    if mode is Mode.PUBLIC and args.side_key:
        parser.error(f"{args.command}: --side-key only applies to restricted mode")
    return mode, (args.side_key.encode() if args.side_key else None)


def _load_channel(args, mode, side_key) -> tuple[MamChannel, Path | None]:
    path = Path(args.channel) if args.channel else None
    if path is not None and path.exists():
        state = json.loads(path.read_text(encoding="utf-8"))
        if state["mode"] != mode.value:
            raise PreconditionError(f"channel file is a {state['mode']} channel")
        return MamChannel(bytes.fromhex(state["seed"]), state["tree_depth"], mode, side_key,
                          state["leaf_index"], state["tree_index"]), path
    seed = H(b"deamarket-cli-channel", str(args.seed).encode()) if args.seed is not None else os.urandom(32)
    return MamChannel(seed, 2, mode, side_key), path


def _save_channel(channel: MamChannel, path: Path | None) -> None:
    if path is None:
        return
    path.write_text(json.dumps({
        "seed": channel.seed.hex(), "tree_depth": channel.tree_depth, "mode": channel.mode.value,
        "tree_index": channel.tree_index, "leaf_index": channel.leaf_index,
    }, sort_keys=True) + "\n", encoding="utf-8")


def cmd_publish(args, parser, out) -> int:
    mode, side_key = _side_key(args, parser)
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"publish: reading input: {exc}") from None
    record = None
    if not args.raw:
        try:
            record = DeaRecord.from_bytes(data)
        except ParseError as exc:
            raise CliError(EXIT_INTEGRITY, f"publish: input is not a DEA document (use --raw): {exc}") from None
    session = _Session(args)
    ledger = session.load_ledger(create=True)
    market = session.market(ledger)
    channel, chan_path = _load_channel(args, mode, side_key)
    tags = [t for t in args.tags.split(",") if t]
    if record is not None:
        receipt = market.publish(record, channel, tags=tags, description=args.description,
                                 publisher_id=args.publisher)
    else:
        receipt = market.publish_document(data, channel, tags=tags, description=args.description or "",
                                          publisher_id=args.publisher)
    if args.confirm:
        receipt = market.await_confirmation(receipt)
    session.save_ledger(ledger)
    _save_channel(channel, chan_path)
    d = receipt.to_dict()
    if args.json:
        print(json.dumps(d, sort_keys=True), file=out)
    else:
        for key in ("address", "mode", "cid", "payload_root", "channel_root", "bundle_hash"):
            print(f"{key:<13} {d[key]}", file=out)
        t = receipt.timings
        conf = "-" if t.confirming_ms is None else f"{t.confirming_ms:.1f}"
        print(f"{'timings_ms':<13} processing={t.processing_ms:.1f} attaching={t.attaching_ms:.1f} "
              f"confirming={conf}", file=out)
    return EXIT_OK


def _digest_arg(parser, name, text):
    try:
        return from_hex(text)
    except ValueError as exc:
        parser.error(f"{name}: {exc}")


def cmd_fetch(args, parser, out) -> int:
    mode, side_key = _side_key(args, parser)
    address = _digest_arg(parser, "address", args.address)
    root = _digest_arg(parser, "--root", args.root) if args.root else None
    bundle = _digest_arg(parser, "--bundle", args.bundle) if args.bundle else None
    if mode is Mode.RESTRICTED and root is None:
        parser.error("fetch: restricted mode requires --root")
    session = _Session(args)
    market = session.market(session.load_ledger())
    data = market.fetch_document(address, mode, channel_root=root, side_key=side_key, bundle_hash=bundle)
    if not args.raw:
        DeaRecord.from_bytes(data)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        out.flush()
        getattr(out, "buffer", sys.stdout.buffer).write(data)
    return EXIT_OK


def cmd_search(args, parser, out) -> int:
    session = _Session(args)
    registry = Registry(session.registry_path) if session.registry_path.exists() else Registry()
    tags = [t for t in args.tags.split(",") if t]
    for e in registry.search(tags, view=args.view, alpha=args.alpha):
        print(e.to_json(), file=out)
    return EXIT_OK


def cmd_bench(args, parser, out) -> int:
    mode, side_key = _side_key(args, parser)
    if args.iterations < 1:
        parser.error("bench: --iterations must be >= 1")
    files = load_files(args.files)
    if args.synthetic:
        try:
            sizes = [int(float(s)) for s in args.synthetic.split(",") if s]
        except ValueError:
            parser.error("bench: --synthetic takes comma separated sizes")
        seed = args.seed or 0
        files += [(f"synthetic-{s}", synthetic_record(s, seed=seed + i).to_bytes()) for i, s in enumerate(sizes)]
    if not files:
        parser.error("bench: give files or --synthetic sizes")
    store = BlobStore(args.store_root) if args.store_root else None
    report = run_bench(files, args.iterations, difficulty=args.difficulty,
                       milestone_interval=args.milestone_interval or None, seed=args.seed or 0,
                       shared_node=not args.fresh_node, concurrent=args.concurrent,
                       poll_interval_ms=args.poll_interval_ms, mode=mode, side_key=side_key,
                       clock=(lambda: args.clock) if args.clock is not None else None, store=store)
    print(report.table(), file=out)
    if args.out:
        report.write_jsonl(args.out)
    return EXIT_INTEGRITY if report.errors else EXIT_OK


def cmd_node(args, parser, out) -> int:
    session = _Session(args)
    if args.action == "init":
        if session.node_path.exists() and not args.force:
            raise CliError(EXIT_USAGE, f"node already initialized at {session.node_path} (use --force)")
        session.save_ledger(session.new_ledger())
        print(f"initialized {session.node_path}", file=out)
        return EXIT_OK
    ledger = session.load_ledger()
    if args.action == "milestone":
        h = ledger.issue_milestone()
        session.save_ledger(ledger)
        print(h.hex(), file=out)
    elif args.action == "stats":
        print(json.dumps(ledger.stats(), sort_keys=True), file=out)
    else:
        for line in ledger.dump_lines():
            print(line, file=out)
    return EXIT_OK


_HANDLED = (DeaMarketError, OSError, ValueError, LookupError)

COMMANDS = {"publish": cmd_publish, "fetch": cmd_fetch, "search": cmd_search,
            "bench": cmd_bench, "node": cmd_node}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser, out)
    except CliError as exc:
        print(f"deamarket: {exc}", file=sys.stderr)
        return exc.code
    except _HANDLED as exc:
        print(f"deamarket {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
