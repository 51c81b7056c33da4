"""Standalone tracker process speaking the line protocol.

Runs one of the built-in behaviors behind stdio (default) or a TCP
socket (--listen PORT, one session then exit). The protocol is the
one the runner speaks: `hello version=1 seed=<n>`, `initialize <path>
<x>,<y>,<w>,<h>`, `frame <path>`, `quit`; every frame is answered with
`state <x>,<y>,<w>,<h>`.

Behaviors that need the ground truth (ttf, tto, scripted) take it via
--groundtruth or --sequence; tta needs the frame size via --meta or
--sequence. These are the placeholders the runner expands in command
specs, e.g.:

    trackbench run --dataset data \\
        --tracker 'cmd:ttf:trackbench-tracker ttf --groundtruth {groundtruth}'
"""

import argparse
import socket
import sys

from .errors import ConfigError, ParseError, TrackbenchError
from .io_formats import (
    _read_meta,
    format_region,
    parse_number,
    parse_region,
    read_annotation,
    read_trajectory,
)
from .theoretical import (
    CenterOracleTracker,
    FullFrameTracker,
    ScriptedTracker,
    SelfFailingTracker,
    StaticTracker,
)
from .trajectory import SequenceAnnotation

__all__ = ["main", "serve"]

KINDS = ("tta", "tts", "ttf", "tto", "scripted")


def _annotation(args):
    if args.groundtruth:
        import os

        traj = read_trajectory(args.groundtruth)
        name = os.path.basename(os.path.dirname(os.path.abspath(args.groundtruth)))
        return SequenceAnnotation(name=name or "sequence", regions=traj.regions)
    if args.sequence:
        return read_annotation(args.sequence)
    raise ConfigError(f"tracker {args.kind!r} needs --groundtruth or --sequence")


def _image_size(args):
    meta_path = args.meta
    if meta_path is None and args.sequence:
        import os

        candidate = os.path.join(args.sequence, "sequence.meta")
        meta_path = candidate if os.path.exists(candidate) else None
    if meta_path is None:
        raise ConfigError("tta needs --meta or --sequence with sequence.meta")
    meta = _read_meta(meta_path)
    if "width" not in meta or "height" not in meta:
        raise ConfigError(f"{meta_path}: missing width/height")
    return (
        parse_number(meta["width"], meta_path),
        parse_number(meta["height"], meta_path),
    )


def _build_behavior(args):
    if args.kind == "tta":
        return FullFrameTracker(_image_size(args))
    if args.kind == "tts":
        return StaticTracker()
    if args.kind == "ttf":
        return SelfFailingTracker(_annotation(args))
    if args.kind == "tto":
        return CenterOracleTracker(_annotation(args))
    if args.kind == "scripted":
        from .cli import parse_scripted_params

        spec = parse_scripted_params(args.params or "")
        return ScriptedTracker(spec, _annotation(args))
    raise ConfigError(f"unknown tracker kind {args.kind!r}")


def serve(behavior, rfile, wfile) -> int:
    """Run one protocol session; returns the process exit code."""

    def reply(line: str) -> None:
        wfile.write(line + "\n")
        wfile.flush()

    for raw in rfile:
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        cmd = parts[0]
        try:
            if cmd == "hello":
                kv = dict(
                    token.split("=", 1) for token in parts[1:] if "=" in token
                )
                if kv.get("version") != "1":
                    reply("error unsupported protocol version")
                    return 2
                behavior.begin(int(kv.get("seed", "0")))
                det = 1 if behavior.deterministic else 0
                reply(f"hello name={behavior.name} deterministic={det}")
            elif cmd == "initialize":
                if len(parts) < 3:
                    reply("error initialize needs a path and a region")
                    return 2
                region = parse_region(parts[-1])
                path = " ".join(parts[1:-1])
                reply(f"state {format_region(behavior.initialize(path, region))}")
            elif cmd == "frame":
                if len(parts) < 2:
                    reply("error frame needs a path")
                    return 2
                path = " ".join(parts[1:])
                reply(f"state {format_region(behavior.update(path))}")
            elif cmd == "quit":
                return 0
            else:
                reply(f"error unknown command {cmd}")
                return 2
        except (ParseError, ValueError) as e:
            reply(f"error {e}")
            return 2
    return 0


def _serve_tcp(behavior, port: int) -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(("127.0.0.1", port))
        server.listen(1)
        host, bound = server.getsockname()
        print(f"listening {host} {bound}", flush=True)
        conn, _ = server.accept()
        with conn:
            rfile = conn.makefile("r", encoding="utf-8", newline=None)
            wfile = conn.makefile("w", encoding="utf-8", newline="\n")
            return serve(behavior, rfile, wfile)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="trackbench-tracker",
        description="Serve a built-in tracker over the line protocol.",
    )
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--groundtruth", help="ground truth file of the sequence")
    p.add_argument("--sequence", help="sequence directory (alternative to the above)")
    p.add_argument("--meta", help="sequence.meta path (frame size for tta)")
    p.add_argument("--params", help="scripted parameters, key=value,...")
    p.add_argument(
        "--listen", type=int, metavar="PORT",
        help="serve one TCP session on 127.0.0.1:PORT (0 picks a free port)",
    )
    args = p.parse_args(argv)
    try:
        behavior = _build_behavior(args)
        if args.listen is not None:
            return _serve_tcp(behavior, args.listen)
        return serve(behavior, sys.stdin, sys.stdout)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except TrackbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
