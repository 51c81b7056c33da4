"""Tracker evaluation engine: wire protocol, sessions, run plans.

Trackers are driven over a line-based protocol, UTF-8, one message per
line, LF-terminated. The evaluator speaks first:

    hello version=1 seed=<u64>          -> hello name=<id> deterministic=<0|1>
    initialize <frame-path> <x>,<y>,<w>,<h>  -> state <x>,<y>,<w>,<h>
    frame <frame-path>                  -> state <x>,<y>,<w>,<h>
    quit                                (tracker exits)

Numbers are decimal with `.` as separator; regions use the same
`x,y,w,h` syntax as dataset files. A tracker may answer with a
zero-area region to deliberately signal loss. Any reply that does not
match the expected shape is a protocol violation. Frame paths are
passed verbatim and never opened by the evaluator; paths containing
whitespace cannot be framed on this protocol and are rejected up front.

Per-frame timeouts and tracker crashes invalidate the run (they are
run failures, not tracking failures). The same engine drives
in-process tracker behaviors, child processes over stdio, and TCP
endpoints, producing identical records for identical reports.

The supervised protocol reinitializes after failures: frame 1 is
always an Init frame; on any later frame whose reported overlap with
the ground truth is at or below tau, a Failure is recorded and the
next frame (if any) becomes an Init frame carrying that frame's
ground-truth region.
"""

import hashlib
import os
import queue
import shlex
import socket
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import (
    ConfigError,
    HandleBusyError,
    ParseError,
    PrematureExitError,
    ProtocolViolationError,
    RunError,
    TrackbenchError,
    TrackerTimeoutError,
)
from .geometry import Region, overlap
from .io_formats import (
    SequenceData,
    format_region,
    parse_region,
    write_record,
    write_trajectory,
)
from .measures import compute_all
from .trajectory import (
    Failure,
    Init,
    MeasureRow,
    MeasureTable,
    SupervisedRunRecord,
    Tracked,
    Trajectory,
)

__all__ = [
    "PROTOCOL_VERSION",
    "TrackerHandle",
    "RunPlan",
    "run_unsupervised",
    "run_supervised",
    "execute_plan",
    "derive_seed",
]

PROTOCOL_VERSION = 1


def _parse_state_line(line: str, frame: int) -> Region:
    parts = line.split()
    if len(parts) != 2 or parts[0] != "state":
        raise ProtocolViolationError(f"expected 'state <region>', got {line!r}", frame)
    try:
        return parse_region(parts[1])
    except ParseError as e:
        raise ProtocolViolationError(f"bad state region: {e}", frame) from None


def _parse_hello_line(line: str) -> tuple[str, bool]:
    parts = line.split()
    if not parts or parts[0] != "hello":
        raise ProtocolViolationError(f"expected hello reply, got {line!r}", 0)
    fields = {}
    for token in parts[1:]:
        if "=" not in token:
            raise ProtocolViolationError(f"bad hello token {token!r}", 0)
        k, v = token.split("=", 1)
        fields[k] = v
    if "name" not in fields or fields.get("deterministic") not in ("0", "1"):
        raise ProtocolViolationError(f"incomplete hello reply: {line!r}", 0)
    return fields["name"], fields["deterministic"] == "1"


class _Session:
    """One evaluation conversation with a tracker."""

    def _request(self, line: str, frame: int) -> str:
        raise NotImplementedError

    def _send_only(self, line: str) -> None:
        raise NotImplementedError

    def handshake(self, seed: int) -> tuple[str, bool]:
        reply = self._request(f"hello version={PROTOCOL_VERSION} seed={seed}", 0)
        return _parse_hello_line(reply)

    def initialize(self, frame: int, path: str, region: Region) -> Region:
        reply = self._request(f"initialize {path} {format_region(region)}", frame)
        return _parse_state_line(reply, frame)

    def frame(self, frame: int, path: str) -> Region:
        reply = self._request(f"frame {path}", frame)
        return _parse_state_line(reply, frame)

    def quit(self) -> None:
        self._send_only("quit")

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class InProcessSession(_Session):
    """Drives a TrackerBehavior object directly; no timeouts apply."""

    def __init__(self, behavior):
        self._behavior = behavior

    def handshake(self, seed: int) -> tuple[str, bool]:
        self._behavior.begin(seed)
        return self._behavior.name, bool(self._behavior.deterministic)

    def _checked(self, region, frame: int) -> Region:
        if not isinstance(region, Region):
            raise ProtocolViolationError(f"tracker returned {type(region).__name__}", frame)
        try:
            parse_region(format_region(region))
        except (ParseError, ValueError):
            raise ProtocolViolationError(f"invalid reported region {region}", frame) from None
        return region

    def initialize(self, frame: int, path: str, region: Region) -> Region:
        return self._checked(self._behavior.initialize(path, region), frame)

    def frame(self, frame: int, path: str) -> Region:
        return self._checked(self._behavior.update(path), frame)

    def quit(self) -> None:
        pass


_EOF = object()


class PipeSession(_Session):
    """Child process spoken to over stdin/stdout."""

    def __init__(self, argv: list[str], timeout: float):
        self._timeout = timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise PrematureExitError(f"could not start tracker: {e}", 0) from e
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(_EOF)

    def _send_only(self, line: str) -> None:
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            pass

    def _request(self, line: str, frame: int) -> str:
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as e:
            raise PrematureExitError(f"tracker stdin closed: {e}", frame) from None
        try:
            reply = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            raise TrackerTimeoutError(
                f"no reply within {self._timeout}s", frame
            ) from None
        if reply is _EOF:
            code = self._proc.poll()
            raise PrematureExitError(f"tracker exited (status {code})", frame)
        return reply.rstrip("\n")

    def close(self) -> None:
        if self._proc.poll() is None:
            self._send_only("quit")
            try:
                self._proc.wait(timeout=min(5.0, self._timeout))
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                stream.close()
            except OSError:
                pass

    def quit(self) -> None:
        self.close()


class TcpSession(_Session):
    """Tracker reached over a TCP endpoint speaking the same protocol."""

    def __init__(self, address: tuple[str, int], timeout: float):
        self._timeout = timeout
        self._closed = False
        try:
            self._sock = socket.create_connection(address, timeout=timeout)
        except OSError as e:
            raise PrematureExitError(f"could not connect to {address}: {e}", 0) from e
        self._sock.settimeout(timeout)
        self._file = self._sock.makefile("rw", encoding="utf-8", newline="\n")

    def _send_only(self, line: str) -> None:
        try:
            self._file.write(line + "\n")
            self._file.flush()
        except (OSError, ValueError):
            pass

    def _request(self, line: str, frame: int) -> str:
        try:
            self._file.write(line + "\n")
            self._file.flush()
        except OSError as e:
            raise PrematureExitError(f"connection lost: {e}", frame) from None
        try:
            reply = self._file.readline()
        except socket.timeout:
            raise TrackerTimeoutError(f"no reply within {self._timeout}s", frame) from None
        except OSError as e:
            raise PrematureExitError(f"connection lost: {e}", frame) from None
        if reply == "":
            raise PrematureExitError("connection closed", frame)
        return reply.rstrip("\n")

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._send_only("quit")
        try:
            self._file.close()
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass

    def quit(self) -> None:
        self.close()


_PLACEHOLDERS = ("{groundtruth}", "{meta}", "{sequence}", "{frames}")


@dataclass
class TrackerHandle:
    """Addressable tracker: a name plus one transport.

    Exactly one of `factory` (in-process behaviors), `command` (argv
    template for a child process; `{groundtruth}`, `{meta}`,
    `{sequence}` and `{frames}` expand per sequence) or `address`
    (host, port) is set. At most one evaluation session may be active
    per handle at a time. `deterministic` is learned from the first
    handshake and used to collapse repetitions.
    """

    name: str
    timeout: float = 30.0
    factory: object = None
    command: tuple[str, ...] | None = None
    address: tuple[str, int] | None = None
    deterministic: bool | None = None
    _busy: bool = field(default=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def in_process(cls, name: str, factory, timeout: float = 30.0) -> "TrackerHandle":
        """factory(seq: SequenceData) -> TrackerBehavior"""
        return cls(name=name, timeout=timeout, factory=factory)

    @classmethod
    def from_command(cls, name: str, command, timeout: float = 30.0) -> "TrackerHandle":
        argv = tuple(shlex.split(command) if isinstance(command, str) else command)
        if not argv:
            raise ConfigError(f"tracker {name!r}: empty command")
        return cls(name=name, timeout=timeout, command=argv)

    @classmethod
    def from_tcp(cls, name: str, host: str, port: int, timeout: float = 30.0) -> "TrackerHandle":
        return cls(name=name, timeout=timeout, address=(host, int(port)))

    def _expand_command(self, seq: SequenceData) -> list[str]:
        argv = []
        for token in self.command:
            if any(p in token for p in _PLACEHOLDERS):
                if seq.root is None:
                    raise ConfigError(
                        f"tracker {self.name!r} needs sequence files on disk"
                    )
                token = token.replace("{groundtruth}",
                                      os.path.join(seq.root, "groundtruth.txt"))
                token = token.replace("{meta}",
                                      os.path.join(seq.root, "sequence.meta"))
                token = token.replace("{sequence}", seq.root)
                token = token.replace("{frames}", os.path.join(seq.root, "frames"))
            argv.append(token)
        return argv

    def open(self, seq: SequenceData) -> _Session:
        with self._lock:
            if self._busy:
                raise HandleBusyError(f"tracker {self.name!r} already has an active session")
            self._busy = True
        try:
            if self.factory is not None:
                session = InProcessSession(self.factory(seq))
            elif self.command is not None:
                session = PipeSession(self._expand_command(seq), self.timeout)
            elif self.address is not None:
                session = TcpSession(self.address, self.timeout)
            else:
                raise ConfigError(f"tracker {self.name!r} has no transport")
        except BaseException:
            with self._lock:
                self._busy = False
            raise
        return _HandleScopedSession(self, session)


class _HandleScopedSession(_Session):
    """Releases the handle's busy flag when the session closes."""

    def __init__(self, handle: TrackerHandle, inner: _Session):
        self._handle = handle
        self._inner = inner
        self._released = False

    def handshake(self, seed: int):
        return self._inner.handshake(seed)

    def initialize(self, frame: int, path: str, region: Region) -> Region:
        return self._inner.initialize(frame, path, region)

    def frame(self, frame: int, path: str) -> Region:
        return self._inner.frame(frame, path)

    def quit(self) -> None:
        self._inner.quit()

    def close(self) -> None:
        try:
            self._inner.close()
        finally:
            if not self._released:
                self._released = True
                with self._handle._lock:
                    self._handle._busy = False


def _check_paths(seq: SequenceData) -> None:
    for p in seq.frame_paths:
        if any(c.isspace() for c in p):
            raise ConfigError(f"frame path contains whitespace: {p!r}")


def run_unsupervised(handle: TrackerHandle, seq: SequenceData, seed: int = 0) -> Trajectory:
    """One single-initialization run; returns one region per frame.

    Frame 1 holds the region the tracker echoed for the initialization.
    """
    _check_paths(seq)
    a = seq.annotation
    with handle.open(seq) as session:
        name, deterministic = session.handshake(seed)
        if handle.deterministic is None:
            handle.deterministic = deterministic
        regions = [session.initialize(1, seq.frame_paths[0], a.regions[0])]
        for t in range(2, len(a) + 1):
            regions.append(session.frame(t, seq.frame_paths[t - 1]))
        session.quit()
    return Trajectory(regions=tuple(regions))


def run_supervised(
    handle: TrackerHandle, seq: SequenceData, tau: float = 0.0, seed: int = 0
) -> SupervisedRunRecord:
    """One supervised run with reinitialization after each failure.

    Frame 1 is an Init frame. On every non-Init frame the reported
    region is scored against the ground truth; overlap <= tau records a
    Failure there and turns the next frame (if any) into an Init frame
    carrying its ground-truth region. A failure on the final frame is
    recorded with no subsequent Init. Init entries store the
    ground-truth region bit-exactly.
    """
    if not (0.0 <= tau <= 1.0):
        raise ConfigError(f"tau {tau} outside [0, 1]")
    _check_paths(seq)
    a = seq.annotation
    frames: list = []
    with handle.open(seq) as session:
        name, deterministic = session.handshake(seed)
        if handle.deterministic is None:
            handle.deterministic = deterministic
        init_pending = True
        for t in range(1, len(a) + 1):
            gt = a.regions[t - 1]
            if init_pending:
                session.initialize(t, seq.frame_paths[t - 1], gt)
                frames.append(Init(gt))
                init_pending = False
                continue
            state = session.frame(t, seq.frame_paths[t - 1])
            if overlap(gt, state) <= tau:
                frames.append(Failure())
                init_pending = True
            else:
                frames.append(Tracked(state))
        session.quit()
    return SupervisedRunRecord.from_frames(frames, tau=tau)


def derive_seed(master_seed: int, tracker: str, sequence: str, rep: int, mode: str) -> int:
    """Stable per-run seed; distinct repetitions get distinct seeds."""
    text = f"{master_seed}|{tracker}|{sequence}|{rep}|{mode}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class RunPlan:
    """What to run: repetitions per pair, protocol mode, threshold.

    mode is "unsupervised", "supervised" or "both"; "both" performs one
    run per protocol per repetition so a row carries all 16 measures.
    """

    repetitions: int = 30
    mode: str = "both"
    tau: float = 0.0

    def __post_init__(self):
        if self.mode not in ("unsupervised", "supervised", "both"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if not (0.0 <= self.tau <= 1.0):
            raise ConfigError(f"tau {self.tau} outside [0, 1]")


def _raw_dir(out_dir: str, tracker: str, sequence: str) -> str:
    d = os.path.join(out_dir, "raw", tracker, sequence)
    os.makedirs(d, exist_ok=True)
    return d


def _run_pair(
    plan: RunPlan,
    handle: TrackerHandle,
    seq: SequenceData,
    master_seed: int,
    out_dir: str | None,
) -> list[MeasureRow]:
    rows = []
    a = seq.annotation
    for rep in range(plan.repetitions):
        trajectory = None
        record = None
        error = None
        try:
            if plan.mode in ("unsupervised", "both"):
                seed = derive_seed(master_seed, handle.name, a.name, rep, "unsupervised")
                trajectory = run_unsupervised(handle, seq, seed=seed)
            if plan.mode in ("supervised", "both"):
                seed = derive_seed(master_seed, handle.name, a.name, rep, "supervised")
                record = run_supervised(handle, seq, tau=plan.tau, seed=seed)
        except RunError as e:
            error = str(e)
        try:
            values = compute_all(a, trajectory, record)
        except TrackbenchError as e:
            values = (float("nan"),) * 16
            error = error or f"measure error: {e}"
        if out_dir is not None:
            d = _raw_dir(out_dir, handle.name, a.name)
            if trajectory is not None:
                write_trajectory(os.path.join(d, "run_%02d.traj" % rep), trajectory)
            if record is not None:
                write_record(os.path.join(d, "run_%02d.record" % rep), record)
        rows.append(
            MeasureRow(
                tracker=handle.name,
                sequence=a.name,
                run=rep,
                frames=len(a),
                values=values,
                error=error,
            )
        )
        if handle.deterministic:
            break
    return rows


def execute_plan(
    plan: RunPlan,
    trackers: list[TrackerHandle],
    sequences: list[SequenceData],
    master_seed: int = 0,
    workers: int = 1,
    out_dir: str | None = None,
) -> MeasureTable:
    """Run the full plan and return one measure row per completed run.

    Repetitions of trackers that declare themselves deterministic
    collapse to a single run. Run errors become rows with the error
    field set, never aborts. Workers parallelize across trackers (a
    handle admits one session at a time); rows are sorted by (tracker,
    sequence, run) so the result does not depend on scheduling.
    """
    names = [h.name for h in trackers]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate tracker names in plan: {names}")

    def run_tracker(handle: TrackerHandle) -> list[MeasureRow]:
        rows = []
        for seq in sequences:
            rows.extend(_run_pair(plan, handle, seq, master_seed, out_dir))
        return rows

    all_rows: list[MeasureRow] = []
    if workers > 1 and len(trackers) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for rows in pool.map(run_tracker, trackers):
                all_rows.extend(rows)
    else:
        for handle in trackers:
            all_rows.extend(run_tracker(handle))
    all_rows.sort(key=lambda r: (r.tracker, r.sequence, r.run))
    return MeasureTable(rows=tuple(all_rows))
