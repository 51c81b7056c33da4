"""Minimal external tracker used by the protocol tests.

Speaks the evaluator's line protocol on stdio, echoing the
initialization region forever (a static tracker), except for one
scripted misbehavior selected by argv[1]:

  ok        well-behaved
  garbage   answers the 2nd frame request with a non-protocol line
  slow      sleeps 5s before answering the 2nd frame request
  exit      exits silently before answering the 2nd frame request
  badhello  mangles the handshake reply
  zerocopy  reports a zero-area region on every frame request

Deliberately self-contained: no package imports, so it behaves like a
foreign executable.
"""

import sys
import time


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    held = "0,0,0,0"
    frames_seen = 0
    for raw in sys.stdin:
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        cmd = parts[0]
        if cmd == "hello":
            if mode == "badhello":
                print("hi there", flush=True)
            else:
                print("hello name=stub deterministic=1", flush=True)
        elif cmd == "initialize":
            held = parts[-1]
            print(f"state {held}", flush=True)
        elif cmd == "frame":
            frames_seen += 1
            if frames_seen == 2:
                if mode == "garbage":
                    print("banana banana banana", flush=True)
                    continue
                if mode == "slow":
                    time.sleep(5.0)
                if mode == "exit":
                    return 1
            if mode == "zerocopy":
                print("state 0,0,0,0", flush=True)
            else:
                print(f"state {held}", flush=True)
        elif cmd == "quit":
            return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
