#!/usr/bin/env python3
"""Regenerate docs/golden_transcript.txt from the loopback test server.

The transcript freezes the exact bytes of a scripted client session; the
protocol test replays the same session and compares byte for byte.
"""

import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from neurologic.oracle import ProtocolClient, TranscriptRecorder  # noqa: E402

SERVER = [sys.executable, str(ROOT / "tests" / "loopback_server.py")]


def scripted_session(client):
    tokens = client.encode("I feel unreasonably sad today")
    client.query_activations(0, tokens=tokens, mask=())
    client.query_activations(1, tokens=tokens, mask=(3,))
    client.query_activations(1, tokens=tokens, mask=(0, 3))


def main():
    recorder = TranscriptRecorder()
    with ProtocolClient.spawn(SERVER, recorder=recorder) as client:
        scripted_session(client)
    out = ROOT / "docs" / "golden_transcript.txt"
    out.parent.mkdir(exist_ok=True)
    out.write_bytes(recorder.dump())
    print(f"wrote {out} ({len(recorder.lines)} lines)")


if __name__ == "__main__":
    main()
