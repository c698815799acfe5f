"""Oracles answering activation queries for (possibly masked) inputs.

Three implementations share one duck-typed surface, ``info()`` and
``query_activations(layer, features=..., tokens=..., mask=...)``:

* MlpOracle: wraps an in-process MlpModel (vector modality, no masking);
* FixtureOracle: scripted keyword-triggered neurons for tests (text);
* ProtocolClient: line-delimited JSON v1 over a subprocess's stdio or TCP.

Protocol v1: every message is one JSON object per line.  The first request
must be {"id", "op": "info"}.  Requests carry monotonically increasing ids;
each response echoes the id of its request.  Requests are serialized
canonically (sorted keys, compact separators) so transcripts are
byte-reproducible.
"""

import json
import socket
import subprocess
import threading
from dataclasses import dataclass
from queue import Empty, Queue
from typing import Optional

import numpy as np

from . import errors
from .mlp import _forward_batch

PROTOCOL_OPS = ("info", "activations", "encode")


@dataclass
class OracleInfo:
    num_layers: int
    hidden_sizes: list
    num_classes: int
    modality: str                       # "vector" | "text"
    mask_token: Optional[str] = None

    def __post_init__(self):
        if self.num_layers < 1 or self.num_classes < 1:
            raise ValueError("num_layers and num_classes must be >= 1")
        if len(self.hidden_sizes) != self.num_layers or any(
            s < 1 for s in self.hidden_sizes
        ):
            raise ValueError("hidden_sizes must list one positive size per layer")
        if self.modality not in ("vector", "text"):
            raise ValueError(f"bad modality {self.modality!r}")
        if self.modality == "text" and not self.mask_token:
            raise ValueError("text modality requires a mask token")


class MlpOracle:
    """Activation oracle backed by an in-process feed-forward model."""

    def __init__(self, model):
        self.model = model

    def info(self):
        sizes = self.model.config.layer_sizes
        return OracleInfo(
            num_layers=len(sizes) - 2,
            hidden_sizes=list(sizes[1:-1]),
            num_classes=sizes[-1],
            modality="vector",
        )

    def query_activations(self, layer, features=None, tokens=None, mask=()):
        if tokens is not None:
            raise errors.MaskUnsupported("vector oracle does not accept token inputs")
        if mask:
            raise errors.MaskUnsupported("vector oracle does not support masking")
        if not 0 <= layer < self.model.config.num_hidden:
            raise errors.LayerOutOfRange(f"layer {layer} out of range")
        x = np.asarray(features, dtype=np.float64)
        if x.shape != (self.model.config.layer_sizes[0],):
            raise errors.ShapeMismatch("feature vector has the wrong length")
        hidden, logits = _forward_batch(self.model, x[None, :])
        return hidden[layer][0].copy(), int(np.argmax(logits[0]))


class FixtureOracle:
    """Deterministic scripted text oracle: neurons fire on trigger keywords.

    layers[l][j] is a set of trigger words; the neuron's activation is 1.0
    iff any trigger occurs among the unmasked (lowercased) tokens.  The
    prediction is the argmax over per-class sums of the last layer's
    activations using `neuron_class`, ties toward the lower class.
    """

    def __init__(self, layers, num_classes, neuron_class=None, mask_token="[MASK]"):
        self.layers = [
            [frozenset(w.lower() for w in neuron) for neuron in layer]
            for layer in layers
        ]
        self.num_classes = num_classes
        self.neuron_class = neuron_class
        self.mask_token = mask_token

    def info(self):
        return OracleInfo(
            num_layers=len(self.layers),
            hidden_sizes=[len(layer) for layer in self.layers],
            num_classes=self.num_classes,
            modality="text",
            mask_token=self.mask_token,
        )

    def query_activations(self, layer, features=None, tokens=None, mask=()):
        if features is not None:
            raise errors.MaskUnsupported("fixture oracle accepts token inputs only")
        if not 0 <= layer < len(self.layers):
            raise errors.LayerOutOfRange(f"layer {layer} out of range")
        tokens = list(tokens or [])
        for idx in mask:
            if not 0 <= idx < len(tokens):
                raise errors.ProtocolViolation(f"mask index {idx} out of range")
        masked = set(mask)
        present = {
            t.lower() for i, t in enumerate(tokens) if i not in masked
        }

        def acts_for(l):
            return np.array(
                [1.0 if triggers & present else 0.0 for triggers in self.layers[l]],
                dtype=np.float64,
            )

        activations = acts_for(layer)
        last = acts_for(len(self.layers) - 1)
        scores = np.zeros(self.num_classes)
        if self.neuron_class:
            for j, c in enumerate(self.neuron_class):
                scores[c] += last[j]
        return activations, int(np.argmax(scores))


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _info_from_payload(payload):
    try:
        return OracleInfo(
            num_layers=int(payload["num_layers"]),
            hidden_sizes=[int(s) for s in payload["hidden_sizes"]],
            num_classes=int(payload["num_classes"]),
            modality=str(payload["modality"]),
            mask_token=payload.get("mask_token"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise errors.ProtocolViolation(f"bad info payload: {exc}") from exc


class ProtocolClient:
    """Thread-safe v1 client; responses are multiplexed by request id."""

    def __init__(self, reader, writer, timeout=10.0, closer=None, recorder=None):
        self._reader = reader
        self._writer = writer
        self._timeout = timeout
        self._closer = closer
        self._recorder = recorder
        self._lock = threading.Lock()
        self._next_id = 1
        self._pending = {}
        self._closed = False
        self._read_error = None
        self._thread = threading.Thread(target=self._read_loop, daemon=True)
        self._thread.start()
        self._info = None
        self._info = self._handshake()

    # -- construction helpers --

    @classmethod
    def spawn(cls, command, timeout=10.0, recorder=None):
        """Start `command` as a subprocess and speak v1 over its stdio."""
        try:
            proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise errors.Transport(f"cannot spawn {command!r}: {exc}") from exc

        def close():
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.terminate()
                proc.wait(timeout=5)
            except Exception:
                proc.kill()

        return cls(proc.stdout, proc.stdin, timeout=timeout, closer=close, recorder=recorder)

    @classmethod
    def connect_tcp(cls, host, port, timeout=10.0, recorder=None):
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise errors.Transport(f"cannot connect to {host}:{port}: {exc}") from exc
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")

        def close():
            try:
                sock.close()
            except OSError:
                pass

        return cls(reader, writer, timeout=timeout, closer=close, recorder=recorder)

    # -- wire plumbing --

    def _read_loop(self):
        try:
            for raw in self._reader:
                line = raw.decode("utf-8", errors="replace").strip()
                if self._recorder is not None:
                    self._recorder.received(raw)
                if not line:
                    continue
                try:
                    message = json.loads(line)
                    if not isinstance(message, dict):
                        raise ValueError("not an object")
                    msg_id = message["id"]
                except (ValueError, KeyError) as exc:
                    self._fail(errors.ProtocolViolation(f"malformed line {line!r}: {exc}"))
                    return
                with self._lock:
                    queue = self._pending.get(msg_id)
                if queue is None:
                    self._fail(errors.ProtocolViolation(f"response for unknown id {msg_id!r}"))
                    return
                queue.put(message)
        except (OSError, ValueError) as exc:
            self._fail(errors.Transport(str(exc)))
            return
        self._fail(errors.PeerClosed("peer closed the stream"))

    def _fail(self, exc):
        with self._lock:
            self._read_error = exc
            pending = list(self._pending.values())
        for queue in pending:
            queue.put(exc)

    def _request(self, payload, timeout=None):
        timeout = self._timeout if timeout is None else timeout
        with self._lock:
            if self._closed:
                raise errors.PeerClosed("client is closed")
            if self._read_error is not None and not self._pending:
                raise self._read_error
            req_id = self._next_id
            self._next_id += 1
            queue = Queue(maxsize=1)
            self._pending[req_id] = queue
        payload = {"id": req_id, **payload}
        data = canonical_json(payload).encode("utf-8") + b"\n"
        if self._recorder is not None:
            self._recorder.sent(data)
        try:
            self._writer.write(data)
            self._writer.flush()
        except (OSError, ValueError) as exc:
            with self._lock:
                self._pending.pop(req_id, None)
            raise errors.Transport(f"write failed: {exc}") from exc
        try:
            result = queue.get(timeout=timeout) if timeout > 0 else queue.get_nowait()
        except Empty:
            raise errors.Timeout(f"no response to request {req_id} within {timeout}s") from None
        finally:
            with self._lock:
                self._pending.pop(req_id, None)
        if isinstance(result, Exception):
            raise result
        if result.get("error"):
            raise errors.OracleFailure(str(result["error"]))
        return result

    def _handshake(self):
        try:
            response = self._request({"op": "info"})
            info = _info_from_payload(response.get("info") or {})
        except errors.NeuroLogicError as exc:
            self.close()
            raise errors.HandshakeFailed(f"info handshake failed: {exc}") from exc
        return info

    # -- oracle surface --

    def info(self):
        return self._info

    def query_activations(self, layer, features=None, tokens=None, mask=(), timeout=None):
        if self._info is not None and not 0 <= layer < self._info.num_layers:
            raise errors.LayerOutOfRange(f"layer {layer} out of range")
        payload = {"op": "activations", "layer": layer}
        if tokens is not None:
            payload["tokens"] = list(tokens)
            payload["mask"] = sorted(int(i) for i in mask)
        else:
            if mask:
                raise errors.MaskUnsupported("masking applies to token inputs only")
            payload["features"] = [float(v) for v in features]
        response = self._request(payload, timeout=timeout)
        try:
            activations = np.asarray(response["activations"], dtype=np.float64)
            prediction = int(response["prediction"])
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.ProtocolViolation(f"bad activations response: {exc}") from exc
        expected = self._info.hidden_sizes[layer] if self._info else None
        if expected is not None and activations.shape != (expected,):
            raise errors.ProtocolViolation(
                f"expected {expected} activations, got {activations.shape}"
            )
        return activations, prediction

    def encode(self, text, timeout=None):
        response = self._request({"op": "encode", "text": str(text)}, timeout=timeout)
        try:
            return [str(t) for t in response["tokens"]]
        except (KeyError, TypeError) as exc:
            raise errors.ProtocolViolation(f"bad encode response: {exc}") from exc

    def close(self):
        with self._lock:
            if self._closed:
                return
            self._closed = True
        if self._closer is not None:
            self._closer()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def spawn_protocol_client(endpoint, timeout=10.0, recorder=None):
    """Create a client from a subprocess argv list or a "host:port" string."""
    if isinstance(endpoint, (list, tuple)):
        return ProtocolClient.spawn(list(endpoint), timeout=timeout, recorder=recorder)
    host, sep, port = str(endpoint).rpartition(":")
    if not sep or not port.isdigit():
        raise errors.Transport(f"endpoint {endpoint!r} is neither argv nor host:port")
    return ProtocolClient.connect_tcp(host or "127.0.0.1", int(port), timeout=timeout, recorder=recorder)


class TranscriptRecorder:
    """Captures the exact bytes sent and received, for golden-transcript tests."""

    def __init__(self):
        self.lines = []

    def sent(self, data):
        self.lines.append(b"> " + data.rstrip(b"\n"))

    def received(self, data):
        self.lines.append(b"< " + data.rstrip(b"\n"))

    def dump(self):
        return b"\n".join(self.lines) + b"\n"
