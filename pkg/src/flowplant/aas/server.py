"""HTTP/JSON facade over the registry.

Routes (bodies are UTF-8 JSON):
  PUT    /shells/{id}                                  register (201/200/409)
  GET    /shells                                       list entries
  GET    /shells/{id}                                  shell document (200/404)
  DELETE /shells/{id}                                  deregister (204/404)
  GET    /shells/{id}/submodels/{sm}                   submodel document
  PATCH  /shells/{id}/submodels/{sm}/properties/{p}    {"value": ...}; p is dot-separated
  POST   /shells/{id}/submodels/{sm}/operations/{op}/invoke   {"args": {...}}
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import model
from .errors import AasError, BadRequest, NotFound
from .registry import Registry


class RegistryServer:
    def __init__(self, registry: Registry, host: str = "127.0.0.1", port: int = 0):
        self.registry = registry
        handler = _make_handler(registry)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "RegistryServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)


def _make_handler(registry: Registry):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # silence per-request stderr noise
            pass

        def _send(self, status: int, doc=None):
            body = b"" if doc is None else json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            if body:
                self.wfile.write(body)

        def _body(self):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                return json.loads(raw.decode("utf-8") or "{}")
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise BadRequest(f"invalid JSON body: {exc}") from exc

        def _route(self, method: str):
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            try:
                self._dispatch(method, parts)
            except AasError as exc:
                self._send(exc.http_status, {"error": type(exc).__name__, "message": str(exc)})
            except Exception as exc:  # noqa: BLE001
                self._send(500, {"error": "InternalError", "message": str(exc)})

        def _dispatch(self, method: str, parts: list[str]):
            if not parts or parts[0] != "shells":
                raise NotFound(f"unknown path {self.path!r}")
            if len(parts) == 1:
                if method != "GET":
                    raise BadRequest("only GET on /shells")
                entries = [
                    {"id": e.id, "endpoint": e.endpoint, "registeredAt": e.registeredAt}
                    for e in registry.list_entries()
                ]
                self._send(200, {"shells": entries})
                return
            shell_id = parts[1]
            if len(parts) == 2:
                if method == "PUT":
                    doc = self._body()
                    endpoint = doc.pop("endpoint", None)
                    shell = model.shell_from_json(doc)
                    if shell.id != shell_id:
                        raise BadRequest("shell id in body does not match path")
                    created = shell_id not in {e.id for e in registry.list_entries()}
                    entry = registry.register(shell, endpoint)
                    self._send(
                        201 if created else 200,
                        {"id": entry.id, "endpoint": entry.endpoint, "registeredAt": entry.registeredAt},
                    )
                elif method == "GET":
                    self._send(200, registry.get_shell_json(shell_id))
                elif method == "DELETE":
                    registry.deregister(shell_id)
                    self._send(204)
                else:
                    raise BadRequest(f"unsupported method {method} on shell")
                return
            if parts[2] != "submodels" or len(parts) < 4:
                raise NotFound(f"unknown path {self.path!r}")
            sm_id = parts[3]
            if len(parts) == 4 and method == "GET":
                shell = registry.get_shell(shell_id)
                sm = shell.submodel(sm_id)
                if sm is None:
                    raise NotFound(f"submodel {sm_id!r} not in shell {shell_id!r}")
                self._send(200, sm.to_json_dict())
                return
            if len(parts) == 6 and parts[4] == "properties" and method == "PATCH":
                path = parts[5].split(".")
                doc = self._body()
                if "value" not in doc:
                    raise BadRequest('body must carry a "value" key')
                prop = registry.set_property(shell_id, sm_id, path, doc["value"])
                self._send(200, prop.to_json_dict())
                return
            if len(parts) == 6 and parts[4] == "properties" and method == "GET":
                path = parts[5].split(".")
                value_type, value = registry.get_property(shell_id, sm_id, path)
                self._send(200, {"valueType": value_type, "value": value})
                return
            if (
                len(parts) == 7
                and parts[4] == "operations"
                and parts[6] == "invoke"
                and method == "POST"
            ):
                doc = self._body()
                result = registry.invoke(shell_id, sm_id, parts[5], doc.get("args") or {})
                self._send(200, {"result": result})
                return
            raise NotFound(f"unknown path {self.path!r}")

        def do_OPTIONS(self):
            # CORS preflight for browser clients on a different origin
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, PUT, POST, PATCH, DELETE")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            self._route("GET")

        def do_PUT(self):
            self._route("PUT")

        def do_POST(self):
            self._route("POST")

        def do_PATCH(self):
            self._route("PATCH")

        def do_DELETE(self):
            self._route("DELETE")

    return Handler
