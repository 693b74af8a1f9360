"""Standalone device agent process: announce over TCP transport, then heartbeat.

Usage: python -m flowplant.runtime.device_agent --name edge01 --kind edge \
           --ram-mb 2048 --disk-mb 32000 --broker 127.0.0.1:5555
"""

from __future__ import annotations

import argparse
import signal
import threading

from ..configmodel.model import DeviceDef
from ..transport import TcpTransport
from .devices import DeviceAgent


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="flowplant-device-agent")
    parser.add_argument("--name", required=True)
    parser.add_argument("--kind", choices=("server", "edge"), default="edge")
    parser.add_argument("--ram-mb", type=int, default=2048)
    parser.add_argument("--disk-mb", type=int, default=32000)
    parser.add_argument("--cpu-class", default="atom")
    parser.add_argument("--broker", required=True, help="host:port of the TCP broker")
    parser.add_argument("--heartbeat-ms", type=int, default=2000)
    args = parser.parse_args(argv)

    definition = DeviceDef(
        name=args.name, kind=args.kind, ram_mb=args.ram_mb, disk_mb=args.disk_mb, cpu_class=args.cpu_class
    )
    transport = TcpTransport(args.broker)
    agent = DeviceAgent(definition, transport)
    agent.start(interval_ms=args.heartbeat_ms)

    done = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: done.set())
    signal.signal(signal.SIGINT, lambda *_: done.set())
    done.wait()
    agent.stop()
    transport.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
